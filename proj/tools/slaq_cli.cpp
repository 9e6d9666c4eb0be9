// slaq: spectral graph descriptors (NetLSD heat traces, von Neumann graph
// entropy) by stochastic Lanczos quadrature and baseline approximations.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slaq/slaq.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string kind = "netlsd";
  std::string method = "slaq";
  std::size_t n_v = 100;
  std::size_t steps = 10;
  std::uint64_t seed = 0;
  std::string distribution = "rademacher";
  double t_min = 0.01;
  double t_max = 100.0;
  std::size_t grid_size = 256;
  std::size_t k = 300;
  std::string variant = "corrected";
  std::size_t threads = 0;

  bool weighted = false;
  std::string separator;
  std::string comment = "#";
};

void log_line(const std::string& msg) { std::cerr << "[slaq] " << msg << '\n'; }

void add_descriptor_options(CLI::App& app, RunConfig& c) {
  app.add_option("--kind", c.kind, "Descriptor kind")
      ->check(CLI::IsMember({"netlsd", "vnge"}))
      ->capture_default_str();
  app.add_option("--method", c.method, "Approximation method")
      ->check(CLI::IsMember({"exact", "slaq", "taylor", "linear", "finger-bar", "finger-hat"}))
      ->capture_default_str();
  app.add_option("--nv", c.n_v, "SLaQ probe vectors")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--steps", c.steps, "SLaQ Lanczos steps")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", c.seed, "Master random seed")->capture_default_str();
  app.add_option("--distribution", c.distribution, "Probe distribution")
      ->check(CLI::IsMember({"rademacher", "gaussian"}))
      ->capture_default_str();
  app.add_option("--t-min", c.t_min, "Smallest heat time")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--t-max", c.t_max, "Largest heat time")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--grid-size", c.grid_size, "Number of log-spaced heat times")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  app.add_option("--k", c.k, "Extremal eigenvalues per end for the linear method")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--variant", c.variant, "Taylor VNGE variant")
      ->check(CLI::IsMember({"corrected", "as-printed"}))
      ->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads, 0 = all cores (results do not depend on it)")
      ->capture_default_str();
  app.add_flag("--weighted", c.weighted, "Edge lists carry a third weight column");
  app.add_option("--separator", c.separator, "Field separator (default: whitespace)");
  app.add_option("--comment", c.comment, "Comment line prefix")->capture_default_str();
}

slaq::DescriptorRequest make_request(const RunConfig& c) {
  slaq::DescriptorRequest r;
  r.kind = *slaq::parse_descriptor_kind(c.kind);
  r.method = *slaq::parse_method(c.method);
  if (!(c.t_max > c.t_min)) throw CLI::ValidationError("--t-max", "must exceed --t-min");
  r.grid = slaq::TimeGrid::logspace(c.t_min, c.t_max, c.grid_size);
  r.slq.n_v = c.n_v;
  r.slq.steps = c.steps;
  r.slq.seed = c.seed;
  r.slq.threads = c.threads;
  r.slq.distribution =
      c.distribution == "gaussian" ? slaq::ProbeDistribution::Gaussian : slaq::ProbeDistribution::Rademacher;
  r.k = c.k;
  r.taylor = c.variant == "as-printed" ? slaq::TaylorVariant::AsPrinted : slaq::TaylorVariant::Corrected;
  return r;
}

/// Resolved configuration, minus --threads (which never changes results).
nlohmann::json config_json(const std::string& subcommand, const RunConfig& c) {
  return {{"subcommand", subcommand}, {"kind", c.kind},       {"method", c.method},
          {"n_v", c.n_v},             {"steps", c.steps},     {"seed", c.seed},
          {"distribution", c.distribution},                   {"t_min", c.t_min},
          {"t_max", c.t_max},         {"grid_size", c.grid_size}, {"k", c.k},
          {"variant", c.variant},     {"weighted", c.weighted}};
}

slaq::Graph read_graph(const std::string& path, const RunConfig& c) {
  slaq::ParseOptions opts;
  opts.weighted = c.weighted;
  opts.comment_prefix = c.comment;
  if (!c.separator.empty()) {
    if (c.separator.size() != 1) throw CLI::ValidationError("--separator", "must be a single character");
    opts.separator = c.separator[0];
  }
  try {
    if (path == "-") return slaq::parse_edge_list(std::cin, opts);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return slaq::parse_edge_list(in, opts);
  } catch (const slaq::Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Writes to `path`, or stdout for "-".
void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
}

/// CSV outputs keep their fixed header; the resolved config goes next to the
/// file as <output>.config.json, or to the log for stdout.
void echo_config(const std::string& output, const nlohmann::json& config) {
  if (output == "-") {
    log_line("config " + config.dump());
  } else {
    write_output(output + ".config.json", config.dump(2) + "\n");
  }
}

slaq::Descriptor describe(const slaq::Graph& g, const slaq::DescriptorRequest& req) {
  return slaq::compute_descriptor(g, req);
}

int run_descriptor(const RunConfig& c, const std::string& input, const std::string& output) {
  const auto g = read_graph(input, c);
  log_line("graph n=" + std::to_string(g.n()) + " m=" + std::to_string(g.m()));
  const auto d = describe(g, make_request(c));
  auto j = slaq::to_json(d, slaq::graph_hash(g));
  auto cfg = config_json("descriptor", c);
  cfg["input"] = input;
  j["config"] = std::move(cfg);
  write_output(output, j.dump(2) + "\n");
  return 0;
}

int run_compare(const RunConfig& c, const std::string& a, const std::string& b) {
  const auto req = make_request(c);
  const auto da = describe(read_graph(a, c), req);
  const auto db = describe(read_graph(b, c), req);
  std::cout << slaq::format_double(slaq::descriptor_distance(da, db)) << '\n';
  return 0;
}

std::vector<slaq::Method> parse_methods(const std::string& list) {
  std::vector<slaq::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto m = slaq::parse_method(item);
    if (!m) throw CLI::ValidationError("--methods", "unknown method '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw CLI::ValidationError("--methods", "empty list");
  return out;
}

int run_bench_error(const RunConfig& c, const std::vector<std::string>& inputs, const std::string& methods,
                    const std::string& output) {
  const auto req = make_request(c);
  std::string method_list = methods;
  if (method_list.empty()) {
    method_list = req.kind == slaq::DescriptorKind::NetLsd ? "slaq,taylor,linear"
                                                           : "slaq,taylor,linear,finger-bar,finger-hat";
  }
  const auto ms = parse_methods(method_list);
  std::vector<slaq::LabeledGraph> graphs;
  for (const auto& p : inputs) graphs.push_back({p == "-" ? "stdin" : fs::path(p).stem().string(), read_graph(p, c)});
  const auto rows = slaq::error_benchmark(graphs, req.kind, ms, req);
  for (const auto& r : rows) {
    if (r.skipped) log_line("skipped " + r.graph_id + " " + std::string(slaq::to_string(r.method)) + ": " + r.reason);
  }
  std::ostringstream out;
  slaq::write_error_csv(out, rows);
  write_output(output, out.str());
  auto cfg = config_json("bench-error", c);
  cfg["inputs"] = inputs;
  cfg["methods"] = method_list;
  echo_config(output, cfg);
  return 0;
}

/// Manifest lines: "<edge-list path> <label>"; relative paths resolve
/// against the manifest's directory. Labels are arbitrary tokens.
slaq::LabeledCorpus read_manifest(const std::string& path, const RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  slaq::LabeledCorpus corpus;
  std::map<std::string, int> label_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string file, label, extra;
    if (!(fields >> file) || file.starts_with("#")) continue;
    if (!(fields >> label) || (fields >> extra)) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected '<path> <label>'");
    }
    fs::path p(file);
    if (p.is_relative()) p = fs::path(path).parent_path() / p;
    auto [it, inserted] = label_ids.emplace(label, static_cast<int>(label_ids.size()));
    corpus.graphs.push_back({p.stem().string(), read_graph(p.string(), c)});
    corpus.labels.push_back(it->second);
  }
  return corpus;
}

int run_classify(const RunConfig& c, const std::string& manifest, const std::string& tu_dir,
                 const std::string& tu_name, std::string dataset, double train_frac, std::size_t repeats,
                 const std::string& output) {
  slaq::LabeledCorpus corpus;
  if (!manifest.empty()) {
    corpus = read_manifest(manifest, c);
    if (dataset.empty()) dataset = fs::path(manifest).stem().string();
  } else {
    try {
      corpus = slaq::load_tu_dataset(tu_dir, tu_name);
    } catch (const slaq::Error& e) {
      throw DataError(tu_dir + "/" + tu_name + ": " + e.what());
    }
    if (dataset.empty()) dataset = tu_name;
  }
  log_line("classifying " + std::to_string(corpus.graphs.size()) + " graphs");
  const auto req = make_request(c);
  std::vector<std::vector<double>> features;
  for (const auto& lg : corpus.graphs) features.push_back(slaq::feature_vector(describe(lg.graph, req)));
  const auto res = slaq::knn_accuracy(features, corpus.labels, train_frac, repeats, c.seed, c.threads);
  std::ostringstream out;
  slaq::write_knn_csv(out, dataset, req.kind, req.method, res);
  write_output(output, out.str());
  auto cfg = config_json("classify", c);
  cfg["dataset"] = dataset;
  cfg["train_frac"] = train_frac;
  cfg["repeats"] = repeats;
  echo_config(output, cfg);
  return 0;
}

int run_snapshots(const RunConfig& c, const std::string& input, std::int64_t granularity, const std::string& output) {
  slaq::SnapshotSeries series;
  try {
    if (input == "-") {
      series = slaq::load_snapshots(std::cin, granularity, c.comment);
    } else {
      std::ifstream in(input);
      if (!in) throw DataError("cannot open " + input);
      series = slaq::load_snapshots(in, granularity, c.comment);
    }
  } catch (const slaq::Error& e) {
    throw DataError(input + ": " + e.what());
  }
  if (series.ignored_deletions > 0) {
    log_line("warning: ignored " + std::to_string(series.ignored_deletions) + " deletions of absent edges");
  }
  const auto rows = slaq::snapshot_distance_series(series, make_request(c));
  std::ostringstream out;
  slaq::write_snapshot_csv(out, rows);
  write_output(output, out.str());
  auto cfg = config_json("snapshots", c);
  cfg["input"] = input;
  cfg["granularity"] = granularity;
  echo_config(output, cfg);
  return 0;
}

int run_generate_er(std::size_t n, double avg_degree, std::uint64_t seed, const std::string& output) {
  const auto g = slaq::erdos_renyi(n, avg_degree, seed);
  std::ostringstream out;
  out << "# erdos-renyi n=" << n << " avg_degree=" << slaq::format_double(avg_degree) << " seed=" << seed << '\n';
  slaq::write_edge_list(out, g);
  write_output(output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph descriptors by stochastic Lanczos quadrature", "slaq"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto* descriptor = app.add_subcommand("descriptor", "Compute one descriptor and write it as JSON");
  std::string input, output = "-";
  descriptor->add_option("--input", input, "Edge-list file, '-' for stdin")->required();
  descriptor->add_option("--output", output, "Output path, '-' for stdout")->capture_default_str();
  add_descriptor_options(*descriptor, cfg);

  auto* compare = app.add_subcommand("compare", "Print the distance between two graphs' descriptors");
  std::string path_a, path_b;
  compare->add_option("--a", path_a, "First edge-list file")->required();
  compare->add_option("--b", path_b, "Second edge-list file")->required();
  add_descriptor_options(*compare, cfg);

  auto* bench = app.add_subcommand("bench-error", "Relative error of approximations against exact descriptors");
  std::vector<std::string> inputs;
  std::string methods;
  std::string bench_output = "-";
  bench->add_option("--input,inputs", inputs, "Edge-list files")->required();
  bench->add_option("--methods", methods, "Comma-separated methods (default depends on --kind)");
  bench->add_option("--output", bench_output, "CSV output path, '-' for stdout")->capture_default_str();
  add_descriptor_options(*bench, cfg);

  auto* classify = app.add_subcommand("classify", "1-NN classification accuracy on descriptor features");
  std::string manifest, tu_dir, tu_name, dataset;
  double train_frac = 0.8;
  std::size_t repeats = 1000;
  std::string classify_output = "-";
  auto* manifest_opt = classify->add_option("--manifest", manifest, "File of '<edge-list path> <label>' lines");
  auto* tu_dir_opt = classify->add_option("--tu-dir", tu_dir, "Directory of a TU-format dataset");
  classify->add_option("--tu-name", tu_name, "TU dataset name (file prefix), e.g. DD")->needs(tu_dir_opt);
  tu_dir_opt->excludes(manifest_opt);
  classify->add_option("--dataset", dataset, "Dataset name for the CSV row");
  classify->add_option("--train-frac", train_frac, "Training fraction per split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  classify->add_option("--repeats", repeats, "Random splits")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_option("--output", classify_output, "CSV output path, '-' for stdout")->capture_default_str();
  add_descriptor_options(*classify, cfg);

  auto* snapshots = app.add_subcommand("snapshots", "Descriptor distance of each snapshot to the first");
  std::string events, snapshots_output = "-";
  std::int64_t granularity = 1;
  snapshots->add_option("--input", events, "Event file of 'timestamp add|del src dst' lines")->required();
  snapshots->add_option("--granularity", granularity, "Bucket width in timestamp units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  snapshots->add_option("--output", snapshots_output, "CSV output path, '-' for stdout")->capture_default_str();
  add_descriptor_options(*snapshots, cfg);

  auto* generate = app.add_subcommand("generate", "Write a synthetic graph as an edge list");
  generate->require_subcommand(1);
  auto* er = generate->add_subcommand("er", "Erdos-Renyi G(n, p) with p = avg-degree / (n - 1)");
  std::size_t er_n = 1000;
  double er_degree = 10.0;
  std::uint64_t er_seed = 0;
  std::string er_output = "-";
  er->add_option("--n", er_n, "Vertex count")->check(CLI::PositiveNumber)->capture_default_str();
  er->add_option("--avg-degree", er_degree, "Expected average degree")->capture_default_str();
  er->add_option("--seed", er_seed, "Random seed")->capture_default_str();
  er->add_option("--output", er_output, "Output path, '-' for stdout")->capture_default_str();

  // Top-level help expands every subcommand so all flags and defaults show.
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and exit");
  app.footer([er] { return "\ngenerate " + er->help("", CLI::AppFormatMode::All); });

  try {
    app.parse(argc, argv);
    if (classify->parsed() && manifest.empty() && tu_dir.empty()) {
      throw CLI::RequiredError("--manifest or --tu-dir");
    }
    if (classify->parsed() && !tu_dir.empty() && tu_name.empty()) throw CLI::RequiredError("--tu-name");
    if (!generate->parsed()) make_request(cfg);
    if (descriptor->parsed()) return run_descriptor(cfg, input, output);
    if (compare->parsed()) return run_compare(cfg, path_a, path_b);
    if (bench->parsed()) return run_bench_error(cfg, inputs, methods, bench_output);
    if (classify->parsed()) {
      return run_classify(cfg, manifest, tu_dir, tu_name, dataset, train_frac, repeats, classify_output);
    }
    if (snapshots->parsed()) return run_snapshots(cfg, events, granularity, snapshots_output);
    if (er->parsed()) return run_generate_er(er_n, er_degree, er_seed, er_output);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const DataError& e) {
    std::cerr << "slaq: " << e.what() << '\n';
    return kDataError;
  } catch (const slaq::Error& e) {
    std::cerr << "slaq: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
