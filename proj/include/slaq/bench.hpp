#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "slaq/descriptors.hpp"
#include "slaq/error.hpp"
#include "slaq/graph.hpp"
#include "slaq/numeric.hpp"

namespace slaq {

struct LabeledGraph {
  std::string id;
  Graph graph;
};

struct ErrorRow {
  std::string graph_id;
  Method method = Method::Exact;
  DescriptorKind kind = DescriptorKind::NetLsd;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  /// Descriptor computation only, parsing excluded.
  double seconds = 0.0;
  bool skipped = false;
  std::string reason;
};

/// Relative error of every (graph, method) pair against the exact
/// descriptor. Graphs the exact path cannot handle produce skipped rows.
inline std::vector<ErrorRow> error_benchmark(std::span<const LabeledGraph> graphs, DescriptorKind kind,
                                             std::span<const Method> methods, const DescriptorRequest& base = {}) {
  std::vector<ErrorRow> rows;
  for (const auto& lg : graphs) {
    DescriptorRequest exact_req = base;
    exact_req.kind = kind;
    exact_req.method = Method::Exact;
    std::optional<Descriptor> reference;
    std::string failure;
    try {
      reference = compute_descriptor(lg.graph, exact_req);
    } catch (const Error& e) {
      failure = e.what();
    }
    for (auto method : methods) {
      ErrorRow row;
      row.graph_id = lg.id;
      row.method = method;
      row.kind = kind;
      if (!reference) {
        row.skipped = true;
        row.reason = failure;
        rows.push_back(std::move(row));
        continue;
      }
      DescriptorRequest req = base;
      req.kind = kind;
      req.method = method;
      try {
        const auto start = std::chrono::steady_clock::now();
        const auto d = compute_descriptor(lg.graph, req);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.rel_error = relative_error(d, *reference);
      } catch (const Error& e) {
        row.skipped = true;
        row.reason = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct ClassificationResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::size_t repeats = 0;
  double train_fraction = 0.8;
};

/// 1-nearest-neighbour accuracy over repeated uniform random train/test
/// splits. Distance is Euclidean; ties go to the training item with the
/// lowest input index. Repeat r draws its split from stream (seed, r).
inline ClassificationResult knn_accuracy(std::span<const std::vector<double>> features, std::span<const int> labels,
                                         double train_frac = 0.8, std::size_t repeats = 1000,
                                         std::uint64_t seed = 0, std::size_t threads = 0) {
  const std::size_t n = features.size();
  if (labels.size() != n) throw InvalidArgument("knn: features and labels differ in length");
  if (repeats < 1) throw InvalidArgument("knn: repeats must be at least 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw InvalidArgument("knn: train fraction must lie in (0, 1)");
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) throw InvalidArgument("knn: need at least two classes");
  for (auto [label, c] : counts) {
    if (c < 2) throw InvalidArgument("knn: class " + std::to_string(label) + " has fewer than two members");
  }
  const std::size_t dim = features.front().size();
  for (const auto& f : features) {
    if (f.size() != dim) throw InvalidArgument("knn: features have different shapes");
  }
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n))), 1, n - 1);

  std::vector<double> accuracy(repeats);
  parallel_for(repeats, threads, [&](std::size_t r) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(stream_seed(seed, r));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(train.begin(), train.end());
    std::size_t correct = 0;
    for (std::size_t p = n_train; p < n; ++p) {
      const auto& x = features[order[p]];
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_idx = train.front();
      for (auto j : train) {
        double d = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double diff = x[c] - features[j][c];
          d += diff * diff;
        }
        if (d < best) {
          best = d;
          best_idx = j;
        }
      }
      correct += labels[best_idx] == labels[order[p]];
    }
    accuracy[r] = static_cast<double>(correct) / static_cast<double>(n - n_train);
  });

  ClassificationResult res;
  res.repeats = repeats;
  res.train_fraction = train_frac;
  CompensatedSum sum;
  for (double a : accuracy) sum.add(a);
  res.mean_accuracy = sum.value() / static_cast<double>(repeats);
  if (repeats > 1) {
    CompensatedSum ss;
    for (double a : accuracy) ss.add((a - res.mean_accuracy) * (a - res.mean_accuracy));
    res.std_accuracy = std::sqrt(ss.value() / static_cast<double>(repeats - 1));
  }
  return res;
}

struct SnapshotRow {
  std::size_t index = 0;
  /// Distance of this snapshot's descriptor to snapshot 0's.
  double distance = 0.0;
  /// distance / max over the series (0 when the series is constant).
  double normalized = 0.0;
  std::size_t added = 0;
  std::size_t removed = 0;
};

inline std::vector<SnapshotRow> snapshot_distance_series(const SnapshotSeries& series, const DescriptorRequest& req) {
  if (series.size() == 0) throw InvalidArgument("snapshot series is empty");
  const auto first = compute_descriptor(series.graphs.front(), req);
  std::vector<SnapshotRow> rows(series.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    rows[i].index = i;
    rows[i].added = series.added[i];
    rows[i].removed = series.removed[i];
    if (i > 0) rows[i].distance = descriptor_distance(first, compute_descriptor(series.graphs[i], req));
    peak = std::max(peak, rows[i].distance);
  }
  for (auto& r : rows) r.normalized = peak > 0.0 ? r.distance / peak : 0.0;
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output

/// Shortest representation that round-trips; "nan" for NaN.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline void write_error_csv(std::ostream& out, std::span<const ErrorRow> rows) {
  out << "graph,method,kind,rel_error,seconds\n";
  for (const auto& r : rows) {
    out << r.graph_id << ',' << to_string(r.method) << ',' << to_string(r.kind) << ','
        << (r.skipped ? std::string("nan") : format_double(r.rel_error)) << ',' << format_double(r.seconds) << '\n';
  }
}

inline void write_knn_csv(std::ostream& out, const std::string& dataset, DescriptorKind kind, Method method,
                          const ClassificationResult& r) {
  out << "dataset,kind,method,mean_acc,std,repeats\n";
  out << dataset << ',' << to_string(kind) << ',' << to_string(method) << ',' << format_double(r.mean_accuracy)
      << ',' << format_double(r.std_accuracy) << ',' << r.repeats << '\n';
}

inline void write_snapshot_csv(std::ostream& out, std::span<const SnapshotRow> rows) {
  out << "index,distance,added,removed\n";
  for (const auto& r : rows) {
    out << r.index << ',' << format_double(r.distance) << ',' << r.added << ',' << r.removed << '\n';
  }
}

// ---------------------------------------------------------------------------
// Graph-classification corpora

struct LabeledCorpus {
  std::vector<LabeledGraph> graphs;
  std::vector<int> labels;
};

/// TU Dortmund benchmark layout: <dir>/<name>_A.txt ("i, j" 1-based global
/// node ids), <name>_graph_indicator.txt (graph of node i) and
/// <name>_graph_labels.txt (label of graph g).
inline LabeledCorpus load_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
  auto open = [&](const std::string& suffix) {
    std::ifstream in(dir / (name + suffix));
    if (!in) throw InvalidArgument("cannot open " + (dir / (name + suffix)).string());
    return in;
  };
  auto read_ints = [](std::ifstream in) {
    std::vector<std::int64_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = detail::trim(line);
      if (body.empty()) continue;
      auto v = detail::parse_number<std::int64_t>(body);
      if (!v) throw ParseError(line_no, "expected an integer");
      out.push_back(*v);
    }
    return out;
  };
  const auto indicator = read_ints(open("_graph_indicator.txt"));
  const auto graph_labels = read_ints(open("_graph_labels.txt"));
  const std::size_t num_graphs = graph_labels.size();

  std::vector<std::size_t> local(indicator.size()), sizes(num_graphs, 0);
  for (std::size_t v = 0; v < indicator.size(); ++v) {
    const auto g = indicator[v];
    if (g < 1 || static_cast<std::size_t>(g) > num_graphs) throw ParseError(v + 1, "graph id out of range");
    local[v] = sizes[g - 1]++;
  }
  std::vector<std::vector<Edge>> edges(num_graphs);
  {
    auto in = open("_A.txt");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = detail::trim(line);
      if (body.empty()) continue;
      const auto f = detail::split_fields(body, ',');
      if (f.size() != 2) throw ParseError(line_no, "expected 'i, j'");
      auto a = detail::parse_number<std::size_t>(f[0]);
      auto b = detail::parse_number<std::size_t>(f[1]);
      if (!a || !b || *a < 1 || *b < 1 || *a > indicator.size() || *b > indicator.size()) {
        throw ParseError(line_no, "node id out of range");
      }
      const auto ga = indicator[*a - 1];
      if (ga != indicator[*b - 1]) throw ParseError(line_no, "edge crosses graphs");
      edges[ga - 1].push_back({static_cast<vertex_t>(local[*a - 1]), static_cast<vertex_t>(local[*b - 1]), 1.0});
    }
  }
  LabeledCorpus corpus;
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (sizes[g] == 0) throw InvalidArgument("graph " + std::to_string(g + 1) + " has no nodes");
    corpus.graphs.push_back({name + "_" + std::to_string(g + 1), Graph::from_edges(sizes[g], edges[g])});
    corpus.labels.push_back(static_cast<int>(graph_labels[g]));
  }
  return corpus;
}

}  // namespace slaq
