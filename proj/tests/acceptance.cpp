// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli_runner.hpp"
#include "fixtures.hpp"

using namespace slaq;

namespace {

// Pinned tolerances.
constexpr double kNetlsdMaxError = 1e-2;
constexpr double kNetlsdMedianError = 2e-3;
constexpr double kVngeMaxError = 1e-2;
constexpr double kWinFraction = 0.9;
constexpr double kGaussRelTol = 1e-8;
constexpr double kTraceRelTol = 1e-8;
constexpr double kSpectrumAbsTol = 1e-6;
constexpr double kSmallTimeRelTol = 1e-9;
constexpr double kComponentTol = 1e-6;
constexpr double kDisjointEdgesTol = 1e-10;
constexpr double kScalingMaxRatio = 15.0;
constexpr double kSyntheticMinAccuracy = 0.9;
constexpr double kDdTarget = 66.40;
constexpr double kDdPoints = 3.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " | " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double relative(double approx, double exact) { return std::abs(approx - exact) / std::abs(exact); }

// Shared corpus for criteria 1-3: ten ER graphs, n = 1000, average degree 10.
struct CorpusErrors {
  std::vector<double> netlsd_slaq, netlsd_taylor, netlsd_linear;
  std::vector<double> vnge_slaq, vnge_finger_bar, vnge_finger_hat;
};

CorpusErrors corpus_errors() {
  CorpusErrors e;
  const auto grid = TimeGrid::standard();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = erdos_renyi(1000, 10.0, seed);
    const auto h_exact = netlsd_exact(g, grid);
    e.netlsd_slaq.push_back(relative_error(netlsd_slaq(g, grid), h_exact));
    e.netlsd_taylor.push_back(relative_error(netlsd_taylor(g, grid), h_exact));
    e.netlsd_linear.push_back(relative_error(netlsd_linear(g, grid, 50), h_exact));
    const auto v_exact = vnge_exact(g);
    e.vnge_slaq.push_back(relative_error(vnge_slaq(g), v_exact));
    e.vnge_finger_bar.push_back(relative_error(vnge_finger(g, Method::FingerBar), v_exact));
    e.vnge_finger_hat.push_back(relative_error(vnge_finger(g, Method::FingerHat), v_exact));
  }
  return e;
}

Outcome criterion1(const CorpusErrors& e) {
  const double worst = *std::max_element(e.netlsd_slaq.begin(), e.netlsd_slaq.end());
  const double med = median(e.netlsd_slaq);
  return {worst <= kNetlsdMaxError && med <= kNetlsdMedianError,
          "max " + fmt(worst) + " <= " + fmt(kNetlsdMaxError) + ", median " + fmt(med) + " <= " +
              fmt(kNetlsdMedianError)};
}

Outcome criterion2(const CorpusErrors& e) {
  const double worst = *std::max_element(e.vnge_slaq.begin(), e.vnge_slaq.end());
  return {worst <= kVngeMaxError, "max " + fmt(worst) + " <= " + fmt(kVngeMaxError)};
}

Outcome criterion3(const CorpusErrors& e) {
  auto wins = [](const std::vector<double>& ours, std::initializer_list<const std::vector<double>*> others) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < ours.size(); ++i) {
      bool beats = true;
      for (const auto* o : others) beats = beats && ours[i] < (*o)[i];
      w += beats;
    }
    return static_cast<double>(w) / static_cast<double>(ours.size());
  };
  const double netlsd = wins(e.netlsd_slaq, {&e.netlsd_taylor, &e.netlsd_linear});
  const double vnge = wins(e.vnge_slaq, {&e.vnge_finger_bar, &e.vnge_finger_hat});
  return {netlsd >= kWinFraction && vnge >= kWinFraction,
          "netlsd wins " + fmt(netlsd) + ", vnge wins " + fmt(vnge) + ", need >= " + fmt(kWinFraction) +
              "; median errors netlsd slaq/taylor/linear " + fmt(median(e.netlsd_slaq)) + "/" +
              fmt(median(e.netlsd_taylor)) + "/" + fmt(median(e.netlsd_linear)) + ", vnge slaq/bar/hat " +
              fmt(median(e.vnge_slaq)) + "/" + fmt(median(e.vnge_finger_bar)) + "/" + fmt(median(e.vnge_finger_hat))};
}

// q^T p(M) q by Horner's rule on vectors, independent of any Lanczos code.
double direct_quadratic_form(const LinearOperator& op, const std::vector<double>& q, const std::vector<double>& c) {
  std::vector<double> acc(q.size(), 0.0);
  for (std::size_t p = c.size(); p-- > 0;) {
    acc = op(acc);
    for (std::size_t i = 0; i < q.size(); ++i) acc[i] += c[p] * q[i];
  }
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * acc[i];
  return s;
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  std::size_t checks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = fixtures::random_graph(rng, 8, 100, trial % 2 == 0);
    if (g.m() == 0) g = fixtures::path(g.n());
    const auto kind = static_cast<OperatorKind>(trial % 3);
    const auto op = make_operator(g, kind);
    for (std::size_t s = 2; s <= 6; ++s) {
      SlqConfig cfg;
      cfg.n_v = 3;
      cfg.steps = s;
      cfg.seed = static_cast<std::uint64_t>(trial);
      cfg.distribution = s % 2 ? ProbeDistribution::Gaussian : ProbeDistribution::Rademacher;
      // Every monomial up to 2s-1, then one dense random polynomial of that degree.
      std::vector<std::vector<double>> polys;
      for (std::size_t p = 0; p <= 2 * s - 1; ++p) {
        std::vector<double> c(p + 1, 0.0);
        c[p] = 1.0;
        polys.push_back(c);
      }
      std::vector<double> c(2 * s);
      for (double& x : c) x = coef(rng);
      polys.push_back(c);
      for (const auto& poly : polys) {
        auto f = [&poly](double x) {
          double y = 0.0;
          for (std::size_t p = poly.size(); p-- > 0;) y = y * x + poly[p];
          return y;
        };
        const auto est = slq_trace(op, f, cfg);
        for (std::size_t i = 0; i < cfg.n_v; ++i) {
          const auto q = probe_vector(g.n(), cfg.distribution, cfg.seed, i);
          const double direct = direct_quadratic_form(op, q, poly);
          // Signed coefficients may cancel; scale by the same form of |p|.
          std::vector<double> abs_poly(poly.size());
          std::transform(poly.begin(), poly.end(), abs_poly.begin(), [](double x) { return std::abs(x); });
          const double scale = std::max(std::abs(direct), direct_quadratic_form(op, q, abs_poly));
          worst = std::max(worst, std::abs(est.per_vector[i] - direct) / scale);
          ++checks;
        }
      }
    }
  }
  return {worst <= kGaussRelTol, std::to_string(checks) + " probe checks, worst rel " + fmt(worst) + " <= " +
                                     fmt(kGaussRelTol)};
}

std::vector<Graph> fixture_graphs() {
  std::vector<Graph> gs{fixtures::complete(2), fixtures::complete(3), fixtures::complete(6), fixtures::path(3),
                        fixtures::path(10),     fixtures::star(3),     fixtures::star(7),     fixtures::disjoint_edges(5),
                        Graph::empty(4)};
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) gs.push_back(fixtures::random_graph(rng, 1, 120, i % 2 == 0));
  for (int i = 0; i < 10; ++i) gs.push_back(fixtures::random_connected_weighted(rng, 20 + 18 * i));
  return gs;
}

Outcome criterion5() {
  double worst_trace = 0.0;
  std::size_t trace_checks = 0;
  for (const auto& g : fixture_graphs()) {
    for (auto kind : {OperatorKind::Laplacian, OperatorKind::NormalizedLaplacian, OperatorKind::Density}) {
      if (kind == OperatorKind::Density && g.m() == 0) continue;
      const auto ev = dense_spectrum(g, kind);
      double s1 = 0.0, s2 = 0.0;
      for (double l : ev) {
        s1 += l;
        s2 += l * l;
      }
      const double t1 = trace(g, kind), t2 = trace_squared(g, kind);
      worst_trace = std::max({worst_trace, s1 == 0.0 ? std::abs(t1) : relative(t1, s1),
                              s2 == 0.0 ? std::abs(t2) : relative(t2, s2)});
      ++trace_checks;
    }
  }
  // Connected weighted graphs with random weights have simple spectra, so a
  // random start vector reaches s' = n.
  std::mt19937_64 rng(55);
  std::normal_distribution<double> normal;
  double worst_spectrum = 0.0;
  bool full_length = true;
  std::size_t spectra = 0;
  for (std::size_t n : {5u, 20u, 50u, 100u, 150u, 200u}) {
    const auto g = fixtures::random_connected_weighted(rng, n);
    for (auto kind : {OperatorKind::Laplacian, OperatorKind::NormalizedLaplacian, OperatorKind::Density}) {
      const auto op = make_operator(g, kind);
      std::vector<double> q0(n);
      for (double& x : q0) x = normal(rng);
      q0 = fixtures::unit(q0);
      const auto t = lanczos_tridiagonalize(op, q0, n, true);
      full_length = full_length && t.size() == n;
      const auto ritz = quadrature_rule(t).nodes;
      const auto exact = dense_spectrum(g, kind);
      if (ritz.size() != exact.size()) continue;
      for (std::size_t i = 0; i < n; ++i) worst_spectrum = std::max(worst_spectrum, std::abs(ritz[i] - exact[i]));
      ++spectra;
    }
  }
  return {worst_trace <= kTraceRelTol && worst_spectrum <= kSpectrumAbsTol && full_length,
          std::to_string(trace_checks) + " trace checks worst rel " + fmt(worst_trace) + " <= " + fmt(kTraceRelTol) +
              "; " + std::to_string(spectra) + " full Lanczos spectra worst abs " + fmt(worst_spectrum) +
              " <= " + fmt(kSpectrumAbsTol) + (full_length ? "" : "; some run stopped before s' = n")};
}

std::size_t component_count(const Graph& g) {
  std::vector<std::size_t> parent(g.n());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& e : g.edges()) parent[find(e.u)] = find(e.v);
  std::size_t c = 0;
  for (std::size_t i = 0; i < g.n(); ++i) c += find(i) == i;
  return c;
}

Outcome criterion6() {
  const auto grid = TimeGrid::standard();
  const auto limits = TimeGrid::from_values({1e-12, 1e6});
  std::size_t graphs = 0, bad_small = 0, bad_mono = 0, bad_large = 0, bad_range = 0;
  for (const auto& g : fixture_graphs()) {
    if (g.n() == 0) continue;
    ++graphs;
    const double n = static_cast<double>(g.n());
    const auto h = netlsd_exact(g, grid).values;
    for (std::size_t i = 1; i < h.size(); ++i) bad_mono += h[i] > h[i - 1];
    const auto lim = netlsd_exact(g, limits).values;
    bad_small += std::abs(lim[0] - n) > kSmallTimeRelTol * n;
    bad_large += std::abs(lim[1] - static_cast<double>(component_count(g))) > kComponentTol;
    if (g.m() > 0) {
      const double v = vnge_exact(g).value;
      bad_range += !(v >= 0.0 && v <= std::log(n));
    }
  }
  double worst_disjoint = 0.0;
  for (std::size_t c = 1; c <= 200; c += (c < 10 ? 1 : 37)) {
    worst_disjoint = std::max(worst_disjoint,
                              std::abs(vnge_exact(fixtures::disjoint_edges(c)).value - std::log(static_cast<double>(c))));
  }
  const bool ok = bad_small + bad_mono + bad_large + bad_range == 0 && worst_disjoint <= kDisjointEdgesTol;
  return {ok, std::to_string(graphs) + " graphs; violations t->0 " + std::to_string(bad_small) + ", monotone " +
                  std::to_string(bad_mono) + ", t=1e6 components " + std::to_string(bad_large) + ", entropy range " +
                  std::to_string(bad_range) + "; disjoint edges worst |H - ln c| " + fmt(worst_disjoint) +
                  " <= " + fmt(kDisjointEdgesTol)};
}

std::string edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

// The seconds column of bench-error is wall time and is dropped before comparison.
std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome criterion7() {
  const auto g1 = cli::write_file("c7_a.tsv", edge_list(erdos_renyi(2000, 10.0, 71)));
  const auto g2 = cli::write_file("c7_b.tsv", edge_list(erdos_renyi(2000, 12.0, 72)));
  std::string manifest;
  for (int i = 0; i < 10; ++i) {
    const auto p = cli::write_file("c7_m" + std::to_string(i) + ".tsv",
                                   edge_list(erdos_renyi(150, i % 2 ? 4.0 : 8.0, 700 + static_cast<std::uint64_t>(i))));
    manifest += p.filename().string() + (i % 2 ? " sparse\n" : " dense\n");
  }
  const auto mf = cli::write_file("c7_manifest.txt", manifest);
  std::string events;
  for (int t = 0; t < 60; ++t) {
    events += std::to_string(t) + " add " + std::to_string(t % 37) + " " + std::to_string((7 * t + 3) % 41) + "\n";
    if (t % 9 == 8) events += std::to_string(t) + " del " + std::to_string(t % 37) + " " + std::to_string((7 * t + 3) % 41) + "\n";
  }
  const auto ev = cli::write_file("c7_events.txt", events);

  struct Case {
    std::string name;
    std::vector<std::string> argv;
    bool timed = false;
  };
  const std::vector<Case> cases{
      {"descriptor-netlsd", {"descriptor", "--input", g1.string(), "--seed", "3"}},
      {"descriptor-vnge", {"descriptor", "--input", g1.string(), "--kind", "vnge", "--distribution", "gaussian"}},
      {"compare", {"compare", "--a", g1.string(), "--b", g2.string()}},
      {"classify", {"classify", "--manifest", mf.string(), "--repeats", "200"}},
      {"snapshots", {"snapshots", "--input", ev.string(), "--granularity", "10"}},
      {"generate", {"generate", "er", "--n", "3000", "--seed", "8"}},
      {"bench-error", {"bench-error", g2.string(), "--methods", "slaq,taylor,finger-hat", "--kind", "vnge"}, true},
  };
  std::size_t runs = 0;
  std::vector<std::string> mismatched;
  for (const auto& c : cases) {
    std::string reference;
    bool ok = true;
    for (const char* threads : {"1", "4", "0"}) {
      auto argv = c.argv;
      if (c.name != "generate") argv.insert(argv.end(), {"--threads", threads});
      for (int rep = 0; rep < 2; ++rep) {
        const auto r = cli::run(argv);
        ++runs;
        const auto out = c.timed ? drop_last_column(r.out) : r.out;
        if (r.exit_code != 0 || out.empty()) ok = false;
        if (reference.empty()) reference = out;
        ok = ok && out == reference;
      }
    }
    if (!ok) mismatched.push_back(c.name);
  }
  std::string detail = std::to_string(cases.size()) + " commands, " + std::to_string(runs) +
                       " runs at threads 1/4/max (" + std::to_string(std::thread::hardware_concurrency()) +
                       " cores), bench-error seconds column excluded";
  for (const auto& m : mismatched) detail += "; differs: " + m;
  return {mismatched.empty(), detail};
}

double seconds_for(const Graph& g, const DescriptorRequest& req) {
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    const auto d = compute_descriptor(g, req);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    if (std::get<HeatTraceDescriptor>(d).values.empty()) return 0.0;
    best = std::min(best, dt.count());
  }
  return best;
}

Outcome criterion8() {
  DescriptorRequest req;
  req.kind = DescriptorKind::NetLsd;
  req.method = Method::Slaq;
  req.slq.threads = 1;
  const auto small = erdos_renyi(10000, 10.0, 81);
  const auto large = erdos_renyi(100000, 10.0, 82);
  const double t_small = seconds_for(small, req);
  const double t_large = seconds_for(large, req);
  const double ratio = t_large / t_small;
  return {ratio <= kScalingMaxRatio, "n=1e4 " + fmt(t_small) + " s, n=1e5 " + fmt(t_large) + " s, ratio " + fmt(ratio) +
                                         " <= " + fmt(kScalingMaxRatio) + " (single thread, best of 3)"};
}

std::vector<double> features_of(const Graph& g, const DescriptorRequest& req) {
  return feature_vector(compute_descriptor(g, req));
}

Outcome criterion9(std::string& title) {
  const std::filesystem::path dd = std::filesystem::path(SLAQ_DATA_DIR) / "DD";
  if (std::filesystem::exists(dd / "DD_A.txt")) {
    title = "classification, D&D with exact VNGE";
    const auto corpus = load_tu_dataset(dd, "DD");
    DescriptorRequest req;
    req.kind = DescriptorKind::Vnge;
    req.method = Method::Exact;
    std::vector<std::vector<double>> features;
    for (const auto& lg : corpus.graphs) features.push_back(features_of(lg.graph, req));
    const auto res = knn_accuracy(features, corpus.labels);
    const double pct = 100.0 * res.mean_accuracy;
    return {std::abs(pct - kDdTarget) <= kDdPoints,
            "accuracy " + fmt(pct) + " within " + fmt(kDdPoints) + " points of " + fmt(kDdTarget)};
  }
  title = "classification, synthetic ER degree 10 vs 20 (no D&D data present)";
  DescriptorRequest req;
  req.kind = DescriptorKind::NetLsd;
  req.method = Method::Slaq;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int label = static_cast<int>(i % 2);
    req.slq.seed = 9000 + i;
    features.push_back(features_of(erdos_renyi(500, label ? 20.0 : 10.0, 900 + i), req));
    labels.push_back(label);
  }
  const auto res = knn_accuracy(features, labels);
  return {res.mean_accuracy >= kSyntheticMinAccuracy,
          "mean accuracy " + fmt(res.mean_accuracy) + " (std " + fmt(res.std_accuracy) + ", " +
              std::to_string(res.repeats) + " splits) >= " + fmt(kSyntheticMinAccuracy)};
}

}  // namespace

int main() {
  const auto errors = corpus_errors();
  report(1, "SLaQ NetLSD accuracy on ER(1000, 10), seeds 0-9", criterion1(errors));
  report(2, "SLaQ VNGE accuracy on the same corpus", criterion2(errors));
  report(3, "SLaQ beats Taylor/linear(k=50) and both FINGER variants", criterion3(errors));
  report(4, "Gauss quadrature exact on polynomials of degree <= 2s-1", criterion4());
  report(5, "traces and full Lanczos spectra match the dense oracle", criterion5());
  report(6, "exact descriptor invariants", criterion6());
  report(7, "CLI output byte-identical across runs and thread counts", criterion7());
  report(8, "descriptor time grows at most 15x from n=1e4 to n=1e5", criterion8());
  std::string title9;
  const auto c9 = criterion9(title9);
  report(9, title9, c9);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
