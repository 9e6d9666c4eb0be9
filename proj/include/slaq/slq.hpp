#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slaq/error.hpp"
#include "slaq/lanczos.hpp"
#include "slaq/numeric.hpp"
#include "slaq/operators.hpp"

namespace slaq {

enum class ProbeDistribution { Rademacher, Gaussian };

inline std::string_view to_string(ProbeDistribution d) {
  return d == ProbeDistribution::Rademacher ? "rademacher" : "gaussian";
}

struct SlqConfig {
  std::size_t n_v = 100;
  std::size_t steps = 10;
  ProbeDistribution distribution = ProbeDistribution::Rademacher;
  std::uint64_t seed = 0;
  /// Worker cap, 0 = all cores. Never affects results.
  std::size_t threads = 0;
  /// nullopt: full reorthogonalization when steps <= 100.
  std::optional<bool> reorthogonalize;

  bool reorth() const noexcept { return reorthogonalize.value_or(steps <= 100); }
};

/// Hutchinson estimate of tr f(M).
struct SlqEstimate {
  /// n / n_v * sum(per_vector)
  double value = 0.0;
  /// Gauss-quadrature estimate of q_i^T f(M) q_i for each unit probe q_i.
  std::vector<double> per_vector;
  /// Sample standard deviation of n * per_vector, over sqrt(n_v). NaN for n_v = 1.
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

/// Unit-norm probe number `index` of the stream seeded by `master`.
inline std::vector<double> probe_vector(std::size_t n, ProbeDistribution dist, std::uint64_t master,
                                        std::uint64_t index) {
  std::mt19937_64 rng(stream_seed(master, index));
  std::vector<double> v(n);
  if (dist == ProbeDistribution::Rademacher) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 64 == 0) bits = rng();
      v[i] = (bits >> (i % 64)) & 1 ? 1.0 : -1.0;
    }
  } else {
    std::normal_distribution<double> normal;
    for (auto& x : v) x = normal(rng);
  }
  const double nrm = norm2(v);
  if (!(nrm > 0.0)) throw Error("probe_vector: degenerate probe");
  for (auto& x : v) x /= nrm;
  return v;
}

/// Lanczos quadrature rule for probe `index`.
inline QuadratureRule probe_rule(const LinearOperator& op, const SlqConfig& cfg, std::size_t index) {
  const auto q0 = probe_vector(op.dim(), cfg.distribution, cfg.seed, index);
  return quadrature_rule(lanczos_tridiagonalize(op, q0, std::min(cfg.steps, op.dim()), cfg.reorth()));
}

/// Exactly known quadratic p(x) = c0 + c1 x + c2 x^2 subtracted from f before
/// sampling and added back through tr p(M). Experimental, off by default.
struct QuadraticControlVariate {
  std::array<double, 3> coefficients{};
  /// tr p(M) = c0 n + c1 tr(M) + c2 tr(M^2)
  double exact_trace = 0.0;

  double operator()(double x) const noexcept {
    return coefficients[0] + x * (coefficients[1] + x * coefficients[2]);
  }
};

namespace detail {

inline void validate(const LinearOperator& op, const SlqConfig& cfg) {
  if (cfg.n_v < 1) throw InvalidArgument("slq: n_v must be at least 1");
  if (cfg.steps < 1) throw InvalidArgument("slq: steps must be at least 1");
  if (op.dim() < 1) throw InvalidArgument("slq: operator has dimension 0");
}

template <typename F>
double probe_estimate(const QuadratureRule& rule, const SpectralInterval& bounds, F&& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = bounds.clamp(rule.nodes[k]);
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      throw Error("slq: f is not finite at quadrature node " + std::to_string(x));
    }
    acc += rule.weights[k] * fx;
  }
  return acc;
}

inline SlqEstimate finish(std::size_t n, std::vector<double> per_vector, double shift = 0.0) {
  SlqEstimate est;
  const double nv = static_cast<double>(per_vector.size());
  const double scale = static_cast<double>(n);
  CompensatedSum total;
  for (double x : per_vector) total.add(x);
  const double mean = scale * total.value() / nv;
  est.value = mean + shift;
  if (per_vector.size() > 1) {
    CompensatedSum ss;
    for (double x : per_vector) {
      const double d = scale * x - mean;
      ss.add(d * d);
    }
    est.std_error = std::sqrt(ss.value() / (nv - 1.0)) / std::sqrt(nv);
  }
  est.per_vector = std::move(per_vector);
  return est;
}

inline std::vector<QuadratureRule> probe_rules(const LinearOperator& op, const SlqConfig& cfg) {
  std::vector<QuadratureRule> rules(cfg.n_v);
  parallel_for(cfg.n_v, cfg.threads, [&](std::size_t i) { rules[i] = probe_rule(op, cfg, i); });
  return rules;
}

}  // namespace detail

/// Stochastic Lanczos quadrature estimate of tr f(M):
///   value = n / n_v * sum_i sum_k tau_ik^2 f(theta_ik),
/// with probes normalized to unit length before Lanczos. Quadrature nodes are
/// clamped to the operator's spectral interval before f is applied. The result
/// depends only on (op, f, cfg minus threads).
template <typename F>
SlqEstimate slq_trace(const LinearOperator& op, F&& f, const SlqConfig& cfg) {
  detail::validate(op, cfg);
  const auto rules = detail::probe_rules(op, cfg);
  std::vector<double> per_vector(cfg.n_v);
  for (std::size_t i = 0; i < cfg.n_v; ++i) per_vector[i] = detail::probe_estimate(rules[i], op.bounds(), f);
  return detail::finish(op.dim(), std::move(per_vector));
}

/// As above with a quadratic control variate: samples f - p, adds tr p(M) back.
template <typename F>
SlqEstimate slq_trace(const LinearOperator& op, F&& f, const SlqConfig& cfg, const QuadraticControlVariate& cv) {
  detail::validate(op, cfg);
  const auto rules = detail::probe_rules(op, cfg);
  std::vector<double> per_vector(cfg.n_v);
  for (std::size_t i = 0; i < cfg.n_v; ++i) {
    per_vector[i] = detail::probe_estimate(rules[i], op.bounds(), [&](double x) { return f(x) - cv(x); });
  }
  return detail::finish(op.dim(), std::move(per_vector), cv.exact_trace);
}

/// slq_trace for every grid point, sharing one quadrature rule per probe
/// across the grid. `family(g, x)` evaluates the function for grid value g.
/// Bit-identical to calling slq_trace with x -> family(g, x) per point.
template <typename Family>
std::vector<SlqEstimate> slq_trace_grid(const LinearOperator& op, Family&& family, std::span<const double> grid,
                                        const SlqConfig& cfg) {
  detail::validate(op, cfg);
  const auto rules = detail::probe_rules(op, cfg);
  std::vector<SlqEstimate> out;
  out.reserve(grid.size());
  for (double g : grid) {
    std::vector<double> per_vector(cfg.n_v);
    for (std::size_t i = 0; i < cfg.n_v; ++i) {
      per_vector[i] = detail::probe_estimate(rules[i], op.bounds(), [&](double x) { return family(g, x); });
    }
    out.push_back(detail::finish(op.dim(), std::move(per_vector)));
  }
  return out;
}

/// Least-squares quadratic fit of f at Chebyshev points of the operator's
/// interval, with its exact trace from the closed-form trace identities.
template <typename F>
QuadraticControlVariate fit_quadratic_control_variate(const Graph& g, OperatorKind kind, F&& f,
                                                      std::size_t points = 32) {
  const auto bounds = spectral_interval(g, kind);
  const double mid = 0.5 * (bounds.lower + bounds.upper);
  const double half = 0.5 * (bounds.upper - bounds.lower);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(points), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(points));
  for (std::size_t i = 0; i < points; ++i) {
    const double x = mid + half * std::cos(std::numbers::pi * (i + 0.5) / static_cast<double>(points));
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = x * x;
    b(i) = f(x);
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  QuadraticControlVariate cv;
  cv.coefficients = {c(0), c(1), c(2)};
  cv.exact_trace =
      c(0) * static_cast<double>(g.n()) + c(1) * trace(g, kind) + c(2) * trace_squared(g, kind);
  return cv;
}

}  // namespace slaq
