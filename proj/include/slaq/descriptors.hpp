#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slaq/error.hpp"
#include "slaq/graph.hpp"
#include "slaq/lanczos.hpp"
#include "slaq/numeric.hpp"
#include "slaq/operators.hpp"
#include "slaq/slq.hpp"

namespace slaq {

/// Strictly increasing positive time points, usually log-spaced.
class TimeGrid {
 public:
  static TimeGrid logspace(double t_min, double t_max, std::size_t count) {
    if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("time grid needs 0 < t_min < t_max");
    if (count < 2) throw InvalidArgument("time grid needs at least 2 points");
    std::vector<double> v(count);
    const double a = std::log(t_min);
    const double step = (std::log(t_max) - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = std::exp(a + step * static_cast<double>(i));
    v.front() = t_min;
    v.back() = t_max;
    return from_values(std::move(v));
  }

  /// 256 points on [1e-2, 1e2].
  static TimeGrid standard() { return logspace(1e-2, 1e2, 256); }

  static TimeGrid from_values(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("time grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw InvalidArgument("time points must be positive");
      if (i > 0 && !(values[i] > values[i - 1])) throw InvalidArgument("time points must be strictly increasing");
    }
    TimeGrid g;
    g.values_ = std::move(values);
    return g;
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double t_min() const noexcept { return values_.front(); }
  double t_max() const noexcept { return values_.back(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  TimeGrid() = default;
  std::vector<double> values_;
};

enum class DescriptorKind { NetLsd, Vnge };
enum class Method { Exact, Slaq, Taylor, Linear, FingerBar, FingerHat };
enum class TaylorVariant { Corrected, AsPrinted };

inline std::string_view to_string(DescriptorKind k) { return k == DescriptorKind::NetLsd ? "netlsd" : "vnge"; }

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Slaq: return "slaq";
    case Method::Taylor: return "taylor";
    case Method::Linear: return "linear";
    case Method::FingerBar: return "finger-bar";
    case Method::FingerHat: return "finger-hat";
  }
  return "?";
}

inline std::string_view to_string(TaylorVariant v) {
  return v == TaylorVariant::Corrected ? "corrected" : "as-printed";
}

inline std::optional<DescriptorKind> parse_descriptor_kind(std::string_view s) {
  if (s == "netlsd") return DescriptorKind::NetLsd;
  if (s == "vnge") return DescriptorKind::Vnge;
  return std::nullopt;
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::Exact, Method::Slaq, Method::Taylor, Method::Linear, Method::FingerBar, Method::FingerHat}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

/// What produced a descriptor. Only the fields relevant to the method are set.
struct MethodParams {
  std::optional<SlqConfig> slq;
  std::optional<std::size_t> k;
  std::optional<TaylorVariant> taylor;
};

struct HeatTraceDescriptor {
  TimeGrid grid;
  std::vector<double> values;
  Method method = Method::Exact;
  MethodParams params;
  /// Per-point standard errors (SLaQ only).
  std::vector<double> std_errors;
};

struct EntropyValue {
  double value = 0.0;
  Method method = Method::Exact;
  MethodParams params;
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Maps -0.0 to +0.0 so negated zero sums print as "0".
inline double unsigned_zero(double x) noexcept { return x == 0.0 ? 0.0 : x; }

/// x ln x with 0 ln 0 = 0.
inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

inline std::vector<double> heat_trace_of_spectrum(std::span<const double> spectrum, const TimeGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CompensatedSum s;
    for (double lambda : spectrum) s.add(std::exp(-grid[j] * std::clamp(lambda, 0.0, 2.0)));
    out[j] = s.value();
  }
  return out;
}

/// Eigenvalues within roundoff of 0 or 1 are snapped to the endpoint, so a
/// single-edge density spectrum {0, 1 - eps} gives exactly 0.
inline double entropy_of_spectrum(std::span<const double> spectrum) {
  constexpr double snap = 64 * std::numeric_limits<double>::epsilon();
  CompensatedSum s;
  for (double lambda : spectrum) {
    double x = std::clamp(lambda, 0.0, 1.0);
    if (x < snap) x = 0.0;
    if (1.0 - x < snap) x = 1.0;
    s.add(xlogx(x));
  }
  return unsigned_zero(-s.value());
}

/// k smallest, linearly interpolated interior, k largest. Requires 2k < n.
inline std::vector<double> interpolated_spectrum(const LinearOperator& op, std::size_t k,
                                                 const ExtremalOptions& opts) {
  const std::size_t n = op.dim();
  auto lo = extremal_eigenvalues(op, k, SpectrumEnd::Smallest, opts);
  auto hi = extremal_eigenvalues(op, k, SpectrumEnd::Largest, opts);
  const std::size_t interior = n - 2 * k;
  const double a = lo.back();
  const double b = hi.front();
  std::vector<double> out = std::move(lo);
  out.reserve(n);
  for (std::size_t i = 1; i <= interior; ++i) {
    out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(interior + 1));
  }
  out.insert(out.end(), hi.begin(), hi.end());
  return out;
}

inline void require_edges_for_entropy(const Graph& g) {
  if (g.m() == 0) throw InvalidArgument("von Neumann entropy is undefined for an edgeless graph");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// NetLSD heat traces (normalized Laplacian)

/// h_t = sum_i exp(-t lambda_i) over the full normalized-Laplacian spectrum.
inline HeatTraceDescriptor netlsd_exact(const Graph& g, const TimeGrid& grid, const DenseOptions& dense = {}) {
  const auto spectrum = dense_spectrum(g, OperatorKind::NormalizedLaplacian, dense);
  return {grid, detail::heat_trace_of_spectrum(spectrum, grid), Method::Exact, {}, {}};
}

inline HeatTraceDescriptor netlsd_slaq(const Graph& g, const TimeGrid& grid, const SlqConfig& cfg = {}) {
  const auto op = make_operator(g, OperatorKind::NormalizedLaplacian);
  const auto est = slq_trace_grid(op, [](double t, double x) { return std::exp(-t * x); }, grid.values(), cfg);
  HeatTraceDescriptor d{grid, {}, Method::Slaq, {}, {}};
  d.params.slq = cfg;
  d.values.reserve(est.size());
  d.std_errors.reserve(est.size());
  for (const auto& e : est) {
    d.values.push_back(e.value);
    d.std_errors.push_back(e.std_error);
  }
  return d;
}

/// Second-order expansion n - t tr(L) + t^2/2 tr(L^2); only sensible for small t.
inline HeatTraceDescriptor netlsd_taylor(const Graph& g, const TimeGrid& grid) {
  const double n = static_cast<double>(g.n());
  const double tr1 = trace(g, OperatorKind::NormalizedLaplacian);
  const double tr2 = trace_squared(g, OperatorKind::NormalizedLaplacian);
  HeatTraceDescriptor d{grid, std::vector<double>(grid.size()), Method::Taylor, {}, {}};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    d.values[j] = n - t * tr1 + 0.5 * t * t * tr2;
  }
  return d;
}

/// k eigenvalues at each end of the spectrum, interior assumed to grow
/// linearly between them. Falls back to the exact spectrum when 2k >= n.
inline HeatTraceDescriptor netlsd_linear(const Graph& g, const TimeGrid& grid, std::size_t k = 300,
                                         const ExtremalOptions& opts = {}, const DenseOptions& dense = {}) {
  if (k < 1) throw InvalidArgument("netlsd_linear: k must be at least 1");
  auto d = [&]() -> HeatTraceDescriptor {
    if (2 * k >= g.n()) return netlsd_exact(g, grid, dense);
    const auto op = make_operator(g, OperatorKind::NormalizedLaplacian);
    return {grid, detail::heat_trace_of_spectrum(detail::interpolated_spectrum(op, k, opts), grid), Method::Linear,
            {}, {}};
  }();
  d.method = Method::Linear;
  d.params.k = k;
  return d;
}

// ---------------------------------------------------------------------------
// Von Neumann graph entropy (density matrix L / tr L)

inline EntropyValue vnge_exact(const Graph& g, const DenseOptions& dense = {}) {
  detail::require_edges_for_entropy(g);
  return {detail::entropy_of_spectrum(dense_spectrum(g, OperatorKind::Density, dense)), Method::Exact, {}};
}

inline EntropyValue vnge_slaq(const Graph& g, const SlqConfig& cfg = {}) {
  detail::require_edges_for_entropy(g);
  const auto op = make_operator(g, OperatorKind::Density);
  const auto est = slq_trace(op, detail::xlogx, cfg);
  EntropyValue e{detail::unsigned_zero(-est.value), Method::Slaq, {}, est.std_error};
  e.params.slq = cfg;
  return e;
}

/// Quadratic approximation. Corrected: Q = 1 - tr(L^2) / tr(L)^2.
/// AsPrinted: 1 - (tr(L) + 2 tr(L^2)) / tr(L)^2, kept for comparison.
inline EntropyValue vnge_taylor(const Graph& g, TaylorVariant variant = TaylorVariant::Corrected) {
  detail::require_edges_for_entropy(g);
  double value;
  if (variant == TaylorVariant::Corrected) {
    value = 1.0 - trace_squared(g, OperatorKind::Density);
  } else {
    const double tr = trace(g, OperatorKind::Laplacian);
    value = 1.0 - (tr + 2.0 * trace_squared(g, OperatorKind::Laplacian)) / (tr * tr);
  }
  EntropyValue e{value, Method::Taylor, {}};
  e.params.taylor = variant;
  return e;
}

/// -Q ln(lambda_max(P)) (hat, lambda_max by Lanczos) or -Q ln(2 d_max / tr L)
/// (bar, the Gershgorin bound on the same eigenvalue).
inline EntropyValue vnge_finger(const Graph& g, Method variant, const ExtremalOptions& opts = {}) {
  detail::require_edges_for_entropy(g);
  const double q = 1.0 - trace_squared(g, OperatorKind::Density);
  double lambda_max;
  if (variant == Method::FingerBar) {
    lambda_max = spectral_interval(g, OperatorKind::Density).upper;
  } else if (variant == Method::FingerHat) {
    const auto op = make_operator(g, OperatorKind::Density);
    lambda_max = extremal_eigenvalues(op, 1, SpectrumEnd::Largest, opts).front();
  } else {
    throw InvalidArgument("vnge_finger: variant must be finger-bar or finger-hat");
  }
  if (!(lambda_max > 0.0)) throw Error("vnge_finger: nonpositive largest eigenvalue");
  return {detail::unsigned_zero(-q * std::log(lambda_max)), variant, {}};
}

/// Entropy of the density spectrum with k exact eigenvalues at each end and a
/// linear interior; exact when 2k >= n.
inline EntropyValue vnge_linear(const Graph& g, std::size_t k = 300, const ExtremalOptions& opts = {},
                                const DenseOptions& dense = {}) {
  detail::require_edges_for_entropy(g);
  if (k < 1) throw InvalidArgument("vnge_linear: k must be at least 1");
  EntropyValue e;
  if (2 * k >= g.n()) {
    e = vnge_exact(g, dense);
  } else {
    const auto op = make_operator(g, OperatorKind::Density);
    e.value = detail::entropy_of_spectrum(detail::interpolated_spectrum(op, k, opts));
  }
  e.method = Method::Linear;
  e.params.k = k;
  return e;
}

// ---------------------------------------------------------------------------
// Distances

namespace detail {
inline void require_same_grid(const HeatTraceDescriptor& a, const HeatTraceDescriptor& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw InvalidArgument("heat-trace descriptors are on different time grids");
  }
}
}  // namespace detail

inline double descriptor_distance(const HeatTraceDescriptor& a, const HeatTraceDescriptor& b) {
  detail::require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double descriptor_distance(const EntropyValue& a, const EntropyValue& b) { return std::abs(a.value - b.value); }

/// ||approx - reference|| / ||reference||.
inline double relative_error(const HeatTraceDescriptor& approx, const HeatTraceDescriptor& reference) {
  detail::require_same_grid(approx, reference);
  const double ref = norm2(reference.values);
  if (!(ref > 0.0)) throw InvalidArgument("relative_error: reference has zero norm");
  return descriptor_distance(approx, reference) / ref;
}

inline double relative_error(const EntropyValue& approx, const EntropyValue& reference) {
  if (!(std::abs(reference.value) > 0.0)) throw InvalidArgument("relative_error: reference is zero");
  return std::abs(approx.value - reference.value) / std::abs(reference.value);
}

// ---------------------------------------------------------------------------
// Method dispatch used by the benchmarks and the command line

using Descriptor = std::variant<HeatTraceDescriptor, EntropyValue>;

struct DescriptorRequest {
  DescriptorKind kind = DescriptorKind::NetLsd;
  Method method = Method::Exact;
  TimeGrid grid = TimeGrid::standard();
  SlqConfig slq;
  std::size_t k = 300;
  TaylorVariant taylor = TaylorVariant::Corrected;
  ExtremalOptions extremal;
  DenseOptions dense;
};

inline Descriptor compute_descriptor(const Graph& g, const DescriptorRequest& r) {
  if (r.kind == DescriptorKind::NetLsd) {
    switch (r.method) {
      case Method::Exact: return netlsd_exact(g, r.grid, r.dense);
      case Method::Slaq: return netlsd_slaq(g, r.grid, r.slq);
      case Method::Taylor: return netlsd_taylor(g, r.grid);
      case Method::Linear: return netlsd_linear(g, r.grid, r.k, r.extremal, r.dense);
      default: throw InvalidArgument("method " + std::string(to_string(r.method)) + " is not defined for netlsd");
    }
  }
  switch (r.method) {
    case Method::Exact: return vnge_exact(g, r.dense);
    case Method::Slaq: return vnge_slaq(g, r.slq);
    case Method::Taylor: return vnge_taylor(g, r.taylor);
    case Method::Linear: return vnge_linear(g, r.k, r.extremal, r.dense);
    case Method::FingerBar:
    case Method::FingerHat: return vnge_finger(g, r.method, r.extremal);
  }
  throw InvalidArgument("unknown method");
}

inline double descriptor_distance(const Descriptor& a, const Descriptor& b) {
  if (a.index() != b.index()) throw InvalidArgument("cannot compare descriptors of different kinds");
  return std::visit(
      [&](const auto& x) { return descriptor_distance(x, std::get<std::decay_t<decltype(x)>>(b)); }, a);
}

inline double relative_error(const Descriptor& approx, const Descriptor& reference) {
  if (approx.index() != reference.index()) throw InvalidArgument("cannot compare descriptors of different kinds");
  return std::visit(
      [&](const auto& x) { return relative_error(x, std::get<std::decay_t<decltype(x)>>(reference)); }, approx);
}

/// Descriptor as a flat feature vector (entropy becomes a 1-vector).
inline std::vector<double> feature_vector(const Descriptor& d) {
  if (const auto* h = std::get_if<HeatTraceDescriptor>(&d)) return h->values;
  return {std::get<EntropyValue>(d).value};
}

}  // namespace slaq
