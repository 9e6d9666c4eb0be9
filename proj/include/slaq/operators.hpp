#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slaq/error.hpp"
#include "slaq/graph.hpp"
#include "slaq/numeric.hpp"

namespace slaq {

enum class OperatorKind { Laplacian, NormalizedLaplacian, Density };

inline std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Laplacian: return "laplacian";
    case OperatorKind::NormalizedLaplacian: return "normalized_laplacian";
    case OperatorKind::Density: return "density";
  }
  return "?";
}

/// Closed interval known to contain the spectrum.
struct SpectralInterval {
  double lower = 0.0;
  double upper = 0.0;

  double radius() const noexcept { return std::max(std::abs(lower), std::abs(upper)); }
  double clamp(double x) const noexcept { return std::clamp(x, lower, upper); }
};

/// A symmetric matrix known only through y = M x.
///
/// `apply` must be safe to call concurrently; the operators built here hold
/// no mutable state.
class LinearOperator {
 public:
  using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator(std::size_t dim, ApplyFn apply, SpectralInterval bounds,
                 std::optional<OperatorKind> kind = std::nullopt)
      : dim_(dim), apply_(std::move(apply)), bounds_(bounds), kind_(kind) {}

  std::size_t dim() const noexcept { return dim_; }
  const SpectralInterval& bounds() const noexcept { return bounds_; }
  std::optional<OperatorKind> kind() const noexcept { return kind_; }

  /// y = M x; y must not alias x.
  void apply(std::span<const double> x, std::span<double> y) const { apply_(x, y); }

  std::vector<double> operator()(std::span<const double> x) const {
    std::vector<double> y(dim_);
    apply_(x, y);
    return y;
  }

 private:
  std::size_t dim_;
  ApplyFn apply_;
  SpectralInterval bounds_;
  std::optional<OperatorKind> kind_;
};

/// Weighted degrees, D_ii = sum_j A_ij.
inline std::vector<double> degrees(const Graph& g) {
  std::vector<double> d(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) {
    for (double w : g.neighbor_weights(i)) d[i] += w;
  }
  return d;
}

namespace detail {

inline void require_edges(const Graph& g, OperatorKind kind) {
  if (kind == OperatorKind::Density && g.m() == 0) {
    throw InvalidArgument("density matrix is undefined for an edgeless graph");
  }
}

inline double laplacian_trace(std::span<const double> deg) { return compensated_sum(deg); }

inline std::vector<double> inverse_sqrt_degrees(std::span<const double> deg) {
  std::vector<double> out(deg.size());
  for (std::size_t i = 0; i < deg.size(); ++i) out[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  return out;
}

}  // namespace detail

/// Gershgorin-style enclosure: [0, 2 d_max] for L, [0, 2] for the normalized
/// Laplacian and [0, 2 d_max / tr(L)] for the density matrix.
inline SpectralInterval spectral_interval(const Graph& g, OperatorKind kind) {
  detail::require_edges(g, kind);
  const auto deg = degrees(g);
  const double dmax = deg.empty() ? 0.0 : *std::max_element(deg.begin(), deg.end());
  switch (kind) {
    case OperatorKind::Laplacian: return {0.0, 2.0 * dmax};
    case OperatorKind::NormalizedLaplacian: return {0.0, 2.0};
    case OperatorKind::Density: return {0.0, std::min(1.0, 2.0 * dmax / detail::laplacian_trace(deg))};
  }
  return {};
}

/// Implicit L, normalized Laplacian or density matrix of `g`. Each apply is a
/// single pass over the CSR arrays. Isolated vertices get a zero row in the
/// normalized Laplacian.
inline LinearOperator make_operator(const Graph& g, OperatorKind kind) {
  detail::require_edges(g, kind);
  const auto bounds = spectral_interval(g, kind);
  auto deg = std::make_shared<const std::vector<double>>(degrees(g));

  switch (kind) {
    case OperatorKind::Laplacian:
    case OperatorKind::Density: {
      const double scale = kind == OperatorKind::Density ? 1.0 / detail::laplacian_trace(*deg) : 1.0;
      auto fn = [g, deg, scale](std::span<const double> x, std::span<double> y) {
        const auto offs = g.row_offsets();
        const auto cols = g.col_indices();
        const auto ws = g.weights();
        const auto& d = *deg;
        for (std::size_t i = 0; i < g.n(); ++i) {
          double acc = d[i] * x[i];
          for (std::size_t k = offs[i]; k < offs[i + 1]; ++k) acc -= ws[k] * x[cols[k]];
          y[i] = scale * acc;
        }
      };
      return LinearOperator(g.n(), std::move(fn), bounds, kind);
    }
    case OperatorKind::NormalizedLaplacian: {
      // w_ij / sqrt(d_i d_j) per stored arc, so apply reads x once per arc.
      const auto isd = detail::inverse_sqrt_degrees(*deg);
      auto scaled = std::make_shared<std::vector<double>>(g.weights().begin(), g.weights().end());
      {
        const auto offs = g.row_offsets();
        const auto cols = g.col_indices();
        for (std::size_t i = 0; i < g.n(); ++i)
          for (std::size_t k = offs[i]; k < offs[i + 1]; ++k) (*scaled)[k] *= isd[i] * isd[cols[k]];
      }
      auto fn = [g, w = std::shared_ptr<const std::vector<double>>(std::move(scaled))](std::span<const double> x,
                                                                                       std::span<double> y) {
        const auto offs = g.row_offsets();
        const auto cols = g.col_indices();
        const auto& ws = *w;
        for (std::size_t i = 0; i < g.n(); ++i) {
          if (offs[i] == offs[i + 1]) {
            y[i] = 0.0;
            continue;
          }
          double acc = 0.0;
          for (std::size_t k = offs[i]; k < offs[i + 1]; ++k) acc += ws[k] * x[cols[k]];
          y[i] = x[i] - acc;
        }
      };
      return LinearOperator(g.n(), std::move(fn), bounds, kind);
    }
  }
  throw InvalidArgument("unknown operator kind");
}

/// tr(M) from the degree sequence alone.
inline double trace(const Graph& g, OperatorKind kind) {
  detail::require_edges(g, kind);
  switch (kind) {
    case OperatorKind::Laplacian: return detail::laplacian_trace(degrees(g));
    case OperatorKind::NormalizedLaplacian: {
      std::size_t active = 0;
      for (std::size_t i = 0; i < g.n(); ++i) active += g.degree_count(i) > 0;
      return static_cast<double>(active);
    }
    case OperatorKind::Density: return 1.0;
  }
  return 0.0;
}

/// tr(M^2) = sum of squared entries (M is symmetric), one pass over the edges.
inline double trace_squared(const Graph& g, OperatorKind kind) {
  detail::require_edges(g, kind);
  const auto deg = degrees(g);
  CompensatedSum sum;
  if (kind == OperatorKind::NormalizedLaplacian) {
    const auto isd = detail::inverse_sqrt_degrees(deg);
    for (std::size_t i = 0; i < g.n(); ++i) {
      if (deg[i] > 0.0) sum.add(1.0);
      const auto cols = g.neighbors(i);
      const auto ws = g.neighbor_weights(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const double a = ws[k] * isd[i] * isd[cols[k]];
        sum.add(a * a);
      }
    }
    return sum.value();
  }
  for (std::size_t i = 0; i < g.n(); ++i) {
    sum.add(deg[i] * deg[i]);
    for (double w : g.neighbor_weights(i)) sum.add(w * w);
  }
  if (kind == OperatorKind::Density) {
    const double tr = detail::laplacian_trace(deg);
    return sum.value() / (tr * tr);
  }
  return sum.value();
}

}  // namespace slaq
