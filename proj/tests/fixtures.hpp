#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "slaq/slaq.hpp"

namespace fixtures {

using slaq::Edge;
using slaq::Graph;

inline Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (slaq::vertex_t i = 0; i < n; ++i)
    for (slaq::vertex_t j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph::from_edges(n, e);
}

inline Graph path(std::size_t n) {
  std::vector<Edge> e;
  for (slaq::vertex_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph::from_edges(n, e);
}

/// Star with centre 0 and `leaves` leaves.
inline Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (slaq::vertex_t i = 1; i <= leaves; ++i) e.push_back({0, i});
  return Graph::from_edges(leaves + 1, e);
}

inline Graph disjoint_edges(std::size_t c) {
  std::vector<Edge> e;
  for (slaq::vertex_t i = 0; i < c; ++i) e.push_back({2 * i, 2 * i + 1});
  return Graph::from_edges(2 * c, e);
}

/// Random graph for property tests: n in [n_min, n_max], edge probability
/// drawn per graph, optional random weights in [0.5, 2]. Isolated vertices
/// and several components occur naturally.
inline Graph random_graph(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, bool weighted = false) {
  std::uniform_int_distribution<std::size_t> size(n_min, n_max);
  const std::size_t n = size(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = 0.02 + 0.4 * unit(rng);
  std::vector<Edge> e;
  for (slaq::vertex_t i = 0; i < n; ++i)
    for (slaq::vertex_t j = i + 1; j < n; ++j)
      if (unit(rng) < p) e.push_back({i, j, weighted ? 0.5 + 1.5 * unit(rng) : 1.0});
  return Graph::from_edges(n, e);
}

/// Connected graph (random spanning tree plus extra edges) with random
/// weights, which keeps the spectrum simple with probability one.
inline Graph random_connected_weighted(std::mt19937_64& rng, std::size_t n, double extra_p = 0.1) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> e;
  for (slaq::vertex_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<slaq::vertex_t> parent(0, i - 1);
    e.push_back({parent(rng), i, 0.5 + 1.5 * unit(rng)});
  }
  for (slaq::vertex_t i = 0; i < n; ++i)
    for (slaq::vertex_t j = i + 1; j < n; ++j)
      if (unit(rng) < extra_p) e.push_back({i, j, 0.5 + 1.5 * unit(rng)});
  return Graph::from_edges(n, e);
}

/// Operator of an explicit symmetric matrix.
inline slaq::LinearOperator explicit_operator(const Eigen::MatrixXd& m) {
  const double r = m.cwiseAbs().rowwise().sum().maxCoeff();
  const slaq::SpectralInterval bounds{-r, r};
  return slaq::LinearOperator(
      static_cast<std::size_t>(m.rows()),
      [m](std::span<const double> x, std::span<double> y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
        yv.noalias() = m * xv;
      },
      bounds);
}

inline slaq::LinearOperator diagonal_operator(std::vector<double> d) {
  double lo = 0.0, hi = 0.0;
  for (double x : d) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const std::size_t n = d.size();
  return slaq::LinearOperator(
      n,
      [d = std::move(d)](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
      },
      {lo, hi});
}

inline std::vector<double> unit(std::vector<double> v) {
  const double n = slaq::norm2(v);
  for (auto& x : v) x /= n;
  return v;
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
