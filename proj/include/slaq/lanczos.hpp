#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slaq/error.hpp"
#include "slaq/graph.hpp"
#include "slaq/numeric.hpp"
#include "slaq/operators.hpp"

namespace slaq {

/// Symmetric tridiagonal matrix produced by Lanczos.
struct Tridiagonal {
  std::vector<double> alpha;  // diagonal, length s'
  std::vector<double> beta;   // off-diagonal, length s' - 1

  std::size_t size() const noexcept { return alpha.size(); }
};

/// Gauss rule of a Lanczos run: Ritz values and squared first components.
struct QuadratureRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // sum to 1 for a unit start vector

  /// sum_k weights[k] * f(clamp(nodes[k])), accumulated in node order.
  template <typename F>
  double integrate(F&& f, const SpectralInterval* clamp_to = nullptr) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double x = clamp_to ? clamp_to->clamp(nodes[k]) : nodes[k];
      acc += weights[k] * f(x);
    }
    return acc;
  }
};

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix together with
/// the first and last components of the unit eigenvectors.
struct TridiagonalEigen {
  std::vector<double> values;
  std::vector<double> first;
  std::vector<double> last;
};

/// Implicit-shift QL (tql2 family). Only the first and last rows of the
/// eigenvector matrix are accumulated, so the cost is O(s^2). Off-diagonal
/// entries may be zero (block-diagonal input).
inline TridiagonalEigen tridiagonal_eigen(std::span<const double> diag, std::span<const double> offdiag) {
  const std::size_t n = diag.size();
  if (n == 0) return {};
  if (offdiag.size() + 1 != n) throw InvalidArgument("tridiagonal: off-diagonal length must be n - 1");
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e(n, 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());
  std::vector<double> z0(n, 0.0), z1(n, 0.0);
  z0[0] = 1.0;
  z1[n - 1] = 1.0;

  constexpr int kMaxIter = 60;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == kMaxIter) {
          std::ostringstream msg;
          msg << "tridiagonal eigensolver did not converge; alpha=[";
          for (double a : diag) msg << a << ' ';
          msg << "] beta=[";
          for (double b : offdiag) msg << b << ' ';
          msg << ']';
          throw ConvergenceError(msg.str(), d);
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (auto* z : {&z0, &z1}) {
            f = (*z)[i + 1];
            (*z)[i + 1] = s * (*z)[i] + c * f;
            (*z)[i] = c * (*z)[i] - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  TridiagonalEigen out;
  out.values.reserve(n);
  out.first.reserve(n);
  out.last.reserve(n);
  for (auto k : order) {
    out.values.push_back(d[k]);
    out.first.push_back(z0[k]);
    out.last.push_back(z1[k]);
  }
  return out;
}

/// Nodes are the eigenvalues of T, weights the squared first eigenvector
/// components.
inline QuadratureRule quadrature_rule(const Tridiagonal& t) {
  auto eig = tridiagonal_eigen(t.alpha, t.beta);
  QuadratureRule rule;
  rule.nodes = std::move(eig.values);
  rule.weights.resize(eig.first.size());
  for (std::size_t k = 0; k < eig.first.size(); ++k) rule.weights[k] = eig.first[k] * eig.first[k];
  return rule;
}

/// Incremental Lanczos recurrence on one operator. Owns its working vectors.
///
/// With reorthogonalization every new residual is Gram-Schmidt'ed twice
/// against all retained basis vectors. `restart` continues past an invariant
/// subspace with a fresh direction (recorded as a zero off-diagonal).
class LanczosProcess {
 public:
  LanczosProcess(const LinearOperator& op, std::span<const double> q0, bool reorthogonalize,
                 bool keep_basis)
      : op_(op),
        reorth_(reorthogonalize),
        keep_(reorthogonalize || keep_basis),
        tol_(1e-12 * op.bounds().radius()),
        q_(q0.begin(), q0.end()),
        q_prev_(op.dim(), 0.0),
        w_(op.dim(), 0.0) {
    if (q0.size() != op.dim()) throw InvalidArgument("lanczos: start vector has wrong length");
    if (std::abs(norm2(q0) - 1.0) > 1e-12) throw InvalidArgument("lanczos: start vector must have unit norm");
  }

  /// Computes alpha for the current basis vector and, if `with_residual`,
  /// the orthogonalized residual whose norm becomes the next beta.
  void expand(bool with_residual) {
    if (keep_) basis_.push_back(q_);
    op_.apply(q_, w_);
    double a = dot(q_, w_);
    if (!with_residual) {
      t_.alpha.push_back(a);
      residual_norm_ = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double b_prev = t_.beta.size() == t_.alpha.size() && !t_.alpha.empty() ? t_.beta.back() : 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= a * q_[i] + b_prev * q_prev_[i];
    if (reorth_) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < basis_.size(); ++j) {
          const auto& b = basis_[j];
          const double c = dot(b, w_);
          if (j + 1 == basis_.size()) a += c;
          for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= c * b[i];
        }
      }
    }
    t_.alpha.push_back(a);
    residual_norm_ = norm2(w_);
  }

  /// True when the last residual is numerically zero (invariant subspace).
  bool broke_down() const noexcept { return !(residual_norm_ > tol_); }

  double residual_norm() const noexcept { return residual_norm_; }

  /// Moves to the next basis vector using the last residual.
  void advance() {
    const double b = residual_norm_;
    t_.beta.push_back(b);
    std::swap(q_prev_, q_);
    for (std::size_t i = 0; i < w_.size(); ++i) q_[i] = w_[i] / b;
  }

  /// Continues with `fresh` (orthogonalized against the basis) after a
  /// breakdown. Returns false if nothing orthogonal is left.
  bool restart(std::vector<double> fresh) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis_) {
        const double c = dot(b, fresh);
        for (std::size_t i = 0; i < fresh.size(); ++i) fresh[i] -= c * b[i];
      }
    }
    const double nrm = norm2(fresh);
    if (!(nrm > 1e-8)) return false;
    for (auto& x : fresh) x /= nrm;
    t_.beta.push_back(0.0);
    std::fill(q_prev_.begin(), q_prev_.end(), 0.0);
    q_ = std::move(fresh);
    return true;
  }

  std::size_t steps() const noexcept { return t_.alpha.size(); }
  const Tridiagonal& tridiagonal() const noexcept { return t_; }
  Tridiagonal take_tridiagonal() && { return std::move(t_); }
  const std::vector<std::vector<double>>& basis() const noexcept { return basis_; }
  std::vector<std::vector<double>> take_basis() && { return std::move(basis_); }

 private:
  const LinearOperator& op_;
  bool reorth_;
  bool keep_;
  double tol_;
  std::vector<double> q_, q_prev_, w_;
  double residual_norm_ = 0.0;
  Tridiagonal t_;
  std::vector<std::vector<double>> basis_;
};

/// Lanczos run that also returns the orthonormal basis Q (columns q_i).
struct LanczosDecomposition {
  Tridiagonal tridiagonal;
  std::vector<std::vector<double>> basis;
};

namespace detail {

inline void run_lanczos(LanczosProcess& proc, std::size_t steps) {
  for (std::size_t j = 0; j < steps; ++j) {
    const bool last = j + 1 == steps;
    proc.expand(!last);
    if (last || proc.broke_down()) break;
    proc.advance();
  }
}

inline std::size_t checked_steps(const LinearOperator& op, std::size_t s) {
  if (s < 1) throw InvalidArgument("lanczos: step budget must be at least 1");
  return std::min(s, op.dim());
}

}  // namespace detail

/// s-step Lanczos from the unit vector q0. Stops early (s' < s) when the
/// residual drops below 1e-12 times the operator's spectral radius; s is
/// capped at the dimension.
inline Tridiagonal lanczos_tridiagonalize(const LinearOperator& op, std::span<const double> q0,
                                          std::size_t s, bool reorth = true) {
  const auto steps = detail::checked_steps(op, s);
  LanczosProcess proc(op, q0, reorth, false);
  detail::run_lanczos(proc, steps);
  return std::move(proc).take_tridiagonal();
}

inline LanczosDecomposition lanczos_decompose(const LinearOperator& op, std::span<const double> q0,
                                              std::size_t s, bool reorth = true) {
  const auto steps = detail::checked_steps(op, s);
  LanczosProcess proc(op, q0, reorth, true);
  detail::run_lanczos(proc, steps);
  LanczosDecomposition out;
  out.basis = proc.basis();
  out.tridiagonal = std::move(proc).take_tridiagonal();
  return out;
}

enum class SpectrumEnd { Smallest, Largest };

struct ExtremalOptions {
  /// 0 means the default cap of 10k + 100 steps.
  std::size_t max_steps = 0;
  /// Convergence: change of every requested Ritz value between checks.
  double tolerance = 1e-8;
  /// Ritz residual bound required in addition to the change test.
  double residual_tolerance = 1e-6;
  std::size_t check_every = 4;
  std::uint64_t seed = 0x5eed;
};

/// k eigenvalues from one end of the spectrum (ascending), by Lanczos with
/// full reorthogonalization. When the Krylov space becomes invariant the
/// iteration continues from a fresh random direction, so once the basis
/// spans the whole space the answer is exact.
inline std::vector<double> extremal_eigenvalues(const LinearOperator& op, std::size_t k, SpectrumEnd end,
                                                const ExtremalOptions& opts = {}) {
  const std::size_t n = op.dim();
  if (k < 1 || k > n) throw InvalidArgument("extremal_eigenvalues: k must lie in [1, n]");
  const std::size_t cap = std::min(n, opts.max_steps ? opts.max_steps : 10 * k + 100);
  const double scale = std::max(1.0, op.bounds().radius());

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  auto random_unit = [&] {
    std::vector<double> v(n);
    for (auto& x : v) x = normal(rng);
    const double nrm = norm2(v);
    for (auto& x : v) x /= nrm;
    return v;
  };

  LanczosProcess proc(op, random_unit(), true, true);
  std::vector<double> previous, current;
  auto select = [&](const TridiagonalEigen& eig, std::vector<double>& out, double& worst_residual) {
    const std::size_t total = eig.values.size();
    const std::size_t from = end == SpectrumEnd::Smallest ? 0 : total - k;
    out.assign(eig.values.begin() + from, eig.values.begin() + from + k);
    worst_residual = 0.0;
    const double beta = proc.broke_down() ? 0.0 : proc.residual_norm();
    for (std::size_t i = from; i < from + k; ++i) {
      worst_residual = std::max(worst_residual, std::abs(beta * eig.last[i]));
    }
  };

  while (true) {
    proc.expand(true);
    const std::size_t steps = proc.steps();
    const bool exhausted = steps == n;
    if (steps >= k && (exhausted || steps % opts.check_every == 0 || steps == cap)) {
      const auto& t = proc.tridiagonal();
      auto eig = tridiagonal_eigen(t.alpha, t.beta);
      double residual = 0.0;
      select(eig, current, residual);
      if (exhausted) return current;
      if (!previous.empty()) {
        double change = 0.0;
        for (std::size_t i = 0; i < k; ++i) change = std::max(change, std::abs(current[i] - previous[i]));
        if (change < opts.tolerance * scale && residual < opts.residual_tolerance * scale) return current;
      }
      previous = current;
    }
    if (steps >= cap) {
      throw ConvergenceError("extremal_eigenvalues: no convergence after " + std::to_string(steps) + " steps",
                             current);
    }
    if (proc.broke_down()) {
      bool ok = false;
      for (int attempt = 0; attempt < 8 && !ok; ++attempt) ok = proc.restart(random_unit());
      if (!ok) {
        // Numerically the basis already spans everything reachable.
        const auto& t = proc.tridiagonal();
        auto eig = tridiagonal_eigen(t.alpha, t.beta);
        double residual = 0.0;
        if (eig.values.size() < k) throw ConvergenceError("extremal_eigenvalues: basis exhausted", eig.values);
        select(eig, current, residual);
        return current;
      }
    } else {
      proc.advance();
    }
  }
}

struct DenseOptions {
  std::size_t max_n = 20000;
};

/// Dense matrix of the chosen operator, assembled straight from the CSR
/// arrays (not through the matvec).
inline Eigen::MatrixXd dense_matrix(const Graph& g, OperatorKind kind) {
  detail::require_edges(g, kind);
  const std::size_t n = g.n();
  const auto deg = degrees(g);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = g.neighbors(i);
    const auto ws = g.neighbor_weights(i);
    for (std::size_t k = 0; k < cols.size(); ++k) a(i, cols[k]) = ws[k];
  }
  Eigen::MatrixXd out;
  switch (kind) {
    case OperatorKind::Laplacian:
    case OperatorKind::Density: {
      Eigen::VectorXd d(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) d(i) = deg[i];
      out = Eigen::MatrixXd(d.asDiagonal()) - a;
      if (kind == OperatorKind::Density) out /= d.sum();
      break;
    }
    case OperatorKind::NormalizedLaplacian: {
      Eigen::VectorXd s(static_cast<Eigen::Index>(n)), active(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        s(i) = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
        active(i) = deg[i] > 0.0 ? 1.0 : 0.0;
      }
      out = Eigen::MatrixXd(active.asDiagonal()) - s.asDiagonal() * a * s.asDiagonal();
      break;
    }
  }
  return out;
}

/// Full ascending spectrum by a dense symmetric eigensolver. Ground truth for
/// everything else; refuses graphs above `max_n` vertices.
inline std::vector<double> dense_spectrum(const Graph& g, OperatorKind kind, const DenseOptions& opts = {}) {
  if (g.n() > opts.max_n) {
    throw InvalidArgument("dense_spectrum: n=" + std::to_string(g.n()) + " exceeds cap " +
                          std::to_string(opts.max_n));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_matrix(g, kind), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("dense_spectrum: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Dense spectrum of an arbitrary operator, assembled column by column
/// through apply. Meant for small explicit test operators.
inline std::vector<double> dense_spectrum(const LinearOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXd m(n, n);
  std::vector<double> e(op.dim(), 0.0), col(op.dim());
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = col[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// A-priori quadrature error bound for tr(exp(-tL)) after s Lanczos steps:
///   20 exp(-s^2 / (2.5 t))                    for sqrt(2t) <= s <= t,
///   40/t exp(-t/2) (e t / (2 s))^s            for s >= t,
/// and +inf below sqrt(2t). A bound valid for j steps stays valid for more,
/// so the value returned is the running minimum over j in [ceil(sqrt(2t)), s];
/// this keeps it nonincreasing across the switch between the two branches.
inline double lanczos_error_bound(double t, std::size_t s) {
  if (!(t > 0.0)) throw InvalidArgument("lanczos_error_bound: t must be positive");
  if (s < 1) throw InvalidArgument("lanczos_error_bound: s must be at least 1");
  auto branch = [t](double j) {
    if (j >= t) return 40.0 / t * std::exp(-0.5 * t + j * std::log(0.5 * std::exp(1.0) * t / j));
    return 20.0 * std::exp(-j * j / (2.5 * t));
  };
  const double first = std::ceil(std::sqrt(2.0 * t) - 1e-12);
  if (static_cast<double>(s) < first) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (auto j = static_cast<std::size_t>(std::max(1.0, first)); j <= s; ++j) {
    best = std::min(best, branch(static_cast<double>(j)));
  }
  return best;
}

}  // namespace slaq
