#pragma once

// Small dense two-phase simplex with Bland's rule.
//
//   optimize  c'x   subject to  A x = b,  x >= l   (l_j may be -inf)
//
// Variables with a finite bound are shifted to x = l + z; free variables are
// split as x = u - v. Infeasible programs return Farkas row multipliers y
// with y'A_j <= 0 (= 0 for free columns) and y'(b - A l) > 0; unbounded
// programs return an improving ray d with A d = 0.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "optspan/error.hpp"

namespace optspan::lp {

enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

/// Every tolerance the solver uses.
struct Tolerances {
  /// Scaled by max(1, largest entry of the entering column of [A | I]).
  double pivot = 1e-9;
  double optimality = 1e-10;
  double feasibility = 1e-9;
  double ratio_tie = 1e-12;
};

template <class Scalar = double>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Sense sense = Sense::Minimize;
  Vector objective;
  Matrix equalities;
  Vector rhs;
  Vector lower_bounds;

  Eigen::Index num_variables() const { return objective.size(); }
  Eigen::Index num_constraints() const { return equalities.rows(); }

  static Scalar free() { return -std::numeric_limits<Scalar>::infinity(); }
};

template <class Scalar = double>
struct Result {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Status status = Status::Infeasible;
  Scalar value = Scalar(0);
  Vector primal;
  /// Equality multipliers at the optimum (sensitivity of the value to b).
  Vector duals;
  /// Farkas row multipliers when infeasible; improving ray when unbounded.
  Vector certificate;

  bool optimal() const { return status == Status::Optimal; }
};

namespace detail {

template <class Scalar>
class Tableau {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tableau(const Matrix& a, const Vector& b, const Tolerances& tol)
      : m_(a.rows()), n_(a.cols()), tol_(tol), t_(Matrix::Zero(a.rows() + 1, a.cols() + a.rows() + 1)) {
    t_.topLeftCorner(m_, n_) = a;
    t_.block(0, n_, m_, m_).setIdentity();
    t_.topRightCorner(m_, 1) = b;
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    allowed_.assign(static_cast<std::size_t>(n_ + m_), true);
    original_ = t_.topRows(m_);
    col_scale_ = Vector::Ones(n_ + m_);
    for (Eigen::Index j = 0; j < n_ + m_ && m_ > 0; ++j) {
      col_scale_[j] = std::max(Scalar(1), original_.col(j).cwiseAbs().maxCoeff());
    }
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index structural() const { return n_; }
  Eigen::Index rhs_col() const { return n_ + m_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  bool is_artificial(Eigen::Index j) const { return j >= n_; }
  Scalar entry(Eigen::Index i, Eigen::Index j) const { return t_(i, j); }
  Scalar rhs(Eigen::Index i) const { return t_(i, rhs_col()); }
  void forbid(Eigen::Index j) { allowed_[static_cast<std::size_t>(j)] = false; }

  /// Rebuild the objective row for costs over all n + m columns.
  void set_costs(const Vector& costs) {
    cost_ = costs;
    t_.row(m_).setZero();
    t_.row(m_).head(n_ + m_) = costs.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Scalar cb = costs[basis_[static_cast<std::size_t>(i)]];
      if (cb != Scalar(0)) t_.row(m_) -= cb * t_.row(i);
    }
  }

  /// Objective value of the current basic solution.
  Scalar value() const { return -t_(m_, rhs_col()); }

  /// Runs Bland's rule to optimality. Returns the unbounded entering column
  /// or -1 at optimality.
  Eigen::Index run() {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (allowed_[static_cast<std::size_t>(j)] && t_(m_, j) < -Scalar(tol_.optimality)) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return -1;

      Eigen::Index leave = -1;
      Scalar best = Scalar(0);
      for (Eigen::Index i = 0; i < m_; ++i) {
        const Scalar a = t_(i, enter);
        if (a <= Scalar(tol_.pivot) * col_scale_[enter]) continue;
        const Scalar ratio = t_(i, rhs_col()) / a;
        if (leave < 0) {
          leave = i;
          best = ratio;
          continue;
        }
        const Scalar slack = Scalar(tol_.ratio_tie) * (Scalar(1) + std::abs(best));
        if (ratio < best - slack ||
            (ratio <= best + slack && basis_[static_cast<std::size_t>(i)] <
                                          basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return enter;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index s) {
    const Scalar piv = t_(r, s);
    t_.row(r) /= piv;
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const Scalar factor = t_(i, s);
      if (factor != Scalar(0)) t_.row(i) -= factor * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = s;
  }

  /// Rebuilds every row from the original data and the current basis, which
  /// discards rounding accumulated by the pivots. Returns false if the basis
  /// matrix is numerically singular.
  bool refactor() {
    Matrix bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) bm.col(i) = original_.col(basis_[static_cast<std::size_t>(i)]);
    const Eigen::FullPivLU<Matrix> lu(bm);
    if (!lu.isInvertible()) return false;
    t_.topRows(m_) = lu.solve(original_);
    for (Eigen::Index i = 0; i < m_; ++i) t_.col(basis_[static_cast<std::size_t>(i)]).head(m_) = Vector::Unit(m_, i);
    set_costs(cost_);
    return true;
  }

  Scalar min_rhs() const { return m_ > 0 ? t_.col(rhs_col()).head(m_).minCoeff() : Scalar(0); }

  /// Basis matrix over the augmented columns [A | I].
  Matrix basis_matrix(const Matrix& a) const {
    Matrix bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        bm.col(i) = a.col(j);
      } else {
        bm.col(i) = Vector::Unit(m_, j - n_);
      }
    }
    return bm;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Tolerances tol_;
  Matrix t_;
  Matrix original_;
  Vector col_scale_;
  Vector cost_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> allowed_;
};

}  // namespace detail

template <class Scalar>
Result<Scalar> solve(const LinearProgram<Scalar>& lp, const Tolerances& tol = {}) {
  using Vector = typename LinearProgram<Scalar>::Vector;
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  using Eigen::Index;

  const Index n = lp.num_variables();
  const Index m = lp.num_constraints();
  require(n >= 1, ErrorCode::MalformedProgram, "program has no variables");
  require(lp.equalities.cols() == n || m == 0, ErrorCode::MalformedProgram,
          "constraint matrix has " + std::to_string(lp.equalities.cols()) + " columns for " +
              std::to_string(n) + " variables");
  require(lp.rhs.size() == m, ErrorCode::MalformedProgram, "rhs length differs from row count");
  require(lp.lower_bounds.size() == n, ErrorCode::MalformedProgram,
          "lower bound length differs from variable count");
  require(lp.objective.allFinite() && (m == 0 || lp.equalities.allFinite()) && lp.rhs.allFinite(),
          ErrorCode::MalformedProgram, "program coefficients must be finite");
  for (Index j = 0; j < n; ++j) {
    const Scalar l = lp.lower_bounds[j];
    require(!std::isnan(l) && l != std::numeric_limits<Scalar>::infinity(),
            ErrorCode::MalformedProgram, "lower bounds must be finite or -inf");
  }

  // Column map to standard form.
  std::vector<Index> pos(static_cast<std::size_t>(n));
  std::vector<Index> neg(static_cast<std::size_t>(n), -1);
  Index cols = 0;
  for (Index j = 0; j < n; ++j) {
    pos[static_cast<std::size_t>(j)] = cols++;
    if (std::isinf(lp.lower_bounds[j])) neg[static_cast<std::size_t>(j)] = cols++;
  }
  const Scalar direction = lp.sense == Sense::Maximize ? Scalar(-1) : Scalar(1);

  Matrix a = Matrix::Zero(m, cols);
  Vector c = Vector::Zero(cols);
  Vector b = lp.rhs;
  for (Index j = 0; j < n; ++j) {
    const Index p = pos[static_cast<std::size_t>(j)];
    const Index q = neg[static_cast<std::size_t>(j)];
    if (m > 0) a.col(p) = lp.equalities.col(j);
    c[p] = direction * lp.objective[j];
    if (q >= 0) {
      if (m > 0) a.col(q) = -lp.equalities.col(j);
      c[q] = -c[p];
    } else if (m > 0) {
      b -= lp.lower_bounds[j] * lp.equalities.col(j);
    }
  }
  Vector sign = Vector::Ones(m);
  for (Index i = 0; i < m; ++i) {
    if (b[i] < Scalar(0)) {
      sign[i] = Scalar(-1);
      a.row(i) *= Scalar(-1);
      b[i] = -b[i];
    }
  }

  detail::Tableau<Scalar> tab(a, b, tol);
  auto to_original = [&](const Vector& z, bool shift) {
    Vector x(n);
    for (Index j = 0; j < n; ++j) {
      const Index p = pos[static_cast<std::size_t>(j)];
      const Index q = neg[static_cast<std::size_t>(j)];
      x[j] = q >= 0 ? z[p] - z[q] : (shift ? lp.lower_bounds[j] : Scalar(0)) + z[p];
    }
    return x;
  };

  Result<Scalar> result;

  // Phase one: minimize the sum of artificials.
  Vector phase_one = Vector::Zero(cols + m);
  phase_one.tail(m).setOnes();
  tab.set_costs(phase_one);
  tab.run();
  require(m == 0 || tab.refactor(), ErrorCode::NumericalFailure, "phase one ended on a singular basis");
  const Scalar scale = std::max(Scalar(1), m > 0 ? b.cwiseAbs().maxCoeff() : Scalar(0));
  if (tab.value() > Scalar(tol.feasibility) * scale) {
    const Matrix bm = tab.basis_matrix(a);
    Vector cb(m);
    for (Index i = 0; i < m; ++i) cb[i] = phase_one[tab.basis()[static_cast<std::size_t>(i)]];
    const Vector y = bm.transpose().partialPivLu().solve(cb);
    result.status = Status::Infeasible;
    result.certificate = sign.cwiseProduct(y);
    return result;
  }

  // Drive zero-level artificials out of the basis; rows where that fails are redundant.
  for (Index i = 0; i < m; ++i) {
    const Index j = tab.basis()[static_cast<std::size_t>(i)];
    if (!tab.is_artificial(j)) continue;
    Index best = -1;
    for (Index k = 0; k < cols; ++k) {
      if (std::abs(tab.entry(i, k)) > Scalar(tol.pivot) &&
          (best < 0 || std::abs(tab.entry(i, k)) > std::abs(tab.entry(i, best)))) {
        best = k;
      }
    }
    if (best >= 0) tab.pivot(i, best);
  }
  for (Index j = cols; j < cols + m; ++j) tab.forbid(j);

  // Phase two.
  Vector costs = Vector::Zero(cols + m);
  costs.head(cols) = c;
  tab.set_costs(costs);
  Index ray_col = tab.run();
  // Refactor and resume until the rebuilt tableau is still optimal.
  for (int round = 0; round < 3 && ray_col < 0 && m > 0; ++round) {
    require(tab.refactor(), ErrorCode::NumericalFailure, "phase two ended on a singular basis");
    require(tab.min_rhs() >= -Scalar(tol.feasibility) * scale, ErrorCode::NumericalFailure,
            "basic solution is infeasible after refactoring");
    const Scalar before = tab.value();
    ray_col = tab.run();
    if (tab.value() == before) break;
  }

  if (ray_col >= 0) {
    Vector z = Vector::Zero(cols);
    z[ray_col] = Scalar(1);
    for (Index i = 0; i < m; ++i) {
      const Index j = tab.basis()[static_cast<std::size_t>(i)];
      if (j < cols) z[j] = -tab.entry(i, ray_col);
    }
    result.status = Status::Unbounded;
    result.certificate = to_original(z, false);
    return result;
  }

  // Recompute the basic solution from the original data.
  Vector z = Vector::Zero(cols);
  Vector y = Vector::Zero(m);
  if (m > 0) {
    const Matrix bm = tab.basis_matrix(a);
    const auto lu = bm.partialPivLu();
    const Vector xb = lu.solve(b);
    Vector cb(m);
    for (Index i = 0; i < m; ++i) {
      const Index j = tab.basis()[static_cast<std::size_t>(i)];
      if (j < cols) z[j] = std::max(Scalar(0), xb[i]);
      cb[i] = costs[j];
    }
    y = bm.transpose().partialPivLu().solve(cb);
  }
  result.status = Status::Optimal;
  result.primal = to_original(z, true);
  result.value = lp.objective.dot(result.primal);
  result.duals = direction * sign.cwiseProduct(y);
  return result;
}

}  // namespace optspan::lp
