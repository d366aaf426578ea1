#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cfa::lp {

/// Thrown when every candidate pivot element falls below the pivot
/// tolerance and the solve cannot make progress.
struct NumericalBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

/// max { c'x : Ax <= b, x >= 0 }.
///
/// The matrix is held through a shared_ptr so that many problems built from
/// the same constraint structure (rolling-horizon assemblies differ only in
/// b and c) can share one allocation.
struct LpProblem {
  Eigen::VectorXd c;
  std::shared_ptr<const Eigen::MatrixXd> A;
  Eigen::VectorXd b;

  static LpProblem dense(Eigen::MatrixXd mat, Eigen::VectorXd rhs,
                         Eigen::VectorXd obj) {
    LpProblem p;
    p.A = std::make_shared<const Eigen::MatrixXd>(std::move(mat));
    p.b = std::move(rhs);
    p.c = std::move(obj);
    return p;
  }

  const Eigen::MatrixXd& matrix() const { return *A; }
  Eigen::Index rows() const { return b.size(); }
  Eigen::Index cols() const { return c.size(); }

  void validate() const {
    if (!A) throw std::invalid_argument("LpProblem: missing matrix");
    if (A->rows() != b.size() || A->cols() != c.size())
      throw std::invalid_argument("LpProblem: dimension mismatch");
    if (b.size() < 1 || c.size() < 1)
      throw std::invalid_argument("LpProblem: empty problem");
    if (!b.allFinite() || !c.allFinite() || !A->allFinite())
      throw std::invalid_argument("LpProblem: non-finite entry");
  }
};

/// Solver outcome. `basis` holds m column indices into the slack-augmented
/// matrix [A | I] (j < n structural, n + i the slack of row i), in basis
/// position order; positions coincide with rows of `basis_inverse`.
struct LpSolution {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> basis;
  Eigen::MatrixXd basis_inverse;
  Eigen::VectorXd duals;
  int diagnostic_row = -1;
  int diagnostic_col = -1;
  int pivots = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-7;
  double obj_tol = 1e-6;
  double pivot_tol = 1e-9;
  double reduced_cost_tol = 1e-9;
  int refactor_interval = 50;
};

/// Optimal basis carried over from an earlier solve of a problem with the
/// identical matrix. The inverse is reused as-is; only feasibility against
/// the new right-hand side is checked.
struct WarmStart {
  std::vector<int> basis;
  Eigen::MatrixXd basis_inverse;
};

namespace detail {

/// Dense revised simplex over [A | I] with an explicitly maintained basis
/// inverse (product-form update, periodic refactorization).
///
/// Pivot rules: Dantzig pricing, switching to Bland's rule after
/// 3*(m+n) consecutive degenerate steps; entering ties break to the lowest
/// column index, ratio-test ties to the lowest row index. The pivot
/// sequence is a deterministic function of the input data.
class RevisedSimplex {
 public:
  RevisedSimplex(const LpProblem& p, const SimplexOptions& opt)
      : p_(p), opt_(opt), m_(static_cast<int>(p.rows())),
        n_(static_cast<int>(p.cols())) {}

  LpSolution solve(const WarmStart* warm) {
    if (warm != nullptr && try_warm_start(*warm)) {
      // feasible basis supplied: go straight to phase 2
    } else if (!init_slack_basis()) {
      int rc = run_phase1();
      if (rc >= 0) return infeasible_solution(rc);
    }
    return run_phase2();
  }

 private:
  const LpProblem& p_;
  SimplexOptions opt_;
  int m_, n_;

  // basis[k] is the global column id at position k; positions track rows of
  // Binv_. Ids: [0,n) structural, [n,n+m) slacks, >= n+m artificials.
  std::vector<int> basis_;
  Eigen::MatrixXd Binv_;
  Eigen::VectorXd xB_;
  std::vector<int> artificial_row_;  // row carrying artificial k
  int total_pivots_ = 0;
  int degenerate_streak_ = 0;
  int pivots_since_refactor_ = 0;

  bool is_artificial(int j) const { return j >= n_ + m_; }

  // Column of the augmented matrix in global id space.
  Eigen::VectorXd column(int j) const {
    if (j < n_) return p_.matrix().col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    if (j < n_ + m_)
      e(j - n_) = 1.0;
    else
      e(artificial_row_[static_cast<std::size_t>(j - n_ - m_)]) = -1.0;
    return e;
  }

  double phase2_cost(int j) const { return j < n_ ? p_.c(j) : 0.0; }
  double phase1_cost(int j) const { return is_artificial(j) ? -1.0 : 0.0; }

  bool init_slack_basis() {
    basis_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    Binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xB_ = p_.b;
    return xB_.minCoeff() >= -opt_.feas_tol;
  }

  bool try_warm_start(const WarmStart& warm) {
    if (static_cast<int>(warm.basis.size()) != m_) return false;
    for (int j : warm.basis)
      if (j < 0 || j >= n_ + m_) return false;
    Eigen::VectorXd xb = warm.basis_inverse * p_.b;
    if (xb.minCoeff() < -opt_.feas_tol) return false;
    basis_ = warm.basis;
    Binv_ = warm.basis_inverse;
    xB_ = std::move(xb);
    return true;
  }

  // Rows with negative b get an artificial column -e_i so the start basis
  // is feasible for the phase-1 problem max -sum(a).
  int run_phase1() {
    artificial_row_.clear();
    for (int i = 0; i < m_; ++i) {
      if (p_.b(i) < -opt_.feas_tol) {
        basis_[static_cast<std::size_t>(i)] =
            n_ + m_ + static_cast<int>(artificial_row_.size());
        artificial_row_.push_back(i);
        Binv_(i, i) = -1.0;
        xB_(i) = -p_.b(i);
      } else if (p_.b(i) < 0.0) {
        xB_(i) = 0.0;
      }
    }
    iterate(/*phase1=*/true);
    double residual = 0.0;
    int worst_row = -1;
    for (int k = 0; k < m_; ++k) {
      if (is_artificial(basis_[static_cast<std::size_t>(k)]) &&
          xB_(k) > residual) {
        residual = xB_(k);
        worst_row = k;
      }
    }
    if (residual > opt_.feas_tol) return worst_row;
    expel_artificials();
    return -1;
  }

  // Any artificial still basic sits at value ~0; swap it for a real column
  // with a usable tableau entry. [A|I] has full row rank, so a slack entry
  // always exists unless the inverse row has decayed numerically.
  void expel_artificials() {
    for (int k = 0; k < m_; ++k) {
      if (!is_artificial(basis_[static_cast<std::size_t>(k)])) continue;
      int chosen = -1;
      double entry = 0.0;
      for (int j = 0; j < n_ + m_ && chosen < 0; ++j) {
        if (in_basis(j)) continue;
        double d = j < n_ ? Binv_.row(k).dot(p_.matrix().col(j))
                          : Binv_(k, j - n_);
        if (std::abs(d) > opt_.pivot_tol) {
          chosen = j;
          entry = d;
        }
      }
      if (chosen < 0)
        throw NumericalBreakdown(
            "phase 1: cannot expel artificial from basis row " +
            std::to_string(k));
      Eigen::VectorXd d = Binv_ * column(chosen);
      d(k) = entry;  // guard against cancellation in the recomputed entry
      apply_pivot(k, chosen, d, 0.0);
    }
    artificial_row_.clear();
  }

  bool in_basis(int j) const {
    for (int v : basis_)
      if (v == j) return true;
    return false;
  }

  LpSolution infeasible_solution(int row) {
    LpSolution s;
    s.status = SolveStatus::Infeasible;
    s.diagnostic_row = row;
    s.pivots = total_pivots_;
    return s;
  }

  LpSolution run_phase2() {
    int unbounded_col = iterate(/*phase1=*/false);
    LpSolution s;
    s.pivots = total_pivots_;
    if (unbounded_col >= 0) {
      s.status = SolveStatus::Unbounded;
      s.diagnostic_col = unbounded_col;
      return s;
    }
    s.status = SolveStatus::Optimal;
    s.basis = basis_;
    s.basis_inverse = Binv_;
    // Recompute basic values from the returned inverse so the published
    // solution satisfies x_B = Binv b exactly.
    Eigen::VectorXd xb = Binv_ * p_.b;
    s.x = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd cB(m_);
    for (int k = 0; k < m_; ++k) {
      int j = basis_[static_cast<std::size_t>(k)];
      cB(k) = phase2_cost(j);
      if (j < n_) s.x(j) = xb(k);
    }
    s.duals = Binv_.transpose() * cB;
    s.objective = p_.c.dot(s.x);
    return s;
  }

  // Core pricing/ratio/pivot loop. Returns -1 on convergence, or the
  // entering column id when no ratio row blocks (phase-2 unboundedness).
  int iterate(bool phase1) {
    const Eigen::MatrixXd& A = p_.matrix();
    const long max_pivots = 200L * (m_ + n_) + 1000;
    Eigen::VectorXd y(m_), rc_structural(n_), cB(m_);
    for (;;) {
      if (total_pivots_ > max_pivots)
        throw NumericalBreakdown("pivot limit exceeded; cycling suspected");

      for (int k = 0; k < m_; ++k)
        cB(k) = phase1 ? phase1_cost(basis_[static_cast<std::size_t>(k)])
                       : phase2_cost(basis_[static_cast<std::size_t>(k)]);
      y.noalias() = Binv_.transpose() * cB;
      rc_structural.noalias() = p_.c * (phase1 ? 0.0 : 1.0);
      rc_structural.noalias() -= A.transpose() * y;

      bool bland = degenerate_streak_ >= 3 * (m_ + n_);
      int enter = -1;
      if (bland) {
        // lowest-index rule: guaranteed to break any cycle
        for (int j = 0; j < n_ + m_ && enter < 0; ++j) {
          double rc = j < n_ ? rc_structural(j) : -y(j - n_);
          if (rc > opt_.reduced_cost_tol) enter = j;
        }
      } else {
        // Dantzig: most positive reduced cost, ties to the lowest index
        double best = opt_.reduced_cost_tol;
        for (int j = 0; j < n_; ++j) {
          if (rc_structural(j) > best) {
            best = rc_structural(j);
            enter = j;
          }
        }
        for (int i = 0; i < m_; ++i) {
          if (-y(i) > best) {
            best = -y(i);
            enter = n_ + i;
          }
        }
      }
      if (enter < 0) return -1;

      Eigen::VectorXd d =
          enter < n_ ? Eigen::VectorXd(Binv_ * A.col(enter))
                     : Eigen::VectorXd(Binv_.col(enter - n_));

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int k = 0; k < m_; ++k) {
        bool basic_artificial =
            is_artificial(basis_[static_cast<std::size_t>(k)]);
        double dk = d(k);
        if (dk > opt_.pivot_tol) {
          double ratio = std::max(xB_(k), 0.0) / dk;
          if (ratio < best_ratio) {
            best_ratio = ratio;
            leave = k;
          }
        } else if (!phase1 && basic_artificial && dk < -opt_.pivot_tol) {
          // a leftover artificial must never grow above zero
          if (0.0 < best_ratio) {
            best_ratio = 0.0;
            leave = k;
          }
        }
      }
      if (leave < 0) return enter;

      double step = best_ratio;
      apply_pivot(leave, enter, d, step);
      if (step < 1e-12)
        ++degenerate_streak_;
      else
        degenerate_streak_ = 0;
    }
  }

  void apply_pivot(int leave, int enter, const Eigen::VectorXd& d,
                   double step) {
    double dr = d(leave);
    if (std::abs(dr) < opt_.pivot_tol)
      throw NumericalBreakdown("pivot element below tolerance");
    Eigen::RowVectorXd new_row = Binv_.row(leave) / dr;
    Binv_.noalias() -= d * new_row;
    Binv_.row(leave) = new_row;
    xB_ -= step * d;
    xB_(leave) = step;
    basis_[static_cast<std::size_t>(leave)] = enter;
    ++total_pivots_;
    if (++pivots_since_refactor_ >= opt_.refactor_interval) refactorize();
  }

  void refactorize() {
    Eigen::MatrixXd B(m_, m_);
    for (int k = 0; k < m_; ++k)
      B.col(k) = column(basis_[static_cast<std::size_t>(k)]);
    Binv_ = B.partialPivLu().inverse();
    xB_ = Binv_ * p_.b;
    // artificial columns are -e_i, so b needs no adjustment
    for (int k = 0; k < m_; ++k)
      if (xB_(k) < 0.0 && xB_(k) > -opt_.feas_tol) xB_(k) = 0.0;
    pivots_since_refactor_ = 0;
  }
};

}  // namespace detail

inline LpSolution solve(const LpProblem& p, const SimplexOptions& opt = {}) {
  p.validate();
  detail::RevisedSimplex s(p, opt);
  return s.solve(nullptr);
}

/// Re-solve a problem whose matrix is bit-identical to the one that produced
/// `warm`. Falls back to a cold solve when the supplied basis is infeasible
/// for the new right-hand side.
inline LpSolution solve(const LpProblem& p, const WarmStart& warm,
                        const SimplexOptions& opt = {}) {
  p.validate();
  detail::RevisedSimplex s(p, opt);
  return s.solve(&warm);
}

/// Row i gives the sensitivity of the i-th basic variable to b. Nonbasic
/// structural variables have zero sensitivity by convention.
inline const Eigen::MatrixXd& basic_value_sensitivity(const LpSolution& s) {
  if (s.status != SolveStatus::Optimal)
    throw std::invalid_argument(
        "basic_value_sensitivity requires an optimal solution");
  return s.basis_inverse;
}

}  // namespace cfa::lp
