#pragma once

#include <vector>

#include "formset/matcore.hpp"

namespace formset {

/// Convex quadratic program
///   min 1/2 x'Qx + q'x
///   s.t. eq_mat x = eq_rhs,  ineq_mat x <= ineq_rhs,  lower <= x <= upper.
/// Bounds are optional (empty vectors). Q must be symmetric positive
/// definite; positive semidefinite problems need caller-side regularization.
struct QpProblem {
  Matrix quadratic;
  Vector linear;
  Matrix eq_mat;
  Vector eq_rhs;
  Matrix ineq_mat;
  Vector ineq_rhs;
  Vector lower;
  Vector upper;

  Eigen::Index num_vars() const { return quadratic.rows(); }
};

enum class QpStatus { optimal, infeasible, iteration_limit };

struct QpResult {
  QpStatus status = QpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  Vector eq_multipliers;
  Vector ineq_multipliers;          // >= 0, aligned with ineq rows
  std::vector<int> active_set;      // binding inequality rows
  double kkt_residual = 0.0;        // scaled stationarity + feasibility defect
  int iterations = 0;
};

/// Dual active-set solve (Goldfarb–Idnani). Starts from the unconstrained
/// minimizer and adds violated constraints until dual feasibility; detects
/// primal infeasibility without a phase-1 problem.
QpResult qp_solve(const QpProblem& p);

}  // namespace formset
