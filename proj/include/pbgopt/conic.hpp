#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pbg::conic {

/// Linear matrix inequality constant + sum_i y_i coeffs[i] >= 0 (real symmetric blocks).
struct PsdBlock {
  Eigen::MatrixXd constant;
  std::vector<Eigen::MatrixXd> coeffs;
};

/// maximize objective . y
/// subject to  every PsdBlock is positive semidefinite,
///             lp_constant + lp_coeffs * y >= 0 componentwise,
///             eq_matrix * y == eq_rhs.
struct Problem {
  Eigen::VectorXd objective;
  std::vector<PsdBlock> psd;
  Eigen::VectorXd lp_constant;
  Eigen::MatrixXd lp_coeffs;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;

  Eigen::Index num_vars() const { return objective.size(); }
};

enum class Status { optimal, near_optimal, infeasible, unbounded, numerical_failure };

std::string_view to_string(Status status);

struct Options {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  // Below this multiple of the tolerances an unfinished run is reported near-optimal.
  double near_optimal_factor = 1e3;
  int max_iterations = 200;
};

struct Solution {
  Status status = Status::numerical_failure;
  Eigen::VectorXd y;
  double objective = 0.0;
  double primal_residual = 0.0;  // relative, constraint side of the LMI form
  double dual_residual = 0.0;    // relative, multiplier side
  double gap = 0.0;              // relative duality gap
  int iterations = 0;
};

/// Primal-dual interior-point method (HKM direction, Mehrotra predictor-corrector) applied
/// after eliminating the equality constraints. Never throws for infeasible or unbounded
/// instances; those come back as statuses. Throws InvalidArgument on malformed input.
Solution solve(const Problem& problem, const Options& options = {});

/// Smallest eigenvalue over all PSD blocks and LP rows at y (negative means violated),
/// together with the largest equality violation.
struct Violation {
  double min_eigenvalue = 0.0;
  double equality = 0.0;
};
Violation constraint_violation(const Problem& problem, const Eigen::VectorXd& y);

}  // namespace pbg::conic
