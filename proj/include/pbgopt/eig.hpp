#pragma once

#include <Eigen/Core>

#include "pbgopt/assembly.hpp"

namespace pbg {

/// Lowest eigenpairs of A u = lambda M u, ascending, columns M-orthonormal.
struct EigenSolution {
  Eigen::Vector2d k = Eigen::Vector2d::Zero();
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd residual_norms;  // ||A u - lambda M u||_2 per pair

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

enum class EigMethod { automatic, dense, shift_invert };

struct EigOptions {
  EigMethod method = EigMethod::automatic;
  int dense_limit = 512;  // automatic: dense at or below this many dofs
  double tol = 1e-8;       // shift-invert Ritz convergence, relative
};

/// Throws InvalidArgument when m_max is outside [1, N] or the shapes disagree, and
/// NumericalError when M is not positive definite or the iteration does not converge.
EigenSolution solve_gevp(const ComplexSparse& A, const RealSparse& M, int m_max,
                         const EigOptions& options = {});

/// Dense entry point; A and M are read from their upper triangles.
EigenSolution solve_gevp(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M, int m_max);

}  // namespace pbg
