#include "pbgopt/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <lapacke.h>

#include "pbgopt/error.hpp"

namespace pbg {

namespace {

void check_request(Eigen::Index n, Eigen::Index mass_rows, int m_max) {
  if (mass_rows != n) throw InvalidArgument("solve_gevp: A and M differ in size");
  if (m_max < 1 || m_max > n) {
    throw InvalidArgument("solve_gevp: m_max=" + std::to_string(m_max) + " outside [1, " +
                          std::to_string(n) + "]");
  }
}

void fill_residuals(EigenSolution& sol, const auto& A, const auto& M) {
  sol.residual_norms.resize(sol.size());
  for (int j = 0; j < sol.size(); ++j) {
    const Eigen::VectorXcd u = sol.eigenvectors.col(j);
    const Eigen::VectorXcd r = A * u - sol.eigenvalues[j] * (M * u);
    sol.residual_norms[j] = r.norm();
  }
}

EigenSolution dense_subset(Eigen::MatrixXcd a, Eigen::MatrixXcd b, int m_max) {
  const auto n = static_cast<lapack_int>(a.rows());
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd z(n, m_max);
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_zhegvx(
      LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()),
      n, reinterpret_cast<lapack_complex_double*>(b.data()), n, 0.0, 0.0, 1, m_max, abstol,
      &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()), n, ifail.data());
  if (info > n) {
    throw NumericalError("solve_gevp: mass matrix is not positive definite (leading minor " +
                         std::to_string(info - n) + ")");
  }
  if (info != 0 || found != m_max) {
    throw NumericalError("solve_gevp: dense eigensolver failed (info=" + std::to_string(info) +
                         ")");
  }
  EigenSolution sol;
  sol.eigenvalues = w.head(m_max);
  sol.eigenvectors = std::move(z);
  return sol;
}

// Block Lanczos on (A - sigma M)^{-1} M in the M inner product with full
// reorthogonalization. A block of starting vectors is needed: a single Krylov sequence
// sees only one copy of each degenerate eigenvalue, and square lattices are full of them.
// The basis is enlarged in place until the wanted Ritz pairs converge.
EigenSolution shift_invert(const ComplexSparse& A, const RealSparse& M, int m_max,
                           double tol) {
  const Eigen::Index n = A.rows();
  const ComplexSparse Mc = M.cast<cplx>();

  double diag_a = 0.0;
  double diag_m = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    diag_a += A.coeff(i, i).real();
    diag_m += M.coeff(i, i);
  }
  if (!(diag_m > 0.0)) throw NumericalError("solve_gevp: mass matrix has non-positive trace");
  // A is positive semidefinite, so any negative shift gives a definite factorization.
  const double sigma = -1e-2 * std::max(diag_a / diag_m, 1e-3);

  const ComplexSparse shifted = A - sigma * Mc;
  Eigen::SimplicialLDLT<ComplexSparse, Eigen::Upper> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw NumericalError("solve_gevp: factorization of the shifted operator failed");
  }

  const Eigen::Index block = std::min<Eigen::Index>(n, 8);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXcd start(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) start(i, j) = cplx(unif(rng), unif(rng));

  Eigen::Index basis = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * m_max + 2 * block, 48));
  Eigen::MatrixXcd V(n, basis);    // M-orthonormal
  Eigen::MatrixXcd MV(n, basis);
  Eigen::MatrixXcd KMV(n, basis);  // (A - sigma M)^{-1} M V
  Eigen::Index cols = 0;
  Eigen::Index solved = 0;    // columns with KMV known
  Eigen::Index expanded = 0;  // columns whose image has been fed back into the basis

  // M-orthogonalizes x against the basis; appends it if anything independent is left.
  auto append = [&](Eigen::VectorXcd x) {
    const double before = std::sqrt(std::max(x.dot(Mc * x).real(), 0.0));
    for (int pass = 0; pass < 2; ++pass) {
      if (cols > 0) x -= V.leftCols(cols) * (MV.leftCols(cols).adjoint() * x);
    }
    const Eigen::VectorXcd mx = Mc * x;
    const double norm = std::sqrt(std::max(x.dot(mx).real(), 0.0));
    if (!(norm > 1e-10 * before)) return;
    V.col(cols) = x / norm;
    MV.col(cols) = mx / norm;
    ++cols;
  };

  for (Eigen::Index j = 0; j < block; ++j) append(start.col(j));
  for (;;) {
    // Grow the block Krylov space up to the current basis size.
    while (cols < basis && expanded < cols) {
      const Eigen::Index end = cols;
      for (; solved < end; ++solved) KMV.col(solved) = factor.solve(MV.col(solved));
      for (; expanded < end && cols < basis; ++expanded) append(KMV.col(expanded));
    }
    for (; solved < cols; ++solved) KMV.col(solved) = factor.solve(MV.col(solved));

    Eigen::MatrixXcd T = MV.leftCols(cols).adjoint() * KMV.leftCols(cols);
    T = (0.5 * (T + T.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(T);
    if (ritz.info() != Eigen::Success) throw NumericalError("solve_gevp: Ritz solve failed");

    const int wanted = m_max;
    if (cols >= wanted) {
      EigenSolution sol;
      sol.eigenvalues.resize(wanted);
      sol.eigenvectors.resize(n, wanted);
      bool converged = true;
      for (int j = 0; j < wanted; ++j) {
        const Eigen::Index col = cols - 1 - j;
        const double theta = ritz.eigenvalues()[col];
        const double lambda = sigma + 1.0 / theta;
        Eigen::VectorXcd x = V.leftCols(cols) * ritz.eigenvectors().col(col);
        x /= std::sqrt(x.dot(Mc * x).real());
        const Eigen::VectorXcd mx = Mc * x;
        const Eigen::VectorXcd ax = A * x;
        // The shift keeps the scale honest for the zero mode at Gamma.
        const double scale = ax.norm() + (std::abs(lambda) + std::abs(sigma)) * mx.norm();
        if ((ax - lambda * mx).norm() > tol * scale) converged = false;
        sol.eigenvalues[j] = lambda;
        sol.eigenvectors.col(j) = x;
      }
      if (converged || cols == n) return sol;
    }
    if (cols < basis || basis == n) {
      throw NumericalError("solve_gevp: shift-invert Lanczos did not converge");
    }
    basis = std::min<Eigen::Index>(n, 2 * basis);
    V.conservativeResize(n, basis);
    MV.conservativeResize(n, basis);
    KMV.conservativeResize(n, basis);
  }
}

}  // namespace

EigenSolution solve_gevp(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M, int m_max) {
  if (A.rows() != A.cols() || M.rows() != M.cols()) {
    throw InvalidArgument("solve_gevp: matrices must be square");
  }
  check_request(A.rows(), M.rows(), m_max);
  EigenSolution sol = dense_subset(A, M, m_max);
  const Eigen::MatrixXcd Af = A.selfadjointView<Eigen::Upper>();
  const Eigen::MatrixXcd Mf = M.selfadjointView<Eigen::Upper>();
  fill_residuals(sol, Af, Mf);
  return sol;
}

EigenSolution solve_gevp(const ComplexSparse& A, const RealSparse& M, int m_max,
                         const EigOptions& options) {
  if (A.rows() != A.cols() || M.rows() != M.cols()) {
    throw InvalidArgument("solve_gevp: matrices must be square");
  }
  check_request(A.rows(), M.rows(), m_max);
  const bool dense = options.method == EigMethod::dense ||
                     (options.method == EigMethod::automatic && A.rows() <= options.dense_limit);
  EigenSolution sol;
  if (dense) {
    sol = dense_subset(Eigen::MatrixXcd(A), Eigen::MatrixXcd(M.cast<cplx>()), m_max);
  } else {
    sol = shift_invert(A, M, m_max, options.tol);
  }
  fill_residuals(sol, A, M);
  return sol;
}

}  // namespace pbg
