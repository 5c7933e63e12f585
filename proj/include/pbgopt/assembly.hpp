#pragma once

#include <complex>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pbgopt/lattice.hpp"

namespace pbg {

using cplx = std::complex<double>;
using ComplexSparse = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
using RealSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class Polarization { TE, TM };

std::string_view to_string(Polarization pol);
Polarization parse_polarization(std::string_view text);

struct ElementMatrices {
  Eigen::Matrix4cd stiffness;  // int ((grad + ik) phi_p)^* . (grad + ik) phi_q
  Eigen::Matrix4d mass;        // int phi_p phi_q
};

/// Bilinear square element of side h under 2x2 Gauss quadrature. Local vertex order
/// matches Grid::cell_dofs. Independent of the cell position.
ElementMatrices element_matrices(double h, const Eigen::Vector2d& k);

/// Sparse matrices sharing one sparsity pattern, combined with per-term weights.
///
/// Evaluating sum_i w_i T_i touches each stored value once, in term order, so repeated
/// evaluations are bit-identical.
template <typename Scalar>
class AffineSum {
public:
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;

  AffineSum() = default;
  explicit AffineSum(std::vector<Matrix> terms);

  const std::vector<Matrix>& terms() const { return terms_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(terms_.size()); }
  Matrix combine(const Eigen::VectorXd& weights) const;

private:
  std::vector<Matrix> terms_;
  Matrix pattern_;
  std::vector<std::vector<int>> slot_;  // term nonzero -> pattern value index
};

/// Affine representation of the Bloch operators at one wavevector.
///
/// TE: A(eps, k) = sum_i (1/eps_i) stiffness_terms[i], M fixed.
/// TM: A(k) fixed, M(eps) = sum_i eps_i mass_terms[i].
struct AffineOperatorFamily {
  Polarization polarization = Polarization::TM;
  Eigen::Vector2d k = Eigen::Vector2d::Zero();
  int dof_count = 0;

  AffineSum<cplx> stiffness_terms;  // TE only
  RealSparse mass;                  // TE only
  ComplexSparse stiffness;          // TM only
  AffineSum<double> mass_terms;     // TM only

  int term_count() const;
};

AffineOperatorFamily assemble_family(const Grid& grid, const SymmetryMap& map,
                                     const Eigen::Vector2d& k, Polarization pol);

struct EvaluatedOperators {
  ComplexSparse A;
  RealSparse M;
};

/// Throws InvalidArgument if the design size or bounds do not fit the family.
EvaluatedOperators evaluate(const AffineOperatorFamily& family, const DielectricDesign& design);

/// Weights applied to the affine terms for a design: 1/eps for TE, eps for TM.
Eigen::VectorXd affine_weights(Polarization pol, const Eigen::VectorXd& eps);

/// Upper-triangle-then-mirror assembly of element matrices with a per-cell weight.
/// Cells with weight exactly zero are skipped.
ComplexSparse assemble_stiffness(const Grid& grid, const Eigen::Vector2d& k,
                                 const Eigen::VectorXd& cell_weight);
RealSparse assemble_mass(const Grid& grid, const Eigen::VectorXd& cell_weight);

/// One "row col re im" line per stored entry, 0-based, 17 significant digits.
void write_triplets(std::ostream& out, const ComplexSparse& m);
void write_triplets(std::ostream& out, const RealSparse& m);

}  // namespace pbg
