#pragma once

#include <vector>

#include <Eigen/Core>

#include "pbgopt/assembly.hpp"
#include "pbgopt/bands.hpp"

namespace pbg {

struct SubspaceDims {
  int a = 1;
  int b = 1;
  bool a_saturated = false;  // every eigenvalue up to band m fell inside the r_l window
  bool b_saturated = false;  // ran out of computed eigenvalues above band m + 1
};

/// Smallest a, b with
///   (l_m - l_{m-a+1}) / l_m <= r_l <= (l_m - l_{m-a}) / l_m
///   (l_{m+b} - l_{m+1}) / l_{m+1} <= r_u <= (l_{m+b+1} - l_{m+1}) / l_{m+1},
/// except that an eigenvalue sitting exactly on the window edge is included.
/// `eigenvalues` is ascending and 0-based (l_j is eigenvalues[j - 1]).
SubspaceDims select_dims(const Eigen::VectorXd& eigenvalues, int m, double r_l, double r_u);

struct KSubspace {
  SubspaceDims dims;
  Eigen::MatrixXcd phi_a;  // eigenvectors m - a + 1 .. m
  Eigen::MatrixXcd phi_b;  // eigenvectors m + 1 .. m + b
};

/// Eigenvector blocks frozen at an incumbent design.
struct ReducedSubspace {
  int band_index = 1;
  std::vector<KSubspace> per_k;
  DielectricDesign incumbent;
};

/// Throws InternalError when a b-window saturates before the full spectrum was computed;
/// the caller should retry with more bands.
ReducedSubspace build_reduced_subspace(const BandSolution& incumbent_bands,
                                       const DielectricDesign& incumbent, double r_l,
                                       double r_u);

/// Phi^* T Phi for every affine term and the fixed operator, with real embeddings.
struct ProjectedBlock {
  std::vector<Eigen::MatrixXcd> terms;
  Eigen::MatrixXcd fixed;
  std::vector<Eigen::MatrixXd> terms_real;
  Eigen::MatrixXd fixed_real;
};

/// For TE the terms are stiffness pieces and `fixed` is the mass; for TM the terms are
/// mass pieces and `fixed` is the stiffness.
struct KBlocks {
  ProjectedBlock lower;
  ProjectedBlock upper;
};

struct ReducedBlocks {
  Polarization polarization = Polarization::TM;
  std::vector<KBlocks> per_k;

  int term_count() const {
    return per_k.empty() ? 0 : static_cast<int>(per_k.front().lower.terms.size());
  }
};

KBlocks reduce_blocks(const AffineOperatorFamily& family, const KSubspace& subspace);
ReducedBlocks reduce_blocks(const std::vector<AffineOperatorFamily>& families,
                            const ReducedSubspace& subspace);

/// [[Re H, -Im H], [Im H, Re H]]. Throws InvalidArgument if H is not Hermitian to 1e-12.
Eigen::MatrixXd embed_real(const Eigen::MatrixXcd& H);

/// Extreme eigenvalues of Phi_a^*[A - lambda_l M]Phi_a and Phi_b^*[A - lambda_u M]Phi_b.
struct BlockExtremes {
  double lower_max = 0.0;
  double upper_min = 0.0;
  double scale = 0.0;  // largest |eigenvalue| of the projected A and lambda M pieces
};

std::vector<BlockExtremes> block_extremes(const ReducedBlocks& blocks,
                                          const Eigen::VectorXd& eps, double lambda_lower,
                                          double lambda_upper);

}  // namespace pbg
