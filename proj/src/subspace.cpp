#include "pbgopt/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pbgopt/error.hpp"

namespace pbg {

SubspaceDims select_dims(const Eigen::VectorXd& eigenvalues, int m, double r_l, double r_u) {
  const int count = static_cast<int>(eigenvalues.size());
  if (m < 1 || count < m + 1) {
    throw InvalidArgument("select_dims: need at least m + 1 eigenvalues");
  }
  if (!(r_l > 0.0) || !(r_u > 0.0)) throw InvalidArgument("select_dims: r_l, r_u must be > 0");
  auto lambda = [&](int j) { return eigenvalues[j - 1]; };

  SubspaceDims dims;
  // With m = 1 the lower window holds only band 1, whatever its sign (it is 0 at Gamma).
  if (m > 1) {
    const double top = lambda(m);
    if (!(top > 0.0)) throw InvalidArgument("select_dims: lambda_m must be positive");
    dims.a = m;
    dims.a_saturated = true;
    for (int a = 1; a < m; ++a) {
      if ((top - lambda(m - a)) / top > r_l) {
        dims.a = a;
        dims.a_saturated = false;
        break;
      }
    }
  }

  const double bottom = lambda(m + 1);
  if (!(bottom > 0.0)) throw InvalidArgument("select_dims: lambda_{m+1} must be positive");
  dims.b = count - m;
  dims.b_saturated = true;
  for (int b = 1; m + b + 1 <= count; ++b) {
    if ((lambda(m + b + 1) - bottom) / bottom > r_u) {
      dims.b = b;
      dims.b_saturated = false;
      break;
    }
  }
  return dims;
}

ReducedSubspace build_reduced_subspace(const BandSolution& incumbent_bands,
                                       const DielectricDesign& incumbent, double r_l,
                                       double r_u) {
  const int m = incumbent_bands.band_index;
  ReducedSubspace sub;
  sub.band_index = m;
  sub.incumbent = incumbent;
  sub.per_k.reserve(incumbent_bands.per_k.size());
  for (std::size_t t = 0; t < incumbent_bands.per_k.size(); ++t) {
    const EigenSolution& s = incumbent_bands.per_k[t];
    KSubspace ks;
    ks.dims = select_dims(s.eigenvalues, m, r_l, r_u);
    const auto dofs = s.eigenvectors.rows();
    if (ks.dims.b_saturated && s.size() < dofs) {
      throw InternalError("build_reduced_subspace: k-point " + std::to_string(t) +
                          " needs more than " + std::to_string(s.size()) +
                          " bands; increase m_max");
    }
    ks.phi_a = s.eigenvectors.middleCols(m - ks.dims.a, ks.dims.a);
    ks.phi_b = s.eigenvectors.middleCols(m, ks.dims.b);
    sub.per_k.push_back(std::move(ks));
  }
  return sub;
}

Eigen::MatrixXd embed_real(const Eigen::MatrixXcd& H) {
  if (H.rows() != H.cols()) throw InvalidArgument("embed_real: matrix must be square");
  const double size = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * size) {
    throw InvalidArgument("embed_real: matrix is not Hermitian");
  }
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  const Eigen::MatrixXd re = 0.5 * (H.real() + H.real().transpose());
  const Eigen::MatrixXd im = 0.5 * (H.imag() - H.imag().transpose());
  out.topLeftCorner(n, n) = re;
  out.bottomRightCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  return out;
}

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& B) { return 0.5 * (B + B.adjoint()); }

template <typename Sparse>
Eigen::MatrixXcd project(const Sparse& T, const Eigen::MatrixXcd& phi) {
  const Eigen::MatrixXcd tphi = T * phi;
  return hermitian_part(phi.adjoint() * tphi);
}

ProjectedBlock project_family(const AffineOperatorFamily& family, const Eigen::MatrixXcd& phi) {
  ProjectedBlock block;
  if (family.polarization == Polarization::TE) {
    const auto& terms = family.stiffness_terms.terms();
    block.terms.reserve(terms.size());
    for (const auto& t : terms) block.terms.push_back(project(t, phi));
    block.fixed = project(family.mass.cast<cplx>(), phi);
  } else {
    const auto& terms = family.mass_terms.terms();
    block.terms.reserve(terms.size());
    for (const auto& t : terms) block.terms.push_back(project(t.cast<cplx>(), phi));
    block.fixed = project(family.stiffness, phi);
  }
  block.terms_real.reserve(block.terms.size());
  for (const auto& t : block.terms) block.terms_real.push_back(embed_real(t));
  block.fixed_real = embed_real(block.fixed);
  return block;
}

}  // namespace

KBlocks reduce_blocks(const AffineOperatorFamily& family, const KSubspace& subspace) {
  if (subspace.phi_a.rows() != family.dof_count || subspace.phi_b.rows() != family.dof_count) {
    throw InvalidArgument("reduce_blocks: subspace and family disagree on the dof count");
  }
  return {project_family(family, subspace.phi_a), project_family(family, subspace.phi_b)};
}

ReducedBlocks reduce_blocks(const std::vector<AffineOperatorFamily>& families,
                            const ReducedSubspace& subspace) {
  if (families.size() != subspace.per_k.size()) {
    throw InvalidArgument("reduce_blocks: family and subspace k-point counts differ");
  }
  ReducedBlocks blocks;
  blocks.polarization = families.empty() ? Polarization::TM : families.front().polarization;
  blocks.per_k.reserve(families.size());
  for (std::size_t t = 0; t < families.size(); ++t) {
    blocks.per_k.push_back(reduce_blocks(families[t], subspace.per_k[t]));
  }
  return blocks;
}

namespace {

// Projected A and M at eps.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> projected_operators(const ProjectedBlock& block,
                                                                  Polarization pol,
                                                                  const Eigen::VectorXd& w) {
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(block.fixed.rows(), block.fixed.cols());
  for (std::size_t i = 0; i < block.terms.size(); ++i) {
    sum += w[static_cast<Eigen::Index>(i)] * block.terms[i];
  }
  if (pol == Polarization::TE) return {sum, block.fixed};
  return {block.fixed, sum};
}

double spectral_radius(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<BlockExtremes> block_extremes(const ReducedBlocks& blocks,
                                          const Eigen::VectorXd& eps, double lambda_lower,
                                          double lambda_upper) {
  if (eps.size() != blocks.term_count()) {
    throw InvalidArgument("block_extremes: design size does not match the blocks");
  }
  const Eigen::VectorXd w = affine_weights(blocks.polarization, eps);
  std::vector<BlockExtremes> out;
  out.reserve(blocks.per_k.size());
  for (const auto& kb : blocks.per_k) {
    const auto [la, lm] = projected_operators(kb.lower, blocks.polarization, w);
    const auto [ua, um] = projected_operators(kb.upper, blocks.polarization, w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> lower(la - lambda_lower * lm,
                                                          Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> upper(ua - lambda_upper * um,
                                                          Eigen::EigenvaluesOnly);
    BlockExtremes e;
    e.lower_max = lower.eigenvalues().maxCoeff();
    e.upper_min = upper.eigenvalues().minCoeff();
    e.scale = std::max({spectral_radius(la), spectral_radius(ua),
                        lambda_lower * spectral_radius(lm), lambda_upper * spectral_radius(um)});
    out.push_back(e);
  }
  return out;
}

}  // namespace pbg
