#include "pbgopt/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "pbgopt/error.hpp"

namespace pbg {

std::string_view to_string(Polarization pol) { return pol == Polarization::TE ? "TE" : "TM"; }

Polarization parse_polarization(std::string_view text) {
  if (text == "TE" || text == "te") return Polarization::TE;
  if (text == "TM" || text == "tm") return Polarization::TM;
  throw InvalidArgument("unknown polarization '" + std::string(text) + "' (expected TE or TM)");
}

ElementMatrices element_matrices(double h, const Eigen::Vector2d& k) {
  if (!(h > 0.0)) throw InvalidArgument("element_matrices: cell size must be positive");

  // Reference square [0,1]^2, vertices (0,0), (1,0), (1,1), (0,1).
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  const double g = 0.5 / std::sqrt(3.0);
  const double gauss[2] = {0.5 - g, 0.5 + g};
  const double weight = 0.25 * h * h;

  Eigen::Matrix4d grad_grad = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d mass = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d cross = Eigen::Matrix4d::Zero();  // phi_q k.grad(phi_p)

  for (double xi : gauss) {
    for (double eta : gauss) {
      double phi[4];
      Eigen::Vector2d grad[4];
      for (int p = 0; p < 4; ++p) {
        const double fx = 0.5 * (1.0 + sx[p] * (2.0 * xi - 1.0));
        const double fy = 0.5 * (1.0 + sy[p] * (2.0 * eta - 1.0));
        phi[p] = fx * fy;
        grad[p] = Eigen::Vector2d(sx[p] * fy, sy[p] * fx) / h;
      }
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
          grad_grad(p, q) += weight * grad[p].dot(grad[q]);
          mass(p, q) += weight * phi[p] * phi[q];
          cross(p, q) += weight * phi[q] * k.dot(grad[p]);
        }
      }
    }
  }

  ElementMatrices em;
  em.mass = 0.5 * (mass + mass.transpose());
  const double k2 = k.squaredNorm();
  for (int p = 0; p < 4; ++p) {
    em.stiffness(p, p) = cplx(grad_grad(p, p) + k2 * em.mass(p, p), 0.0);
    for (int q = p + 1; q < 4; ++q) {
      const double re = 0.5 * (grad_grad(p, q) + grad_grad(q, p)) + k2 * em.mass(p, q);
      const double im = cross(p, q) - cross(q, p);
      em.stiffness(p, q) = cplx(re, im);
      em.stiffness(q, p) = cplx(re, -im);
    }
  }
  return em;
}

template <typename Scalar>
AffineSum<Scalar>::AffineSum(std::vector<Matrix> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) return;
  const Eigen::Index rows = terms_.front().rows();
  const Eigen::Index cols = terms_.front().cols();
  std::vector<Eigen::Triplet<Scalar>> all;
  for (auto& t : terms_) {
    if (t.rows() != rows || t.cols() != cols) {
      throw InvalidArgument("AffineSum: terms must share one shape");
    }
    t.makeCompressed();
    for (int c = 0; c < t.outerSize(); ++c) {
      for (typename Matrix::InnerIterator it(t, c); it; ++it) {
        all.emplace_back(static_cast<int>(it.row()), c, Scalar(1));
      }
    }
  }
  pattern_.resize(rows, cols);
  pattern_.setFromTriplets(all.begin(), all.end());
  pattern_.makeCompressed();

  slot_.resize(terms_.size());
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    slot_[i].reserve(static_cast<std::size_t>(t.nonZeros()));
    for (int c = 0; c < t.outerSize(); ++c) {
      for (typename Matrix::InnerIterator it(t, c); it; ++it) {
        const int* pos = std::lower_bound(inner + outer[c], inner + outer[c + 1],
                                          static_cast<int>(it.row()));
        slot_[i].push_back(static_cast<int>(pos - inner));
      }
    }
  }
}

template <typename Scalar>
typename AffineSum<Scalar>::Matrix AffineSum<Scalar>::combine(
    const Eigen::VectorXd& weights) const {
  if (weights.size() != size()) {
    throw InvalidArgument("AffineSum::combine: expected " + std::to_string(size()) +
                          " weights, got " + std::to_string(weights.size()));
  }
  Matrix out = pattern_;
  Scalar* values = out.valuePtr();
  std::fill(values, values + out.nonZeros(), Scalar(0));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Scalar* tv = terms_[i].valuePtr();
    const double w = weights[static_cast<Eigen::Index>(i)];
    const auto& slots = slot_[i];
    for (std::size_t j = 0; j < slots.size(); ++j) values[slots[j]] += w * tv[j];
  }
  return out;
}

template class AffineSum<double>;
template class AffineSum<cplx>;

namespace {

template <typename Scalar, typename Element>
Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int> scatter(const Grid& grid,
                                                        const Eigen::VectorXd& cell_weight,
                                                        const Element& element) {
  if (cell_weight.size() != grid.cell_count()) {
    throw InvalidArgument("assembly: cell weight length does not match the grid");
  }
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<Scalar>> upper;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const double w = cell_weight[c];
    if (w == 0.0) continue;
    const auto& dofs = grid.cell_dofs[c];
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        const int r = dofs[p];
        const int s = dofs[q];
        if (r < s || (r == s && p == q)) {
          upper.emplace_back(r, s, w * element(p, q));
        } else if (r == s) {
          // Two local vertices sharing a dof only occurs on degenerate grids.
          throw InternalError("assembly: repeated dof within one cell");
        }
      }
    }
  }
  Matrix u(grid.dof_count(), grid.dof_count());
  u.setFromTriplets(upper.begin(), upper.end());
  Matrix strict = u.template triangularView<Eigen::StrictlyUpper>();
  Matrix full = u + Matrix(strict.adjoint());
  full.makeCompressed();
  return full;
}

}  // namespace

ComplexSparse assemble_stiffness(const Grid& grid, const Eigen::Vector2d& k,
                                 const Eigen::VectorXd& cell_weight) {
  const Eigen::Matrix4cd ke = element_matrices(grid.h, k).stiffness;
  return scatter<cplx>(grid, cell_weight, ke);
}

RealSparse assemble_mass(const Grid& grid, const Eigen::VectorXd& cell_weight) {
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  const Eigen::Matrix4d me = element_matrices(grid.h, zero).mass;
  return scatter<double>(grid, cell_weight, me);
}

int AffineOperatorFamily::term_count() const {
  return static_cast<int>(polarization == Polarization::TE ? stiffness_terms.size()
                                                           : mass_terms.size());
}

AffineOperatorFamily assemble_family(const Grid& grid, const SymmetryMap& map,
                                     const Eigen::Vector2d& k, Polarization pol) {
  if (map.n != grid.n) throw InvalidArgument("assemble_family: symmetry map does not fit grid");
  AffineOperatorFamily family;
  family.polarization = pol;
  family.k = k;
  family.dof_count = grid.dof_count();

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.cell_count());
  auto orbit_indicator = [&](int orbit) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.cell_count());
    for (int c : map.cells_of_orbit[orbit]) w[c] = 1.0;
    return w;
  };

  if (pol == Polarization::TE) {
    std::vector<ComplexSparse> terms;
    terms.reserve(static_cast<std::size_t>(map.n_eps));
    for (int i = 0; i < map.n_eps; ++i) {
      terms.push_back(assemble_stiffness(grid, k, orbit_indicator(i)));
    }
    family.stiffness_terms = AffineSum<cplx>(std::move(terms));
    family.mass = assemble_mass(grid, ones);
  } else {
    std::vector<RealSparse> terms;
    terms.reserve(static_cast<std::size_t>(map.n_eps));
    for (int i = 0; i < map.n_eps; ++i) terms.push_back(assemble_mass(grid, orbit_indicator(i)));
    family.mass_terms = AffineSum<double>(std::move(terms));
    family.stiffness = assemble_stiffness(grid, k, ones);
  }
  return family;
}

Eigen::VectorXd affine_weights(Polarization pol, const Eigen::VectorXd& eps) {
  return pol == Polarization::TE ? Eigen::VectorXd(eps.cwiseInverse()) : eps;
}

EvaluatedOperators evaluate(const AffineOperatorFamily& family, const DielectricDesign& design) {
  if (design.eps.size() != family.term_count()) {
    throw InvalidArgument("evaluate: design has " + std::to_string(design.eps.size()) +
                          " entries, family has " + std::to_string(family.term_count()) +
                          " terms");
  }
  design.validate();
  const Eigen::VectorXd w = affine_weights(family.polarization, design.eps);
  EvaluatedOperators ops;
  if (family.polarization == Polarization::TE) {
    ops.A = family.stiffness_terms.combine(w);
    ops.M = family.mass;
  } else {
    ops.A = family.stiffness;
    ops.M = family.mass_terms.combine(w);
  }
  return ops;
}

namespace {

template <typename Matrix>
void write_entries(std::ostream& out, const Matrix& m) {
  const auto old_precision = out.precision(17);
  for (int c = 0; c < m.outerSize(); ++c) {
    for (typename Matrix::InnerIterator it(m, c); it; ++it) {
      const cplx v(it.value());
      out << it.row() << ' ' << it.col() << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace

void write_triplets(std::ostream& out, const ComplexSparse& m) { write_entries(out, m); }
void write_triplets(std::ostream& out, const RealSparse& m) { write_entries(out, m); }

}  // namespace pbg
