#include "doctest.h"

#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "pbgopt/assembly.hpp"
#include "pbgopt/error.hpp"

using namespace pbg;

namespace {

// Symbolic integration at h = 1, k = (pi/2, 0); see tools/element_golden.py.
const double kGoldenK[16][2] = {
    {0.94082234447470436, 0}, {-0.029588827762647797, -0.52359877559829893}, {-0.26479441388132391, -0.26179938779914946}, {-0.029588827762647797, 0},
    {-0.029588827762647797, 0.52359877559829893}, {0.94082234447470436, 0}, {-0.029588827762647797, 0}, {-0.26479441388132391, 0.26179938779914946},
    {-0.26479441388132391, 0.26179938779914946}, {-0.029588827762647797, 0}, {0.94082234447470436, 0}, {-0.029588827762647797, 0.52359877559829893},
    {-0.029588827762647797, 0}, {-0.26479441388132391, -0.26179938779914946}, {-0.029588827762647797, -0.52359877559829893}, {0.94082234447470436, 0},
};
const double kGoldenM[16] = {
    0.1111111111111111, 0.055555555555555552, 0.027777777777777776, 0.055555555555555552,
    0.055555555555555552, 0.1111111111111111, 0.055555555555555552, 0.027777777777777776,
    0.027777777777777776, 0.055555555555555552, 0.1111111111111111, 0.055555555555555552,
    0.055555555555555552, 0.027777777777777776, 0.055555555555555552, 0.1111111111111111,
};

DielectricDesign random_design(std::mt19937_64& rng, int n_eps) {
  std::uniform_real_distribution<double> u(1.0, 11.4);
  DielectricDesign d;
  d.eps.resize(n_eps);
  for (auto& v : d.eps) v = u(rng);
  return d;
}

double rel_frob(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

TEST_CASE("element matrices against symbolic integration") {
  const ElementMatrices e = element_matrices(1.0, Eigen::Vector2d(M_PI / 2, 0.0));
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      CHECK(std::abs(e.stiffness(p, q) - cplx(kGoldenK[4 * p + q][0], kGoldenK[4 * p + q][1])) < 1e-15);
      CHECK(std::abs(e.mass(p, q) - kGoldenM[4 * p + q]) < 1e-16);
    }
  }
  CHECK_THROWS_AS(element_matrices(0.0, Eigen::Vector2d::Zero()), InvalidArgument);
}

TEST_CASE("element matrices against high-order quadrature for other h and k") {
  for (double h : {0.125, 0.5, 2.0}) {
    for (const Eigen::Vector2d k : {Eigen::Vector2d(0.3, -1.1), Eigen::Vector2d(M_PI / 2, M_PI / 2)}) {
      const ElementMatrices e = element_matrices(h, k);
      const oracle::Element o = oracle::element(h, k.x(), k.y());
      CHECK(rel_frob(e.stiffness, o.K) < 1e-14);
      CHECK((e.mass - o.M).norm() / o.M.norm() < 1e-14);
      CHECK((e.stiffness - e.stiffness.adjoint()).norm() == 0.0);
    }
  }
}

TEST_CASE("element at k = 0 is the real bilinear Laplacian") {
  const ElementMatrices e = element_matrices(0.25, Eigen::Vector2d::Zero());
  CHECK(e.stiffness.imag().norm() == 0.0);
  for (int p = 0; p < 4; ++p) CHECK(std::abs(e.stiffness.row(p).sum()) < 1e-15);
  // Standard entries: 2/3 on the diagonal, -1/6 edge neighbours, -1/3 opposite.
  CHECK(e.stiffness(0, 0).real() == doctest::Approx(2.0 / 3.0));
  CHECK(e.stiffness(0, 1).real() == doctest::Approx(-1.0 / 6.0));
  CHECK(e.stiffness(0, 2).real() == doctest::Approx(-1.0 / 3.0));
  for (const Eigen::Vector2d k : {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 2.0)}) {
    CHECK(element_matrices(0.25, k).mass.sum() == doctest::Approx(0.0625));
  }
}

TEST_CASE("affine evaluation equals monolithic assembly") {
  std::mt19937_64 rng(2024);
  for (int n : {4, 16}) {
    const Grid g = build_grid(n);
    const SymmetryMap map = build_symmetry_map(g);
    for (const Eigen::Vector2d k :
         {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(M_PI / 2, 0.3), Eigen::Vector2d(1.0, 1.0)}) {
      for (Polarization pol : {Polarization::TE, Polarization::TM}) {
        const AffineOperatorFamily fam = assemble_family(g, map, k, pol);
        CHECK(fam.term_count() == map.n_eps);
        CHECK(fam.dof_count == n * n);
        for (int trial = 0; trial < 3; ++trial) {
          const DielectricDesign d = random_design(rng, map.n_eps);
          const Eigen::VectorXd field = expand_design(map, d.eps);
          const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.cell_count());
          const oracle::Dense ref =
              pol == Polarization::TE
                  ? oracle::assemble(n, k.x(), k.y(), field.cwiseInverse(), ones)
                  : oracle::assemble(n, k.x(), k.y(), ones, field);
          const EvaluatedOperators ops = evaluate(fam, d);
          CHECK(rel_frob(Eigen::MatrixXcd(ops.A), ref.A) < 1e-12);
          CHECK((Eigen::MatrixXd(ops.M) - ref.M).norm() / ref.M.norm() < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("operator structure: Hermitian, real at Gamma, conjugate under k -> -k") {
  const Grid g = build_grid(8);
  const SymmetryMap map = build_symmetry_map(g);
  std::mt19937_64 rng(5);
  const DielectricDesign d = random_design(rng, map.n_eps);
  const Eigen::Vector2d k(0.7, -0.4);
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    const EvaluatedOperators a = evaluate(assemble_family(g, map, k, pol), d);
    const EvaluatedOperators b = evaluate(assemble_family(g, map, -k, pol), d);
    const Eigen::MatrixXcd A = a.A;
    CHECK((A - A.adjoint()).norm() == 0.0);
    CHECK((Eigen::MatrixXcd(b.A) - A.conjugate()).norm() < 1e-14 * A.norm());
    const Eigen::MatrixXd M = a.M;
    CHECK((M - M.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() > 0.0);
    const EvaluatedOperators z = evaluate(assemble_family(g, map, Eigen::Vector2d::Zero(), pol), d);
    CHECK(Eigen::MatrixXcd(z.A).imag().norm() == 0.0);
  }
}

TEST_CASE("constant designs reduce to plain assembly") {
  const Grid g = build_grid(6);
  const SymmetryMap map = build_symmetry_map(g);
  const Eigen::Vector2d k(0.4, 0.9);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.cell_count());
  const ComplexSparse A1 = assemble_stiffness(g, k, ones);
  const RealSparse M1 = assemble_mass(g, ones);
  DielectricDesign d;
  d.eps = Eigen::VectorXd::Constant(map.n_eps, 4.0);

  const AffineOperatorFamily te = assemble_family(g, map, k, Polarization::TE);
  const EvaluatedOperators e_te = evaluate(te, d);
  CHECK((Eigen::MatrixXcd(e_te.A) - 0.25 * Eigen::MatrixXcd(A1)).norm() < 1e-14 * Eigen::MatrixXcd(A1).norm());
  CHECK((Eigen::MatrixXd(e_te.M) - Eigen::MatrixXd(M1)).norm() == 0.0);

  const AffineOperatorFamily tm = assemble_family(g, map, k, Polarization::TM);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(g.dof_count(), g.dof_count());
  for (const auto& t : tm.mass_terms.terms()) sum += Eigen::MatrixXd(t);
  CHECK((sum - Eigen::MatrixXd(M1)).norm() < 1e-15 * Eigen::MatrixXd(M1).norm());
  const EvaluatedOperators e_tm = evaluate(tm, d);
  CHECK((Eigen::MatrixXd(e_tm.M) - 4.0 * Eigen::MatrixXd(M1)).norm() < 1e-14 * Eigen::MatrixXd(M1).norm());
  // Each mass term is positive semidefinite.
  for (const auto& t : tm.mass_terms.terms()) {
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(t)).eigenvalues().minCoeff() > -1e-15);
  }
}

TEST_CASE("evaluate rejects bad designs") {
  const Grid g = build_grid(4);
  const SymmetryMap map = build_symmetry_map(g);
  const AffineOperatorFamily fam = assemble_family(g, map, Eigen::Vector2d::Zero(), Polarization::TM);
  DielectricDesign d;
  d.eps = Eigen::VectorXd::Constant(map.n_eps, 20.0);
  CHECK_THROWS_AS(evaluate(fam, d), InvalidArgument);
  d.eps = Eigen::VectorXd::Constant(map.n_eps + 1, 2.0);
  CHECK_THROWS_AS(evaluate(fam, d), InvalidArgument);
}

TEST_CASE("evaluation is deterministic") {
  const Grid g = build_grid(8);
  const SymmetryMap map = build_symmetry_map(g);
  std::mt19937_64 rng(9);
  const DielectricDesign d = random_design(rng, map.n_eps);
  const AffineOperatorFamily fam = assemble_family(g, map, Eigen::Vector2d(0.2, 0.1), Polarization::TE);
  const Eigen::MatrixXcd a = evaluate(fam, d).A;
  const Eigen::MatrixXcd b = evaluate(fam, d).A;
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("triplet dump") {
  const Grid g = build_grid(2);
  const RealSparse M = assemble_mass(g, Eigen::VectorXd::Ones(4));
  std::ostringstream out;
  write_triplets(out, M);
  std::istringstream in(out.str());
  int rows = 0, r, c;
  double re, im, total = 0.0;
  while (in >> r >> c >> re >> im) {
    ++rows;
    CHECK(im == 0.0);
    total += re;
  }
  CHECK(rows == M.nonZeros());
  CHECK(total == doctest::Approx(4.0));  // area of [-1,1]^2
}
