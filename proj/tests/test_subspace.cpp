#include "doctest.h"

#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "pbgopt/error.hpp"
#include "pbgopt/subspace.hpp"

using namespace pbg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

DielectricDesign random_design(int n_eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0, 11.4);
  DielectricDesign d;
  d.eps.resize(n_eps);
  for (auto& v : d.eps) v = u(rng);
  return d;
}

}  // namespace

TEST_CASE("window selection") {
  // l = 1, 2, 9.5, 10, 10.5, 12, 13; m = 4 -> lower window within 10% of 10.
  const Eigen::VectorXd l = vec({1, 2, 9.5, 10, 10.5, 12, 13});
  SubspaceDims d = select_dims(l, 4, 0.1, 0.1);
  CHECK(d.a == 2);
  CHECK_FALSE(d.a_saturated);
  CHECK(d.b == 1);  // 12 is 14% above 10.5
  d = select_dims(l, 4, 0.1, 0.2);
  CHECK(d.b == 2);
  CHECK_FALSE(d.b_saturated);
  d = select_dims(l, 4, 0.95, 0.5);
  CHECK(d.a == 4);
  CHECK(d.a_saturated);
  CHECK(d.b == 3);
  CHECK(d.b_saturated);
}

TEST_CASE("eigenvalues on the window edge are included") {
  // (10 - 9) / 10 == 0.1 exactly and (11 - 10) / 10 == 0.1 exactly.
  const Eigen::VectorXd l = vec({5, 9, 10, 10, 11, 20});
  const SubspaceDims d = select_dims(l, 3, 0.1, 0.1);
  CHECK(d.a == 2);
  CHECK(d.b == 2);
}

TEST_CASE("band 1 keeps a zero eigenvalue") {
  const SubspaceDims d = select_dims(vec({0.0, 2.0, 2.1, 5.0}), 1, 0.1, 0.1);
  CHECK(d.a == 1);
  CHECK(d.b == 2);
  CHECK_THROWS_AS(select_dims(vec({0.0, 0.0, 1.0}), 2, 0.1, 0.1), InvalidArgument);
  CHECK_THROWS_AS(select_dims(vec({1.0}), 1, 0.1, 0.1), InvalidArgument);
  CHECK_THROWS_AS(select_dims(vec({1.0, 2.0}), 1, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("real embedding duplicates the spectrum") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    const Eigen::MatrixXcd H = oracle::random_hermitian(rng, n);
    const Eigen::MatrixXd E = embed_real(H);
    REQUIRE(E.rows() == 2 * n);
    CHECK((E - E.transpose()).norm() == 0.0);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
    const Eigen::VectorXd ee = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(E).eigenvalues();
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(ee[2 * j] - ev[j]) < 1e-12);
      CHECK(std::abs(ee[2 * j + 1] - ev[j]) < 1e-12);
    }
  }
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  bad(0, 1) = oracle::cplx(0.0, 1.0);
  CHECK_THROWS_AS(embed_real(bad), InvalidArgument);
}

TEST_CASE("projected blocks and incumbent feasibility") {
  const Grid g = build_grid(8);
  const SymmetryMap map = build_symmetry_map(g);
  const KPath path = build_k_path(6);
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    for (int m : {1, 3}) {
      const DielectricDesign d = random_design(map.n_eps, 40 + static_cast<std::uint64_t>(m));
      const auto fams = assemble_families(g, map, path, pol);
      const BandSolution b = band_diagram(fams, d, 16, m);
      const ReducedSubspace sub = build_reduced_subspace(b, d, 0.1, 0.1);
      const ReducedBlocks blocks = reduce_blocks(fams, sub);
      CHECK(blocks.term_count() == map.n_eps);
      // Phi^* T Phi against explicit products.
      const auto& f0 = fams[2];
      const auto& k0 = sub.per_k[2];
      const auto& blk = blocks.per_k[2];
      for (int i : {0, map.n_eps - 1}) {
        const Eigen::MatrixXcd T = pol == Polarization::TE
                                       ? Eigen::MatrixXcd(f0.stiffness_terms.terms()[static_cast<std::size_t>(i)])
                                       : Eigen::MatrixXcd(f0.mass_terms.terms()[static_cast<std::size_t>(i)].cast<oracle::cplx>());
        const Eigen::MatrixXcd ref = k0.phi_b.adjoint() * T * k0.phi_b;
        CHECK((blk.upper.terms[static_cast<std::size_t>(i)] - ref).norm() < 1e-12 * std::max(1.0, ref.norm()));
      }
      for (const auto& e : block_extremes(blocks, d.eps, b.lambda_lower, b.lambda_upper)) {
        CHECK(e.lower_max <= 1e-8 * e.scale);
        CHECK(e.upper_min >= -1e-8 * e.scale);
      }
    }
  }
}

TEST_CASE("saturated upper window asks for more bands") {
  const Grid g = build_grid(8);
  const SymmetryMap map = build_symmetry_map(g);
  const KPath path = build_k_path(3);
  DielectricDesign d;
  d.eps = Eigen::VectorXd::Ones(map.n_eps);
  // Free space at Gamma: band 2..5 are degenerate, so 3 bands cannot close the window.
  const BandSolution b = band_diagram(g, map, d, path, Polarization::TM, 3, 1);
  CHECK_THROWS_AS(build_reduced_subspace(b, d, 0.1, 0.1), InternalError);
}
