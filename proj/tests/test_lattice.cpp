#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "pbgopt/error.hpp"
#include "pbgopt/lattice.hpp"

using namespace pbg;

namespace {

// Image of a point under each group element, in floating point.
Eigen::Vector2d act(SquareSymmetry op, const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  switch (op) {
    case SquareSymmetry::identity: return {x, y};
    case SquareSymmetry::rotate90: return {-y, x};
    case SquareSymmetry::rotate180: return {-x, -y};
    case SquareSymmetry::rotate270: return {y, -x};
    case SquareSymmetry::reflect_x: return {x, -y};
    case SquareSymmetry::reflect_y: return {-x, y};
    case SquareSymmetry::reflect_diag: return {y, x};
    case SquareSymmetry::reflect_anti: return {-y, -x};
  }
  return p;
}

int cell_at(const Grid& g, const Eigen::Vector2d& p) {
  const int col = static_cast<int>(std::floor((p.x() + 1.0) / g.h));
  const int row = static_cast<int>(std::floor((p.y() + 1.0) / g.h));
  return g.cell_index(row, col);
}

// Orbits by brute force: union of float-geometry images of every cell.
std::set<std::set<int>> brute_orbits(const Grid& g) {
  std::set<std::set<int>> out;
  for (int c = 0; c < g.cell_count(); ++c) {
    std::set<int> orbit;
    for (auto op : kAllSymmetries) orbit.insert(cell_at(g, act(op, g.cell_center(c))));
    out.insert(orbit);
  }
  return out;
}

}  // namespace

TEST_CASE("grid construction and periodic numbering") {
  CHECK_THROWS_AS(build_grid(3), InvalidArgument);
  CHECK_THROWS_AS(build_grid(0), InvalidArgument);
  const Grid g = build_grid(4);
  CHECK(g.h == doctest::Approx(0.5));
  CHECK(g.cell_dofs.size() == 16);
  // Cell (row 0, col 3) wraps its right edge onto column 0.
  const auto& d = g.cell_dofs[static_cast<std::size_t>(g.cell_index(0, 3))];
  CHECK(d[0] == 3);
  CHECK(d[1] == 0);
  CHECK(d[2] == 4);
  CHECK(d[3] == 7);
  // Top row wraps onto row 0.
  const auto& t = g.cell_dofs[static_cast<std::size_t>(g.cell_index(3, 0))];
  CHECK(t[2] == 1);
  CHECK(t[3] == 0);
  CHECK(g.cell_center(0).isApprox(Eigen::Vector2d(-0.75, -0.75)));
}

TEST_CASE("symmetry orbits match brute-force geometry") {
  for (int n = 2; n <= 20; n += 2) {
    CAPTURE(n);
    const Grid g = build_grid(n);
    const SymmetryMap map = build_symmetry_map(g);
    CHECK(map.n_eps == (1 + n / 2) * (n / 2) / 2);
    std::set<std::set<int>> ours;
    for (const auto& cells : map.cells_of_orbit) ours.insert(std::set<int>(cells.begin(), cells.end()));
    CHECK(ours == brute_orbits(g));
    for (int c = 0; c < g.cell_count(); ++c) {
      for (auto op : kAllSymmetries) {
        CHECK(symmetry_image(g, c, op) == cell_at(g, act(op, g.cell_center(c))));
      }
    }
  }
}

TEST_CASE("n = 4 orbit sizes and ordering") {
  const Grid g = build_grid(4);
  const SymmetryMap map = build_symmetry_map(g);
  REQUIRE(map.n_eps == 3);
  CHECK(map.cells_of_orbit[0].size() == 4);  // inner ring
  CHECK(map.cells_of_orbit[1].size() == 8);
  CHECK(map.cells_of_orbit[2].size() == 4);  // corners
  CHECK(map.orbit_of_cell[static_cast<std::size_t>(g.cell_index(0, 0))] == 2);
  CHECK(map.orbit_of_cell[static_cast<std::size_t>(g.cell_index(1, 1))] == 0);
}

TEST_CASE("expanded designs are exactly D4-invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1.0, 11.4);
  for (int n : {2, 6, 16, 32}) {
    const Grid g = build_grid(n);
    const SymmetryMap map = build_symmetry_map(g);
    Eigen::VectorXd r(map.n_eps);
    for (auto& v : r) v = u(rng);
    const Eigen::VectorXd field = expand_design(map, r);
    for (auto op : kAllSymmetries) CHECK((apply_symmetry(g, field, op).array() == field.array()).all());
    CHECK((restrict_design(map, field).array() == r.array()).all());
  }
  const SymmetryMap map = build_symmetry_map(build_grid(4));
  CHECK_THROWS_AS(expand_design(map, Eigen::VectorXd::Ones(4)), InvalidArgument);
}

TEST_CASE("design validation") {
  DielectricDesign d;
  d.eps = Eigen::VectorXd::Constant(3, 5.0);
  CHECK_NOTHROW(d.validate());
  d.eps[1] = 11.5;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d.eps[1] = 0.9;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("k-path of 12 points") {
  const KPath p = build_k_path(12);
  REQUIRE(p.size() == 12);
  // Segment lengths pi/2, pi/2, pi/sqrt(2); 9 interior points split 3, 2, 4.
  CHECK(p.labels[0] == "G");
  CHECK(p.labels[4] == "X");
  CHECK(p.labels[7] == "M");
  int labelled = 0;
  for (const auto& l : p.labels) labelled += !l.empty();
  CHECK(labelled == 3);
  CHECK(p.points[4].isApprox(Eigen::Vector2d(M_PI / 2, 0.0)));
  CHECK(p.points[7].isApprox(Eigen::Vector2d(M_PI / 2, M_PI / 2)));
  CHECK(p.total_length == doctest::Approx(M_PI + M_PI / std::sqrt(2.0)));
  for (int t = 0; t < p.size(); ++t) {
    CHECK(distance_to_k_path(p.points[static_cast<std::size_t>(t)]) < 1e-14);
    if (t > 0) CHECK(p.arc[static_cast<std::size_t>(t)] > p.arc[static_cast<std::size_t>(t - 1)]);
    CHECK(p.arc[static_cast<std::size_t>(t)] ==
          doctest::Approx(t <= 4   ? p.points[static_cast<std::size_t>(t)].x()
                          : t <= 7 ? M_PI / 2 + p.points[static_cast<std::size_t>(t)].y()
                                   : M_PI + (M_PI / 2 - p.points[static_cast<std::size_t>(t)].x()) * std::sqrt(2.0)));
  }
  // Uniform spacing inside the first segment.
  CHECK(p.points[1].x() == doctest::Approx(M_PI / 8));
}

TEST_CASE("k-path corners only and distances") {
  const KPath p = build_k_path(3);
  CHECK(p.size() == 3);
  CHECK_THROWS_AS(build_k_path(2), InvalidArgument);
  CHECK(distance_to_k_path(Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(distance_to_k_path(Eigen::Vector2d(0.5, 0.2)) == doctest::Approx(0.2));
  CHECK(distance_to_k_path(Eigen::Vector2d(M_PI, 0.0)) == doctest::Approx(M_PI / 2));
}
