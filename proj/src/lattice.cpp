#include "pbgopt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pbgopt/error.hpp"

namespace pbg {

namespace {

struct Doubled {
  int x;
  int y;
};

Doubled doubled_center(int n, int cell) {
  const int row = cell / n;
  const int col = cell % n;
  return {2 * col + 1 - n, 2 * row + 1 - n};
}

Doubled apply(SquareSymmetry op, Doubled p) {
  switch (op) {
    case SquareSymmetry::identity: return p;
    case SquareSymmetry::rotate90: return {-p.y, p.x};
    case SquareSymmetry::rotate180: return {-p.x, -p.y};
    case SquareSymmetry::rotate270: return {p.y, -p.x};
    case SquareSymmetry::reflect_x: return {p.x, -p.y};
    case SquareSymmetry::reflect_y: return {-p.x, p.y};
    case SquareSymmetry::reflect_diag: return {p.y, p.x};
    case SquareSymmetry::reflect_anti: return {-p.y, -p.x};
  }
  return p;
}

}  // namespace

Eigen::Vector2d Grid::cell_center(int cell) const {
  const int row = cell / n;
  const int col = cell % n;
  return {-1.0 + (col + 0.5) * h, -1.0 + (row + 0.5) * h};
}

Grid build_grid(int n) {
  if (n < 2 || n % 2 != 0) {
    throw InvalidArgument("build_grid: n must be an even integer >= 2, got " + std::to_string(n));
  }
  Grid grid;
  grid.n = n;
  grid.h = 2.0 / n;
  grid.cell_dofs.resize(static_cast<std::size_t>(n) * n);
  auto dof = [n](int i, int j) { return (j % n) * n + (i % n); };
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      grid.cell_dofs[grid.cell_index(row, col)] = {dof(col, row), dof(col + 1, row),
                                                   dof(col + 1, row + 1), dof(col, row + 1)};
    }
  }
  return grid;
}

int symmetry_image(const Grid& grid, int cell, SquareSymmetry op) {
  const Doubled q = apply(op, doubled_center(grid.n, cell));
  const int col = (q.x + grid.n - 1) / 2;
  const int row = (q.y + grid.n - 1) / 2;
  return grid.cell_index(row, col);
}

SymmetryMap build_symmetry_map(const Grid& grid) {
  const int n = grid.n;
  const int half = n / 2;
  SymmetryMap map;
  map.n = n;
  map.n_eps = (1 + half) * half / 2;
  map.orbit_of_cell.assign(grid.cell_count(), -1);
  map.cells_of_orbit.resize(map.n_eps);

  // Reduced index of wedge point (a, b) with a = 2p - 1, b = 2q - 1, 1 <= q <= p <= half.
  auto wedge_index = [](int a, int b) {
    const int p = (a + 1) / 2;
    const int q = (b + 1) / 2;
    return (p - 1) * p / 2 + (q - 1);
  };

  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    const Doubled d = doubled_center(n, cell);
    const int a = std::max(std::abs(d.x), std::abs(d.y));
    const int b = std::min(std::abs(d.x), std::abs(d.y));
    const int orbit = wedge_index(a, b);
    map.orbit_of_cell[cell] = orbit;
    map.cells_of_orbit[orbit].push_back(cell);
  }
  return map;
}

Eigen::VectorXd expand_design(const SymmetryMap& map, const Eigen::VectorXd& reduced) {
  if (reduced.size() != map.n_eps) {
    throw InvalidArgument("expand_design: expected " + std::to_string(map.n_eps) +
                          " reduced values, got " + std::to_string(reduced.size()));
  }
  Eigen::VectorXd field(static_cast<Eigen::Index>(map.orbit_of_cell.size()));
  for (std::size_t c = 0; c < map.orbit_of_cell.size(); ++c) {
    field[static_cast<Eigen::Index>(c)] = reduced[map.orbit_of_cell[c]];
  }
  return field;
}

Eigen::VectorXd restrict_design(const SymmetryMap& map, const Eigen::VectorXd& field) {
  if (field.size() != static_cast<Eigen::Index>(map.orbit_of_cell.size())) {
    throw InvalidArgument("restrict_design: field length does not match the grid");
  }
  Eigen::VectorXd reduced(map.n_eps);
  for (int r = 0; r < map.n_eps; ++r) reduced[r] = field[map.cells_of_orbit[r].front()];
  return reduced;
}

Eigen::VectorXd apply_symmetry(const Grid& grid, const Eigen::VectorXd& field,
                               SquareSymmetry op) {
  if (field.size() != grid.cell_count()) {
    throw InvalidArgument("apply_symmetry: field length does not match the grid");
  }
  Eigen::VectorXd out(field.size());
  for (int c = 0; c < grid.cell_count(); ++c) out[symmetry_image(grid, c, op)] = field[c];
  return out;
}

void DielectricDesign::validate() const {
  if (!(bounds.eps_min > 0.0) || !(bounds.eps_min < bounds.eps_max)) {
    throw InvalidArgument("dielectric bounds must satisfy 0 < eps_min < eps_max");
  }
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= bounds.eps_min && eps[i] <= bounds.eps_max)) {
      throw InvalidArgument("dielectric value " + std::to_string(eps[i]) + " at index " +
                            std::to_string(i) + " outside [" + std::to_string(bounds.eps_min) +
                            ", " + std::to_string(bounds.eps_max) + "]");
    }
  }
}

namespace {

const Eigen::Vector2d kGamma{0.0, 0.0};
const Eigen::Vector2d kX{std::numbers::pi / kLatticeConstant, 0.0};
const Eigen::Vector2d kM{std::numbers::pi / kLatticeConstant, std::numbers::pi / kLatticeConstant};

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

KPath build_k_path(int n_k) {
  if (n_k < 3) throw InvalidArgument("build_k_path: n_k must be >= 3");

  const std::array<Eigen::Vector2d, 4> corners = {kGamma, kX, kM, kGamma};
  const std::array<const char*, 3> names = {"G", "X", "M"};
  std::array<double, 3> lengths{};
  double total = 0.0;
  for (int s = 0; s < 3; ++s) {
    lengths[s] = (corners[s + 1] - corners[s]).norm();
    total += lengths[s];
  }

  // Largest-remainder apportionment of the interior points; ties go to the earlier segment.
  const int interior = n_k - 3;
  std::array<int, 3> count{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double quota = interior * lengths[s] / total;
    count[s] = static_cast<int>(std::floor(quota));
    remainder[s] = quota - count[s];
    assigned += count[s];
  }
  while (assigned < interior) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (remainder[s] > remainder[best]) best = s;
    }
    ++count[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  KPath path;
  path.total_length = total;
  double arc_start = 0.0;
  for (int s = 0; s < 3; ++s) {
    const int steps = count[s] + 1;
    for (int j = 0; j < steps; ++j) {
      const double t = static_cast<double>(j) / steps;
      path.points.push_back(corners[s] + t * (corners[s + 1] - corners[s]));
      path.labels.emplace_back(j == 0 ? names[s] : "");
      path.arc.push_back(arc_start + t * lengths[s]);
    }
    arc_start += lengths[s];
  }
  return path;
}

double distance_to_k_path(const Eigen::Vector2d& p) {
  return std::min({segment_distance(p, kGamma, kX), segment_distance(p, kX, kM),
                   segment_distance(p, kM, kGamma)});
}

}  // namespace pbg
