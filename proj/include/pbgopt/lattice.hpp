#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pbg {

/// Uniform square grid on the unit cell [-1,1]^2 with periodic vertex identification.
///
/// Cells are numbered row-major from the lower-left corner: cell (row, col) has index
/// row * n + col and covers [-1 + col*h, -1 + (col+1)*h] x [-1 + row*h, -1 + (row+1)*h].
/// Vertex (i, j) maps to degree of freedom (j mod n) * n + (i mod n), so opposite edges
/// of the cell share their degrees of freedom.
struct Grid {
  int n = 0;
  double h = 0.0;
  // Local vertex order per cell: (x0,y0), (x1,y0), (x1,y1), (x0,y1).
  std::vector<std::array<int, 4>> cell_dofs;

  int cell_count() const { return n * n; }
  int dof_count() const { return n * n; }
  int cell_index(int row, int col) const { return row * n + col; }
  Eigen::Vector2d cell_center(int cell) const;
};

Grid build_grid(int n);

/// The eight operations of the square symmetry group, acting on points about the origin.
enum class SquareSymmetry {
  identity,
  rotate90,
  rotate180,
  rotate270,
  reflect_x,     // (x, y) -> (x, -y)
  reflect_y,     // (x, y) -> (-x, y)
  reflect_diag,  // (x, y) -> (y, x)
  reflect_anti,  // (x, y) -> (-y, -x)
};

inline constexpr std::array<SquareSymmetry, 8> kAllSymmetries = {
    SquareSymmetry::identity,    SquareSymmetry::rotate90,  SquareSymmetry::rotate180,
    SquareSymmetry::rotate270,   SquareSymmetry::reflect_x, SquareSymmetry::reflect_y,
    SquareSymmetry::reflect_diag, SquareSymmetry::reflect_anti};

/// Image of cell `cell` under `op`, computed in exact integer arithmetic on doubled
/// cell-center coordinates.
int symmetry_image(const Grid& grid, int cell, SquareSymmetry op);

/// Partition of the cells into D4 orbits. Reduced variable r is attached to the
/// representative with doubled center coordinates (a, b), 0 < b <= a, ordered by a then b.
struct SymmetryMap {
  int n = 0;
  int n_eps = 0;
  std::vector<int> orbit_of_cell;
  std::vector<std::vector<int>> cells_of_orbit;
};

SymmetryMap build_symmetry_map(const Grid& grid);

/// Per-cell field from a reduced vector; throws InvalidArgument on length mismatch.
Eigen::VectorXd expand_design(const SymmetryMap& map, const Eigen::VectorXd& reduced);

/// Value of the first cell of each orbit. Inverse of expand_design on symmetric fields.
Eigen::VectorXd restrict_design(const SymmetryMap& map, const Eigen::VectorXd& field);

/// field'[image(c)] = field[c].
Eigen::VectorXd apply_symmetry(const Grid& grid, const Eigen::VectorXd& field,
                               SquareSymmetry op);

struct MaterialBounds {
  double eps_min = 1.0;
  double eps_max = 11.4;
};

/// Symmetry-reduced dielectric values, one per orbit.
struct DielectricDesign {
  Eigen::VectorXd eps;
  MaterialBounds bounds;

  // Throws InvalidArgument unless every entry lies in [eps_min, eps_max].
  void validate() const;
};

/// Lattice constant of the unit cell [-1,1]^2.
inline constexpr double kLatticeConstant = 2.0;

/// Wavevectors along the irreducible zone boundary Gamma -> X -> M (-> Gamma, not repeated).
struct KPath {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::string> labels;  // "G", "X", "M" at corners, empty elsewhere
  std::vector<double> arc;          // cumulative arc length from Gamma
  double total_length = 0.0;        // length of the closed polyline

  int size() const { return static_cast<int>(points.size()); }
};

/// Corners are always included; the remaining points are split over the three segments
/// by largest remainder on arc length and spaced uniformly inside each segment.
KPath build_k_path(int n_k);

/// Distance from p to the closed polyline Gamma-X-M-Gamma.
double distance_to_k_path(const Eigen::Vector2d& p);

}  // namespace pbg
