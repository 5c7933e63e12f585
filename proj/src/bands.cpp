#include "pbgopt/bands.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pbgopt/error.hpp"

namespace pbg {

double gap_midgap(double lambda_lower, double lambda_upper) {
  if (!(lambda_lower > 0.0) || !(lambda_upper > 0.0)) {
    throw InvalidArgument("gap_midgap: eigenvalue bounds must be positive");
  }
  return (lambda_upper - lambda_lower) / (lambda_upper + lambda_lower);
}

double normalized_frequency(double lambda, double lattice_constant) {
  if (lambda < 0.0) throw InvalidArgument("normalized_frequency: negative eigenvalue");
  return std::sqrt(lambda) * lattice_constant / (2.0 * std::numbers::pi);
}

std::vector<AffineOperatorFamily> assemble_families(const Grid& grid, const SymmetryMap& map,
                                                    const KPath& path, Polarization pol) {
  std::vector<AffineOperatorFamily> families;
  families.reserve(path.points.size());
  for (const auto& k : path.points) families.push_back(assemble_family(grid, map, k, pol));
  return families;
}

void set_band_index(BandSolution& solution, int m) {
  if (solution.per_k.empty()) throw InvalidArgument("set_band_index: empty band solution");
  if (m < 1) throw InvalidArgument("set_band_index: band index must be >= 1");
  for (const auto& s : solution.per_k) {
    if (s.size() < m + 1) {
      throw InvalidArgument("set_band_index: band " + std::to_string(m + 1) +
                            " was not computed");
    }
  }
  solution.band_index = m;
  solution.argmax_k = 0;
  solution.argmin_k = 0;
  for (int t = 1; t < static_cast<int>(solution.per_k.size()); ++t) {
    if (solution.per_k[t].eigenvalues[m - 1] >
        solution.per_k[solution.argmax_k].eigenvalues[m - 1]) {
      solution.argmax_k = t;
    }
    if (solution.per_k[t].eigenvalues[m] < solution.per_k[solution.argmin_k].eigenvalues[m]) {
      solution.argmin_k = t;
    }
  }
  solution.lambda_lower = solution.per_k[solution.argmax_k].eigenvalues[m - 1];
  solution.lambda_upper = solution.per_k[solution.argmin_k].eigenvalues[m];
  solution.gap_midgap = gap_midgap(solution.lambda_lower, solution.lambda_upper);
}

BandSolution band_diagram(const std::vector<AffineOperatorFamily>& families,
                          const DielectricDesign& design, int bands, int m,
                          const EigOptions& options) {
  if (m < 1 || bands < m + 1) {
    throw InvalidArgument("band_diagram: need 1 <= m and bands >= m + 1");
  }
  BandSolution solution;
  solution.per_k.reserve(families.size());
  for (std::size_t t = 0; t < families.size(); ++t) {
    const EvaluatedOperators ops = evaluate(families[t], design);
    try {
      EigenSolution s = solve_gevp(ops.A, ops.M, bands, options);
      s.k = families[t].k;
      solution.per_k.push_back(std::move(s));
    } catch (const NumericalError& e) {
      throw NumericalError("k-point " + std::to_string(t) + ": " + e.what());
    }
  }
  set_band_index(solution, m);
  return solution;
}

BandSolution band_diagram(const Grid& grid, const SymmetryMap& map,
                          const DielectricDesign& design, const KPath& path, Polarization pol,
                          int bands, int m, const EigOptions& options) {
  return band_diagram(assemble_families(grid, map, path, pol), design, bands, m, options);
}

}  // namespace pbg
