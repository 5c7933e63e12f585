#pragma once

#include <vector>

#include "pbgopt/assembly.hpp"
#include "pbgopt/eig.hpp"
#include "pbgopt/lattice.hpp"

namespace pbg {

/// Eigen-solutions along a k-path plus the gap bookkeeping for band m (1-based).
struct BandSolution {
  std::vector<EigenSolution> per_k;
  int band_index = 1;
  double lambda_lower = 0.0;  // max over k of band m
  double lambda_upper = 0.0;  // min over k of band m + 1
  double gap_midgap = 0.0;
  int argmax_k = 0;
  int argmin_k = 0;
};

/// (upper - lower) / (upper + lower); both arguments must be positive.
double gap_midgap(double lambda_lower, double lambda_upper);

/// sqrt(lambda) * a / (2 pi), the usual omega a / 2 pi c axis.
double normalized_frequency(double lambda, double lattice_constant = kLatticeConstant);

std::vector<AffineOperatorFamily> assemble_families(const Grid& grid, const SymmetryMap& map,
                                                    const KPath& path, Polarization pol);

/// Solves `bands` eigenpairs at every family's wavevector and fills the band-m gap data.
BandSolution band_diagram(const std::vector<AffineOperatorFamily>& families,
                          const DielectricDesign& design, int bands, int m,
                          const EigOptions& options = {});

BandSolution band_diagram(const Grid& grid, const SymmetryMap& map,
                          const DielectricDesign& design, const KPath& path, Polarization pol,
                          int bands, int m, const EigOptions& options = {});

/// Recomputes lambda_lower/lambda_upper/J of an existing solution for another band index.
void set_band_index(BandSolution& solution, int m);

}  // namespace pbg
