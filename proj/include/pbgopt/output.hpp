#pragma once

#include <iosfwd>
#include <string>

#include "pbgopt/bands.hpp"
#include "pbgopt/config.hpp"
#include "pbgopt/lattice.hpp"
#include "pbgopt/optimizer.hpp"

namespace pbg {

// Header k_index,k_x,k_y,band,lambda,omega_norm; one row per (k, band).
void write_bands_csv(std::ostream& out, const BandSolution& bands);

// Header cell_row,cell_col,eps; one row per cell of the expanded field.
void write_design_csv(std::ostream& out, const Grid& grid, const SymmetryMap& map,
                      const DielectricDesign& design);

// Normalized frequency against arc length along the path, gap of band m shaded.
void write_bands_svg(std::ostream& out, const BandSolution& bands, const KPath& path);

// One gray square per cell, darker for higher eps, row 0 at the bottom.
void write_design_svg(std::ostream& out, const Grid& grid, const SymmetryMap& map,
                      const DielectricDesign& design);

std::string summary_json(const RunConfig& config, const BandSolution& bands);
std::string run_json(const RunConfig& config, const MultiRestartResult& runs);

/// bands.csv, design.csv, bands.svg and design.svg into `dir` (created if missing),
/// with an optional file-name prefix for snapshots.
void write_design_artifacts(const std::string& dir, const Grid& grid, const SymmetryMap& map,
                            const KPath& path, const DielectricDesign& design,
                            const BandSolution& bands, const std::string& prefix = "");

/// Writes `text` to `path`, replacing any existing file. Throws std::runtime_error.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pbg
