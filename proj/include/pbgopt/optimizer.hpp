#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pbgopt/bands.hpp"
#include "pbgopt/config.hpp"
#include "pbgopt/lattice.hpp"
#include "pbgopt/sdp.hpp"

namespace pbg {

struct InitParams {
  std::uint64_t seed = 0;
  double radius = 0.38;
  double thickness = 0.2;
  std::string file;
};

/// uniform-random: i.i.d. uniform reduced values from mt19937_64(seed).
/// rods: eps_max on cells whose center lies within `radius` of the origin.
/// veins: eps_max on cells with max(|x|, |y|) >= 1 - thickness / 2 (the cell border).
/// file: see read_design_file.
DielectricDesign initial_config(InitKind kind, const InitParams& params, const Grid& grid,
                                const SymmetryMap& map, const MaterialBounds& bounds);

DielectricDesign initial_config(const RunConfig& config, const Grid& grid,
                                const SymmetryMap& map);

/// Accepts either design.csv output (header cell_row,cell_col,eps and one row per cell,
/// D4-symmetric) or a bare list of n_eps reduced values separated by commas or
/// whitespace. Throws InvalidArgument on length mismatch or asymmetric fields.
DielectricDesign read_design_file(const std::string& path, const Grid& grid,
                                  const SymmetryMap& map, const MaterialBounds& bounds);

enum class Termination { converged, max_outer, solver_failure };
std::string_view to_string(Termination t);

struct IterationRecord {
  int iteration = 0;
  double gap_midgap = 0.0;  // true J at the incumbent, from a full eigensolve
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
  double incumbent_objective = 0.0;  // fractional objective at the incumbent
  double surrogate_objective = 0.0;  // reduced SDP optimum
  double step_norm = 0.0;            // ||x* - x||_inf / max(1, ||x||_inf)
  std::vector<int> a;
  std::vector<int> b;
  int eig_bands = 0;
  conic::Status status = conic::Status::numerical_failure;
  int solver_iterations = 0;
  double clamp = 0.0;
  double wall_seconds = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> history;
  DielectricDesign initial_design;
  DielectricDesign final_design;
  double initial_gap_midgap = 0.0;
  double final_gap_midgap = 0.0;
  BandSolution final_bands;
  Termination termination = Termination::max_outer;
  std::string message;
};

struct OptimizeHooks {
  std::function<void(const std::string&)> log;
  // Called after the eigensolve of every iteration, at the incumbent.
  std::function<void(int iteration, const DielectricDesign&, const BandSolution&)> snapshot;
  std::function<void(int iteration, const LinearSdp&)> sdp;
};

/// Bands solved per k when reporting a design: enough for band m + 1 and a readable plot.
int report_band_count(const Grid& grid, int m);

/// Outer loop from a given starting design. Eigensolver and SDP failures end the run
/// with Termination::solver_failure and the best incumbent seen so far.
RunResult optimize(const RunConfig& config, const DielectricDesign& start,
                   const OptimizeHooks& hooks = {});

/// Starting design from config.init / config.seed.
RunResult optimize(const RunConfig& config, const OptimizeHooks& hooks = {});

struct MultiRestartResult {
  std::size_t best = 0;
  std::vector<RunResult> runs;
};

/// Runs optimize with seeds seed, seed + 1, ...; best is the largest final J (first on ties).
MultiRestartResult multi_restart(const RunConfig& config, int restarts,
                                 const OptimizeHooks& hooks = {});

}  // namespace pbg
