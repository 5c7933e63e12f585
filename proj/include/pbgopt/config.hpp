#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pbgopt/assembly.hpp"
#include "pbgopt/conic.hpp"
#include "pbgopt/lattice.hpp"

namespace pbg {

enum class InitKind { uniform_random, rods, veins, file };

std::string_view to_string(InitKind kind);
InitKind parse_init_kind(std::string_view text);

/// Everything one optimization (or band) run needs. Defaults follow the usual
/// desk-scale setup: 32 x 32 grid, eps in [1, 11.4], 12 k-points, r_l = r_u = 0.1.
struct RunConfig {
  int n = 32;
  Polarization polarization = Polarization::TM;
  int band = 1;
  MaterialBounds bounds;
  int n_k = 12;
  double r_l = 0.1;
  double r_u = 0.1;
  double tol = 1e-4;
  int max_outer = 50;
  double move_limit = 0.0;  // fraction of eps_max - eps_min; 0 disables
  InitKind init = InitKind::uniform_random;
  std::uint64_t seed = 0;
  double radius = 0.38;     // rods, fraction of the half-cell
  double thickness = 0.2;   // veins, full width in cell coordinates
  std::string init_file;
  int restarts = 1;
  conic::Options solver;
  int dense_limit = 512;
  std::string output_dir = "out";
  bool snapshots = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Line-oriented "key = value" text; '#' starts a comment. Unknown keys, malformed
/// values and constraint violations raise ConfigError with the key and line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Applies one "key=value" override on top of an existing configuration.
void apply_override(RunConfig& config, std::string_view assignment);
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& config_keys();

/// "key = value" lines reproducing the configuration.
std::string format_config(const RunConfig& config);

}  // namespace pbg
