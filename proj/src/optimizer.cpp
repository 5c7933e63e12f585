#include "pbgopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "pbgopt/error.hpp"
#include "pbgopt/subspace.hpp"

namespace pbg {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_outer: return "max_outer";
    case Termination::solver_failure: return "solver_failure";
  }
  return "unknown";
}

namespace {

DielectricDesign from_field(const Eigen::VectorXd& field, const SymmetryMap& map,
                            const MaterialBounds& bounds) {
  DielectricDesign d;
  d.bounds = bounds;
  d.eps = restrict_design(map, field);
  return d;
}

std::vector<double> split_numbers(const std::string& text, const std::string& path) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) {
      throw InvalidArgument("design file '" + path + "': cannot parse '" + token + "'");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace

DielectricDesign read_design_file(const std::string& path, const Grid& grid,
                                  const SymmetryMap& map, const MaterialBounds& bounds) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open design file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  const bool has_header = text.rfind("cell_row", 0) == 0;
  if (!has_header) {
    const std::vector<double> values = split_numbers(text, path);
    if (static_cast<int>(values.size()) != map.n_eps) {
      throw InvalidArgument("design file '" + path + "': expected " +
                            std::to_string(map.n_eps) + " values, found " +
                            std::to_string(values.size()));
    }
    DielectricDesign d;
    d.bounds = bounds;
    d.eps = Eigen::Map<const Eigen::VectorXd>(values.data(), map.n_eps);
    d.validate();
    return d;
  }

  text.erase(0, text.find('\n') == std::string::npos ? text.size() : text.find('\n') + 1);
  const std::vector<double> values = split_numbers(text, path);
  if (values.size() % 3 != 0 || static_cast<int>(values.size() / 3) != grid.cell_count()) {
    throw InvalidArgument("design file '" + path + "': expected " +
                          std::to_string(grid.cell_count()) + " rows of cell_row,cell_col,eps");
  }
  Eigen::VectorXd field = Eigen::VectorXd::Constant(grid.cell_count(),
                                                    std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < values.size(); r += 3) {
    const double row = values[r];
    const double col = values[r + 1];
    if (row != std::floor(row) || col != std::floor(col) || row < 0 || col < 0 ||
        row >= grid.n || col >= grid.n) {
      throw InvalidArgument("design file '" + path + "': bad cell index on data row " +
                            std::to_string(r / 3 + 1));
    }
    field[grid.cell_index(static_cast<int>(row), static_cast<int>(col))] = values[r + 2];
  }
  if (field.hasNaN()) throw InvalidArgument("design file '" + path + "': missing cells");
  DielectricDesign d = from_field(field, map, bounds);
  const Eigen::VectorXd back = expand_design(map, d.eps);
  if ((back - field).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, field.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("design file '" + path + "': field is not D4-symmetric");
  }
  d.validate();
  return d;
}

DielectricDesign initial_config(InitKind kind, const InitParams& params, const Grid& grid,
                                const SymmetryMap& map, const MaterialBounds& bounds) {
  if (!(bounds.eps_min > 0.0) || !(bounds.eps_max > bounds.eps_min)) {
    throw InvalidArgument("initial_config: need 0 < eps_min < eps_max");
  }
  switch (kind) {
    case InitKind::uniform_random: {
      std::mt19937_64 rng(params.seed);
      DielectricDesign d;
      d.bounds = bounds;
      d.eps.resize(map.n_eps);
      for (Eigen::Index i = 0; i < d.eps.size(); ++i) {
        // 53 random bits mapped to [0, 1); avoids the library-specific distribution.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        d.eps[i] = bounds.eps_min + u * (bounds.eps_max - bounds.eps_min);
      }
      return d;
    }
    case InitKind::rods:
    case InitKind::veins: {
      Eigen::VectorXd field(grid.cell_count());
      for (int c = 0; c < grid.cell_count(); ++c) {
        const Eigen::Vector2d x = grid.cell_center(c);
        const bool high = kind == InitKind::rods
                              ? x.norm() <= params.radius
                              : x.cwiseAbs().maxCoeff() >= 1.0 - 0.5 * params.thickness;
        field[c] = high ? bounds.eps_max : bounds.eps_min;
      }
      return from_field(field, map, bounds);
    }
    case InitKind::file:
      return read_design_file(params.file, grid, map, bounds);
  }
  throw InvalidArgument("initial_config: unknown kind");
}

DielectricDesign initial_config(const RunConfig& config, const Grid& grid,
                                const SymmetryMap& map) {
  InitParams p;
  p.seed = config.seed;
  p.radius = config.radius;
  p.thickness = config.thickness;
  p.file = config.init_file;
  return initial_config(config.init, p, grid, map, config.bounds);
}

int report_band_count(const Grid& grid, int m) {
  return std::min(grid.dof_count(), std::max(10, m + 4));
}

namespace {

double relative_step(const Eigen::VectorXd& next, const Eigen::VectorXd& current) {
  return (next - current).cwiseAbs().maxCoeff() /
         std::max(1.0, current.cwiseAbs().maxCoeff());
}

void say(const OptimizeHooks& hooks, const std::string& line) {
  if (hooks.log) hooks.log(line);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

RunResult optimize(const RunConfig& config, const DielectricDesign& start,
                   const OptimizeHooks& hooks) {
  config.validate();
  const Grid grid = build_grid(config.n);
  const SymmetryMap map = build_symmetry_map(grid);
  if (start.eps.size() != map.n_eps) {
    throw InvalidArgument("optimize: starting design has " + std::to_string(start.eps.size()) +
                          " entries, expected " + std::to_string(map.n_eps));
  }
  start.validate();
  const KPath path = build_k_path(config.n_k);
  const std::vector<AffineOperatorFamily> families =
      assemble_families(grid, map, path, config.polarization);
  EigOptions eig_opts;
  eig_opts.dense_limit = config.dense_limit;

  const int m = config.band;
  const int dofs = grid.dof_count();
  int bands = std::min(dofs, m + 8);

  RunResult result;
  result.seed = config.seed;
  result.initial_design = start;
  result.termination = Termination::max_outer;

  DielectricDesign incumbent = start;
  DielectricDesign best = start;
  double best_j = -std::numeric_limits<double>::infinity();
  const double move_cap = config.move_limit * (config.bounds.eps_max - config.bounds.eps_min);

  // Initial and final J come from the same kind of fresh solve, so an unchanged design
  // reports an unchanged J.
  const int report_bands = report_band_count(grid, m);
  try {
    result.initial_gap_midgap = band_diagram(families, start, report_bands, m, eig_opts).gap_midgap;
  } catch (const std::exception&) {
    result.initial_gap_midgap = std::numeric_limits<double>::quiet_NaN();
  }

  for (int it = 1; it <= config.max_outer; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = it;

    BandSolution sol;
    ReducedSubspace sub;
    try {
      // Step 2: eigensolve at the incumbent; grow the band count until every
      // upper window closes inside the computed spectrum.
      for (;;) {
        sol = band_diagram(families, incumbent, bands, m, eig_opts);
        try {
          sub = build_reduced_subspace(sol, incumbent, config.r_l, config.r_u);
          break;
        } catch (const InternalError&) {
          if (bands >= dofs) throw;
          bands = std::min(dofs, 2 * bands);
        }
      }
    } catch (const std::exception& e) {
      result.termination = Termination::solver_failure;
      result.message = std::string("eigensolve failed: ") + e.what();
      say(hooks, "iteration " + std::to_string(it) + ": " + result.message);
      break;
    }
    rec.eig_bands = bands;
    rec.gap_midgap = sol.gap_midgap;
    rec.lambda_lower = sol.lambda_lower;
    rec.lambda_upper = sol.lambda_upper;
    int max_b = 0;
    for (const auto& ks : sub.per_k) {
      rec.a.push_back(ks.dims.a);
      rec.b.push_back(ks.dims.b);
      max_b = std::max(max_b, ks.dims.b);
    }
    if (sol.gap_midgap > best_j) {
      best_j = sol.gap_midgap;
      best = incumbent;
    }
    if (hooks.snapshot) hooks.snapshot(it, incumbent, sol);

    // Step 3: reduced fractional SDP and its homogenization.
    const Eigen::VectorXd x_hat =
        fractional_point(config.polarization, incumbent.eps, sol.lambda_lower, sol.lambda_upper);
    const double floor = 1e-6 * std::min(x_hat[x_hat.size() - 2], x_hat[x_hat.size() - 1]);
    const ReducedBlocks blocks = reduce_blocks(families, sub);
    const FractionalSdp fsdp = build_fractional(blocks, config.bounds, floor);
    rec.incumbent_objective = fsdp.value(x_hat);
    const LinearSdp lsdp = charnes_cooper(fsdp);
    if (hooks.sdp) hooks.sdp(it, lsdp);

    // Step 4.
    const SdpSolution sdp = solve_sdp(lsdp, config.solver);
    rec.status = sdp.status;
    rec.solver_iterations = sdp.iterations;
    rec.surrogate_objective = sdp.objective;

    Recovered next;
    bool ok = sdp.status == conic::Status::optimal || sdp.status == conic::Status::near_optimal;
    std::string failure;
    if (ok) {
      try {
        next = recover(sdp, config.polarization, config.bounds);
      } catch (const std::exception& e) {
        ok = false;
        failure = e.what();
      }
    } else {
      failure = "SDP solver status " + std::string(conic::to_string(sdp.status));
    }
    if (!ok) {
      std::ostringstream diag;
      diag << failure << "; incumbent block extremes per k (lower max, upper min):";
      for (const auto& e : block_extremes(blocks, incumbent.eps, sol.lambda_lower,
                                          sol.lambda_upper)) {
        diag << " (" << fmt(e.lower_max) << ", " << fmt(e.upper_min) << ")";
      }
      result.termination = Termination::solver_failure;
      result.message = diag.str();
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.history.push_back(rec);
      say(hooks, "iteration " + std::to_string(it) + ": " + result.message);
      break;
    }
    if (sdp.status == conic::Status::near_optimal) {
      say(hooks, "iteration " + std::to_string(it) + ": SDP solved to near-optimal accuracy");
    }
    rec.clamp = next.clamp;

    DielectricDesign candidate = next.design;
    if (move_cap > 0.0) {
      for (Eigen::Index i = 0; i < candidate.eps.size(); ++i) {
        candidate.eps[i] = std::clamp(candidate.eps[i], incumbent.eps[i] - move_cap,
                                      incumbent.eps[i] + move_cap);
      }
    }
    const Eigen::VectorXd x_star = fractional_point(config.polarization, candidate.eps,
                                                    next.lambda_lower, next.lambda_upper);
    rec.step_norm = relative_step(x_star, x_hat);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);
    say(hooks, "iteration " + std::to_string(it) + ": J = " + fmt(rec.gap_midgap) +
                   ", surrogate = " + fmt(rec.surrogate_objective) +
                   ", step = " + fmt(rec.step_norm));

    // Step 5.
    if (rec.step_norm <= config.tol) {
      result.termination = Termination::converged;
      break;
    }
    incumbent = std::move(candidate);
    bands = std::min(dofs, std::max(m + 8, m + max_b + 2));
  }

  result.final_design = result.termination == Termination::solver_failure ? best : incumbent;
  try {
    result.final_bands = band_diagram(families, result.final_design, report_bands, m, eig_opts);
    result.final_gap_midgap = result.final_bands.gap_midgap;
  } catch (const std::exception& e) {
    result.termination = Termination::solver_failure;
    result.final_gap_midgap = std::numeric_limits<double>::quiet_NaN();
    if (!result.message.empty()) result.message += "; ";
    result.message += std::string("final eigensolve failed: ") + e.what();
  }
  return result;
}

RunResult optimize(const RunConfig& config, const OptimizeHooks& hooks) {
  const Grid grid = build_grid(config.n);
  const SymmetryMap map = build_symmetry_map(grid);
  return optimize(config, initial_config(config, grid, map), hooks);
}

MultiRestartResult multi_restart(const RunConfig& config, int restarts,
                                 const OptimizeHooks& hooks) {
  if (restarts < 1) throw InvalidArgument("multi_restart: restarts must be >= 1");
  MultiRestartResult out;
  for (int r = 0; r < restarts; ++r) {
    RunConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(r);
    say(hooks, "restart " + std::to_string(r + 1) + "/" + std::to_string(restarts) +
                   " (seed " + std::to_string(c.seed) + ")");
    try {
      out.runs.push_back(optimize(c, hooks));
    } catch (const std::exception& e) {
      RunResult failed;
      failed.seed = c.seed;
      failed.termination = Termination::solver_failure;
      failed.message = e.what();
      failed.initial_gap_midgap = std::numeric_limits<double>::quiet_NaN();
      failed.final_gap_midgap = std::numeric_limits<double>::quiet_NaN();
      out.runs.push_back(std::move(failed));
    }
  }
  for (std::size_t i = 1; i < out.runs.size(); ++i) {
    const double bi = out.runs[out.best].final_gap_midgap;
    const double ci = out.runs[i].final_gap_midgap;
    if (!std::isnan(ci) && (std::isnan(bi) || ci > bi)) out.best = i;
  }
  return out;
}

}  // namespace pbg
