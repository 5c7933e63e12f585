#include "pbgopt/pbgopt.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "pbgopt/config.hpp"
#include "pbgopt/error.hpp"
#include "pbgopt/optimizer.hpp"
#include "pbgopt/output.hpp"

struct pbg_config {
  pbg::RunConfig cfg;
};

struct pbg_result {
  pbg::RunResult run;
  bool optimized = false;
};

namespace {

thread_local std::string g_last_error;

pbg_status fail(pbg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
pbg_status guarded(F&& body) {
  try {
    return body();
  } catch (const pbg::ConfigError& e) {
    return fail(PBG_ERR_CONFIG, e.what());
  } catch (const pbg::NumericalError& e) {
    return fail(PBG_ERR_NUMERICAL, e.what());
  } catch (const pbg::DegenerateSolution& e) {
    return fail(PBG_ERR_NUMERICAL, e.what());
  } catch (const pbg::InvalidArgument& e) {
    return fail(PBG_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(PBG_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PBG_ERR_INTERNAL, "out of memory");
  } catch (const std::runtime_error& e) {
    return fail(PBG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(PBG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PBG_ERR_INTERNAL, "unknown error");
  }
}

std::string resolve_dir(const pbg::RunConfig& cfg, const char* output_dir) {
  return output_dir ? std::string(output_dir) : cfg.output_dir;
}

// Everything that can fail for configuration reasons happens here, before any file is
// written.
struct Setup {
  pbg::Grid grid;
  pbg::SymmetryMap map;
  pbg::KPath path;
  pbg::DielectricDesign start;
};

Setup prepare(const pbg::RunConfig& cfg) {
  cfg.validate();
  Setup s;
  s.grid = pbg::build_grid(cfg.n);
  s.map = pbg::build_symmetry_map(s.grid);
  s.path = pbg::build_k_path(cfg.n_k);
  try {
    s.start = pbg::initial_config(cfg, s.grid, s.map);
  } catch (const pbg::InvalidArgument& e) {
    throw pbg::ConfigError(std::string("init: ") + e.what());
  }
  return s;
}

std::string iteration_tag(int it) {
  std::ostringstream s;
  s << "iter_";
  s.width(3);
  s.fill('0');
  s << it;
  return s.str();
}

}  // namespace

extern "C" {

const char* pbg_version(void) { return "0.1.0"; }

const char* pbg_last_error(void) { return g_last_error.c_str(); }

pbg_status pbg_config_create(pbg_config** out) {
  if (!out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_create: out is NULL");
  return guarded([&] {
    *out = new pbg_config{};
    return PBG_OK;
  });
}

pbg_status pbg_config_parse_file(const char* path, pbg_config** out) {
  if (!path || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_parse_file: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<pbg_config>();
    c->cfg = pbg::load_config(path);
    *out = c.release();
    return PBG_OK;
  });
}

pbg_status pbg_config_parse_string(const char* text, pbg_config** out) {
  if (!text || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_parse_string: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<pbg_config>();
    c->cfg = pbg::parse_config(text);
    *out = c.release();
    return PBG_OK;
  });
}

pbg_status pbg_config_set(pbg_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_set: NULL argument");
  return guarded([&] {
    pbg::RunConfig next = config->cfg;
    pbg::set_config_value(next, key, value);
    next.validate();
    config->cfg = std::move(next);
    return PBG_OK;
  });
}

pbg_status pbg_config_apply(pbg_config* config, const char* const* assignments, size_t count) {
  if (!config || (count > 0 && !assignments)) {
    return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_apply: NULL argument");
  }
  return guarded([&] {
    pbg::RunConfig next = config->cfg;
    for (size_t i = 0; i < count; ++i) {
      if (!assignments[i]) throw pbg::InvalidArgument("pbg_config_apply: NULL assignment");
      pbg::apply_override(next, assignments[i]);
    }
    next.validate();
    config->cfg = std::move(next);
    return PBG_OK;
  });
}

pbg_status pbg_config_format(const pbg_config* config, char* buf, size_t len, size_t* needed) {
  if (!config) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_config_format: config is NULL");
  return guarded([&] {
    const std::string text = pbg::format_config(config->cfg);
    if (needed) *needed = text.size() + 1;
    if (buf && len > 0) {
      const size_t n = std::min(len - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return PBG_OK;
  });
}

void pbg_config_destroy(pbg_config* config) { delete config; }

pbg_status pbg_run_bands(const pbg_config* config, const char* output_dir, pbg_result** out) {
  if (!config || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_run_bands: NULL argument");
  *out = nullptr;
  return guarded([&] {
    const pbg::RunConfig& cfg = config->cfg;
    const Setup s = prepare(cfg);
    pbg::EigOptions eo;
    eo.dense_limit = cfg.dense_limit;
    auto r = std::make_unique<pbg_result>();
    r->run.seed = cfg.seed;
    r->run.initial_design = s.start;
    r->run.final_design = s.start;
    r->run.final_bands = pbg::band_diagram(s.grid, s.map, s.start, s.path, cfg.polarization,
                                           pbg::report_band_count(s.grid, cfg.band), cfg.band, eo);
    r->run.final_gap_midgap = r->run.final_bands.gap_midgap;
    r->run.initial_gap_midgap = r->run.final_gap_midgap;
    const std::string dir = resolve_dir(cfg, output_dir);
    if (!dir.empty()) {
      pbg::write_design_artifacts(dir, s.grid, s.map, s.path, s.start, r->run.final_bands);
      pbg::write_text_file((std::filesystem::path(dir) / "summary.json").string(),
                           pbg::summary_json(cfg, r->run.final_bands));
    }
    *out = r.release();
    return PBG_OK;
  });
}

pbg_status pbg_run_optimize(const pbg_config* config, const char* output_dir, unsigned flags,
                            pbg_log_fn log, void* user, pbg_result** out) {
  if (!config || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_run_optimize: NULL argument");
  *out = nullptr;
  return guarded([&] {
    const pbg::RunConfig& cfg = config->cfg;
    const Setup s = prepare(cfg);
    const std::string dir = resolve_dir(cfg, output_dir);
    const std::filesystem::path base(dir);
    const bool write = !dir.empty();

    pbg::OptimizeHooks hooks;
    if (log) hooks.log = [log, user](const std::string& line) { log(line.c_str(), user); };
    std::string run_prefix;
    if (write && cfg.snapshots) {
      hooks.snapshot = [&](int it, const pbg::DielectricDesign& d, const pbg::BandSolution& b) {
        const auto snap = base / "snapshots";
        std::filesystem::create_directories(snap);
        const std::string tag = run_prefix + iteration_tag(it);
        std::ostringstream os;
        pbg::write_design_csv(os, s.grid, s.map, d);
        pbg::write_text_file((snap / (tag + "_design.csv")).string(), os.str());
        os.str("");
        pbg::write_bands_csv(os, b);
        pbg::write_text_file((snap / (tag + "_bands.csv")).string(), os.str());
        std::ofstream logf(snap / "iterations.log", std::ios::app);
        logf.precision(17);
        logf << tag << " J=" << b.gap_midgap << " lambda_lower=" << b.lambda_lower
             << " lambda_upper=" << b.lambda_upper << '\n';
      };
    }
    if (write && (flags & PBG_DUMP_SDP)) {
      hooks.sdp = [&](int it, const pbg::LinearSdp& lsdp) {
        const auto sdir = base / "sdp";
        std::filesystem::create_directories(sdir);
        std::ofstream f(sdir / (run_prefix + iteration_tag(it) + ".dat-s"));
        if (!f) throw std::runtime_error("cannot write SDP dump into '" + sdir.string() + "'");
        pbg::write_sdp_dump(f, lsdp);
      };
    }
    if (write) {
      std::filesystem::create_directories(base);
      if (cfg.snapshots) std::filesystem::remove(base / "snapshots" / "iterations.log");
    }

    pbg::MultiRestartResult all;
    if (cfg.restarts == 1) {
      all.runs.push_back(pbg::optimize(cfg, s.start, hooks));
    } else {
      for (int i = 0; i < cfg.restarts; ++i) {
        pbg::RunConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(i);
        run_prefix = "run" + std::to_string(i) + "_";
        if (hooks.log) hooks.log("restart " + std::to_string(i + 1) + "/" + std::to_string(cfg.restarts) + " (seed " + std::to_string(c.seed) + ")");
        try {
          all.runs.push_back(pbg::optimize(c, hooks));
        } catch (const pbg::NumericalError& e) {
          pbg::RunResult failed;
          failed.seed = c.seed;
          failed.termination = pbg::Termination::solver_failure;
          failed.message = e.what();
          failed.initial_gap_midgap = std::numeric_limits<double>::quiet_NaN();
          failed.final_gap_midgap = std::numeric_limits<double>::quiet_NaN();
          all.runs.push_back(std::move(failed));
        }
      }
      for (std::size_t i = 1; i < all.runs.size(); ++i) {
        const double bj = all.runs[all.best].final_gap_midgap;
        const double cj = all.runs[i].final_gap_midgap;
        if (!std::isnan(cj) && (std::isnan(bj) || cj > bj)) all.best = i;
      }
    }

    auto r = std::make_unique<pbg_result>();
    r->run = all.runs[all.best];
    r->optimized = true;
    if (write) {
      pbg::write_text_file((base / "run.json").string(), pbg::run_json(cfg, all));
      if (!r->run.final_bands.per_k.empty()) {
        pbg::write_design_artifacts(dir, s.grid, s.map, s.path, r->run.final_design,
                                    r->run.final_bands);
        pbg::write_text_file((base / "summary.json").string(),
                             pbg::summary_json(cfg, r->run.final_bands));
      }
    }
    const bool failed = r->run.termination == pbg::Termination::solver_failure;
    const std::string message = r->run.message;
    *out = r.release();
    if (failed) return fail(PBG_ERR_NUMERICAL, message.empty() ? "solver failure" : message);
    return PBG_OK;
  });
}

double pbg_result_gap_midgap(const pbg_result* r) {
  return r ? r->run.final_gap_midgap : std::numeric_limits<double>::quiet_NaN();
}

double pbg_result_initial_gap_midgap(const pbg_result* r) {
  return r ? r->run.initial_gap_midgap : std::numeric_limits<double>::quiet_NaN();
}

double pbg_result_lambda_lower(const pbg_result* r) {
  return r && !r->run.final_bands.per_k.empty() ? r->run.final_bands.lambda_lower
                                                : std::numeric_limits<double>::quiet_NaN();
}

double pbg_result_lambda_upper(const pbg_result* r) {
  return r && !r->run.final_bands.per_k.empty() ? r->run.final_bands.lambda_upper
                                                : std::numeric_limits<double>::quiet_NaN();
}

pbg_termination pbg_result_termination(const pbg_result* r) {
  if (!r || !r->optimized) return PBG_TERM_NONE;
  switch (r->run.termination) {
    case pbg::Termination::converged: return PBG_TERM_CONVERGED;
    case pbg::Termination::max_outer: return PBG_TERM_MAX_OUTER;
    case pbg::Termination::solver_failure: return PBG_TERM_SOLVER_FAILURE;
  }
  return PBG_TERM_NONE;
}

size_t pbg_result_iteration_count(const pbg_result* r) { return r ? r->run.history.size() : 0; }

pbg_status pbg_result_iteration(const pbg_result* r, size_t index, pbg_iteration* out) {
  if (!r || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_result_iteration: NULL argument");
  if (index >= r->run.history.size()) {
    return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_result_iteration: index out of range");
  }
  const pbg::IterationRecord& h = r->run.history[index];
  out->iteration = h.iteration;
  out->gap_midgap = h.gap_midgap;
  out->lambda_lower = h.lambda_lower;
  out->lambda_upper = h.lambda_upper;
  out->incumbent_objective = h.incumbent_objective;
  out->surrogate_objective = h.surrogate_objective;
  out->step_norm = h.step_norm;
  out->clamp = h.clamp;
  out->wall_seconds = h.wall_seconds;
  out->solver_iterations = h.solver_iterations;
  out->solver_status = static_cast<int>(h.status);
  return PBG_OK;
}

size_t pbg_result_k_count(const pbg_result* r) { return r ? r->run.final_bands.per_k.size() : 0; }

size_t pbg_result_band_count(const pbg_result* r) {
  return r && !r->run.final_bands.per_k.empty()
             ? static_cast<size_t>(r->run.final_bands.per_k.front().size())
             : 0;
}

pbg_status pbg_result_eigenvalue(const pbg_result* r, size_t k, size_t band, double* out) {
  if (!r || !out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_result_eigenvalue: NULL argument");
  const auto& per_k = r->run.final_bands.per_k;
  if (k >= per_k.size() || band >= static_cast<size_t>(per_k[k].size())) {
    return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_result_eigenvalue: index out of range");
  }
  *out = per_k[k].eigenvalues[static_cast<Eigen::Index>(band)];
  return PBG_OK;
}

size_t pbg_result_design(const pbg_result* r, double* buf, size_t len) {
  if (!r) return 0;
  const Eigen::VectorXd& eps = r->run.final_design.eps;
  const size_t n = static_cast<size_t>(eps.size());
  if (buf) {
    for (size_t i = 0; i < std::min(n, len); ++i) buf[i] = eps[static_cast<Eigen::Index>(i)];
  }
  return n;
}

void pbg_result_destroy(pbg_result* r) { delete r; }

pbg_status pbg_gap_midgap(double lambda_lower, double lambda_upper, double* out) {
  if (!out) return fail(PBG_ERR_INVALID_ARGUMENT, "pbg_gap_midgap: out is NULL");
  return guarded([&] {
    try {
      *out = pbg::gap_midgap(lambda_lower, lambda_upper);
    } catch (...) {
      *out = std::numeric_limits<double>::quiet_NaN();
      throw;
    }
    return PBG_OK;
  });
}

}  // extern "C"
