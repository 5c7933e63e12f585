// pbgopt: band diagrams and band-gap optimization of 2D square-lattice photonic crystals.
//
//   pbgopt bands    -c run.cfg [-o dir] [--set key=value ...]
//   pbgopt optimize -c run.cfg [-o dir] [--set key=value ...] [--dump-sdp]
//   pbgopt sweep    -c run.cfg --bands 1,3-5 [-o dir] ...
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbgopt/pbgopt.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Common {
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
  int verbosity = 0;
  bool dump_sdp = false;
  std::string band_list;
};

void log_line(const char* line, void*) { std::cerr << "pbgopt: " << line << '\n'; }

int report(pbg_status st, const char* what) {
  std::cerr << "pbgopt: " << what << ": " << pbg_last_error() << '\n';
  return st == PBG_ERR_CONFIG || st == PBG_ERR_INVALID_ARGUMENT ? kExitConfig : kExitNumerical;
}

// Parses the config, applies overrides and -o. Returns nullptr after printing on error.
pbg_config* load(const Common& opt) {
  pbg_config* cfg = nullptr;
  pbg_status st = opt.config_path.empty() ? pbg_config_create(&cfg)
                                          : pbg_config_parse_file(opt.config_path.c_str(), &cfg);
  if (st != PBG_OK) {
    report(st, "configuration");
    return nullptr;
  }
  std::vector<const char*> assignments;
  for (const auto& o : opt.overrides) assignments.push_back(o.c_str());
  st = pbg_config_apply(cfg, assignments.data(), assignments.size());
  if (st != PBG_OK) {
    report(st, "configuration (--set)");
    pbg_config_destroy(cfg);
    return nullptr;
  }
  if (!opt.output_dir.empty()) {
    st = pbg_config_set(cfg, "output.dir", opt.output_dir.c_str());
    if (st != PBG_OK) {
      report(st, "configuration (-o)");
      pbg_config_destroy(cfg);
      return nullptr;
    }
  }
  return cfg;
}

std::string output_dir_of(const pbg_config* cfg) {
  size_t needed = 0;
  pbg_config_format(cfg, nullptr, 0, &needed);
  std::string text(needed, '\0');
  pbg_config_format(cfg, text.data(), text.size(), &needed);
  const std::string key = "output.dir = ";
  const auto p = text.find(key);
  if (p == std::string::npos) return "out";
  const auto e = text.find('\n', p);
  return text.substr(p + key.size(), e - p - key.size());
}

void print_result(const pbg_result* r) {
  std::printf("lambda_lower = %.17g\nlambda_upper = %.17g\ngap_midgap = %.17g\n",
              pbg_result_lambda_lower(r), pbg_result_lambda_upper(r), pbg_result_gap_midgap(r));
}

int cmd_bands(const Common& opt) {
  pbg_config* cfg = load(opt);
  if (!cfg) return kExitConfig;
  pbg_result* r = nullptr;
  const pbg_status st = pbg_run_bands(cfg, nullptr, &r);
  pbg_config_destroy(cfg);
  if (st != PBG_OK) return report(st, "bands");
  print_result(r);
  pbg_result_destroy(r);
  return 0;
}

const char* termination_name(pbg_termination t) {
  switch (t) {
    case PBG_TERM_CONVERGED: return "converged";
    case PBG_TERM_MAX_OUTER: return "max_outer";
    case PBG_TERM_SOLVER_FAILURE: return "solver_failure";
    default: return "none";
  }
}

int run_optimize(pbg_config* cfg, const Common& opt, const char* dir, nlohmann::ordered_json* entry) {
  pbg_result* r = nullptr;
  const unsigned flags = opt.dump_sdp ? PBG_DUMP_SDP : 0u;
  const pbg_status st =
      pbg_run_optimize(cfg, dir, flags, opt.verbosity > 0 ? log_line : nullptr, nullptr, &r);
  int code = 0;
  if (st != PBG_OK) code = report(st, "optimize");
  if (r) {
    print_result(r);
    std::printf("termination = %s\niterations = %zu\n", termination_name(pbg_result_termination(r)),
                pbg_result_iteration_count(r));
    if (entry) {
      (*entry)["termination"] = termination_name(pbg_result_termination(r));
      (*entry)["initial_gap_midgap"] = pbg_result_initial_gap_midgap(r);
      (*entry)["final_gap_midgap"] = pbg_result_gap_midgap(r);
      (*entry)["lambda_lower"] = pbg_result_lambda_lower(r);
      (*entry)["lambda_upper"] = pbg_result_lambda_upper(r);
      (*entry)["iterations"] = pbg_result_iteration_count(r);
    }
    pbg_result_destroy(r);
  }
  return code;
}

int cmd_optimize(const Common& opt) {
  pbg_config* cfg = load(opt);
  if (!cfg) return kExitConfig;
  const int code = run_optimize(cfg, opt, nullptr, nullptr);
  pbg_config_destroy(cfg);
  return code;
}

bool parse_band_list(const std::string& text, std::vector<int>& out) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash));
        const int b = std::stoi(item.substr(dash + 1));
        if (b < a) return false;
        for (int m = a; m <= b; ++m) out.push_back(m);
      }
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

int cmd_sweep(const Common& opt) {
  std::vector<int> bands;
  if (!parse_band_list(opt.band_list, bands)) {
    std::cerr << "pbgopt: configuration: --bands expects a list like 1,3-5\n";
    return kExitConfig;
  }
  pbg_config* cfg = load(opt);
  if (!cfg) return kExitConfig;
  // Validate every band index before anything is written.
  for (int m : bands) {
    const pbg_status st = pbg_config_set(cfg, "band.m", std::to_string(m).c_str());
    if (st != PBG_OK) {
      pbg_config_destroy(cfg);
      return report(st, "configuration (--bands)");
    }
  }
  const std::filesystem::path base = output_dir_of(cfg);
  nlohmann::ordered_json sweep;
  sweep["bands"] = bands;
  sweep["runs"] = nlohmann::ordered_json::array();
  int code = 0;
  for (int m : bands) {
    pbg_config_set(cfg, "band.m", std::to_string(m).c_str());
    const std::string dir = (base / ("m" + std::to_string(m))).string();
    std::printf("band.m = %d\n", m);
    nlohmann::ordered_json entry;
    entry["band"] = m;
    entry["output_dir"] = dir;
    const int c = run_optimize(cfg, opt, dir.c_str(), &entry);
    if (c != 0 && code == 0) code = c;
    sweep["runs"].push_back(std::move(entry));
  }
  pbg_config_destroy(cfg);
  std::filesystem::create_directories(base);
  std::ofstream f(base / "sweep.json");
  f << sweep.dump(2) << '\n';
  if (!f) {
    std::cerr << "pbgopt: cannot write " << (base / "sweep.json").string() << '\n';
    return kExitNumerical;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic band-gap optimization on a 2D square lattice"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pbg_version()));

  // One options struct per subcommand: CLI11 resets shared bindings of unparsed ones.
  Common bands_opt, optimize_opt, sweep_opt;
  auto add_common = [](CLI::App* sub, Common& opt) {
    sub->add_option("-c,--config", opt.config_path, "Configuration file (key = value lines)");
    sub->add_option("-o,--output", opt.output_dir, "Output directory (overrides output.dir)");
    sub->add_option("--set", opt.overrides, "Override one key, e.g. --set band.m=3")
        ->allow_extra_args(false);
    sub->add_flag("-v,--verbose", opt.verbosity, "Log outer iterations to standard error");
  };

  CLI::App* bands = app.add_subcommand("bands", "Band diagram of the configured initial design");
  add_common(bands, bands_opt);
  CLI::App* optimize = app.add_subcommand("optimize", "Maximize the band gap above band.m");
  add_common(optimize, optimize_opt);
  optimize->add_flag("--dump-sdp", optimize_opt.dump_sdp,
                     "Write every reduced SDP in SDPA sparse format");
  CLI::App* sweep = app.add_subcommand("sweep", "Optimize over a list of band indices");
  add_common(sweep, sweep_opt);
  sweep->add_option("--bands", sweep_opt.band_list, "Band indices, e.g. 1,3-5")->required();
  sweep->add_flag("--dump-sdp", sweep_opt.dump_sdp, "Write every reduced SDP in SDPA sparse format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (bands->parsed()) return cmd_bands(bands_opt);
  if (optimize->parsed()) return cmd_optimize(optimize_opt);
  return cmd_sweep(sweep_opt);
}
