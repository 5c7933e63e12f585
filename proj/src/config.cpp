#include "pbgopt/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pbgopt/error.hpp"

namespace pbg {

std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::uniform_random: return "uniform-random";
    case InitKind::rods: return "rods";
    case InitKind::veins: return "veins";
    case InitKind::file: return "file";
  }
  return "unknown";
}

InitKind parse_init_kind(std::string_view text) {
  if (text == "uniform-random" || text == "random") return InitKind::uniform_random;
  if (text == "rods") return InitKind::rods;
  if (text == "veins") return InitKind::veins;
  if (text == "file") return InitKind::file;
  throw InvalidArgument("unknown init kind '" + std::string(text) +
                        "' (expected uniform-random, rods, veins or file)");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError("key '" + std::string(key) + "': expected " + what + ", got '" +
                    std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, const char* what) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, what);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"lattice.n", [](RunConfig& c, auto k, auto v) { c.n = parse_number<int>(k, v, "an integer"); }},
      {"polarization",
       [](RunConfig& c, auto k, auto v) {
         if (v != "TE" && v != "TM" && v != "te" && v != "tm") bad_value(k, v, "TE or TM");
         c.polarization = parse_polarization(v);
       }},
      {"band.m", [](RunConfig& c, auto k, auto v) { c.band = parse_number<int>(k, v, "an integer"); }},
      {"material.eps_min",
       [](RunConfig& c, auto k, auto v) { c.bounds.eps_min = parse_number<double>(k, v, "a number"); }},
      {"material.eps_max",
       [](RunConfig& c, auto k, auto v) { c.bounds.eps_max = parse_number<double>(k, v, "a number"); }},
      {"kpath.n_k", [](RunConfig& c, auto k, auto v) { c.n_k = parse_number<int>(k, v, "an integer"); }},
      {"subspace.r_l", [](RunConfig& c, auto k, auto v) { c.r_l = parse_number<double>(k, v, "a number"); }},
      {"subspace.r_u", [](RunConfig& c, auto k, auto v) { c.r_u = parse_number<double>(k, v, "a number"); }},
      {"outer.tol", [](RunConfig& c, auto k, auto v) { c.tol = parse_number<double>(k, v, "a number"); }},
      {"outer.max_iter",
       [](RunConfig& c, auto k, auto v) { c.max_outer = parse_number<int>(k, v, "an integer"); }},
      {"outer.move_limit",
       [](RunConfig& c, auto k, auto v) { c.move_limit = parse_number<double>(k, v, "a number"); }},
      {"init.kind",
       [](RunConfig& c, auto k, auto v) {
         try {
           c.init = parse_init_kind(v);
         } catch (const InvalidArgument&) {
           bad_value(k, v, "uniform-random, rods, veins or file");
         }
       }},
      {"init.seed",
       [](RunConfig& c, auto k, auto v) { c.seed = parse_number<std::uint64_t>(k, v, "a non-negative integer"); }},
      {"init.radius", [](RunConfig& c, auto k, auto v) { c.radius = parse_number<double>(k, v, "a number"); }},
      {"init.thickness",
       [](RunConfig& c, auto k, auto v) { c.thickness = parse_number<double>(k, v, "a number"); }},
      {"init.file", [](RunConfig& c, auto, auto v) { c.init_file = std::string(v); }},
      {"restarts", [](RunConfig& c, auto k, auto v) { c.restarts = parse_number<int>(k, v, "an integer"); }},
      {"solver.tol",
       [](RunConfig& c, auto k, auto v) {
         const double t = parse_number<double>(k, v, "a number");
         c.solver.feasibility_tol = t;
         c.solver.gap_tol = t;
       }},
      {"solver.max_iter",
       [](RunConfig& c, auto k, auto v) { c.solver.max_iterations = parse_number<int>(k, v, "an integer"); }},
      {"eig.dense_limit",
       [](RunConfig& c, auto k, auto v) { c.dense_limit = parse_number<int>(k, v, "an integer"); }},
      {"output.dir", [](RunConfig& c, auto, auto v) { c.output_dir = std::string(v); }},
      {"output.snapshots", [](RunConfig& c, auto k, auto v) { c.snapshots = parse_bool(k, v); }},
  };
  return table;
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError("key '" + std::string(key) + "': " + message);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [k, set] : setters()) {
    if (k == key) {
      set(config, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  set_config_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::validate() const {
  require(n >= 2 && n % 2 == 0, "lattice.n", "must be an even integer >= 2");
  require(band >= 1, "band.m", "must be >= 1");
  require(band + 1 <= n * n, "band.m", "exceeds the number of degrees of freedom");
  require(bounds.eps_min > 0.0, "material.eps_min", "must be positive");
  require(bounds.eps_max > bounds.eps_min, "material.eps_max", "must exceed material.eps_min");
  require(n_k >= 3, "kpath.n_k", "must be >= 3");
  require(r_l > 0.0, "subspace.r_l", "must be positive");
  require(r_u > 0.0, "subspace.r_u", "must be positive");
  require(tol > 0.0, "outer.tol", "must be positive");
  require(max_outer >= 1, "outer.max_iter", "must be >= 1");
  require(move_limit >= 0.0, "outer.move_limit", "must be >= 0");
  require(radius >= 0.0, "init.radius", "must be >= 0");
  require(thickness >= 0.0, "init.thickness", "must be >= 0");
  require(init != InitKind::file || !init_file.empty(), "init.file",
          "required when init.kind = file");
  require(restarts >= 1, "restarts", "must be >= 1");
  require(solver.feasibility_tol > 0.0, "solver.tol", "must be positive");
  require(solver.max_iterations >= 1, "solver.max_iter", "must be >= 1");
  require(dense_limit >= 1, "eig.dense_limit", "must be >= 1");
  require(!output_dir.empty(), "output.dir", "must not be empty");
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::map<std::string, int, std::less<>> key_line;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    try {
      set_config_value(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    key_line[std::string(key)] = line_no;
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    // Point at the line of the offending key when it was set explicitly.
    const std::string msg = e.what();
    for (const auto& [k, ln] : key_line) {
      if (msg.find("'" + k + "'") != std::string::npos) {
        throw ConfigError("line " + std::to_string(ln) + ": " + msg);
      }
    }
    throw;
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "lattice.n = " << c.n << '\n'
      << "polarization = " << to_string(c.polarization) << '\n'
      << "band.m = " << c.band << '\n'
      << "material.eps_min = " << c.bounds.eps_min << '\n'
      << "material.eps_max = " << c.bounds.eps_max << '\n'
      << "kpath.n_k = " << c.n_k << '\n'
      << "subspace.r_l = " << c.r_l << '\n'
      << "subspace.r_u = " << c.r_u << '\n'
      << "outer.tol = " << c.tol << '\n'
      << "outer.max_iter = " << c.max_outer << '\n'
      << "outer.move_limit = " << c.move_limit << '\n'
      << "init.kind = " << to_string(c.init) << '\n'
      << "init.seed = " << c.seed << '\n'
      << "init.radius = " << c.radius << '\n'
      << "init.thickness = " << c.thickness << '\n';
  if (!c.init_file.empty()) out << "init.file = " << c.init_file << '\n';
  out << "restarts = " << c.restarts << '\n'
      << "solver.tol = " << c.solver.feasibility_tol << '\n'
      << "solver.max_iter = " << c.solver.max_iterations << '\n'
      << "eig.dense_limit = " << c.dense_limit << '\n'
      << "output.dir = " << c.output_dir << '\n'
      << "output.snapshots = " << (c.snapshots ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace pbg
