#include "pbgopt/output.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pbg {

namespace {

using nlohmann::ordered_json;

constexpr int kDigits = 17;

double finite_or_nan(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

ordered_json number(double v) {
  // nlohmann writes NaN as null, which is what the schema expects for "not available".
  return ordered_json(finite_or_nan(v));
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["lattice.n"] = c.n;
  j["polarization"] = std::string(to_string(c.polarization));
  j["band.m"] = c.band;
  j["material.eps_min"] = c.bounds.eps_min;
  j["material.eps_max"] = c.bounds.eps_max;
  j["kpath.n_k"] = c.n_k;
  j["subspace.r_l"] = c.r_l;
  j["subspace.r_u"] = c.r_u;
  j["outer.tol"] = c.tol;
  j["outer.max_iter"] = c.max_outer;
  j["outer.move_limit"] = c.move_limit;
  j["init.kind"] = std::string(to_string(c.init));
  j["init.seed"] = c.seed;
  j["init.radius"] = c.radius;
  j["init.thickness"] = c.thickness;
  j["init.file"] = c.init_file;
  j["restarts"] = c.restarts;
  j["solver.tol"] = c.solver.feasibility_tol;
  j["solver.max_iter"] = c.solver.max_iterations;
  j["eig.dense_limit"] = c.dense_limit;
  j["output.dir"] = c.output_dir;
  j["output.snapshots"] = c.snapshots;
  return j;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

ordered_json run_entry(const RunResult& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["termination"] = std::string(to_string(r.termination));
  j["message"] = r.message;
  j["initial_gap_midgap"] = number(r.initial_gap_midgap);
  j["final_gap_midgap"] = number(r.final_gap_midgap);
  if (!r.final_bands.per_k.empty()) {
    j["final_lambda_lower"] = number(r.final_bands.lambda_lower);
    j["final_lambda_upper"] = number(r.final_bands.lambda_upper);
  } else {
    j["final_lambda_lower"] = nullptr;
    j["final_lambda_upper"] = nullptr;
  }
  ordered_json hist = ordered_json::array();
  for (const auto& h : r.history) {
    ordered_json e;
    e["iteration"] = h.iteration;
    e["gap_midgap"] = number(h.gap_midgap);
    e["lambda_lower"] = number(h.lambda_lower);
    e["lambda_upper"] = number(h.lambda_upper);
    e["incumbent_objective"] = number(h.incumbent_objective);
    e["surrogate_objective"] = number(h.surrogate_objective);
    e["step_norm"] = number(h.step_norm);
    e["a"] = h.a;
    e["b"] = h.b;
    e["eig_bands"] = h.eig_bands;
    e["solver_status"] = std::string(conic::to_string(h.status));
    e["solver_iterations"] = h.solver_iterations;
    e["clamp"] = number(h.clamp);
    e["wall_seconds"] = h.wall_seconds;
    hist.push_back(std::move(e));
  }
  j["history"] = std::move(hist);
  j["initial_design"] = vector_json(r.initial_design.eps);
  j["final_design"] = vector_json(r.final_design.eps);
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string svg_num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

void write_bands_csv(std::ostream& out, const BandSolution& bands) {
  const auto old = out.precision(kDigits);
  out << "k_index,k_x,k_y,band,lambda,omega_norm\n";
  for (std::size_t t = 0; t < bands.per_k.size(); ++t) {
    const EigenSolution& s = bands.per_k[t];
    for (int j = 0; j < s.size(); ++j) {
      const double lam = s.eigenvalues[j];
      out << t << ',' << s.k.x() << ',' << s.k.y() << ',' << j + 1 << ',' << lam << ','
          << normalized_frequency(std::max(lam, 0.0)) << '\n';
    }
  }
  out.precision(old);
}

void write_design_csv(std::ostream& out, const Grid& grid, const SymmetryMap& map,
                      const DielectricDesign& design) {
  const Eigen::VectorXd field = expand_design(map, design.eps);
  const auto old = out.precision(kDigits);
  out << "cell_row,cell_col,eps\n";
  for (int r = 0; r < grid.n; ++r) {
    for (int c = 0; c < grid.n; ++c) out << r << ',' << c << ',' << field[grid.cell_index(r, c)] << '\n';
  }
  out.precision(old);
}

void write_bands_svg(std::ostream& out, const BandSolution& bands, const KPath& path) {
  const double W = 640, H = 480, left = 60, right = 20, top = 20, bottom = 40;
  const double pw = W - left - right, ph = H - top - bottom;
  const int nk = static_cast<int>(bands.per_k.size());
  int nb = nk ? bands.per_k.front().size() : 0;
  for (const auto& s : bands.per_k) nb = std::min(nb, s.size());

  double ymax = 0.0;
  for (const auto& s : bands.per_k) {
    for (int j = 0; j < nb; ++j) ymax = std::max(ymax, normalized_frequency(std::max(s.eigenvalues[j], 0.0)));
  }
  ymax = ymax > 0.0 ? 1.05 * ymax : 1.0;
  const double xmax = path.total_length > 0.0 ? path.total_length : 1.0;
  auto X = [&](double s) { return left + pw * s / xmax; };
  auto Y = [&](double w) { return top + ph * (1.0 - w / ymax); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  if (nk > 0 && bands.lambda_upper > bands.lambda_lower && bands.lambda_lower > 0.0) {
    const double wl = normalized_frequency(bands.lambda_lower);
    const double wu = normalized_frequency(bands.lambda_upper);
    out << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(Y(wu)) << "\" width=\""
        << svg_num(pw) << "\" height=\"" << svg_num(Y(wl) - Y(wu))
        << "\" fill=\"#f4c542\" fill-opacity=\"0.4\"/>\n";
  }

  // Corner ticks; Gamma closes the loop at the total length.
  std::vector<std::pair<double, std::string>> ticks;
  for (int t = 0; t < path.size(); ++t) {
    if (!path.labels[static_cast<std::size_t>(t)].empty()) ticks.emplace_back(path.arc[static_cast<std::size_t>(t)], path.labels[static_cast<std::size_t>(t)]);
  }
  ticks.emplace_back(path.total_length, "G");
  for (const auto& [s, label] : ticks) {
    out << "<line x1=\"" << svg_num(X(s)) << "\" y1=\"" << top << "\" x2=\"" << svg_num(X(s))
        << "\" y2=\"" << top + ph << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << svg_num(X(s)) << "\" y=\"" << H - 15
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
        << (label == "G" ? "&#915;" : label) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double w = ymax * i / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << svg_num(Y(w) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << svg_num(w)
        << "</text>\n";
  }
  out << "<text x=\"15\" y=\"" << svg_num(top + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << svg_num(top + ph / 2) << ")\">&#969;a/2&#960;c</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int j = 0; j < nb && nk > 0; ++j) {
    out << "<polyline fill=\"none\" stroke=\"" << (j + 1 == bands.band_index || j == bands.band_index ? "#c0392b" : "#1f4e9c")
        << "\" stroke-width=\"1.5\" points=\"";
    for (int t = 0; t <= nk; ++t) {
      const int src = t == nk ? 0 : t;
      const double s = t == nk ? path.total_length : path.arc[static_cast<std::size_t>(t)];
      const double w = normalized_frequency(std::max(bands.per_k[static_cast<std::size_t>(src)].eigenvalues[j], 0.0));
      out << svg_num(X(s)) << ',' << svg_num(Y(w)) << (t == nk ? "" : " ");
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_design_svg(std::ostream& out, const Grid& grid, const SymmetryMap& map,
                      const DielectricDesign& design) {
  const Eigen::VectorXd field = expand_design(map, design.eps);
  const double size = 480.0;
  const double cell = size / grid.n;
  const double span = design.bounds.eps_max - design.bounds.eps_min;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\" shape-rendering=\"crispEdges\">\n";
  for (int r = 0; r < grid.n; ++r) {
    for (int c = 0; c < grid.n; ++c) {
      const double f = span > 0.0 ? (field[grid.cell_index(r, c)] - design.bounds.eps_min) / span : 0.0;
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(f, 0.0, 1.0))));
      out << "<rect x=\"" << svg_num(c * cell) << "\" y=\"" << svg_num((grid.n - 1 - r) * cell)
          << "\" width=\"" << svg_num(cell) << "\" height=\"" << svg_num(cell) << "\" fill=\"rgb("
          << g << ',' << g << ',' << g << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

std::string summary_json(const RunConfig& config, const BandSolution& bands) {
  ordered_json j;
  j["polarization"] = std::string(to_string(config.polarization));
  j["lattice.n"] = config.n;
  j["kpath.n_k"] = static_cast<int>(bands.per_k.size());
  const int nb = bands.per_k.empty() ? 0 : bands.per_k.front().size();
  j["bands_computed"] = nb;
  j["band"] = bands.band_index;
  j["lambda_lower"] = number(bands.lambda_lower);
  j["lambda_upper"] = number(bands.lambda_upper);
  j["gap_midgap"] = number(bands.gap_midgap);
  ordered_json per = ordered_json::array();
  for (int m = 1; m < nb; ++m) {
    BandSolution copy;
    copy.per_k = bands.per_k;
    ordered_json e;
    e["band"] = m;
    try {
      set_band_index(copy, m);
      e["lambda_lower"] = number(copy.lambda_lower);
      e["lambda_upper"] = number(copy.lambda_upper);
      e["gap_midgap"] = number(copy.gap_midgap);
    } catch (const std::exception&) {
      e["lambda_lower"] = nullptr;
      e["lambda_upper"] = nullptr;
      e["gap_midgap"] = nullptr;
    }
    per.push_back(std::move(e));
  }
  j["per_band"] = std::move(per);
  return j.dump(2) + "\n";
}

std::string run_json(const RunConfig& config, const MultiRestartResult& runs) {
  ordered_json j;
  j["format"] = "pbgopt-run";
  j["version"] = 1;
  j["timestamp"] = utc_timestamp();
  j["config"] = config_json(config);
  const RunResult* best = runs.runs.empty() ? nullptr : &runs.runs[runs.best];
  j["best"] = runs.best;
  j["termination"] = best ? std::string(to_string(best->termination)) : "solver_failure";
  j["final_gap_midgap"] = best ? number(best->final_gap_midgap) : ordered_json(nullptr);
  ordered_json all = ordered_json::array();
  for (const auto& r : runs.runs) all.push_back(run_entry(r));
  j["runs"] = std::move(all);
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

void write_design_artifacts(const std::string& dir, const Grid& grid, const SymmetryMap& map,
                            const KPath& path, const DielectricDesign& design,
                            const BandSolution& bands, const std::string& prefix) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ostringstream s;
  write_bands_csv(s, bands);
  write_text_file((base / (prefix + "bands.csv")).string(), s.str());
  s.str("");
  write_design_csv(s, grid, map, design);
  write_text_file((base / (prefix + "design.csv")).string(), s.str());
  s.str("");
  write_bands_svg(s, bands, path);
  write_text_file((base / (prefix + "bands.svg")).string(), s.str());
  s.str("");
  write_design_svg(s, grid, map, design);
  write_text_file((base / (prefix + "design.svg")).string(), s.str());
}

}  // namespace pbg
