#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

#include "pbgopt/error.hpp"
#include "pbgopt/optimizer.hpp"
#include "pbgopt/output.hpp"

using namespace pbg;

namespace {

RunConfig small_config(int n, Polarization pol, int m) {
  RunConfig c;
  c.n = n;
  c.polarization = pol;
  c.band = m;
  c.max_outer = 20;
  return c;
}

bool same_history(const RunResult& a, const RunResult& b) {
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    const auto& x = a.history[i];
    const auto& y = b.history[i];
    if (x.gap_midgap != y.gap_midgap || x.surrogate_objective != y.surrogate_objective ||
        x.step_norm != y.step_norm || x.a != y.a || x.b != y.b || x.status != y.status ||
        x.solver_iterations != y.solver_iterations || x.eig_bands != y.eig_bands) {
      return false;
    }
  }
  return a.final_design.eps == b.final_design.eps;
}

// 4-connected components of the eps_max cells on the periodic grid.
int components(const Grid& g, const Eigen::VectorXd& field, double level) {
  std::vector<int> seen(static_cast<std::size_t>(g.cell_count()), 0);
  int count = 0;
  for (int c = 0; c < g.cell_count(); ++c) {
    if (field[c] != level || seen[static_cast<std::size_t>(c)]) continue;
    ++count;
    std::queue<int> q;
    q.push(c);
    seen[static_cast<std::size_t>(c)] = 1;
    while (!q.empty()) {
      const int cur = q.front();
      q.pop();
      const int r = cur / g.n, col = cur % g.n;
      const int nb[4][2] = {{r + 1, col}, {r - 1, col}, {r, col + 1}, {r, col - 1}};
      for (const auto& p : nb) {
        const int o = g.cell_index((p[0] + g.n) % g.n, (p[1] + g.n) % g.n);
        if (field[o] == level && !seen[static_cast<std::size_t>(o)]) {
          seen[static_cast<std::size_t>(o)] = 1;
          q.push(o);
        }
      }
    }
  }
  return count;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pbgopt_test_" + name)).string();
}

}  // namespace

TEST_CASE("random initial designs respect the bounds and the seed") {
  const Grid g = build_grid(12);
  const SymmetryMap map = build_symmetry_map(g);
  const MaterialBounds bounds;
  InitParams p;
  p.seed = 17;
  const DielectricDesign a = initial_config(InitKind::uniform_random, p, g, map, bounds);
  const DielectricDesign b = initial_config(InitKind::uniform_random, p, g, map, bounds);
  p.seed = 18;
  const DielectricDesign c = initial_config(InitKind::uniform_random, p, g, map, bounds);
  CHECK(a.eps.size() == map.n_eps);
  CHECK(a.eps == b.eps);
  CHECK(a.eps != c.eps);
  CHECK(a.eps.minCoeff() >= 1.0);
  CHECK(a.eps.maxCoeff() <= 11.4);
  CHECK(a.eps.maxCoeff() - a.eps.minCoeff() > 5.0);
}

TEST_CASE("rods and veins") {
  const Grid g = build_grid(32);
  const SymmetryMap map = build_symmetry_map(g);
  const MaterialBounds bounds;
  InitParams p;
  const DielectricDesign rods = initial_config(InitKind::rods, p, g, map, bounds);
  const Eigen::VectorXd field = expand_design(map, rods.eps);
  for (int c = 0; c < g.cell_count(); ++c) {
    const double r = g.cell_center(c).norm();
    CHECK(field[c] == (r <= 0.38 ? 11.4 : 1.0));
  }
  CHECK(components(g, field, 11.4) == 1);
  CHECK(components(g, field, 1.0) == 1);
  for (SquareSymmetry op : kAllSymmetries) CHECK(apply_symmetry(g, field, op) == field);

  p.radius = 0.0;
  const DielectricDesign empty = initial_config(InitKind::rods, p, g, map, bounds);
  CHECK(empty.eps.maxCoeff() == 1.0);

  const DielectricDesign veins = initial_config(InitKind::veins, InitParams{}, g, map, bounds);
  const Eigen::VectorXd vf = expand_design(map, veins.eps);
  for (int c = 0; c < g.cell_count(); ++c) {
    const Eigen::Vector2d x = g.cell_center(c);
    CHECK(vf[c] == (std::max(std::abs(x.x()), std::abs(x.y())) >= 0.9 ? 11.4 : 1.0));
  }
  CHECK(components(g, vf, 11.4) == 1);
  CHECK(components(g, vf, 1.0) == 1);
}

TEST_CASE("designs load from a value list and from design.csv") {
  const Grid g = build_grid(8);
  const SymmetryMap map = build_symmetry_map(g);
  const MaterialBounds bounds;
  InitParams p;
  p.seed = 3;
  const DielectricDesign d = initial_config(InitKind::uniform_random, p, g, map, bounds);

  const std::string list = temp_path("list.txt");
  {
    std::ofstream out(list);
    out.precision(17);
    for (Eigen::Index i = 0; i < d.eps.size(); ++i) out << d.eps[i] << (i % 3 == 2 ? "\n" : ", ");
  }
  CHECK(read_design_file(list, g, map, bounds).eps == d.eps);

  const std::string csv = temp_path("design.csv");
  {
    std::ofstream out(csv);
    write_design_csv(out, g, map, d);
  }
  const DielectricDesign back = read_design_file(csv, g, map, bounds);
  CHECK((back.eps - d.eps).cwiseAbs().maxCoeff() == 0.0);
  const KPath path = build_k_path(6);
  const BandSolution b1 = band_diagram(g, map, d, path, Polarization::TM, 4, 1);
  const BandSolution b2 = band_diagram(g, map, back, path, Polarization::TM, 4, 1);
  for (std::size_t k = 0; k < b1.per_k.size(); ++k) {
    CHECK((b1.per_k[k].eigenvalues - b2.per_k[k].eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
  }

  const std::string shortlist = temp_path("short.txt");
  {
    std::ofstream out(shortlist);
    out << "1 2 3\n";
  }
  CHECK_THROWS_AS(read_design_file(shortlist, g, map, bounds), InvalidArgument);
  const std::string outside = temp_path("outside.txt");
  {
    std::ofstream out(outside);
    for (int i = 0; i < map.n_eps; ++i) out << 20.0 << '\n';
  }
  CHECK_THROWS_AS(read_design_file(outside, g, map, bounds), InvalidArgument);
  CHECK_THROWS(read_design_file(temp_path("missing.txt"), g, map, bounds));
  for (const auto& f : {list, csv, shortlist, outside}) std::remove(f.c_str());
}

TEST_CASE("one outer iteration records one solve") {
  RunConfig c = small_config(8, Polarization::TM, 1);
  c.max_outer = 1;
  c.seed = 4;
  const RunResult r = optimize(c);
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].iteration == 1);
  CHECK(r.history[0].status == conic::Status::optimal);
  CHECK(r.termination != Termination::solver_failure);
  CHECK(r.history[0].gap_midgap == doctest::Approx(r.initial_gap_midgap).epsilon(1e-14));
}

TEST_CASE("optimizer bookkeeping") {
  RunConfig c = small_config(12, Polarization::TM, 1);
  c.seed = 11;
  c.max_outer = 8;
  int snapshots = 0;
  OptimizeHooks hooks;
  hooks.snapshot = [&](int, const DielectricDesign&, const BandSolution&) { ++snapshots; };
  const RunResult r = optimize(c, hooks);
  REQUIRE(!r.history.empty());
  CHECK(r.history.size() <= static_cast<std::size_t>(c.max_outer));
  CHECK(snapshots == static_cast<int>(r.history.size()));
  for (const auto& h : r.history) {
    // The SDP optimum never falls below the incumbent it started from.
    CHECK(h.surrogate_objective >= h.incumbent_objective - 1e-6);
    CHECK(h.incumbent_objective == doctest::Approx(h.gap_midgap).epsilon(1e-10));
    CHECK(h.eig_bands >= c.band + 8);
    CHECK(h.a.size() == 12);
    CHECK(h.b.size() == 12);
  }
  const Grid g = build_grid(c.n);
  const SymmetryMap map = build_symmetry_map(g);
  const BandSolution fresh = band_diagram(g, map, r.final_design, build_k_path(c.n_k),
                                          c.polarization, report_band_count(g, c.band), c.band);
  CHECK(std::abs(fresh.gap_midgap - r.final_gap_midgap) <= 1e-8);
  CHECK(r.final_design.eps.minCoeff() >= c.bounds.eps_min);
  CHECK(r.final_design.eps.maxCoeff() <= c.bounds.eps_max);

  const RunResult again = optimize(c);
  CHECK(same_history(r, again));
}

TEST_CASE("a converged design is a fixed point") {
  RunConfig c = small_config(12, Polarization::TM, 1);
  c.init = InitKind::rods;
  const RunResult r = optimize(c);
  REQUIRE(r.termination == Termination::converged);
  const RunResult again = optimize(c, r.final_design);
  REQUIRE(again.history.size() == 1);
  CHECK(again.history[0].step_norm <= c.tol);
  CHECK(again.termination == Termination::converged);
  CHECK(again.final_gap_midgap == doctest::Approx(r.final_gap_midgap).epsilon(1e-9));
}

TEST_CASE("optimization opens the TM band 1 gap") {
  RunConfig c = small_config(16, Polarization::TM, 1);
  c.seed = 2;
  const RunResult r = optimize(c);
  CHECK(r.termination == Termination::converged);
  CHECK(r.final_gap_midgap > 0.3);
  CHECK(r.final_gap_midgap >= r.initial_gap_midgap);
}

TEST_CASE("multi-restart picks the best run") {
  RunConfig c = small_config(8, Polarization::TM, 1);
  c.seed = 5;
  c.max_outer = 5;
  const MultiRestartResult one = multi_restart(c, 1);
  const RunResult direct = optimize(c);
  REQUIRE(one.runs.size() == 1);
  CHECK(same_history(one.runs[0], direct));

  const MultiRestartResult many = multi_restart(c, 3);
  REQUIRE(many.runs.size() == 3);
  for (std::size_t i = 0; i < many.runs.size(); ++i) {
    CHECK(many.runs[i].seed == c.seed + i);
    CHECK(many.runs[many.best].final_gap_midgap >= many.runs[i].final_gap_midgap);
  }
  CHECK_THROWS_AS(multi_restart(c, 0), InvalidArgument);
}

TEST_CASE("report band count and termination names") {
  const Grid g = build_grid(4);
  CHECK(report_band_count(g, 1) == 10);
  CHECK(report_band_count(g, 14) == 16);
  CHECK(report_band_count(build_grid(32), 9) == 13);
  CHECK(to_string(Termination::converged) == "converged");
  CHECK(to_string(Termination::max_outer) == "max_outer");
  CHECK(to_string(Termination::solver_failure) == "solver_failure");
}
