#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "pbgopt/pbgopt.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pbgopt_capi_" + name);
  fs::remove_all(p);
  return p;
}

pbg_config* parse(const char* text) {
  pbg_config* c = nullptr;
  REQUIRE(pbg_config_parse_string(text, &c) == PBG_OK);
  return c;
}

}  // namespace

TEST_CASE("version and gap helper") {
  CHECK(std::strlen(pbg_version()) > 0);
  double j = 0.0;
  CHECK(pbg_gap_midgap(1.0, 3.0, &j) == PBG_OK);
  CHECK(j == doctest::Approx(0.5));
  CHECK(pbg_gap_midgap(0.0, 3.0, &j) == PBG_ERR_INVALID_ARGUMENT);
  CHECK(std::isnan(j));
  CHECK(std::strlen(pbg_last_error()) > 0);
}

TEST_CASE("config handles") {
  pbg_config* c = nullptr;
  REQUIRE(pbg_config_create(&c) == PBG_OK);
  CHECK(pbg_config_set(c, "lattice.n", "12") == PBG_OK);
  CHECK(pbg_config_set(c, "band.m", "0") == PBG_ERR_CONFIG);
  CHECK(std::string(pbg_last_error()).find("band.m") != std::string::npos);
  CHECK(pbg_config_set(c, "no.such.key", "1") == PBG_ERR_CONFIG);
  size_t needed = 0;
  CHECK(pbg_config_format(c, nullptr, 0, &needed) == PBG_OK);
  std::vector<char> buf(needed);
  CHECK(pbg_config_format(c, buf.data(), buf.size(), &needed) == PBG_OK);
  const std::string text(buf.data());
  CHECK(text.find("lattice.n = 12") != std::string::npos);
  CHECK(text.find("band.m = 1") != std::string::npos);
  // Batch assignments validate once, after all of them.
  const char* pair[] = {"init.kind=file", "init.file=start.csv"};
  CHECK(pbg_config_set(c, "init.kind", "file") == PBG_ERR_CONFIG);
  CHECK(pbg_config_apply(c, pair, 2) == PBG_OK);
  const char* broken[] = {"lattice.n=10", "band.m=0"};
  CHECK(pbg_config_apply(c, broken, 2) == PBG_ERR_CONFIG);
  CHECK(pbg_config_format(c, nullptr, 0, &needed) == PBG_OK);
  buf.assign(needed, '\0');
  CHECK(pbg_config_format(c, buf.data(), buf.size(), &needed) == PBG_OK);
  CHECK(std::string(buf.data()).find("lattice.n = 12") != std::string::npos);
  CHECK(std::string(buf.data()).find("init.file = start.csv") != std::string::npos);
  pbg_config_destroy(c);

  pbg_config* bad = nullptr;
  CHECK(pbg_config_parse_string("lattice.n = 16\nband.m = 0\n", &bad) == PBG_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(pbg_last_error()).find("line 2") != std::string::npos);
  CHECK(pbg_config_parse_file("/nonexistent/x.cfg", &bad) == PBG_ERR_CONFIG);
  CHECK(pbg_config_create(nullptr) == PBG_ERR_INVALID_ARGUMENT);
}

TEST_CASE("bands of a uniform design") {
  pbg_config* c = parse("lattice.n = 8\nkpath.n_k = 6\ninit.kind = rods\ninit.radius = 0\n");
  const fs::path dir = fresh_dir("bands");
  pbg_result* r = nullptr;
  REQUIRE(pbg_run_bands(c, dir.string().c_str(), &r) == PBG_OK);
  CHECK(pbg_result_termination(r) == PBG_TERM_NONE);
  CHECK(pbg_result_k_count(r) == 6);
  CHECK(pbg_result_band_count(r) == 10);
  double l0 = -1.0;
  CHECK(pbg_result_eigenvalue(r, 0, 0, &l0) == PBG_OK);
  CHECK(std::abs(l0) < 1e-10);
  CHECK(pbg_result_eigenvalue(r, 6, 0, &l0) == PBG_ERR_INVALID_ARGUMENT);
  CHECK(pbg_result_gap_midgap(r) <= 0.0);
  std::vector<double> eps(64, 0.0);
  const size_t n = pbg_result_design(r, eps.data(), eps.size());
  CHECK(n == 10);
  for (size_t i = 0; i < n; ++i) CHECK(eps[i] == 1.0);
  for (const char* f : {"bands.csv", "design.csv", "bands.svg", "design.svg", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  pbg_result_destroy(r);
  fs::remove_all(dir);

  // "" computes without writing.
  r = nullptr;
  const fs::path none = fresh_dir("none");
  REQUIRE(pbg_run_bands(c, "", &r) == PBG_OK);
  CHECK_FALSE(fs::exists(none));
  pbg_result_destroy(r);
  pbg_config_destroy(c);
}

TEST_CASE("optimization through the C API") {
  pbg_config* c = parse("lattice.n = 8\ninit.seed = 3\nouter.max_iter = 4\n");
  const fs::path dir = fresh_dir("opt");
  int lines = 0;
  auto log = [](const char*, void* user) { ++*static_cast<int*>(user); };
  pbg_result* r = nullptr;
  REQUIRE(pbg_run_optimize(c, dir.string().c_str(), PBG_DUMP_SDP, log, &lines, &r) == PBG_OK);
  const size_t iters = pbg_result_iteration_count(r);
  CHECK(iters >= 1);
  CHECK(iters <= 4);
  CHECK(lines > 0);
  pbg_iteration it{};
  REQUIRE(pbg_result_iteration(r, 0, &it) == PBG_OK);
  CHECK(it.iteration == 1);
  CHECK(it.gap_midgap == doctest::Approx(pbg_result_initial_gap_midgap(r)));
  CHECK(it.solver_status == 0);
  CHECK(pbg_result_iteration(r, iters, &it) == PBG_ERR_INVALID_ARGUMENT);
  CHECK(pbg_result_gap_midgap(r) >= pbg_result_initial_gap_midgap(r) - 1e-12);
  CHECK(fs::exists(dir / "run.json"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "sdp" / "iter_001.dat-s"));
  pbg_result_destroy(r);
  fs::remove_all(dir);

  // A crippled SDP solver fails numerically but still returns the result.
  CHECK(pbg_config_set(c, "solver.max_iter", "1") == PBG_OK);
  r = nullptr;
  CHECK(pbg_run_optimize(c, dir.string().c_str(), 0, nullptr, nullptr, &r) == PBG_ERR_NUMERICAL);
  REQUIRE(r != nullptr);
  CHECK(pbg_result_termination(r) == PBG_TERM_SOLVER_FAILURE);
  CHECK(fs::exists(dir / "run.json"));
  pbg_result_destroy(r);
  fs::remove_all(dir);
  pbg_config_destroy(c);

  CHECK(pbg_run_optimize(nullptr, "", 0, nullptr, nullptr, &r) == PBG_ERR_INVALID_ARGUMENT);
}
