#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spraymom/cli_io.hpp"
#include "spraymom/errors.hpp"

using namespace spraymom;

namespace {

bool same(const CaseConfig& a, const CaseConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace

TEST_CASE("minimal file gets the documented defaults") {
  const CaseConfig c = parse_config_string("case: evap0d_smooth\n");
  CHECK(c.case_id == CaseId::evap0d_smooth);
  CHECK(c.time.cfl == 0.5);
  CHECK(c.schemes.neg_count == 1);
  CHECK(c.schemes.transport_order == 2);
  CHECK(c.schemes.maxent_epsilon == 1e-10);
  CHECK(c.time.dt == 0.002);
  CHECK(c.physics.K == 1.0);
}

TEST_CASE("invalid files are rejected with line context") {
  try {
    parse_config_string("case: evap0d_smooth\nschemes:\n  neg_count: 5\n", "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("neg_count") != std::string::npos);
  }
  try {
    parse_config_string("case: evap0d_smooth\ntime:\n  dt: 0.1\n  colour: red\n", "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:4") != std::string::npos);
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_string("grid:\n  nx: 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("case: crossing1d\ngrid:\n  nx: -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("case: crossing1d\ngrid:\n  nx: abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("case: crossing1d\nbasis: cubic\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("case: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("configs round trip through serialization") {
  const CaseConfig tg = parse_config_string(
      "case: taylor_green_2d\ngrid:\n  nx: 128\n  ny: 128\nphysics:\n  K: 0.5\n  theta: 0.1\n");
  CHECK(tg.grid.nx == 128);
  CHECK(tg.physics.theta == 0.1);
  const CaseConfig back = parse_config_string(serialize_config(tg));
  CHECK(same(tg, back));
  CHECK(serialize_config(parse_config_string(serialize_config(back))) == serialize_config(back));

  CaseConfig odd = default_config(CaseId::custom);
  odd.initial.moments = {0.1, 1.0 / 30.0, 0.1 / 7.0, 0.0061};
  odd.initial.velocity = {1.0 / 3.0, -2.0 / 7.0};
  odd.time.dt = 1.0 / 3000.0;
  odd.output.snapshot_times = {0.01, 1.0 / 30.0};
  const CaseConfig odd_back = parse_config_string(serialize_config(odd));
  CHECK(odd_back.initial.moments == odd.initial.moments);
  CHECK(odd_back.initial.velocity == odd.initial.velocity);
  CHECK(odd_back.time.dt == odd.time.dt);
  CHECK(odd_back.output.snapshot_times == odd.output.snapshot_times);
  CHECK(std::isinf(parse_config_string(serialize_config(default_config(CaseId::crossing1d))).physics.theta));
}

TEST_CASE("snapshot layout") {
  CaseConfig c = default_config(CaseId::taylor_green_2d);
  c.grid.nx = 6;
  c.grid.ny = 4;
  const Grid2D g = initial_grid(c);
  std::ostringstream os;
  write_snapshot(os, g, c, 0.0, 0.01);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    ++rows;
    std::istringstream fields(line);
    int count = 0;
    std::string tok;
    while (fields >> tok) {
      ++count;
    }
    CHECK(count == 14);
  }
  CHECK(rows == 24);
  // 17 significant digits reproduce doubles exactly
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("output directory resolution order") {
  const CaseConfig c = default_config(CaseId::crossing1d);
  CHECK(resolve_output_dir(c, "explicit") == "explicit");
  setenv("SPRAYMOM_OUT", "from_env", 1);
  CHECK(resolve_output_dir(c, "") == "from_env");
  unsetenv("SPRAYMOM_OUT");
  CHECK(resolve_output_dir(c, "") == c.output.directory);
}

TEST_CASE("snapshots are written at the requested times") {
  const auto dir = std::filesystem::temp_directory_path() / "spraymom_snapshot_test";
  std::filesystem::remove_all(dir);
  CaseConfig c = default_config(CaseId::crossing1d);
  c.grid.nx = 32;
  c.time.t_end = 0.2;
  c.output.snapshot_times = {0.0, 0.1, 0.2};
  RunOptions opt;
  opt.write_snapshots = true;
  opt.output_dir = dir.string();
  const RunArtifacts art = run_case(c, opt);
  CHECK(art.snapshot_files.size() == 3);
  for (const std::string& f : art.snapshot_files) {
    CHECK(std::filesystem::exists(f));
  }
  std::filesystem::remove_all(dir);
}
