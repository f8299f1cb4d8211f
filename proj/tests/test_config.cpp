#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <coopjump/config.hpp>
#include <coopjump/csv.hpp>
#include <coopjump/errors.hpp>
#include <coopjump/sweep.hpp>

using namespace coopjump;

namespace {

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config files parse key = value lines with comments") {
  std::istringstream in(
      "# comment line\n"
      "scheme = D\n"
      "\n"
      "a1 = 1.5\n"
      "A2 = 2.5   \n"  // keys are case-insensitive, values trimmed
      "a3 = 2e8\n"
      "omega3 = 1e7\n"
      "r = 0.75\n"
      "tm = 5e-3\n"
      "seeds = 12\n"
      "duration = 42.5\n"
      "log_grid = true\n");
  const RunConfig cfg = parse_config(in, "inline");
  CHECK(cfg.params.scheme == LevelScheme::D);
  CHECK(cfg.params.a1 == 1.5);
  CHECK(cfg.params.a2 == 2.5);
  CHECK(cfg.params.a3 == 2e8);
  CHECK(cfg.geometry.r_over_lambda3 == 0.75);
  CHECK(cfg.r_start == 0.75);
  CHECK(cfg.r_stop == 0.75);
  CHECK(cfg.r_points == 1);
  CHECK(cfg.t_m == 5e-3);
  CHECK(cfg.seeds == 12);
  CHECK(cfg.duration == 42.5);
  CHECK(cfg.log_grid);
}

TEST_CASE("config diagnostics carry source name, line number and key") {
  std::istringstream bad_key("a3 = 1\n\nnot_a_key = 2\n");
  const std::string msg =
      error_text([&] { parse_config(bad_key, "myfile.cfg"); });
  CHECK(msg.find("myfile.cfg:3") != std::string::npos);
  CHECK(msg.find("not_a_key") != std::string::npos);

  std::istringstream bad_value("a3 = fast\n");
  const std::string msg2 = error_text([&] { parse_config(bad_value, "f"); });
  CHECK(msg2.find("f:1") != std::string::npos);
  CHECK(msg2.find("not a number") != std::string::npos);

  std::istringstream no_eq("a3\n");
  CHECK_THROWS_AS(parse_config(no_eq, "f"), ConfigError);

  std::istringstream bad_scheme("scheme = W\n");
  CHECK_THROWS_AS(parse_config(bad_scheme, "f"), ConfigError);

  std::istringstream bad_bool("log_grid = maybe\n");
  CHECK_THROWS_AS(parse_config(bad_bool, "f"), ConfigError);

  std::istringstream bad_int("seeds = 3.5\n");
  CHECK_THROWS_AS(parse_config(bad_int, "f"), ConfigError);
}

TEST_CASE("explicit coupling keys bypass the geometry") {
  std::istringstream in(
      "scheme = V\n"
      "a3 = 2e8\nomega3 = 5e7\nomega2 = 1e4\n"
      "c3_re = 1e6\nc3_im = -2e6\n");
  const RunConfig cfg = parse_config(in);
  CHECK(cfg.explicit_c3);
  const SystemParams p = resolve_params(cfg, 1.0);
  CHECK(p.c3 == Complex(1e6, -2e6));
}

TEST_CASE("geometry keys resolve the coupling at each separation") {
  std::istringstream in("scheme = V\na3 = 2e8\nomega3 = 5e7\nomega2 = 1e4\n");
  RunConfig cfg = parse_config(in);
  CHECK(!cfg.explicit_c3);
  const SystemParams at1 = resolve_params(cfg, 1.0);
  const double pi = std::acos(-1.0);
  const Complex expect = coupling_constant(2e8, 2 * pi, pi / 2);
  CHECK(std::abs(at1.c3 - expect) <= 1e-12 * std::abs(expect));
}

TEST_CASE("unequal per-pair angles are rejected when resolving") {
  std::istringstream in(
      "scheme = V\na3 = 2e8\nomega3 = 5e7\nomega2 = 1e4\ntheta12 = 0.3\n");
  RunConfig cfg = parse_config(in);
  CHECK_THROWS_AS(resolve_params(cfg, 1.0), ParameterError);
}

TEST_CASE("presets cover the published and desk-scale parameter sets") {
  const auto names = preset_names();
  CHECK(names.size() == 7);

  RunConfig f4 = preset("fig4");
  CHECK(f4.params.scheme == LevelScheme::V);
  CHECK(f4.params.a3 == 2e8);
  CHECK(f4.params.omega3 == 5e7);
  CHECK(f4.params.omega2 == 1e4);
  CHECK(f4.r_start == 0.5);
  CHECK(f4.r_stop == 2.0);

  RunConfig f5 = preset("fig5");
  CHECK(f5.params.scheme == LevelScheme::D);
  CHECK(f5.params.a1 == 1.0);
  CHECK(f5.params.a2 == 1.0);
  CHECK(f5.params.omega3 == 1e7);

  CHECK(preset("fig6").t_m == 1e-3);
  CHECK(preset("fig7").t_m == 5e-3);
  CHECK(preset("fig8").params.scheme == LevelScheme::V);

  RunConfig dv = preset("desk-v");
  CHECK(dv.params.a3 == 2e3);
  CHECK(dv.params.omega3 == 5e2);
  CHECK(dv.params.omega2 == 20.0);
  CHECK(dv.geometry.r_over_lambda3 == 1.2);
  CHECK(dv.seeds == 32);
  CHECK(dv.duration == 200.0);

  RunConfig dd = preset("desk-d");
  CHECK(dd.params.scheme == LevelScheme::D);
  CHECK_NOTHROW(resolve_params(dd));

  // normalization: case and underscore/hyphen are interchangeable
  CHECK(preset("DESK_V").params.a3 == 2e3);
  CHECK_THROWS_AS(preset("fig9"), ConfigError);
}

TEST_CASE("later keys override presets") {
  RunConfig cfg = preset("fig4");
  std::istringstream in("omega2 = 2e4\nr_points = 11\n");
  apply_config_stream(cfg, in, "override");
  CHECK(cfg.params.omega2 == 2e4);
  CHECK(cfg.r_points == 11);
  CHECK(cfg.params.a3 == 2e8);  // untouched preset value survives
}

TEST_CASE("linear distance grid hits both endpoints exactly") {
  RunConfig cfg;
  cfg.r_start = 0.5;
  cfg.r_stop = 2.0;
  cfg.r_points = 151;
  const auto grid = distance_grid(cfg);
  REQUIRE(grid.size() == 151);
  CHECK(grid.front() == 0.5);
  CHECK(grid.back() == 2.0);
  CHECK(grid[75] == doctest::Approx(1.25).epsilon(1e-15));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("log distance grid is geometric") {
  RunConfig cfg;
  cfg.r_start = 0.5;
  cfg.r_stop = 8.0;
  cfg.r_points = 5;
  cfg.log_grid = true;
  const auto grid = distance_grid(cfg);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == 0.5);
  CHECK(grid.back() == 8.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("degenerate distance grids are rejected") {
  RunConfig cfg;
  cfg.r_start = 0.0;
  cfg.r_stop = 2.0;
  cfg.r_points = 3;
  CHECK_THROWS_AS(distance_grid(cfg), ConfigError);

  cfg.r_start = 1.0;
  cfg.r_stop = 0.5;
  CHECK_THROWS_AS(distance_grid(cfg), ConfigError);

  cfg.r_stop = 1.0;
  cfg.r_points = 3;  // repeated points would be meaningless
  CHECK_THROWS_AS(distance_grid(cfg), ConfigError);

  cfg.r_points = 0;
  CHECK_THROWS_AS(distance_grid(cfg), ConfigError);

  cfg.r_points = 1;
  CHECK(distance_grid(cfg) == std::vector<double>{1.0});
}

TEST_CASE("csv doubles survive a write/read round trip bit-exactly") {
  std::mt19937_64 rng(7);
  CsvTable t;
  t.header = {"a", "b", "c"};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double scale = std::pow(10.0, (i % 17) - 8);
    t.rows.push_back({u(rng) * scale, u(rng), static_cast<double>(i)});
  }
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream in(out.str());
  const CsvTable back = read_csv(in);
  REQUIRE(back.header == t.header);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);
}

TEST_CASE("csv formatting uses 17 significant digits") {
  const std::string s = format_full(1.0 / 3.0);
  CHECK(s == "0.33333333333333331");
  CHECK(format_full(1e-300).find("e-300") != std::string::npos);
}

TEST_CASE("csv rejects ragged rows and malformed cells") {
  CsvTable t;
  t.header = {"a", "b"};
  t.rows.push_back({1.0});
  std::ostringstream out;
  CHECK_THROWS_AS(write_csv(out, t), ParameterError);

  std::istringstream in("a,b\n1.0,zap\n");
  CHECK_THROWS_AS(read_csv(in), ConfigError);
}

TEST_CASE("worker count follows COOPJUMP_THREADS") {
  setenv("COOPJUMP_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("COOPJUMP_THREADS", "0", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
  setenv("COOPJUMP_THREADS", "many", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
  unsetenv("COOPJUMP_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("parallel_for covers every index exactly once") {
  setenv("COOPJUMP_THREADS", "4", 1);
  const int n = 1000;
  std::vector<std::atomic<int>> hits(n);
  parallel_for(n, [&](int i) { hits[i].fetch_add(1); });
  for (int i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
  unsetenv("COOPJUMP_THREADS");
}

TEST_CASE("parallel_for propagates worker exceptions") {
  setenv("COOPJUMP_THREADS", "4", 1);
  CHECK_THROWS_AS(parallel_for(64,
                               [&](int i) {
                                 if (i == 13) throw ParameterError("boom");
                               }),
                  ParameterError);
  unsetenv("COOPJUMP_THREADS");
}
