#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracle_predictor.hpp"
#include "pushlab/bench.hpp"

using namespace pushlab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bench::SuiteConfig tiny_suite() {
  bench::SuiteConfig cfg;
  cfg.cases_per_category = 1;
  cfg.repeats = 1;
  cfg.max_steps = 60;
  cfg.controller.n_samples = 16;
  cfg.controller.horizon = 4;
  cfg.master_seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("grid categories: six per grid with the stated ranges") {
  const auto s = bench::grid_categories(bench::Grid::short_grid);
  REQUIRE(s.size() == 6);
  CHECK(s[0].dist_min == doctest::Approx(0.05));
  CHECK(s[0].dist_max == doctest::Approx(0.15));
  CHECK(s[0].yaw_max_deg == doctest::Approx(30.0));
  CHECK(s[5].dist_min == doctest::Approx(0.15));
  CHECK(s[5].dist_max == doctest::Approx(0.20));
  CHECK(s[5].yaw_min_deg == doctest::Approx(60.0));

  const auto l = bench::grid_categories(bench::Grid::long_grid);
  REQUIRE(l.size() == 6);
  CHECK(l[0].dist_min == doctest::Approx(0.10));
  CHECK(l[3].dist_min == doctest::Approx(0.20));
  CHECK(l[3].dist_max == doctest::Approx(0.30));
}

TEST_CASE("plan_suite: full-scale and desk-scale arithmetic") {
  bench::SuiteConfig full;
  full.cases_per_category = 10;
  full.repeats = 5;
  CHECK(bench::plan_suite(full).size() == 300);

  bench::SuiteConfig desk;
  desk.cases_per_category = 2;
  desk.repeats = 2;
  CHECK(bench::plan_suite(desk).size() == 24);

  // targets respect the category ranges; plan is deterministic
  const auto plan = bench::plan_suite(desk);
  const auto plan2 = bench::plan_suite(desk);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& e = plan[i];
    const auto cat = bench::grid_categories(desk.grid)[e.category - 1];
    const double dist = e.target.position().norm();
    CHECK(dist >= cat.dist_min - 1e-12);
    CHECK(dist <= cat.dist_max + 1e-12);
    const double dyaw = rad2deg(ang_diff(e.target.yaw, e.initial.yaw));
    CHECK(dyaw >= cat.yaw_min_deg - 1e-9);
    CHECK(dyaw <= cat.yaw_max_deg + 1e-9);
    CHECK(plan2[i].controller_seed == e.controller_seed);
    CHECK(plan2[i].target.x == e.target.x);
  }
}

TEST_CASE("run_suite with the oracle predictor: stats and determinism") {
  auto cfg = tiny_suite();
  const auto params = sim::sample_object_params(3u);
  const testing_support::OracleSimPredictor oracle(params, 4);
  const auto rep = bench::run_suite(oracle, cfg);
  CHECK(rep.episodes.size() == 6);

  // threshold monotonicity whenever later thresholds are reached
  for (const auto& e : rep.episodes) {
    REQUIRE(e.steps_to.size() == 3);
    int prev = 0;
    for (const int s : e.steps_to) {
      if (s >= 0) {
        CHECK(s >= prev);
        prev = s;
      }
    }
    if (e.steps_to_fine >= 0 && e.steps_to[2] >= 0) CHECK(e.steps_to_fine >= e.steps_to[2]);
  }

  // report bytes reproducible with timing stripped
  const auto rep2 = bench::run_suite(oracle, cfg);
  CHECK(bench::suite_report_json(rep, false) == bench::suite_report_json(rep2, false));

  // round trip through disk
  const std::string path = "test_suite_tmp.json";
  bench::save_suite_report(rep, path);
  const auto loaded = bench::load_suite_report(path);
  CHECK(bench::suite_report_json(loaded, false) == bench::suite_report_json(rep, false));
  std::remove(path.c_str());
}

TEST_CASE("compare_controllers: identical reports give unit ratios") {
  auto cfg = tiny_suite();
  const auto params = sim::sample_object_params(5u);
  const testing_support::OracleSimPredictor oracle(params, 4);
  const auto rep = bench::run_suite(oracle, cfg);
  const auto cmp = bench::compare_controllers(rep, rep);
  REQUIRE(cmp.categories.size() == 6);
  for (const auto& row : cmp.step_ratios) {
    for (const double r : row) {
      if (!std::isnan(r)) CHECK(r == doctest::Approx(1.0));
    }
  }
  for (const double r : cmp.travel_ratios) {
    if (!std::isnan(r)) CHECK(r == doctest::Approx(1.0));
  }

  // mismatched grids are rejected
  auto other = rep;
  other.grid = bench::Grid::long_grid;
  CHECK_THROWS_AS(bench::compare_controllers(rep, other), bench::CategoryMismatch);
}

TEST_CASE("waypoint generators: spacing and closure") {
  const auto circle = bench::circle_waypoints(0.2, 0.02);
  REQUIRE(circle.size() >= 8);
  for (std::size_t i = 1; i < circle.size(); ++i) {
    const double d = (circle[i].position() - circle[i - 1].position()).norm();
    CHECK(d <= 0.021);
    CHECK(d >= 0.005);
  }
  // the loop closes at the start point (0, 0)
  CHECK(circle.back().position().norm() < 1e-9);

  const auto ell = bench::ell_waypoints(0.2, 0.02);
  CHECK(ell.front().x == doctest::Approx(0.02));
  CHECK(ell.back().x == doctest::Approx(0.2));
  CHECK(ell.back().y == doctest::Approx(0.2));
}

TEST_CASE("trajectory suite with the oracle predictor") {
  bench::TrajConfig cfg;
  cfg.circle_radii = {0.1};
  cfg.ell_sides = {};
  cfg.w_thetas = {0.0};
  cfg.repeats = 1;
  cfg.controller.mode = ctrl::Mode::basic;
  cfg.controller.n_samples = 32;
  cfg.controller.horizon = 1;
  const auto params = sim::sample_object_params(7u);
  const testing_support::OracleSimPredictor oracle(params, 4);
  const auto rep = bench::run_trajectory_suite(oracle, cfg);
  REQUIRE(rep.cases.size() == 1);
  const auto& c = rep.cases[0];
  CHECK(c.success);
  CHECK(c.mean_path_err < 0.02);
  CHECK(c.mean_push_len > 0.005);
  CHECK(c.mean_push_len < 0.031);
  CHECK(!c.realized.empty());
}

TEST_CASE("obstacle suite: default cases and an oracle run") {
  const auto cases = bench::default_obstacle_cases();
  REQUIRE(cases.size() >= 4);
  int expected_failures = 0;
  for (const auto& c : cases) expected_failures += c.expected_failure ? 1 : 0;
  CHECK(expected_failures >= 1);

  bench::ObstacleSuiteConfig cfg;
  cfg.cases = {cases[0]};  // single offset obstacle
  cfg.repeats = 1;
  cfg.max_steps = 80;
  cfg.controller.n_samples = 32;
  cfg.controller.horizon = 4;
  const auto params = sim::sample_object_params(9u);
  const testing_support::OracleSimPredictor oracle(params, 4);
  const auto rep = bench::run_obstacle_suite(oracle, cfg);
  REQUIRE(rep.episodes.size() == 1);
  CHECK(rep.episodes[0].success);
  CHECK(!rep.episodes[0].collided);
  CHECK(rep.episodes[0].min_clearance >= 0.0);
}

TEST_CASE("plots: empty and populated reports render byte-stable files") {
  namespace fs = std::filesystem;
  const std::string dir = "test_plots_tmp";

  bench::SuiteReport empty;
  empty.pos_thresholds = {0.05, 0.02, 0.01};
  bench::emit_suite_plots(empty, dir);
  CHECK(fs::exists(dir + "/steps_to_0.05.svg"));
  CHECK(fs::exists(dir + "/travel_median.svg"));
  const std::string first = slurp(dir + "/steps_to_0.05.svg");
  CHECK(first.find("<svg") != std::string::npos);

  bench::emit_suite_plots(empty, dir);
  CHECK(slurp(dir + "/steps_to_0.05.svg") == first);

  auto cfg = tiny_suite();
  const auto params = sim::sample_object_params(11u);
  const testing_support::OracleSimPredictor oracle(params, 4);
  const auto rep = bench::run_suite(oracle, cfg);
  bench::emit_suite_plots(rep, dir);
  CHECK(fs::exists(dir + "/steps_to_fine.svg"));
  fs::remove_all(dir);
}
