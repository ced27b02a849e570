#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushlab/ctrl.hpp"

namespace pushlab::bench {

enum class Grid { short_grid, long_grid };
const char* grid_name(Grid g);
Grid grid_from_name(const std::string& s);

struct CategorySpec {
  int index{1};  // 1-based, distance-major
  double dist_min{0.05}, dist_max{0.15};
  double yaw_min_deg{0.0}, yaw_max_deg{30.0};
};

/// Six categories: two distance ranges x three orientation intervals.
std::vector<CategorySpec> grid_categories(Grid g);

struct SuiteConfig {
  Grid grid{Grid::short_grid};
  int cases_per_category{10};
  int repeats{5};
  std::vector<double> pos_thresholds{0.05, 0.02, 0.01};
  double fine_pos{0.003};
  double fine_yaw_deg{2.0};
  double stop_pos{0.01};
  double stop_yaw_deg{-1.0};  // <0: stopping ignores orientation
  int max_steps{60};
  tasks::TaskKind objective{tasks::TaskKind::posing};  // posing | posing_penalty
  double w_theta{0.025};
  ctrl::ControllerConfig controller{};
  std::uint64_t master_seed{7};
};

struct EpisodeSpec {
  int category{1};
  int case_index{0};
  int repeat{0};
  PlanarPose initial;
  PlanarPose target;
  sim::ObjectParams params;
  std::uint64_t controller_seed{0};
};

/// Deterministic expansion of the grid into episodes (no execution).
std::vector<EpisodeSpec> plan_suite(const SuiteConfig& cfg);

struct EpisodeResult {
  int category{1};
  int case_index{0};
  int repeat{0};
  bool success{false};
  int steps{0};
  double travel{0.0};
  double pred_err_pos{0.0};
  double pred_err_ang{0.0};
  std::vector<int> steps_to;  // per pos_threshold; -1 censored
  int steps_to_fine{-1};
  double final_pos_err{0.0};
  double final_yaw_err{0.0};
  int fallback_steps{0};
  double wall_seconds{0.0};
};

struct SuiteReport {
  std::string mode;
  std::string objective;
  Grid grid{Grid::short_grid};
  std::vector<double> pos_thresholds;
  double fine_pos{0.003};
  double fine_yaw_deg{2.0};
  double stop_pos{0.01};
  double stop_yaw_deg{-1.0};
  int max_steps{60};
  int cases_per_category{10};
  int repeats{5};
  std::uint64_t master_seed{7};
  std::vector<EpisodeResult> episodes;
};

SuiteReport run_suite(const dyn::Predictor& model, const SuiteConfig& cfg);

double median(std::vector<double> xs);

struct ThresholdStats {
  double median_steps{-1.0};  // over episodes that reached it
  double success_rate{0.0};
  int censored{0};
};

/// threshold_index: 0..pos_thresholds.size()-1, or -1 for the fine pair.
ThresholdStats category_threshold_stats(const SuiteReport& rep, int category,
                                        int threshold_index);
ThresholdStats overall_threshold_stats(const SuiteReport& rep, int threshold_index);
double category_travel_median(const SuiteReport& rep, int category);
double overall_travel_median(const SuiteReport& rep);
double overall_pred_err_pos_mean(const SuiteReport& rep);

/// The report JSON is byte-reproducible from (code, seed, configs); wall
/// clock lives in a separate "timing" section that include_timing controls.
std::string suite_report_json(const SuiteReport& rep, bool include_timing = true);
SuiteReport suite_report_from_json(const std::string& s);
void save_suite_report(const SuiteReport& rep, const std::string& json_path);
SuiteReport load_suite_report(const std::string& json_path);
void save_suite_csv(const SuiteReport& rep, const std::string& csv_path);

struct CategoryMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompareReport {
  std::vector<int> categories;
  std::vector<std::string> threshold_labels;
  /// step_ratios[threshold][category_idx]: improved/basic median steps.
  std::vector<std::vector<double>> step_ratios;
  std::vector<double> travel_ratios;
};

/// Per-category median-step and travel ratios between two suite reports on
/// the same grid.
CompareReport compare_controllers(const SuiteReport& a, const SuiteReport& b);
std::string compare_report_json(const CompareReport& rep);

// --- trajectory following ------------------------------------------------------

enum class TrajShape { circle, ell };

struct TrajConfig {
  std::vector<double> circle_radii{0.1, 0.2, 0.3};
  std::vector<double> ell_sides{0.1, 0.2, 0.3};
  std::vector<double> w_thetas{0.0, 0.01};
  double waypoint_spacing{0.02};
  int repeats{1};
  ctrl::ControllerConfig controller{};
  std::uint64_t master_seed{11};
};

struct TrajCase {
  TrajShape shape{TrajShape::circle};
  double size{0.2};
  double w_theta{0.0};
  int repeat{0};
  bool success{false};
  double mean_path_err{0.0};
  double mean_push_len{0.0};
  int steps{0};
  std::vector<Vec2> desired;
  std::vector<Vec2> realized;
  double wall_seconds{0.0};
};

struct TrajReport {
  double waypoint_spacing{0.02};
  std::uint64_t master_seed{11};
  std::vector<TrajCase> cases;
};

std::vector<PlanarPose> circle_waypoints(double radius, double spacing);
std::vector<PlanarPose> ell_waypoints(double side, double spacing);

TrajReport run_trajectory_suite(const dyn::Predictor& model, const TrajConfig& cfg);
std::string traj_report_json(const TrajReport& rep, bool include_timing = true);

// --- obstacle avoidance ----------------------------------------------------------

struct ObstacleCase {
  std::string name;
  tasks::TaskSpec task;
  bool expected_failure{false};
};

struct ObstacleSuiteConfig {
  std::vector<ObstacleCase> cases;
  int repeats{5};
  int max_steps{80};
  ctrl::ControllerConfig controller{};
  std::uint64_t master_seed{13};
};

struct ObstacleEpisode {
  int case_index{0};
  int repeat{0};
  bool success{false};
  bool collided{false};
  double min_clearance{0.0};
  int steps{0};
  double wall_seconds{0.0};
};

struct ObstacleReport {
  std::vector<std::string> case_names;
  std::vector<bool> expected_failure;
  std::vector<ObstacleEpisode> episodes;
  std::uint64_t master_seed{13};
};

/// Built-in desk-scale configurations: single obstacles of both base sizes,
/// a wide two-obstacle corridor, and a narrow gap demanding >60 degrees of
/// rotation (expected-failure class).
std::vector<ObstacleCase> default_obstacle_cases();

ObstacleReport run_obstacle_suite(const dyn::Predictor& model, const ObstacleSuiteConfig& cfg);
std::string obstacle_report_json(const ObstacleReport& rep, bool include_timing = true);

// --- plots -----------------------------------------------------------------------

void emit_suite_plots(const SuiteReport& rep, const std::string& out_dir);
void emit_compare_plots(const CompareReport& rep, const std::string& out_dir);
void emit_traj_plots(const TrajReport& rep, const std::string& out_dir);

}  // namespace pushlab::bench
