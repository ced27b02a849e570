#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pushlab/dyn.hpp"
#include "pushlab/tasks.hpp"

namespace pushlab::ctrl {

using dyn::PushAction;

enum class Mode { basic, improved };
const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);

enum class InitialDir { narrow, wide };
enum class StageTrigger { target_distance, pusher_distance };

struct ControllerConfig {
  Mode mode{Mode::basic};
  int n_samples{20};
  int horizon{5};
  /// Softmin temperature. Negative: adaptive, lambda_frac * (max - min) cost.
  double lambda{-1.0};
  double lambda_frac{0.05};
  /// Goal distance below which the fine-push stage engages. Negative:
  /// automatic, max(0.01, horizon * stage1_min) — the shortest plan a
  /// repeated-action rollout can represent.
  double stage2_radius{-1.0};
  double stage1_min{0.008};
  double stage1_max{0.03};
  double stage2_min{0.001};
  double stage2_max{0.008};
  double improved_min{0.003};
  double improved_max{0.05};
  int restart_limit{20};
  InitialDir initial_dir{InitialDir::narrow};
  double initial_narrow_deg{5.0};
  double initial_wide_deg{45.0};
  double per_step_jitter_deg{5.0};
  /// Basic-mode direction cone half-angle about the inward normal.
  double cone_half_deg{45.0};
  double perimeter_margin{0.01};
  StageTrigger stage_trigger{StageTrigger::target_distance};
  dyn::RolloutConfig rollout{};
  sim::SimConfig sim_cfg{};

  double effective_stage2_radius() const {
    if (stage2_radius >= 0.0) return stage2_radius;
    return std::max(0.01, horizon * stage1_min);
  }

  std::string to_json() const;
  static ControllerConfig from_json_string(const std::string& s);
  static ControllerConfig from_json_file(const std::string& path);
};

struct IndivisibleN : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Goal-aware two-stage sampling: perimeter point, inward-cone direction,
/// magnitude from stage 1 unless the goal is within stage2_radius.
std::vector<PushAction> sample_actions_basic(const sim::ObjectParams& params,
                                             double goal_distance, int n,
                                             const ControllerConfig& cfg, Rng& rng);

/// Balanced sampling: n/4 placements per object side, improved magnitude
/// range, initial direction from the narrow or wide interval.
std::vector<PushAction> sample_actions_improved(const sim::ObjectParams& params, int n,
                                                const ControllerConfig& cfg, Rng& rng);

/// Exponentiated-cost softmin weights, shift-invariant in the costs.
std::vector<double> action_weights(const std::vector<double>& costs, double lambda);

/// Weight-blended action average.
PushAction combine_actions(const std::vector<PushAction>& actions,
                           const std::vector<double>& weights);

struct SelectResult {
  PushAction action;
  PlanarMotion predicted;
  bool fallback{false};
  int restarts{0};
  double cost_min{0.0};
  double cost_max{0.0};
};

/// Basic action selection: sample, rollout, softmin-blend; resample up to
/// restart_limit times when the blended placement collides, then fall back
/// to the lowest-cost sample.
SelectResult select_action_basic(const dyn::Predictor& model,
                                 const dyn::HistoryContext& history,
                                 const sim::WorldState& state, const tasks::CostFn& cost_fn,
                                 double goal_distance, const ControllerConfig& cfg, Rng& rng);

/// Improved action selection: balanced samples, directional rollouts, greedy
/// argmin (ties to the lowest sample index).
SelectResult select_action_improved(const dyn::Predictor& model,
                                    const dyn::HistoryContext& history,
                                    const sim::WorldState& state, const tasks::CostFn& cost_fn,
                                    const ControllerConfig& cfg, Rng& rng);

struct TraceStep {
  int step{0};
  PlanarPose pose_before;
  PlanarPose pose_after;
  PushAction action;
  PlanarMotion predicted;
  PlanarMotion realized;
  double travel_increment{0.0};
  bool fallback{false};
  double pred_err_pos{0.0};
  double pred_err_ang{0.0};
  double clearance{std::numeric_limits<double>::quiet_NaN()};
  int waypoint_index{0};
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  tasks::Status final_status{tasks::Status::exhausted};
  double total_travel{0.0};
  double mean_pred_err_pos{0.0};
  double mean_pred_err_ang{0.0};
  double min_clearance{std::numeric_limits<double>::quiet_NaN()};
  PlanarPose final_pose;

  /// First step count at which the pose error entered the threshold;
  /// -1 when never reached. Orientation checked only when yaw_tol >= 0.
  int steps_to_threshold(const PlanarPose& target, double pos_tol, double yaw_tol = -1.0) const;
};

/// Full control loop: select action, execute on the oracle, re-read the
/// pose, append to history; stops on the task condition or max_steps.
EpisodeTrace run_episode(const dyn::Predictor& model, const sim::WorldState& initial,
                         const tasks::TaskSpec& task, const ControllerConfig& cfg, int max_steps,
                         std::uint64_t seed);

void save_trace_jsonl(const EpisodeTrace& trace, const std::string& path);

}  // namespace pushlab::ctrl
