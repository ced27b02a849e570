#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pushlab/dyn.hpp"
#include "pushlab/geom.hpp"

namespace pushlab::tasks {

/// Axis-aligned rectangle in its own frame; world placement via pose.
struct Obstacle {
  PlanarPose pose;
  Vec2 half_extents{0.015, 0.015};

  geom::Obb obb() const { return {pose, half_extents.x, half_extents.y}; }
};

enum class TaskKind { posing, posing_penalty, trajectory, obstacle };
const char* task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& s);

/// Orientation weight, optionally gated to activate only near the target.
struct WThetaSchedule {
  double base{0.025};
  bool gated{false};
  double gate_radius{0.05};
  double inside{0.3};

  double value(double goal_distance) const {
    if (!gated) return base;
    return goal_distance <= gate_radius ? inside : 0.0;
  }
};

/// Robot-travel penalty weight; dynamic form is a quarter of the distance
/// to the target until the cutoff, then zero.
struct PhiSchedule {
  bool quarter_distance{true};
  double cutoff{0.02};
  double constant{0.0};

  double value(double goal_distance) const {
    if (!quarter_distance) return constant;
    return goal_distance > cutoff ? goal_distance / 4.0 : 0.0;
  }
};

struct TaskSpec {
  TaskKind kind{TaskKind::posing};
  PlanarPose target;
  std::vector<PlanarPose> waypoints;
  WThetaSchedule w_theta;
  PhiSchedule phi;
  std::vector<Obstacle> obstacles;
  double pos_threshold{0.01};
  std::optional<double> yaw_threshold;
  double waypoint_proximity{-1.0};  // <0: half the nominal waypoint spacing
  double obstacle_gate{0.01};
  double w1{10.0};
  double w2{10.0};
  double alpha{230.25850929940458};  // 100 ln 10
  bool obstacle_min_over_steps{true};

  double nominal_waypoint_spacing() const;
  double proximity() const;

  std::string to_json() const;
  static TaskSpec from_json_string(const std::string& s);
  static TaskSpec from_json_file(const std::string& path);
  void save_json(const std::string& path) const;
};

// --- cost primitives ---------------------------------------------------------

/// Pose difference of the last rollout pose to the target.
double cost_posing(const std::vector<PlanarPose>& rollout_poses, const PlanarPose& target,
                   double w_theta);

/// cost_posing plus phi * |R_current - R_sampled|^2.
double cost_posing_penalty(const std::vector<PlanarPose>& rollout_poses, const PlanarPose& target,
                           double w_theta, double phi, const Vec2& r_current,
                           const Vec2& r_sampled);

/// Pose difference of the *first* rollout pose to the next waypoint.
double cost_trajectory(const std::vector<PlanarPose>& rollout_poses,
                       const PlanarPose& next_waypoint, double w_theta);

/// w1 exp(-alpha d_o) + w2 exp(-alpha d_p).
double obstacle_penalty(double d_o, double d_p, double w1, double w2, double alpha);

/// Obstacle-task cost: posing cost plus the exponential obstacle term,
/// added only when min(d_o, d_p) is below the gate distance. Distances are
/// minima over rollout steps by default (config: per-step gated sum).
double cost_obstacle(const std::vector<PlanarPose>& rollout_poses,
                     const std::vector<Vec2>& pusher_world_points,
                     const std::vector<Obstacle>& obstacles, const PlanarPose& target,
                     double w_theta, const sim::ObjectParams& params, const TaskSpec& spec);

/// Exact separation between two oriented rectangles / a point and one.
double rect_distance(const geom::Obb& a, const geom::Obb& b);
double point_rect_distance(const Vec2& p, const geom::Obb& rect);

// --- episode control ---------------------------------------------------------

struct TaskState {
  int waypoint_index{0};
};

enum class Status { continue_, success, exhausted };

/// Posing flavors: success when the pose error is inside the thresholds.
/// Trajectory: advances waypoints within proximity, success past the last.
Status stop_condition(const TaskSpec& task, TaskState& state, const PlanarPose& object_pose,
                      int step, int max_steps);

/// Current goal pose (target, or the active waypoint for trajectories).
PlanarPose current_goal(const TaskSpec& task, const TaskState& state);

/// Everything a per-step objective needs from the control loop.
struct StepContext {
  PlanarPose object_pose;
  Vec2 pusher_world;  // R_current
  sim::ObjectParams params;
};

using CostFn = std::function<double(const dyn::SampleRollout&, const dyn::PushAction&)>;

/// Builds the rollout objective for one control step; schedules (w_theta,
/// phi) are evaluated against the current goal distance.
CostFn make_objective(const TaskSpec& task, const TaskState& state, const StepContext& ctx);

}  // namespace pushlab::tasks
