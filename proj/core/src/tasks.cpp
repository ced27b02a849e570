#include "pushlab/tasks.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pushlab::tasks {

using json = nlohmann::ordered_json;

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::posing:
      return "posing";
    case TaskKind::posing_penalty:
      return "posing_penalty";
    case TaskKind::trajectory:
      return "trajectory";
    default:
      return "obstacle";
  }
}

TaskKind task_kind_from_name(const std::string& s) {
  if (s == "posing") return TaskKind::posing;
  if (s == "posing_penalty") return TaskKind::posing_penalty;
  if (s == "trajectory") return TaskKind::trajectory;
  if (s == "obstacle") return TaskKind::obstacle;
  throw std::invalid_argument("unknown task kind: " + s);
}

double TaskSpec::nominal_waypoint_spacing() const {
  if (waypoints.size() < 2) return 0.02;
  double acc = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    acc += (waypoints[i].position() - waypoints[i - 1].position()).norm();
  }
  return acc / static_cast<double>(waypoints.size() - 1);
}

double TaskSpec::proximity() const {
  return waypoint_proximity > 0.0 ? waypoint_proximity : 0.5 * nominal_waypoint_spacing();
}

double cost_posing(const std::vector<PlanarPose>& rollout_poses, const PlanarPose& target,
                   double w_theta) {
  return pose_diff(target, rollout_poses.back(), w_theta);
}

double cost_posing_penalty(const std::vector<PlanarPose>& rollout_poses, const PlanarPose& target,
                           double w_theta, double phi, const Vec2& r_current,
                           const Vec2& r_sampled) {
  return cost_posing(rollout_poses, target, w_theta) +
         phi * (r_current - r_sampled).squared_norm();
}

double cost_trajectory(const std::vector<PlanarPose>& rollout_poses,
                       const PlanarPose& next_waypoint, double w_theta) {
  return pose_diff(next_waypoint, rollout_poses.front(), w_theta);
}

double obstacle_penalty(double d_o, double d_p, double w1, double w2, double alpha) {
  return w1 * std::exp(-alpha * d_o) + w2 * std::exp(-alpha * d_p);
}

double rect_distance(const geom::Obb& a, const geom::Obb& b) { return geom::obb_distance(a, b); }

double point_rect_distance(const Vec2& p, const geom::Obb& rect) {
  return geom::point_obb_distance(p, rect);
}

double cost_obstacle(const std::vector<PlanarPose>& rollout_poses,
                     const std::vector<Vec2>& pusher_world_points,
                     const std::vector<Obstacle>& obstacles, const PlanarPose& target,
                     double w_theta, const sim::ObjectParams& params, const TaskSpec& spec) {
  double cost = cost_posing(rollout_poses, target, w_theta);
  if (obstacles.empty()) return cost;

  if (spec.obstacle_min_over_steps) {
    double d_o = std::numeric_limits<double>::infinity();
    double d_p = std::numeric_limits<double>::infinity();
    for (const auto& obs : obstacles) {
      const geom::Obb ob = obs.obb();
      for (const auto& pose : rollout_poses) {
        d_o = std::min(d_o, geom::obb_distance({pose, params.half_length(), params.half_width()},
                                               ob));
      }
      for (const auto& p : pusher_world_points) {
        d_p = std::min(d_p, geom::point_obb_distance(p, ob));
      }
    }
    if (std::min(d_o, d_p) < spec.obstacle_gate) {
      cost += obstacle_penalty(d_o, d_p, spec.w1, spec.w2, spec.alpha);
    }
    return cost;
  }

  // per-step variant: gate and accumulate each rollout step separately
  for (std::size_t k = 0; k < rollout_poses.size(); ++k) {
    double d_o = std::numeric_limits<double>::infinity();
    double d_p = std::numeric_limits<double>::infinity();
    for (const auto& obs : obstacles) {
      const geom::Obb ob = obs.obb();
      d_o = std::min(d_o, geom::obb_distance(
                              {rollout_poses[k], params.half_length(), params.half_width()}, ob));
      for (std::size_t j = 2 * k; j < std::min(pusher_world_points.size(), 2 * k + 2); ++j) {
        d_p = std::min(d_p, geom::point_obb_distance(pusher_world_points[j], ob));
      }
    }
    if (std::min(d_o, d_p) < spec.obstacle_gate) {
      cost += obstacle_penalty(d_o, d_p, spec.w1, spec.w2, spec.alpha);
    }
  }
  return cost;
}

Status stop_condition(const TaskSpec& task, TaskState& state, const PlanarPose& object_pose,
                      int step, int max_steps) {
  if (task.kind == TaskKind::trajectory) {
    const double prox = task.proximity();
    const int n = static_cast<int>(task.waypoints.size());
    while (state.waypoint_index < n &&
           (object_pose.position() - task.waypoints[state.waypoint_index].position()).norm() <
               prox) {
      ++state.waypoint_index;
    }
    if (state.waypoint_index >= n) return Status::success;
    if (step >= max_steps) return Status::exhausted;
    return Status::continue_;
  }
  const double pos_err = (object_pose.position() - task.target.position()).norm();
  const bool pos_ok = pos_err < task.pos_threshold;
  const bool yaw_ok =
      !task.yaw_threshold || ang_diff(object_pose.yaw, task.target.yaw) < *task.yaw_threshold;
  if (pos_ok && yaw_ok) return Status::success;
  if (step >= max_steps) return Status::exhausted;
  return Status::continue_;
}

PlanarPose current_goal(const TaskSpec& task, const TaskState& state) {
  if (task.kind == TaskKind::trajectory) {
    const int idx =
        std::min(state.waypoint_index, static_cast<int>(task.waypoints.size()) - 1);
    return task.waypoints[idx];
  }
  return task.target;
}

CostFn make_objective(const TaskSpec& task, const TaskState& state, const StepContext& ctx) {
  const PlanarPose goal = current_goal(task, state);
  const double goal_distance = (ctx.object_pose.position() - goal.position()).norm();
  const double w_theta = task.w_theta.value(goal_distance);
  const PlanarPose object_pose = ctx.object_pose;

  auto world_poses = [object_pose](const dyn::SampleRollout& roll) {
    std::vector<PlanarPose> poses;
    poses.reserve(roll.rel_poses.size());
    for (const auto& rel : roll.rel_poses) poses.push_back(compose(object_pose, rel));
    return poses;
  };

  switch (task.kind) {
    case TaskKind::posing: {
      return [goal, w_theta, world_poses](const dyn::SampleRollout& roll,
                                          const dyn::PushAction&) {
        return cost_posing(world_poses(roll), goal, w_theta);
      };
    }
    case TaskKind::posing_penalty: {
      const double phi = task.phi.value(goal_distance);
      const Vec2 r_current = ctx.pusher_world;
      return [goal, w_theta, phi, r_current, object_pose, world_poses](
                 const dyn::SampleRollout& roll, const dyn::PushAction& action) {
        const Vec2 r_sampled = to_world_frame(object_pose, action.ro);
        return cost_posing_penalty(world_poses(roll), goal, w_theta, phi, r_current, r_sampled);
      };
    }
    case TaskKind::trajectory: {
      const double phi = task.phi.value(goal_distance);
      const Vec2 r_current = ctx.pusher_world;
      return [goal, w_theta, phi, r_current, object_pose, world_poses](
                 const dyn::SampleRollout& roll, const dyn::PushAction& action) {
        double c = cost_trajectory(world_poses(roll), goal, w_theta);
        if (phi > 0.0) {
          const Vec2 r_sampled = to_world_frame(object_pose, action.ro);
          c += phi * (r_current - r_sampled).squared_norm();
        }
        return c;
      };
    }
    default: {
      const TaskSpec spec = task;  // by value: schedules + obstacle params
      const sim::ObjectParams params = ctx.params;
      return [goal, w_theta, spec, params, object_pose, world_poses](
                 const dyn::SampleRollout& roll, const dyn::PushAction&) {
        const auto poses = world_poses(roll);
        std::vector<Vec2> pusher_pts;
        pusher_pts.reserve(2 * roll.ro.size());
        PlanarPose frame = object_pose;
        for (std::size_t k = 0; k < roll.ro.size(); ++k) {
          pusher_pts.push_back(to_world_frame(frame, roll.ro[k]));
          pusher_pts.push_back(to_world_frame(
              frame, ObjectFramePoint(roll.ro[k].vec() + roll.d_ro[k].vec())));
          frame = poses[k];
        }
        return cost_obstacle(poses, pusher_pts, spec.obstacles, goal, w_theta, params, spec);
      };
    }
  }
}

// --- JSON ----------------------------------------------------------------------

namespace {

json pose_to_json(const PlanarPose& p) { return json::array({p.x, p.y, p.yaw}); }

PlanarPose pose_from_json(const json& j) { return {j[0], j[1], j[2]}; }

}  // namespace

std::string TaskSpec::to_json() const {
  json j;
  j["kind"] = task_kind_name(kind);
  if (kind == TaskKind::trajectory) {
    json wps = json::array();
    for (const auto& w : waypoints) wps.push_back(pose_to_json(w));
    j["waypoints"] = wps;
  } else {
    j["target"] = pose_to_json(target);
  }
  if (w_theta.gated) {
    j["w_theta"] = {{"kind", "near_target"},
                    {"inside", w_theta.inside},
                    {"radius", w_theta.gate_radius}};
  } else {
    j["w_theta"] = {{"kind", "const"}, {"value", w_theta.base}};
  }
  if (phi.quarter_distance) {
    j["phi"] = {{"kind", "quarter_distance"}, {"cutoff", phi.cutoff}};
  } else {
    j["phi"] = {{"kind", "const"}, {"value", phi.constant}};
  }
  if (!obstacles.empty()) {
    json obs = json::array();
    for (const auto& o : obstacles) {
      obs.push_back({{"pose", pose_to_json(o.pose)},
                     {"half_extents", json::array({o.half_extents.x, o.half_extents.y})}});
    }
    j["obstacles"] = obs;
    j["obstacle_gate"] = obstacle_gate;
    j["w1"] = w1;
    j["w2"] = w2;
    j["alpha"] = alpha;
    j["min_over_steps"] = obstacle_min_over_steps;
  }
  j["thresholds"] = {{"position", pos_threshold},
                     {"orientation", yaw_threshold ? json(*yaw_threshold) : json(nullptr)}};
  if (kind == TaskKind::trajectory && waypoint_proximity > 0.0) {
    j["waypoint_proximity"] = waypoint_proximity;
  }
  return j.dump(2);
}

TaskSpec TaskSpec::from_json_string(const std::string& s) {
  const json j = json::parse(s);
  TaskSpec t;
  t.kind = task_kind_from_name(j.at("kind"));
  if (j.contains("target")) t.target = pose_from_json(j.at("target"));
  if (j.contains("waypoints")) {
    for (const auto& w : j.at("waypoints")) t.waypoints.push_back(pose_from_json(w));
  }
  if (j.contains("w_theta")) {
    const auto& w = j.at("w_theta");
    if (w.at("kind") == "near_target") {
      t.w_theta.gated = true;
      t.w_theta.inside = w.at("inside");
      t.w_theta.gate_radius = w.at("radius");
    } else {
      t.w_theta.gated = false;
      t.w_theta.base = w.at("value");
    }
  }
  if (j.contains("phi")) {
    const auto& p = j.at("phi");
    if (p.at("kind") == "quarter_distance") {
      t.phi.quarter_distance = true;
      t.phi.cutoff = p.at("cutoff");
    } else {
      t.phi.quarter_distance = false;
      t.phi.constant = p.at("value");
    }
  }
  if (j.contains("obstacles")) {
    for (const auto& o : j.at("obstacles")) {
      Obstacle ob;
      ob.pose = pose_from_json(o.at("pose"));
      ob.half_extents = {o.at("half_extents")[0], o.at("half_extents")[1]};
      t.obstacles.push_back(ob);
    }
    if (j.contains("obstacle_gate")) t.obstacle_gate = j.at("obstacle_gate");
    if (j.contains("w1")) t.w1 = j.at("w1");
    if (j.contains("w2")) t.w2 = j.at("w2");
    if (j.contains("alpha")) t.alpha = j.at("alpha");
    if (j.contains("min_over_steps")) t.obstacle_min_over_steps = j.at("min_over_steps");
  }
  if (j.contains("thresholds")) {
    t.pos_threshold = j.at("thresholds").at("position");
    const auto& orient = j.at("thresholds").at("orientation");
    if (!orient.is_null()) t.yaw_threshold = orient.get<double>();
  }
  if (j.contains("waypoint_proximity")) t.waypoint_proximity = j.at("waypoint_proximity");
  return t;
}

TaskSpec TaskSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open task spec: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void TaskSpec::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write task spec: " + path);
  out << to_json() << "\n";
}

}  // namespace pushlab::tasks
