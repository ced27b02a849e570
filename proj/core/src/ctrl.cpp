#include "pushlab/ctrl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pushlab::ctrl {

using json = nlohmann::ordered_json;

const char* mode_name(Mode m) { return m == Mode::basic ? "basic" : "improved"; }

Mode mode_from_name(const std::string& s) {
  if (s == "basic") return Mode::basic;
  if (s == "improved") return Mode::improved;
  throw std::invalid_argument("unknown controller mode: " + s);
}

namespace {

ObjectFramePoint cone_direction(const Vec2& inward_normal, double half_angle, double mag,
                                Rng& rng) {
  const double base = std::atan2(inward_normal.y, inward_normal.x);
  const double ang = base + rng.uniform(-half_angle, half_angle);
  return {mag * std::cos(ang), mag * std::sin(ang)};
}

}  // namespace

std::vector<PushAction> sample_actions_basic(const sim::ObjectParams& params,
                                             double goal_distance, int n,
                                             const ControllerConfig& cfg, Rng& rng) {
  const double inflation = cfg.perimeter_margin + cfg.sim_cfg.pusher_radius;
  const double px = params.half_length() + inflation;
  const double py = params.half_width() + inflation;
  const bool stage2 = goal_distance <= cfg.effective_stage2_radius();
  const double lo = stage2 ? cfg.stage2_min : cfg.stage1_min;
  const double hi = stage2 ? cfg.stage2_max : cfg.stage1_max;
  const double half = deg2rad(cfg.cone_half_deg);

  std::vector<PushAction> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto per = geom::rect_perimeter_point(px, py, rng.uniform01());
    const double mag = rng.uniform(lo, hi);
    out.push_back({ObjectFramePoint(per.point), cone_direction(per.inward_normal, half, mag, rng)});
  }
  return out;
}

std::vector<PushAction> sample_actions_improved(const sim::ObjectParams& params, int n,
                                                const ControllerConfig& cfg, Rng& rng) {
  if (n % 4 != 0) throw IndivisibleN("improved sampling needs n divisible by 4");
  const double inflation = cfg.perimeter_margin + cfg.sim_cfg.pusher_radius;
  const double px = params.half_length() + inflation;
  const double py = params.half_width() + inflation;
  const double half = deg2rad(cfg.initial_dir == InitialDir::narrow ? cfg.initial_narrow_deg
                                                                    : cfg.initial_wide_deg);
  std::vector<PushAction> out;
  out.reserve(n);
  for (int face = 0; face < 4; ++face) {
    for (int i = 0; i < n / 4; ++i) {
      const auto per = geom::rect_face_point(px, py, face, rng.uniform01());
      const double mag = rng.uniform(cfg.improved_min, cfg.improved_max);
      out.push_back(
          {ObjectFramePoint(per.point), cone_direction(per.inward_normal, half, mag, rng)});
    }
  }
  return out;
}

std::vector<double> action_weights(const std::vector<double>& costs, double lambda) {
  const double cmin = *std::min_element(costs.begin(), costs.end());
  std::vector<double> w(costs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-(costs[i] - cmin) / lambda);
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

PushAction combine_actions(const std::vector<PushAction>& actions,
                           const std::vector<double>& weights) {
  double wsum = 0.0;
  Vec2 ro{0.0, 0.0}, d_ro{0.0, 0.0};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ro += weights[i] * actions[i].ro.vec();
    d_ro += weights[i] * actions[i].d_ro.vec();
    wsum += weights[i];
  }
  return {ObjectFramePoint(ro * (1.0 / wsum)), ObjectFramePoint(d_ro * (1.0 / wsum))};
}

namespace {

struct CostedRollouts {
  std::vector<double> costs;
  std::size_t argmin{0};
};

CostedRollouts cost_rollouts(const std::vector<dyn::SampleRollout>& rolls,
                             const std::vector<PushAction>& actions,
                             const tasks::CostFn& cost_fn) {
  CostedRollouts out;
  out.costs.resize(rolls.size());
  for (std::size_t i = 0; i < rolls.size(); ++i) {
    out.costs[i] = cost_fn(rolls[i], actions[i]);
    if (out.costs[i] < out.costs[out.argmin]) out.argmin = i;
  }
  return out;
}

double effective_lambda(const std::vector<double>& costs, const ControllerConfig& cfg) {
  if (cfg.lambda > 0.0) return cfg.lambda;
  const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
  const double spread = *hi - *lo;
  return spread > 0.0 ? cfg.lambda_frac * spread : 1.0;
}

// Keeps a blended action inside the feasible set: the direction is clamped
// into the inward cone at the blended placement and the magnitude into the
// active stage range.
PushAction reproject_blend(const PushAction& a, const sim::ObjectParams& params,
                           double goal_distance, const ControllerConfig& cfg) {
  PushAction out = a;
  const bool stage2 = goal_distance <= cfg.effective_stage2_radius();
  const double lo = stage2 ? cfg.stage2_min : cfg.stage1_min;
  const double hi = stage2 ? cfg.stage2_max : cfg.stage1_max;
  double mag = a.d_ro.norm();
  const double clamped = std::clamp(mag, lo, hi);

  Vec2 n_out;
  geom::closest_boundary_point(params.half_length(), params.half_width(), a.ro.vec(), &n_out);
  const double base = std::atan2(-n_out.y, -n_out.x);
  double ang = mag > 0.0 ? std::atan2(a.d_ro.v, a.d_ro.u) : base;
  const double half = deg2rad(cfg.cone_half_deg);
  const double off = wrap_angle(ang - base);
  if (off > half) ang = base + half;
  if (off < -half) ang = base - half;
  out.d_ro = {clamped * std::cos(ang), clamped * std::sin(ang)};
  return out;
}

PlanarMotion predict_with_action(const dyn::Predictor& model,
                                 const dyn::HistoryContext& history, const PushAction& action) {
  const auto window = dyn::assemble_window(history, action, model.window_len());
  const dyn::Mat out = model.predict(dyn::window_to_batch(window));
  return {out(0, 0), out(0, 1), out(0, 2)};
}

}  // namespace

SelectResult select_action_basic(const dyn::Predictor& model,
                                 const dyn::HistoryContext& history,
                                 const sim::WorldState& state, const tasks::CostFn& cost_fn,
                                 double goal_distance, const ControllerConfig& cfg, Rng& rng) {
  SelectResult res;
  std::vector<PushAction> actions;
  CostedRollouts costed;
  for (int attempt = 0; attempt <= cfg.restart_limit; ++attempt) {
    actions = sample_actions_basic(state.params, goal_distance, cfg.n_samples, cfg, rng);
    const auto rolls = dyn::rollout_batch(model, history, actions, cfg.horizon, nullptr,
                                          state.params, cfg.rollout);
    costed = cost_rollouts(rolls, actions, cost_fn);
    res.cost_min = *std::min_element(costed.costs.begin(), costed.costs.end());
    res.cost_max = *std::max_element(costed.costs.begin(), costed.costs.end());
    res.restarts = attempt;

    const double lambda = effective_lambda(costed.costs, cfg);
    const auto weights = action_weights(costed.costs, lambda);
    PushAction blended = combine_actions(actions, weights);
    blended = reproject_blend(blended, state.params, goal_distance, cfg);
    if (!sim::pusher_collides(state.params, blended.ro, cfg.sim_cfg.pusher_radius)) {
      res.action = blended;
      res.predicted = predict_with_action(model, history, blended);
      return res;
    }
  }
  // restarts exhausted: lowest-cost sample of the final round
  res.fallback = true;
  res.action = actions[costed.argmin];
  res.predicted = predict_with_action(model, history, res.action);
  return res;
}

SelectResult select_action_improved(const dyn::Predictor& model,
                                    const dyn::HistoryContext& history,
                                    const sim::WorldState& state, const tasks::CostFn& cost_fn,
                                    const ControllerConfig& cfg, Rng& rng) {
  const auto actions = sample_actions_improved(state.params, cfg.n_samples, cfg, rng);
  const double jitter = deg2rad(cfg.per_step_jitter_deg);
  std::vector<std::vector<double>> deltas(actions.size(),
                                          std::vector<double>(cfg.horizon, 0.0));
  for (auto& row : deltas) {
    for (int k = 1; k < cfg.horizon; ++k) row[k] = rng.uniform(-jitter, jitter);
  }
  const auto rolls = dyn::rollout_batch(model, history, actions, cfg.horizon, &deltas,
                                        state.params, cfg.rollout);
  const auto costed = cost_rollouts(rolls, actions, cost_fn);

  SelectResult res;
  res.cost_min = costed.costs[costed.argmin];
  res.cost_max = *std::max_element(costed.costs.begin(), costed.costs.end());
  res.action = actions[costed.argmin];
  res.predicted = predict_with_action(model, history, res.action);
  return res;
}

int EpisodeTrace::steps_to_threshold(const PlanarPose& target, double pos_tol,
                                     double yaw_tol) const {
  auto inside = [&](const PlanarPose& p) {
    const bool pos_ok = (p.position() - target.position()).norm() < pos_tol;
    const bool yaw_ok = yaw_tol < 0.0 || ang_diff(p.yaw, target.yaw) < yaw_tol;
    return pos_ok && yaw_ok;
  };
  if (!steps.empty() && inside(steps.front().pose_before)) return 0;
  for (const auto& s : steps) {
    if (inside(s.pose_after)) return s.step + 1;
  }
  return -1;
}

EpisodeTrace run_episode(const dyn::Predictor& model, const sim::WorldState& initial,
                         const tasks::TaskSpec& task, const ControllerConfig& cfg, int max_steps,
                         std::uint64_t seed) {
  Rng rng(seed);
  EpisodeTrace trace;
  sim::WorldState state = initial;
  Vec2 pusher_world = initial.pusher_pos;
  dyn::HistoryContext history;
  tasks::TaskState task_state;
  double pred_pos_acc = 0.0, pred_ang_acc = 0.0;

  for (int step = 0;; ++step) {
    const auto status =
        tasks::stop_condition(task, task_state, state.object_pose, step, max_steps);
    if (status != tasks::Status::continue_) {
      trace.final_status = status;
      break;
    }

    const PlanarPose goal = tasks::current_goal(task, task_state);
    double stage_metric = (state.object_pose.position() - goal.position()).norm();
    if (cfg.stage_trigger == StageTrigger::pusher_distance) {
      stage_metric = geom::point_rect_distance(
          state.params.half_length(), state.params.half_width(),
          to_object_frame(state.object_pose, pusher_world).vec());
    }

    const tasks::StepContext ctx{state.object_pose, pusher_world, state.params};
    const tasks::CostFn cost_fn = tasks::make_objective(task, task_state, ctx);

    const SelectResult sel =
        cfg.mode == Mode::basic
            ? select_action_basic(model, history, state, cost_fn, stage_metric, cfg, rng)
            : select_action_improved(model, history, state, cost_fn, cfg, rng);

    const Vec2 r_sampled = to_world_frame(state.object_pose, sel.action.ro);
    const auto result = sim::execute_push(state, sel.action.ro, sel.action.d_ro, cfg.sim_cfg);

    TraceStep ts;
    ts.step = step;
    ts.pose_before = state.object_pose;
    ts.pose_after = result.state.object_pose;
    ts.action = sel.action;
    ts.predicted = sel.predicted;
    ts.realized = result.motion;
    ts.fallback = sel.fallback;
    ts.travel_increment = (pusher_world - r_sampled).norm();
    ts.pred_err_pos =
        (sel.predicted.translation() - result.motion.translation()).norm();
    ts.pred_err_ang = ang_diff(sel.predicted.dyaw, result.motion.dyaw);
    ts.waypoint_index = task_state.waypoint_index;
    if (!task.obstacles.empty()) {
      double clear = std::numeric_limits<double>::infinity();
      const geom::Obb footprint{result.state.object_pose, state.params.half_length(),
                                state.params.half_width()};
      for (const auto& obs : task.obstacles) {
        const auto ob = obs.obb();
        clear = std::min(clear, geom::obb_distance(footprint, ob));
        clear = std::min(clear, geom::point_obb_distance(result.state.pusher_pos, ob) -
                                    cfg.sim_cfg.pusher_radius);
        clear = std::min(clear,
                         geom::point_obb_distance(r_sampled, ob) - cfg.sim_cfg.pusher_radius);
      }
      ts.clearance = clear;
      trace.min_clearance = std::isnan(trace.min_clearance)
                                ? clear
                                : std::min(trace.min_clearance, clear);
    }
    trace.total_travel += ts.travel_increment;
    pred_pos_acc += ts.pred_err_pos;
    pred_ang_acc += ts.pred_err_ang;
    trace.steps.push_back(ts);

    history.past.push_back(dyn::Triple{history.latest_motion, sel.action.ro, sel.action.d_ro});
    history.latest_motion = result.motion;
    state = result.state;
    pusher_world = result.state.pusher_pos;
  }

  trace.final_pose = state.object_pose;
  if (!trace.steps.empty()) {
    trace.mean_pred_err_pos = pred_pos_acc / static_cast<double>(trace.steps.size());
    trace.mean_pred_err_ang = pred_ang_acc / static_cast<double>(trace.steps.size());
  }
  return trace;
}

// --- serialization -----------------------------------------------------------

std::string ControllerConfig::to_json() const {
  json j{{"mode", mode_name(mode)},
         {"n_samples", n_samples},
         {"horizon", horizon},
         {"lambda", lambda},
         {"lambda_frac", lambda_frac},
         {"stage2_radius", stage2_radius},
         {"stage1_range", json::array({stage1_min, stage1_max})},
         {"stage2_range", json::array({stage2_min, stage2_max})},
         {"improved_range", json::array({improved_min, improved_max})},
         {"restart_limit", restart_limit},
         {"initial_dir", initial_dir == InitialDir::narrow ? "narrow" : "wide"},
         {"initial_narrow_deg", initial_narrow_deg},
         {"initial_wide_deg", initial_wide_deg},
         {"per_step_jitter_deg", per_step_jitter_deg},
         {"cone_half_deg", cone_half_deg},
         {"perimeter_margin", perimeter_margin},
         {"stage_trigger",
          stage_trigger == StageTrigger::target_distance ? "target_distance" : "pusher_distance"},
         {"tracked_ro", rollout.tracked_ro}};
  return j.dump(2);
}

ControllerConfig ControllerConfig::from_json_string(const std::string& s) {
  const json j = json::parse(s);
  ControllerConfig c;
  if (j.contains("mode")) c.mode = mode_from_name(j.at("mode"));
  if (j.contains("n_samples")) c.n_samples = j.at("n_samples");
  if (j.contains("horizon")) c.horizon = j.at("horizon");
  if (j.contains("lambda")) c.lambda = j.at("lambda");
  if (j.contains("lambda_frac")) c.lambda_frac = j.at("lambda_frac");
  if (j.contains("stage2_radius")) c.stage2_radius = j.at("stage2_radius");
  if (j.contains("stage1_range")) {
    c.stage1_min = j.at("stage1_range")[0];
    c.stage1_max = j.at("stage1_range")[1];
  }
  if (j.contains("stage2_range")) {
    c.stage2_min = j.at("stage2_range")[0];
    c.stage2_max = j.at("stage2_range")[1];
  }
  if (j.contains("improved_range")) {
    c.improved_min = j.at("improved_range")[0];
    c.improved_max = j.at("improved_range")[1];
  }
  if (j.contains("restart_limit")) c.restart_limit = j.at("restart_limit");
  if (j.contains("initial_dir")) {
    c.initial_dir = j.at("initial_dir") == "wide" ? InitialDir::wide : InitialDir::narrow;
  }
  if (j.contains("initial_narrow_deg")) c.initial_narrow_deg = j.at("initial_narrow_deg");
  if (j.contains("initial_wide_deg")) c.initial_wide_deg = j.at("initial_wide_deg");
  if (j.contains("per_step_jitter_deg")) c.per_step_jitter_deg = j.at("per_step_jitter_deg");
  if (j.contains("cone_half_deg")) c.cone_half_deg = j.at("cone_half_deg");
  if (j.contains("perimeter_margin")) c.perimeter_margin = j.at("perimeter_margin");
  if (j.contains("stage_trigger")) {
    c.stage_trigger = j.at("stage_trigger") == "pusher_distance"
                          ? StageTrigger::pusher_distance
                          : StageTrigger::target_distance;
  }
  if (j.contains("tracked_ro")) c.rollout.tracked_ro = j.at("tracked_ro");
  c.rollout.perimeter_margin = c.perimeter_margin;
  c.rollout.pusher_radius = c.sim_cfg.pusher_radius;
  return c;
}

ControllerConfig ControllerConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open controller config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void save_trace_jsonl(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  json header{{"schema", "pushlab.trace/1"},
              {"final_status", trace.final_status == tasks::Status::success ? "success"
                                                                            : "exhausted"},
              {"steps", trace.steps.size()},
              {"total_travel", trace.total_travel},
              {"mean_pred_err_pos", trace.mean_pred_err_pos},
              {"mean_pred_err_ang", trace.mean_pred_err_ang},
              {"final_pose",
               json::array({trace.final_pose.x, trace.final_pose.y, trace.final_pose.yaw})}};
  out << header.dump() << "\n";
  for (const auto& s : trace.steps) {
    json line{
        {"step", s.step},
        {"pose_before", json::array({s.pose_before.x, s.pose_before.y, s.pose_before.yaw})},
        {"pose_after", json::array({s.pose_after.x, s.pose_after.y, s.pose_after.yaw})},
        {"ro", json::array({s.action.ro.u, s.action.ro.v})},
        {"dro", json::array({s.action.d_ro.u, s.action.d_ro.v})},
        {"predicted", json::array({s.predicted.dx, s.predicted.dy, s.predicted.dyaw})},
        {"realized", json::array({s.realized.dx, s.realized.dy, s.realized.dyaw})},
        {"travel", s.travel_increment},
        {"fallback", s.fallback},
        {"pred_err_pos", s.pred_err_pos},
        {"pred_err_ang", s.pred_err_ang},
        {"waypoint", s.waypoint_index}};
    if (!std::isnan(s.clearance)) line["clearance"] = s.clearance;
    out << line.dump() << "\n";
  }
}

}  // namespace pushlab::ctrl
