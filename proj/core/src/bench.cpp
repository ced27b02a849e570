#include "pushlab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pushlab/parallel.hpp"
#include "pushlab/svg.hpp"

namespace pushlab::bench {

using json = nlohmann::ordered_json;

const char* grid_name(Grid g) { return g == Grid::short_grid ? "short" : "long"; }

Grid grid_from_name(const std::string& s) {
  if (s == "short") return Grid::short_grid;
  if (s == "long") return Grid::long_grid;
  throw std::invalid_argument("unknown grid: " + s);
}

std::vector<CategorySpec> grid_categories(Grid g) {
  const double d0_min = g == Grid::short_grid ? 0.05 : 0.10;
  const double d0_max = g == Grid::short_grid ? 0.15 : 0.20;
  const double d1_min = g == Grid::short_grid ? 0.15 : 0.20;
  const double d1_max = g == Grid::short_grid ? 0.20 : 0.30;
  std::vector<CategorySpec> cats;
  int idx = 1;
  for (int d = 0; d < 2; ++d) {
    const double dmin = d == 0 ? d0_min : d1_min;
    const double dmax = d == 0 ? d0_max : d1_max;
    for (int o = 0; o < 3; ++o) {
      CategorySpec c;
      c.index = idx++;
      c.dist_min = dmin;
      c.dist_max = dmax;
      c.yaw_min_deg = 30.0 * o;
      c.yaw_max_deg = 30.0 * (o + 1);
      cats.push_back(c);
    }
  }
  return cats;
}

std::vector<EpisodeSpec> plan_suite(const SuiteConfig& cfg) {
  std::vector<EpisodeSpec> plan;
  for (const auto& cat : grid_categories(cfg.grid)) {
    for (int cs = 0; cs < cfg.cases_per_category; ++cs) {
      Rng rng(derive_seed(cfg.master_seed, 1000u * cat.index + cs, 0xca5e));
      EpisodeSpec spec;
      spec.category = cat.index;
      spec.case_index = cs;
      spec.params = sim::sample_object_params(rng);
      spec.initial = PlanarPose(0.0, 0.0, 0.0);
      const double dist = rng.uniform(cat.dist_min, cat.dist_max);
      const double dir = rng.uniform(0.0, 2.0 * kPi);
      const double dyaw = rng.uniform(deg2rad(cat.yaw_min_deg), deg2rad(cat.yaw_max_deg)) *
                          (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      spec.target = PlanarPose(dist * std::cos(dir), dist * std::sin(dir), dyaw);
      for (int r = 0; r < cfg.repeats; ++r) {
        spec.repeat = r;
        spec.controller_seed =
            derive_seed(cfg.master_seed, 1000000u * cat.index + 1000u * cs + r, 0x5eed);
        plan.push_back(spec);
      }
    }
  }
  return plan;
}

namespace {

sim::WorldState initial_state(const EpisodeSpec& spec, const ctrl::ControllerConfig& ccfg) {
  sim::WorldState st;
  st.object_pose = spec.initial;
  st.params = spec.params;
  const double standoff =
      spec.params.half_length() + ccfg.perimeter_margin + ccfg.sim_cfg.pusher_radius;
  st.pusher_pos = to_world_frame(spec.initial, ObjectFramePoint(standoff, 0.0));
  return st;
}

EpisodeResult run_one(const dyn::Predictor& model, const SuiteConfig& cfg,
                      const EpisodeSpec& spec) {
  tasks::TaskSpec task;
  task.kind = cfg.objective;
  task.target = spec.target;
  task.w_theta.base = cfg.w_theta;
  task.pos_threshold = cfg.stop_pos;
  if (cfg.stop_yaw_deg >= 0.0) task.yaw_threshold = deg2rad(cfg.stop_yaw_deg);

  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = ctrl::run_episode(model, initial_state(spec, cfg.controller), task,
                                       cfg.controller, cfg.max_steps, spec.controller_seed);
  const auto t1 = std::chrono::steady_clock::now();

  EpisodeResult res;
  res.category = spec.category;
  res.case_index = spec.case_index;
  res.repeat = spec.repeat;
  res.success = trace.final_status == tasks::Status::success;
  res.steps = static_cast<int>(trace.steps.size());
  res.travel = trace.total_travel;
  res.pred_err_pos = trace.mean_pred_err_pos;
  res.pred_err_ang = trace.mean_pred_err_ang;
  for (const double thr : cfg.pos_thresholds) {
    res.steps_to.push_back(trace.steps_to_threshold(spec.target, thr));
  }
  res.steps_to_fine =
      trace.steps_to_threshold(spec.target, cfg.fine_pos, deg2rad(cfg.fine_yaw_deg));
  res.final_pos_err = (trace.final_pose.position() - spec.target.position()).norm();
  res.final_yaw_err = ang_diff(trace.final_pose.yaw, spec.target.yaw);
  for (const auto& s : trace.steps) res.fallback_steps += s.fallback ? 1 : 0;
  res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return res;
}

}  // namespace

SuiteReport run_suite(const dyn::Predictor& model, const SuiteConfig& cfg) {
  const auto plan = plan_suite(cfg);
  SuiteReport rep;
  rep.mode = ctrl::mode_name(cfg.controller.mode);
  rep.objective = tasks::task_kind_name(cfg.objective);
  rep.grid = cfg.grid;
  rep.pos_thresholds = cfg.pos_thresholds;
  rep.fine_pos = cfg.fine_pos;
  rep.fine_yaw_deg = cfg.fine_yaw_deg;
  rep.stop_pos = cfg.stop_pos;
  rep.stop_yaw_deg = cfg.stop_yaw_deg;
  rep.max_steps = cfg.max_steps;
  rep.cases_per_category = cfg.cases_per_category;
  rep.repeats = cfg.repeats;
  rep.master_seed = cfg.master_seed;
  rep.episodes.resize(plan.size());
  parallel_for(plan.size(), [&](std::size_t i) {
    rep.episodes[i] = run_one(model, cfg, plan[i]);
  });
  return rep;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

namespace {

int steps_for_threshold(const EpisodeResult& e, int threshold_index) {
  return threshold_index < 0 ? e.steps_to_fine : e.steps_to[threshold_index];
}

ThresholdStats stats_over(const SuiteReport& rep, int category, int threshold_index) {
  ThresholdStats st;
  std::vector<double> reached;
  int total = 0;
  for (const auto& e : rep.episodes) {
    if (category > 0 && e.category != category) continue;
    ++total;
    const int s = steps_for_threshold(e, threshold_index);
    if (s >= 0) {
      reached.push_back(static_cast<double>(s));
    } else {
      ++st.censored;
    }
  }
  st.median_steps = reached.empty() ? -1.0 : median(reached);
  st.success_rate = total > 0 ? static_cast<double>(reached.size()) / total : 0.0;
  return st;
}

}  // namespace

ThresholdStats category_threshold_stats(const SuiteReport& rep, int category,
                                        int threshold_index) {
  return stats_over(rep, category, threshold_index);
}

ThresholdStats overall_threshold_stats(const SuiteReport& rep, int threshold_index) {
  return stats_over(rep, 0, threshold_index);
}

double category_travel_median(const SuiteReport& rep, int category) {
  std::vector<double> xs;
  for (const auto& e : rep.episodes) {
    if (category <= 0 || e.category == category) xs.push_back(e.travel);
  }
  return median(xs);
}

double overall_travel_median(const SuiteReport& rep) { return category_travel_median(rep, 0); }

double overall_pred_err_pos_mean(const SuiteReport& rep) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& e : rep.episodes) {
    if (e.steps > 0) {
      acc += e.pred_err_pos;
      ++n;
    }
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

// --- serialization ---------------------------------------------------------------

std::string suite_report_json(const SuiteReport& rep, bool include_timing) {
  json j;
  j["schema"] = "pushlab.suite_report/1";
  j["mode"] = rep.mode;
  j["objective"] = rep.objective;
  j["grid"] = grid_name(rep.grid);
  j["pos_thresholds"] = rep.pos_thresholds;
  j["fine_threshold"] = {{"position", rep.fine_pos}, {"orientation_deg", rep.fine_yaw_deg}};
  j["stop"] = {{"position", rep.stop_pos}, {"orientation_deg", rep.stop_yaw_deg}};
  j["max_steps"] = rep.max_steps;
  j["cases_per_category"] = rep.cases_per_category;
  j["repeats"] = rep.repeats;
  j["master_seed"] = rep.master_seed;
  j["travel_metric"] = "sum over steps of |R_current - R_sampled| (pusher repositioning)";

  json episodes = json::array();
  for (const auto& e : rep.episodes) {
    json je{{"category", e.category},
            {"case", e.case_index},
            {"repeat", e.repeat},
            {"success", e.success},
            {"steps", e.steps},
            {"travel", e.travel},
            {"pred_err_pos", e.pred_err_pos},
            {"pred_err_ang", e.pred_err_ang},
            {"steps_to", e.steps_to},
            {"steps_to_fine", e.steps_to_fine},
            {"final_pos_err", e.final_pos_err},
            {"final_yaw_err", e.final_yaw_err},
            {"fallback_steps", e.fallback_steps}};
    episodes.push_back(je);
  }
  j["episodes"] = episodes;

  json cats = json::array();
  for (const auto& cat : grid_categories(rep.grid)) {
    json jc{{"category", cat.index}};
    json per_thr = json::array();
    for (std::size_t t = 0; t < rep.pos_thresholds.size(); ++t) {
      const auto st = category_threshold_stats(rep, cat.index, static_cast<int>(t));
      per_thr.push_back({{"threshold", rep.pos_thresholds[t]},
                         {"median_steps", st.median_steps},
                         {"success_rate", st.success_rate},
                         {"censored", st.censored}});
    }
    const auto fine = category_threshold_stats(rep, cat.index, -1);
    per_thr.push_back({{"threshold", "fine"},
                       {"median_steps", fine.median_steps},
                       {"success_rate", fine.success_rate},
                       {"censored", fine.censored}});
    jc["per_threshold"] = per_thr;
    jc["travel_median"] = category_travel_median(rep, cat.index);
    cats.push_back(jc);
  }
  j["categories"] = cats;

  if (include_timing) {
    json wall = json::array();
    for (const auto& e : rep.episodes) wall.push_back(e.wall_seconds);
    j["timing"] = {{"wall_seconds_per_episode", wall}};
  }
  return j.dump(2);
}

SuiteReport suite_report_from_json(const std::string& s) {
  const json j = json::parse(s);
  if (j.at("schema") != "pushlab.suite_report/1") {
    throw std::runtime_error("unsupported suite report schema");
  }
  SuiteReport rep;
  rep.mode = j.at("mode");
  rep.objective = j.at("objective");
  rep.grid = grid_from_name(j.at("grid"));
  rep.pos_thresholds = j.at("pos_thresholds").get<std::vector<double>>();
  rep.fine_pos = j.at("fine_threshold").at("position");
  rep.fine_yaw_deg = j.at("fine_threshold").at("orientation_deg");
  rep.stop_pos = j.at("stop").at("position");
  rep.stop_yaw_deg = j.at("stop").at("orientation_deg");
  rep.max_steps = j.at("max_steps");
  rep.cases_per_category = j.at("cases_per_category");
  rep.repeats = j.at("repeats");
  rep.master_seed = j.at("master_seed");
  for (const auto& je : j.at("episodes")) {
    EpisodeResult e;
    e.category = je.at("category");
    e.case_index = je.at("case");
    e.repeat = je.at("repeat");
    e.success = je.at("success");
    e.steps = je.at("steps");
    e.travel = je.at("travel");
    e.pred_err_pos = je.at("pred_err_pos");
    e.pred_err_ang = je.at("pred_err_ang");
    e.steps_to = je.at("steps_to").get<std::vector<int>>();
    e.steps_to_fine = je.at("steps_to_fine");
    e.final_pos_err = je.at("final_pos_err");
    e.final_yaw_err = je.at("final_yaw_err");
    e.fallback_steps = je.at("fallback_steps");
    rep.episodes.push_back(e);
  }
  return rep;
}

void save_suite_report(const SuiteReport& rep, const std::string& json_path) {
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + json_path);
  out << suite_report_json(rep, true) << "\n";
}

SuiteReport load_suite_report(const std::string& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report: " + json_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return suite_report_from_json(ss.str());
}

void save_suite_csv(const SuiteReport& rep, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv: " + csv_path);
  out << "category,case,repeat,success,steps,travel,pred_err_pos,pred_err_ang";
  for (const double t : rep.pos_thresholds) out << ",steps_to_" << t;
  out << ",steps_to_fine,final_pos_err,final_yaw_err,fallback_steps\n";
  for (const auto& e : rep.episodes) {
    out << e.category << "," << e.case_index << "," << e.repeat << "," << (e.success ? 1 : 0)
        << "," << e.steps << "," << e.travel << "," << e.pred_err_pos << "," << e.pred_err_ang;
    for (const int s : e.steps_to) out << "," << s;
    out << "," << e.steps_to_fine << "," << e.final_pos_err << "," << e.final_yaw_err << ","
        << e.fallback_steps << "\n";
  }
}

CompareReport compare_controllers(const SuiteReport& a, const SuiteReport& b) {
  if (a.grid != b.grid || a.cases_per_category != b.cases_per_category ||
      a.repeats != b.repeats || a.pos_thresholds != b.pos_thresholds) {
    throw CategoryMismatch("suite reports are not comparable");
  }
  CompareReport rep;
  for (const auto& cat : grid_categories(a.grid)) rep.categories.push_back(cat.index);
  for (std::size_t t = 0; t < a.pos_thresholds.size(); ++t) {
    std::ostringstream label;
    label << a.pos_thresholds[t];
    rep.threshold_labels.push_back(label.str());
  }
  rep.threshold_labels.push_back("fine");
  rep.step_ratios.assign(rep.threshold_labels.size(), {});
  for (std::size_t t = 0; t < rep.threshold_labels.size(); ++t) {
    const int ti = t < a.pos_thresholds.size() ? static_cast<int>(t) : -1;
    for (const int cat : rep.categories) {
      const auto sa = category_threshold_stats(a, cat, ti);
      const auto sb = category_threshold_stats(b, cat, ti);
      const double ratio = (sa.median_steps > 0.0 && sb.median_steps >= 0.0)
                               ? sb.median_steps / sa.median_steps
                               : std::nan("");
      rep.step_ratios[t].push_back(ratio);
    }
  }
  for (const int cat : rep.categories) {
    const double ta = category_travel_median(a, cat);
    const double tb = category_travel_median(b, cat);
    rep.travel_ratios.push_back(ta > 0.0 ? tb / ta : std::nan(""));
  }
  return rep;
}

std::string compare_report_json(const CompareReport& rep) {
  json j;
  j["schema"] = "pushlab.compare_report/1";
  j["categories"] = rep.categories;
  json ratios;
  for (std::size_t t = 0; t < rep.threshold_labels.size(); ++t) {
    json row = json::array();
    for (const double r : rep.step_ratios[t]) {
      row.push_back(std::isnan(r) ? json(nullptr) : json(r));
    }
    ratios[rep.threshold_labels[t]] = row;
  }
  j["step_ratios"] = ratios;
  json travel = json::array();
  for (const double r : rep.travel_ratios) {
    travel.push_back(std::isnan(r) ? json(nullptr) : json(r));
  }
  j["travel_ratios"] = travel;
  return j.dump(2);
}

// --- trajectory following ----------------------------------------------------------

std::vector<PlanarPose> circle_waypoints(double radius, double spacing) {
  const int k = std::max(8, static_cast<int>(std::ceil(2.0 * kPi * radius / spacing)));
  std::vector<PlanarPose> wps;
  wps.reserve(k);
  const Vec2 center{0.0, radius};
  for (int i = 1; i <= k; ++i) {
    const double phi = 2.0 * kPi * static_cast<double>(i) / k;
    const Vec2 p = center + radius * Vec2{std::sin(phi), -std::cos(phi)};
    wps.emplace_back(p.x, p.y, phi);
  }
  return wps;
}

std::vector<PlanarPose> ell_waypoints(double side, double spacing) {
  std::vector<PlanarPose> wps;
  const int k1 = std::max(1, static_cast<int>(std::ceil(side / spacing)));
  for (int i = 1; i <= k1; ++i) {
    wps.emplace_back(side * static_cast<double>(i) / k1, 0.0, 0.0);
  }
  for (int i = 1; i <= k1; ++i) {
    wps.emplace_back(side, side * static_cast<double>(i) / k1, kPi / 2.0);
  }
  return wps;
}

namespace {

double path_error(TrajShape shape, double size, const Vec2& p) {
  if (shape == TrajShape::circle) {
    const Vec2 center{0.0, size};
    return std::fabs((p - center).norm() - size);
  }
  const double d1 = geom::point_segment_distance(p, {0.0, 0.0}, {size, 0.0});
  const double d2 = geom::point_segment_distance(p, {size, 0.0}, {size, size});
  return std::min(d1, d2);
}

}  // namespace

TrajReport run_trajectory_suite(const dyn::Predictor& model, const TrajConfig& cfg) {
  struct CaseSpec {
    TrajShape shape;
    double size;
    double w_theta;
    int repeat;
  };
  std::vector<CaseSpec> specs;
  for (const double r : cfg.circle_radii) {
    for (const double wt : cfg.w_thetas) {
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        specs.push_back({TrajShape::circle, r, wt, rep});
      }
    }
  }
  for (const double s : cfg.ell_sides) {
    for (const double wt : cfg.w_thetas) {
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        specs.push_back({TrajShape::ell, s, wt, rep});
      }
    }
  }

  TrajReport report;
  report.waypoint_spacing = cfg.waypoint_spacing;
  report.master_seed = cfg.master_seed;
  report.cases.resize(specs.size());

  parallel_for(specs.size(), [&](std::size_t i) {
    const auto& spec = specs[i];
    tasks::TaskSpec task;
    task.kind = tasks::TaskKind::trajectory;
    task.w_theta.base = spec.w_theta;
    task.waypoints = spec.shape == TrajShape::circle
                         ? circle_waypoints(spec.size, cfg.waypoint_spacing)
                         : ell_waypoints(spec.size, cfg.waypoint_spacing);
    const int max_steps = 60 + 5 * static_cast<int>(task.waypoints.size());

    const auto seed = derive_seed(cfg.master_seed, i, 0x7a11);
    Rng prng(derive_seed(cfg.master_seed, i, 0xbead));
    sim::WorldState st;
    st.object_pose = PlanarPose(0.0, 0.0, 0.0);
    st.params = sim::sample_object_params(prng);
    st.pusher_pos = to_world_frame(
        st.object_pose,
        ObjectFramePoint(-(st.params.half_length() + cfg.controller.perimeter_margin +
                           cfg.controller.sim_cfg.pusher_radius),
                         0.0));

    const auto t0 = std::chrono::steady_clock::now();
    const auto trace =
        ctrl::run_episode(model, st, task, cfg.controller, max_steps, seed);
    const auto t1 = std::chrono::steady_clock::now();

    TrajCase out;
    out.shape = spec.shape;
    out.size = spec.size;
    out.w_theta = spec.w_theta;
    out.repeat = spec.repeat;
    out.success = trace.final_status == tasks::Status::success;
    out.steps = static_cast<int>(trace.steps.size());
    double err_acc = 0.0, len_acc = 0.0;
    for (const auto& s : trace.steps) {
      err_acc += path_error(spec.shape, spec.size, s.pose_after.position());
      len_acc += s.action.d_ro.norm();
      out.realized.push_back(s.pose_after.position());
    }
    if (!trace.steps.empty()) {
      out.mean_path_err = err_acc / static_cast<double>(trace.steps.size());
      out.mean_push_len = len_acc / static_cast<double>(trace.steps.size());
    }
    for (const auto& w : task.waypoints) out.desired.push_back(w.position());
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    report.cases[i] = std::move(out);
  });
  return report;
}

std::string traj_report_json(const TrajReport& rep, bool include_timing) {
  json j;
  j["schema"] = "pushlab.traj_report/1";
  j["waypoint_spacing"] = rep.waypoint_spacing;
  j["master_seed"] = rep.master_seed;
  j["path_error_metric"] = "mean distance of post-push object positions to the analytic path";
  json cases = json::array();
  for (const auto& c : rep.cases) {
    json jc{{"shape", c.shape == TrajShape::circle ? "circle" : "L"},
            {"size", c.size},
            {"w_theta", c.w_theta},
            {"repeat", c.repeat},
            {"success", c.success},
            {"mean_path_err", c.mean_path_err},
            {"mean_push_len", c.mean_push_len},
            {"steps", c.steps}};
    if (include_timing) jc["wall_seconds"] = c.wall_seconds;
    cases.push_back(jc);
  }
  j["cases"] = cases;
  return j.dump(2);
}

// --- obstacle avoidance -------------------------------------------------------------

std::vector<ObstacleCase> default_obstacle_cases() {
  std::vector<ObstacleCase> cases;
  auto make_task = [](std::vector<tasks::Obstacle> obstacles) {
    tasks::TaskSpec t;
    t.kind = tasks::TaskKind::obstacle;
    t.target = PlanarPose(0.28, 0.0, 0.0);
    t.w_theta.gated = true;
    t.w_theta.inside = 0.3;
    t.w_theta.gate_radius = 0.05;
    t.pos_threshold = 0.01;
    t.obstacles = std::move(obstacles);
    return t;
  };
  cases.push_back({"single_3cm_offset",
                   make_task({{PlanarPose(0.14, 0.075, 0.0), {0.015, 0.015}}}),
                   false});
  cases.push_back({"single_3cm_close",
                   make_task({{PlanarPose(0.14, 0.055, 0.0), {0.015, 0.015}}}),
                   false});
  cases.push_back({"single_5cm_offset",
                   make_task({{PlanarPose(0.14, 0.095, 0.0), {0.025, 0.025}}}),
                   false});
  cases.push_back({"corridor_wide",
                   make_task({{PlanarPose(0.14, 0.105, 0.0), {0.015, 0.015}},
                              {PlanarPose(0.14, -0.105, 0.0), {0.015, 0.015}}}),
                   false});
  // Gap of 8 cm between 5 cm obstacles: narrower than any object dimension,
  // would demand >60 degrees of rotation mid-corridor.
  cases.push_back({"narrow_gap_60deg",
                   make_task({{PlanarPose(0.14, 0.065, 0.0), {0.025, 0.025}},
                              {PlanarPose(0.14, -0.065, 0.0), {0.025, 0.025}}}),
                   true});
  return cases;
}

ObstacleReport run_obstacle_suite(const dyn::Predictor& model, const ObstacleSuiteConfig& cfg) {
  ObstacleReport rep;
  rep.master_seed = cfg.master_seed;
  for (const auto& c : cfg.cases) {
    rep.case_names.push_back(c.name);
    rep.expected_failure.push_back(c.expected_failure);
  }
  const std::size_t total = cfg.cases.size() * static_cast<std::size_t>(cfg.repeats);
  rep.episodes.resize(total);
  parallel_for(total, [&](std::size_t i) {
    const int case_index = static_cast<int>(i) / cfg.repeats;
    const int repeat = static_cast<int>(i) % cfg.repeats;
    const auto& task = cfg.cases[case_index].task;

    Rng prng(derive_seed(cfg.master_seed, i, 0x0b57));
    sim::WorldState st;
    st.object_pose = PlanarPose(0.0, 0.0, 0.0);
    st.params = sim::sample_object_params(prng);
    st.pusher_pos = to_world_frame(
        st.object_pose,
        ObjectFramePoint(-(st.params.half_length() + cfg.controller.perimeter_margin +
                           cfg.controller.sim_cfg.pusher_radius),
                         0.0));

    const auto t0 = std::chrono::steady_clock::now();
    const auto trace = ctrl::run_episode(model, st, task, cfg.controller, cfg.max_steps,
                                         derive_seed(cfg.master_seed, i, 0x0b5e));
    const auto t1 = std::chrono::steady_clock::now();

    ObstacleEpisode ep;
    ep.case_index = case_index;
    ep.repeat = repeat;
    ep.min_clearance = trace.min_clearance;
    ep.collided = !std::isnan(trace.min_clearance) && trace.min_clearance < 0.0;
    ep.success = trace.final_status == tasks::Status::success && !ep.collided;
    ep.steps = static_cast<int>(trace.steps.size());
    ep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.episodes[i] = ep;
  });
  return rep;
}

std::string obstacle_report_json(const ObstacleReport& rep, bool include_timing) {
  json j;
  j["schema"] = "pushlab.obstacle_report/1";
  j["master_seed"] = rep.master_seed;
  json cases = json::array();
  for (std::size_t c = 0; c < rep.case_names.size(); ++c) {
    int n = 0, ok = 0, collisions = 0;
    double min_clear = std::numeric_limits<double>::infinity();
    json eps = json::array();
    for (const auto& e : rep.episodes) {
      if (e.case_index != static_cast<int>(c)) continue;
      ++n;
      ok += e.success ? 1 : 0;
      collisions += e.collided ? 1 : 0;
      min_clear = std::min(min_clear, e.min_clearance);
      json je{{"repeat", e.repeat},
              {"success", e.success},
              {"collided", e.collided},
              {"min_clearance", e.min_clearance},
              {"steps", e.steps}};
      if (include_timing) je["wall_seconds"] = e.wall_seconds;
      eps.push_back(je);
    }
    cases.push_back({{"name", rep.case_names[c]},
                     {"expected_failure", static_cast<bool>(rep.expected_failure[c])},
                     {"success_rate", n > 0 ? static_cast<double>(ok) / n : 0.0},
                     {"collisions", collisions},
                     {"min_clearance", min_clear},
                     {"episodes", eps}});
  }
  j["cases"] = cases;
  return j.dump(2);
}

// --- plots ------------------------------------------------------------------------

void emit_suite_plots(const SuiteReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto cats = grid_categories(rep.grid);
  for (std::size_t t = 0; t <= rep.pos_thresholds.size(); ++t) {
    const bool fine = t == rep.pos_thresholds.size();
    const int ti = fine ? -1 : static_cast<int>(t);
    std::vector<svg::BarGroup> groups;
    for (const auto& cat : cats) {
      const auto st = category_threshold_stats(rep, cat.index, ti);
      svg::BarGroup g;
      g.label = "C" + std::to_string(cat.index);
      g.values.push_back(st.median_steps >= 0.0 ? st.median_steps : std::nan(""));
      groups.push_back(g);
    }
    std::ostringstream name, title;
    if (fine) {
      name << out_dir << "/steps_to_fine.svg";
      title << "median steps to " << rep.fine_pos * 1000.0 << " mm + " << rep.fine_yaw_deg
            << " deg (" << rep.mode << ", " << rep.objective << ")";
    } else {
      name << out_dir << "/steps_to_" << rep.pos_thresholds[t] << ".svg";
      title << "median steps to " << rep.pos_thresholds[t] * 100.0 << " cm (" << rep.mode
            << ", " << rep.objective << ")";
    }
    svg::bar_chart(name.str(), title.str(), {"median steps"}, groups, "steps");
  }
  std::vector<svg::BarGroup> travel;
  for (const auto& cat : cats) {
    svg::BarGroup g;
    g.label = "C" + std::to_string(cat.index);
    g.values.push_back(category_travel_median(rep, cat.index));
    travel.push_back(g);
  }
  svg::bar_chart(out_dir + "/travel_median.svg",
                 "median robot travel (" + rep.mode + ", " + rep.objective + ")",
                 {"travel [m]"}, travel, "meters");
}

void emit_compare_plots(const CompareReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (std::size_t t = 0; t < rep.threshold_labels.size(); ++t) {
    std::vector<svg::BarGroup> groups;
    for (std::size_t c = 0; c < rep.categories.size(); ++c) {
      svg::BarGroup g;
      g.label = "C" + std::to_string(rep.categories[c]);
      g.values.push_back(rep.step_ratios[t][c]);
      groups.push_back(g);
    }
    svg::bar_chart(out_dir + "/ratio_steps_" + rep.threshold_labels[t] + ".svg",
                   "median-step ratio at " + rep.threshold_labels[t], {"improved / basic"},
                   groups, "ratio");
  }
  std::vector<svg::BarGroup> travel;
  for (std::size_t c = 0; c < rep.categories.size(); ++c) {
    svg::BarGroup g;
    g.label = "C" + std::to_string(rep.categories[c]);
    g.values.push_back(rep.travel_ratios[c]);
    travel.push_back(g);
  }
  svg::bar_chart(out_dir + "/ratio_travel.svg", "travel ratio", {"improved / basic"}, travel,
                 "ratio");
}

void emit_traj_plots(const TrajReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& c : rep.cases) {
    if (c.repeat != 0) continue;
    std::ostringstream name, title;
    const char* shape = c.shape == TrajShape::circle ? "circle" : "L";
    name << out_dir << "/traj_" << shape << "_" << c.size << "_wt" << c.w_theta << ".svg";
    title << shape << " " << c.size << " m, w_theta " << c.w_theta << ", mean err "
          << c.mean_path_err * 1000.0 << " mm";
    svg::trajectory_overlay(name.str(), title.str(), c.desired, c.realized);
  }
}

}  // namespace pushlab::bench
