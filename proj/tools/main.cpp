#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pushlab/bench.hpp"
#include "pushlab/ctrl.hpp"
#include "pushlab/data.hpp"
#include "pushlab/dyn.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace pushlab;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return j;
}

ctrl::ControllerConfig controller_from_json(const json& j) {
  return ctrl::ControllerConfig::from_json_string(j.dump());
}

int cmd_gen_data(const std::string& out, int episodes, int pushes, double mag_min,
                 double mag_max, double cone_deg, std::uint64_t seed) {
  data::DataConfig cfg;
  cfg.episodes = episodes;
  cfg.pushes_per_episode = pushes;
  cfg.mag_min = mag_min;
  cfg.mag_max = mag_max;
  cfg.cone_total_deg = cone_deg;
  cfg.master_seed = seed;
  std::cerr << "generating " << episodes << " episodes x " << pushes << " pushes...\n";
  const auto ds = data::generate_dataset(cfg);
  data::validate_dataset(ds);
  data::save_dataset(ds, out);
  std::cerr << "wrote " << ds.record_count() << " records to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, int w, int epochs, std::uint64_t seed,
              const std::string& out, const std::string& arch, int batch, double lr) {
  const auto ds = data::load_dataset(data_path);
  dyn::TrainConfig cfg;
  cfg.arch = dyn::arch_from_name(arch);
  cfg.w = w;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.batch = batch;
  cfg.base_lr = lr;
  std::cerr << "training " << arch << " on " << ds.record_count() << " records (w=" << w
            << ", epochs=" << epochs << ")\n";
  const auto result = dyn::train(ds, cfg);
  result.model.save(out);
  json log;
  log["best_trans_epoch"] = result.log.best_trans_epoch;
  log["best_rot_epoch"] = result.log.best_rot_epoch;
  json epochs_j = json::array();
  for (const auto& e : result.log.epochs) {
    epochs_j.push_back({{"train_trans", e.train_trans},
                        {"train_rot", e.train_rot},
                        {"val_trans", e.val_trans},
                        {"val_rot", e.val_rot},
                        {"lr", e.lr}});
  }
  log["epochs"] = epochs_j;
  std::ofstream(out + ".log.json") << log.dump(2) << "\n";
  std::cerr << "saved checkpoint to " << out << "\n";
  return 0;
}

int cmd_eval_model(const std::string& ckpt, const std::string& data_path,
                   const std::string& subset) {
  const auto model = dyn::DualModel::load(ckpt);
  const auto ds = data::load_dataset(data_path);
  dyn::Subset sub = dyn::Subset::all;
  if (subset == "small") sub = dyn::Subset::small;
  if (subset == "big") sub = dyn::Subset::big;
  const auto rep = dyn::evaluate(model, ds, data::Split::test, sub, model.window_len());
  std::cout << dyn::eval_report_json(rep) << "\n";
  std::cerr << "position " << rep.pos_mean * 1000.0 << " mm (" << rep.pos_std * 1000.0
            << "), orientation " << rep.ang_mean << " rad (" << rep.ang_std << "), n=" << rep.count
            << "\n";
  return 0;
}

int cmd_run_episode(const std::string& task_path, const std::string& mode,
                    const std::string& config_path, const std::string& ckpt,
                    std::uint64_t seed, const std::string& trace_out, int max_steps) {
  auto task = tasks::TaskSpec::from_json_file(task_path);
  ctrl::ControllerConfig cfg;
  std::string checkpoint = ckpt;
  if (!config_path.empty()) {
    const json j = read_json_file(config_path);
    cfg = controller_from_json(j);
    if (checkpoint.empty() && j.contains("checkpoint")) checkpoint = j.at("checkpoint");
  }
  cfg.mode = ctrl::mode_from_name(mode);
  if (checkpoint.empty()) throw std::runtime_error("no checkpoint given (flag or config)");
  const auto model = dyn::DualModel::load(checkpoint);

  Rng prng(derive_seed(seed, 0x171a7));
  sim::WorldState st;
  st.object_pose = PlanarPose(0.0, 0.0, 0.0);
  st.params = sim::sample_object_params(prng);
  st.pusher_pos = to_world_frame(
      st.object_pose, ObjectFramePoint(st.params.half_length() + cfg.perimeter_margin +
                                           cfg.sim_cfg.pusher_radius,
                                       0.0));
  const auto trace = ctrl::run_episode(model, st, task, cfg, max_steps, seed);
  if (!trace_out.empty()) ctrl::save_trace_jsonl(trace, trace_out);
  std::cerr << (trace.final_status == tasks::Status::success ? "success" : "exhausted") << " in "
            << trace.steps.size() << " steps, travel " << trace.total_travel << " m\n";
  return trace.final_status == tasks::Status::success ? 0 : 2;
}

bench::SuiteConfig suite_config_from_json(const json& j) {
  bench::SuiteConfig cfg;
  if (j.contains("grid")) cfg.grid = bench::grid_from_name(j.at("grid"));
  if (j.contains("cases_per_category")) cfg.cases_per_category = j.at("cases_per_category");
  if (j.contains("repeats")) cfg.repeats = j.at("repeats");
  if (j.contains("stop"))
    cfg.stop_pos = j.at("stop").value("position", cfg.stop_pos);
  if (j.contains("stop") && j.at("stop").contains("orientation_deg"))
    cfg.stop_yaw_deg = j.at("stop").at("orientation_deg");
  if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps");
  if (j.contains("objective")) cfg.objective = tasks::task_kind_from_name(j.at("objective"));
  if (j.contains("w_theta")) cfg.w_theta = j.at("w_theta");
  if (j.contains("seed")) cfg.master_seed = j.at("seed");
  if (j.contains("controller")) cfg.controller = controller_from_json(j.at("controller"));
  return cfg;
}

int cmd_run_suite(const std::string& config_path, const std::string& out_prefix) {
  const json j = read_json_file(config_path);
  const auto cfg = suite_config_from_json(j);
  const auto model = dyn::DualModel::load(j.at("checkpoint"));
  const auto rep = bench::run_suite(model, cfg);
  bench::save_suite_report(rep, out_prefix + ".json");
  bench::save_suite_csv(rep, out_prefix + ".csv");
  const auto s1 = bench::overall_threshold_stats(rep, static_cast<int>(rep.pos_thresholds.size()) - 1);
  std::cerr << "suite done: " << rep.episodes.size() << " episodes, success@"
            << rep.pos_thresholds.back() << " = " << s1.success_rate
            << ", median steps = " << s1.median_steps << "\n";
  return 0;
}

int cmd_run_traj(const std::string& config_path, const std::string& out_prefix) {
  const json j = read_json_file(config_path);
  bench::TrajConfig cfg;
  cfg.controller.mode = ctrl::Mode::basic;
  cfg.controller.n_samples = 100;
  cfg.controller.horizon = 1;
  if (j.contains("circle_radii")) cfg.circle_radii = j.at("circle_radii").get<std::vector<double>>();
  if (j.contains("ell_sides")) cfg.ell_sides = j.at("ell_sides").get<std::vector<double>>();
  if (j.contains("w_thetas")) cfg.w_thetas = j.at("w_thetas").get<std::vector<double>>();
  if (j.contains("waypoint_spacing")) cfg.waypoint_spacing = j.at("waypoint_spacing");
  if (j.contains("repeats")) cfg.repeats = j.at("repeats");
  if (j.contains("seed")) cfg.master_seed = j.at("seed");
  if (j.contains("controller")) cfg.controller = controller_from_json(j.at("controller"));
  const auto model = dyn::DualModel::load(j.at("checkpoint"));
  const auto rep = bench::run_trajectory_suite(model, cfg);
  std::ofstream(out_prefix + ".json") << bench::traj_report_json(rep, true) << "\n";
  bench::emit_traj_plots(rep, out_prefix + "_plots");
  for (const auto& c : rep.cases) {
    std::cerr << (c.shape == bench::TrajShape::circle ? "circle" : "L") << " " << c.size
              << " wt=" << c.w_theta << ": err " << c.mean_path_err * 1000.0 << " mm, push "
              << c.mean_push_len * 100.0 << " cm, " << c.steps << " steps\n";
  }
  return 0;
}

int cmd_run_obstacles(const std::string& config_path, const std::string& out_prefix) {
  bench::ObstacleSuiteConfig cfg;
  cfg.controller.mode = ctrl::Mode::basic;
  cfg.controller.n_samples = 100;
  cfg.controller.horizon = 5;
  std::string checkpoint;
  if (!config_path.empty()) {
    const json j = read_json_file(config_path);
    checkpoint = j.at("checkpoint");
    if (j.contains("repeats")) cfg.repeats = j.at("repeats");
    if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps");
    if (j.contains("seed")) cfg.master_seed = j.at("seed");
    if (j.contains("controller")) cfg.controller = controller_from_json(j.at("controller"));
    if (j.contains("tasks")) {
      const auto base = std::filesystem::path(config_path).parent_path();
      for (const auto& t : j.at("tasks")) {
        bench::ObstacleCase c;
        c.name = t.at("name");
        c.task = tasks::TaskSpec::from_json_file((base / t.at("path").get<std::string>()).string());
        c.expected_failure = t.value("expected_failure", false);
        cfg.cases.push_back(c);
      }
    }
  }
  if (cfg.cases.empty()) cfg.cases = bench::default_obstacle_cases();
  const auto model = dyn::DualModel::load(checkpoint);
  const auto rep = bench::run_obstacle_suite(model, cfg);
  std::ofstream(out_prefix + ".json") << bench::obstacle_report_json(rep, true) << "\n";
  std::cerr << bench::obstacle_report_json(rep, false) << "\n";
  return 0;
}

int cmd_compare(const std::string& basic_path, const std::string& improved_path,
                const std::string& out_path) {
  const auto a = bench::load_suite_report(basic_path);
  const auto b = bench::load_suite_report(improved_path);
  const auto rep = bench::compare_controllers(a, b);
  const std::string js = bench::compare_report_json(rep);
  if (!out_path.empty()) std::ofstream(out_path) << js << "\n";
  std::cout << js << "\n";
  return 0;
}

int cmd_plot(const std::string& report_path, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open report: " + report_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str());
  const std::string schema = j.at("schema");
  if (schema == "pushlab.suite_report/1") {
    bench::emit_suite_plots(bench::suite_report_from_json(ss.str()), out_dir);
  } else if (schema == "pushlab.compare_report/1") {
    bench::CompareReport rep;
    rep.categories = j.at("categories").get<std::vector<int>>();
    for (const auto& [label, row] : j.at("step_ratios").items()) {
      rep.threshold_labels.push_back(label);
      std::vector<double> r;
      for (const auto& v : row) r.push_back(v.is_null() ? std::nan("") : v.get<double>());
      rep.step_ratios.push_back(r);
    }
    for (const auto& v : j.at("travel_ratios")) {
      rep.travel_ratios.push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
    bench::emit_compare_plots(rep, out_dir);
  } else {
    throw std::runtime_error("no plot renderer for schema " + schema);
  }
  std::cerr << "plots written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar-pushing lab: data generation, model training, MPPI control, benchmarks"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a push-interaction dataset");
  int episodes = 1000, pushes = 100;
  double mag_min = 0.002, mag_max = 0.03, cone_deg = 90.0;
  std::uint64_t seed = 1;
  std::string out = "dataset.jsonl";
  gen->add_option("--episodes", episodes);
  gen->add_option("--pushes", pushes);
  gen->add_option("--mag-min", mag_min);
  gen->add_option("--mag-max", mag_max);
  gen->add_option("--cone-degrees", cone_deg, "total aperture of the direction cone");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out);

  // train
  auto* tr = app.add_subcommand("train", "train the dual push-dynamics models");
  std::string data_path, ckpt_out = "model.ckpt", arch = "gru";
  int w = 4, epochs = 40, batch = 256;
  double lr = 1e-3;
  std::uint64_t train_seed = 0;
  tr->add_option("--data", data_path)->required();
  tr->add_option("--w", w);
  tr->add_option("--epochs", epochs);
  tr->add_option("--seed", train_seed);
  tr->add_option("--out", ckpt_out);
  tr->add_option("--arch", arch, "gru | no_history | lstm");
  tr->add_option("--batch", batch);
  tr->add_option("--lr", lr);

  // eval-model
  auto* ev = app.add_subcommand("eval-model", "one-step test-set evaluation");
  std::string eval_ckpt, eval_data, subset = "big";
  ev->add_option("--checkpoint", eval_ckpt)->required();
  ev->add_option("--data", eval_data)->required();
  ev->add_option("--subset", subset, "small | big | all");

  // run-episode
  auto* re = app.add_subcommand("run-episode", "run one controlled episode");
  std::string task_path, mode = "basic", ctrl_cfg_path, re_ckpt, trace_out;
  std::uint64_t ep_seed = 0;
  int max_steps = 60;
  re->add_option("--task", task_path)->required();
  re->add_option("--mode", mode, "basic | improved");
  re->add_option("--config", ctrl_cfg_path);
  re->add_option("--checkpoint", re_ckpt);
  re->add_option("--seed", ep_seed);
  re->add_option("--trace-out", trace_out);
  re->add_option("--max-steps", max_steps);

  // run-suite / run-traj / run-obstacles / compare / plot
  auto* rs = app.add_subcommand("run-suite", "run a posing experiment grid");
  std::string suite_cfg, suite_out = "suite";
  rs->add_option("--config", suite_cfg)->required();
  rs->add_option("--out", suite_out);

  auto* rt = app.add_subcommand("run-traj", "run the trajectory-following suite");
  std::string traj_cfg, traj_out = "traj";
  rt->add_option("--config", traj_cfg)->required();
  rt->add_option("--out", traj_out);

  auto* ro = app.add_subcommand("run-obstacles", "run the obstacle-avoidance suite");
  std::string obst_cfg, obst_out = "obstacles";
  ro->add_option("--config", obst_cfg)->required();
  ro->add_option("--out", obst_out);

  auto* cp = app.add_subcommand("compare", "compare two suite reports");
  std::string basic_rep, improved_rep, cmp_out;
  cp->add_option("--basic", basic_rep)->required();
  cp->add_option("--improved", improved_rep)->required();
  cp->add_option("--out", cmp_out);

  auto* pl = app.add_subcommand("plot", "render SVG figures from a report");
  std::string plot_report, plot_dir = "plots";
  pl->add_option("--report", plot_report)->required();
  pl->add_option("--out-dir", plot_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(out, episodes, pushes, mag_min, mag_max, cone_deg, seed);
    if (tr->parsed())
      return cmd_train(data_path, w, epochs, train_seed, ckpt_out, arch, batch, lr);
    if (ev->parsed()) return cmd_eval_model(eval_ckpt, eval_data, subset);
    if (re->parsed())
      return cmd_run_episode(task_path, mode, ctrl_cfg_path, re_ckpt, ep_seed, trace_out,
                             max_steps);
    if (rs->parsed()) return cmd_run_suite(suite_cfg, suite_out);
    if (rt->parsed()) return cmd_run_traj(traj_cfg, traj_out);
    if (ro->parsed()) return cmd_run_obstacles(obst_cfg, obst_out);
    if (cp->parsed()) return cmd_compare(basic_rep, improved_rep, cmp_out);
    if (pl->parsed()) return cmd_plot(plot_report, plot_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
