#include "pushlab/data.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pushlab/parallel.hpp"

namespace pushlab::data {

using json = nlohmann::ordered_json;

const char* split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    default:
      return "test";
  }
}

static Split split_from_name(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::runtime_error("unknown split label: " + s);
}

std::size_t Dataset::record_count() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.records.size();
  return n;
}

Episode generate_episode_at(const PlanarPose& initial_pose, int episode_index,
                            const DataConfig& cfg, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  Episode ep;
  ep.episode_id = episode_index;
  ep.params = sim::sample_object_params(rng, cfg.randomization);

  sim::WorldState state;
  state.object_pose = initial_pose;
  state.pusher_pos = {1.0e3, 1.0e3};
  state.params = ep.params;

  const double inflation = cfg.perimeter_margin + cfg.sim_cfg.pusher_radius;
  const double px = ep.params.half_length() + inflation;
  const double py = ep.params.half_width() + inflation;
  const double half_cone = 0.5 * deg2rad(cfg.cone_total_deg);

  ep.records.reserve(cfg.pushes_per_episode);
  for (int k = 0; k < cfg.pushes_per_episode; ++k) {
    const auto per = geom::rect_perimeter_point(px, py, rng.uniform01());
    const double base = std::atan2(per.inward_normal.y, per.inward_normal.x);
    const double ang = base + rng.uniform(-half_cone, half_cone);
    const double mag = rng.uniform(cfg.mag_min, cfg.mag_max);
    const ObjectFramePoint ro(per.point);
    const ObjectFramePoint d_ro(mag * std::cos(ang), mag * std::sin(ang));

    const auto res = sim::execute_push(state, ro, d_ro, cfg.sim_cfg);
    ep.records.push_back({res.motion, ro, d_ro, episode_index, k});
    state = res.state;
  }
  return ep;
}

Episode generate_episode(int episode_index, const DataConfig& cfg, std::uint64_t rng_seed) {
  const PlanarPose initial(0.0, 0.0, deg2rad(episode_index % 360));
  return generate_episode_at(initial, episode_index, cfg, rng_seed);
}

Dataset generate_dataset(const DataConfig& cfg) {
  Dataset ds;
  ds.cfg = cfg;
  ds.episodes.resize(cfg.episodes);
  parallel_for(static_cast<std::size_t>(cfg.episodes), [&](std::size_t i) {
    const auto seed = derive_seed(cfg.master_seed, i);
    ds.episodes[i] = generate_episode(static_cast<int>(i), cfg, seed);
  });

  // Split assignment by episode, seeded shuffle.
  std::vector<int> ids(cfg.episodes);
  for (int i = 0; i < cfg.episodes; ++i) ids[i] = i;
  Rng split_rng(derive_seed(cfg.master_seed, 0x51175ULL, 1));
  split_rng.shuffle(ids);
  const auto n = static_cast<std::size_t>(cfg.episodes);
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_frac * n));
  const auto n_val = static_cast<std::size_t>(std::llround(cfg.val_frac * n));
  for (std::size_t i = 0; i < n; ++i) {
    const Split s = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
    ds.episodes[ids[i]].split = s;
  }
  return ds;
}

std::vector<WindowSample> make_windows(const Dataset& ds, int w, bool padded) {
  if (w < 1) throw std::invalid_argument("window length must be >= 1");
  std::vector<WindowSample> out;
  for (const auto& ep : ds.episodes) {
    const int n = static_cast<int>(ep.records.size());
    const int t_begin = padded ? 0 : w;
    for (int t = t_begin; t < n; ++t) {
      WindowSample ws;
      ws.split = ep.split;
      ws.episode_id = ep.episode_id;
      ws.window.triples.reserve(w);
      for (int k = t - w + 1; k <= t; ++k) {
        Triple tr;
        if (k >= 0) {
          tr.d_obj = k >= 1 ? ep.records[k - 1].d_obj : PlanarMotion{};
          tr.ro = ep.records[k].ro;
          tr.d_ro = ep.records[k].d_ro;
        }
        ws.window.triples.push_back(tr);
      }
      ws.target = ep.records[t].d_obj;
      ws.current_mag = ep.records[t].d_ro.norm();
      out.push_back(std::move(ws));
    }
  }
  return out;
}

namespace {

json params_to_json(const sim::ObjectParams& p) {
  return json{{"friction", p.friction}, {"restitution", p.restitution}, {"length", p.length},
              {"width", p.width},       {"mass", p.mass},
              {"com", json::array({p.com_offset.x, p.com_offset.y})}};
}

sim::ObjectParams params_from_json(const json& j) {
  sim::ObjectParams p;
  p.friction = j.at("friction");
  p.restitution = j.at("restitution");
  p.length = j.at("length");
  p.width = j.at("width");
  p.mass = j.at("mass");
  p.com_offset = {j.at("com")[0], j.at("com")[1]};
  return p;
}

json config_to_json(const DataConfig& c) {
  return json{
      {"episodes", c.episodes},
      {"pushes_per_episode", c.pushes_per_episode},
      {"mag_min", c.mag_min},
      {"mag_max", c.mag_max},
      {"cone_total_deg", c.cone_total_deg},
      {"perimeter_margin", c.perimeter_margin},
      {"master_seed", c.master_seed},
      {"train_frac", c.train_frac},
      {"val_frac", c.val_frac},
      {"small_big_split", c.small_big_split},
      {"sim",
       {{"pusher_radius", c.sim_cfg.pusher_radius},
        {"contact_tol", c.sim_cfg.contact_tol},
        {"substep", c.sim_cfg.substep},
        {"friction_wiring",
         c.sim_cfg.friction_wiring == sim::FrictionWiring::kPusherObject ? "pusher_object"
                                                                         : "surface_only"},
        {"fixed_pusher_friction", c.sim_cfg.fixed_pusher_friction}}},
      {"randomization",
       {{"friction", json::array({c.randomization.friction_min, c.randomization.friction_max})},
        {"restitution",
         json::array({c.randomization.restitution_min, c.randomization.restitution_max})},
        {"length", json::array({c.randomization.length_min, c.randomization.length_max})},
        {"width", json::array({c.randomization.width_min, c.randomization.width_max})},
        {"mass", json::array({c.randomization.mass_min, c.randomization.mass_max})},
        {"com_frac", c.randomization.com_frac}}},
  };
}

DataConfig config_from_json(const json& j) {
  DataConfig c;
  c.episodes = j.at("episodes");
  c.pushes_per_episode = j.at("pushes_per_episode");
  c.mag_min = j.at("mag_min");
  c.mag_max = j.at("mag_max");
  c.cone_total_deg = j.at("cone_total_deg");
  c.perimeter_margin = j.at("perimeter_margin");
  c.master_seed = j.at("master_seed");
  c.train_frac = j.at("train_frac");
  c.val_frac = j.at("val_frac");
  c.small_big_split = j.at("small_big_split");
  const auto& s = j.at("sim");
  c.sim_cfg.pusher_radius = s.at("pusher_radius");
  c.sim_cfg.contact_tol = s.at("contact_tol");
  c.sim_cfg.substep = s.at("substep");
  c.sim_cfg.friction_wiring = s.at("friction_wiring") == "surface_only"
                                  ? sim::FrictionWiring::kSurfaceOnly
                                  : sim::FrictionWiring::kPusherObject;
  c.sim_cfg.fixed_pusher_friction = s.at("fixed_pusher_friction");
  const auto& r = j.at("randomization");
  c.randomization.friction_min = r.at("friction")[0];
  c.randomization.friction_max = r.at("friction")[1];
  c.randomization.restitution_min = r.at("restitution")[0];
  c.randomization.restitution_max = r.at("restitution")[1];
  c.randomization.length_min = r.at("length")[0];
  c.randomization.length_max = r.at("length")[1];
  c.randomization.width_min = r.at("width")[0];
  c.randomization.width_max = r.at("width")[1];
  c.randomization.mass_min = r.at("mass")[0];
  c.randomization.mass_max = r.at("mass")[1];
  c.randomization.com_frac = r.at("com_frac");
  return c;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  json header{{"schema", "pushlab.dataset/1"}, {"config", config_to_json(ds.cfg)}};
  out << header.dump() << "\n";
  for (const auto& ep : ds.episodes) {
    const json params = params_to_json(ep.params);
    for (const auto& r : ep.records) {
      json line{{"ep", r.episode_id},
                {"k", r.step_index},
                {"split", split_name(ep.split)},
                {"m", json::array({r.d_obj.dx, r.d_obj.dy, r.d_obj.dyaw})},
                {"ro", json::array({r.ro.u, r.ro.v})},
                {"dro", json::array({r.d_ro.u, r.d_ro.v})},
                {"params", params}};
      out << line.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  const json header = json::parse(line);
  if (header.at("schema") != "pushlab.dataset/1") {
    throw std::runtime_error("unsupported dataset schema");
  }
  Dataset ds;
  ds.cfg = config_from_json(header.at("config"));
  ds.episodes.reserve(ds.cfg.episodes);
  int current_ep = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const int ep_id = j.at("ep");
    if (ep_id != current_ep) {
      Episode ep;
      ep.episode_id = ep_id;
      ep.params = params_from_json(j.at("params"));
      ep.split = split_from_name(j.at("split"));
      ds.episodes.push_back(std::move(ep));
      current_ep = ep_id;
    }
    InteractionRecord r;
    r.episode_id = ep_id;
    r.step_index = j.at("k");
    r.d_obj = PlanarMotion(j.at("m")[0], j.at("m")[1], j.at("m")[2]);
    r.ro = ObjectFramePoint(j.at("ro")[0], j.at("ro")[1]);
    r.d_ro = ObjectFramePoint(j.at("dro")[0], j.at("dro")[1]);
    ds.episodes.back().records.push_back(r);
  }
  return ds;
}

void validate_dataset(const Dataset& ds) {
  const auto& cfg = ds.cfg;
  const double tol = 1e-9;
  const double half_cone = 0.5 * deg2rad(cfg.cone_total_deg) + 1e-9;
  std::vector<char> seen;
  for (const auto& ep : ds.episodes) {
    if (ep.episode_id >= static_cast<int>(seen.size())) seen.resize(ep.episode_id + 1, 0);
    if (seen[ep.episode_id]++) throw std::runtime_error("duplicate episode id");
    const double inflation = cfg.perimeter_margin + cfg.sim_cfg.pusher_radius;
    const double px = ep.params.half_length() + inflation;
    const double py = ep.params.half_width() + inflation;
    for (const auto& r : ep.records) {
      const double du = std::fabs(r.ro.u) - px;
      const double dv = std::fabs(r.ro.v) - py;
      if (std::fabs(std::max(du, dv)) > tol) {
        throw std::runtime_error("record ro is off the sampling perimeter");
      }
      const double mag = r.d_ro.norm();
      if (mag < cfg.mag_min - tol || mag > cfg.mag_max + tol) {
        throw std::runtime_error("push magnitude outside the configured range");
      }
      // inward normal(s) of the active face; corner samples may belong to
      // either adjacent face
      std::vector<Vec2> normals;
      if (du >= dv - tol) normals.push_back({r.ro.u > 0 ? -1.0 : 1.0, 0.0});
      if (dv >= du - tol) normals.push_back({0.0, r.ro.v > 0 ? -1.0 : 1.0});
      bool in_cone = false;
      for (const auto& n : normals) {
        const double cosang = r.d_ro.vec().dot(n) / mag;
        if (std::acos(std::min(1.0, std::max(-1.0, cosang))) <= half_cone) in_cone = true;
      }
      if (!in_cone) throw std::runtime_error("push direction outside the sampling cone");
    }
  }
}

}  // namespace pushlab::data
