#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pushlab/data.hpp"

using namespace pushlab;

namespace {

data::DataConfig tiny_config() {
  data::DataConfig cfg;
  cfg.episodes = 10;
  cfg.pushes_per_episode = 100;
  cfg.master_seed = 77;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("episode records are pose invariant (body frame only)") {
  data::DataConfig cfg = tiny_config();
  cfg.pushes_per_episode = 3;
  // episodes 0 and 1 start one degree apart; identical seeds leave the
  // body-frame records identical
  const auto e0 = data::generate_episode(0, cfg, 42);
  const auto e1 = data::generate_episode(1, cfg, 42);
  CHECK(e0.records.size() == 3);
  CHECK(e1.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(e0.records[i].d_obj.dx == e1.records[i].d_obj.dx);
    CHECK(e0.records[i].ro.u == e1.records[i].ro.u);
  }
  const auto ea = data::generate_episode_at(PlanarPose(0.4, -0.2, 1.3), 5, cfg, 42);
  const auto eb = data::generate_episode_at(PlanarPose(-1.0, 2.0, -2.1), 5, cfg, 42);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ea.records[i].d_obj.dx == eb.records[i].d_obj.dx);
    CHECK(ea.records[i].d_obj.dyaw == eb.records[i].d_obj.dyaw);
  }
}

TEST_CASE("episode magnitudes, perimeter and determinism") {
  data::DataConfig cfg = tiny_config();
  const auto ep = data::generate_episode(3, cfg, 99);
  CHECK(ep.records.size() == 100);
  const double inflation = cfg.perimeter_margin + cfg.sim_cfg.pusher_radius;
  const double px = ep.params.half_length() + inflation;
  const double py = ep.params.half_width() + inflation;
  for (const auto& r : ep.records) {
    const double mag = r.d_ro.norm();
    CHECK(mag >= cfg.mag_min);
    CHECK(mag <= cfg.mag_max);
    CHECK(std::fabs(geom::signed_point_rect_distance(px, py, r.ro.vec())) < 1e-9);
  }
  const auto ep2 = data::generate_episode(3, cfg, 99);
  for (std::size_t i = 0; i < ep.records.size(); ++i) {
    CHECK(ep.records[i].d_obj.dx == ep2.records[i].d_obj.dx);
    CHECK(ep.records[i].d_ro.u == ep2.records[i].d_ro.u);
  }
}

TEST_CASE("dataset: counts, splits, improved ranges") {
  data::DataConfig cfg = tiny_config();
  const auto ds = data::generate_dataset(cfg);
  CHECK(ds.record_count() == 1000);
  int train = 0, val = 0, test = 0;
  std::set<int> ids;
  for (const auto& e : ds.episodes) {
    CHECK(ids.insert(e.episode_id).second);
    if (e.split == data::Split::train) ++train;
    if (e.split == data::Split::val) ++val;
    if (e.split == data::Split::test) ++test;
  }
  CHECK(train == 7);
  CHECK(val == 2);
  CHECK(test == 1);
  data::validate_dataset(ds);

  data::DataConfig imp = data::DataConfig::improved();
  imp.episodes = 2;
  imp.pushes_per_episode = 50;
  const auto ds2 = data::generate_dataset(imp);
  for (const auto& e : ds2.episodes) {
    for (const auto& r : e.records) {
      const double mag = r.d_ro.norm();
      CHECK(mag >= 0.003);
      CHECK(mag <= 0.05);
    }
  }

  data::DataConfig other = tiny_config();
  other.master_seed = 78;
  const auto ds3 = data::generate_dataset(other);
  CHECK(ds3.record_count() == ds.record_count());
  CHECK(ds3.episodes[0].params.length != ds.episodes[0].params.length);
}

TEST_CASE("direction cone honored for both aperture modes") {
  for (const double cone : {90.0, 45.0}) {
    data::DataConfig cfg = tiny_config();
    cfg.episodes = 2;
    cfg.cone_total_deg = cone;
    const auto ds = data::generate_dataset(cfg);
    data::validate_dataset(ds);  // includes the cone check
  }
}

TEST_CASE("make_windows: counting and episode isolation") {
  data::DataConfig cfg = tiny_config();
  cfg.episodes = 2;
  const auto ds = data::generate_dataset(cfg);

  const auto padded = data::make_windows(ds, 4, true);
  CHECK(padded.size() == 200);  // 100 per episode
  const auto unpadded = data::make_windows(ds, 4, false);
  CHECK(unpadded.size() == 192);  // 96 per episode

  for (const auto& ws : padded) {
    CHECK(ws.window.triples.size() == 4);
  }
  for (const auto& ws : unpadded) {
    CHECK((ws.episode_id == 0 || ws.episode_id == 1));
  }
}

TEST_CASE("window triples align actions with prior motions") {
  data::DataConfig cfg = tiny_config();
  cfg.episodes = 1;
  cfg.pushes_per_episode = 6;
  const auto ds = data::generate_dataset(cfg);
  const auto& rec = ds.episodes[0].records;
  const auto windows = data::make_windows(ds, 3, true);
  REQUIRE(windows.size() == 6);

  // window at t: current triple = (m_{t-1}, ro_t, dro_t), target = m_t
  const auto& w4 = windows[4];
  const auto& cur = w4.window.triples.back();
  CHECK(cur.d_obj.dx == rec[3].d_obj.dx);
  CHECK(cur.ro.u == rec[4].ro.u);
  CHECK(cur.d_ro.u == rec[4].d_ro.u);
  CHECK(w4.target.dx == rec[4].d_obj.dx);
  CHECK(w4.current_mag == doctest::Approx(rec[4].d_ro.norm()));

  // earliest padded window: zero-filled history, no motion before push 0
  const auto& w0 = windows[0];
  CHECK(w0.window.triples[0].ro.u == 0.0);
  CHECK(w0.window.triples[1].d_ro.u == 0.0);
  CHECK(w0.window.triples[2].d_obj.dx == 0.0);
  CHECK(w0.window.triples[2].ro.u == rec[0].ro.u);
  CHECK(w0.target.dx == rec[0].d_obj.dx);
}

TEST_CASE("dataset JSONL round-trip is lossless and deterministic") {
  data::DataConfig cfg = tiny_config();
  cfg.episodes = 3;
  cfg.pushes_per_episode = 20;
  const auto ds = data::generate_dataset(cfg);

  const std::string path = "test_dataset_tmp.jsonl";
  data::save_dataset(ds, path);
  const auto loaded = data::load_dataset(path);
  CHECK(loaded.episodes.size() == ds.episodes.size());
  CHECK(loaded.cfg.mag_max == ds.cfg.mag_max);
  for (std::size_t e = 0; e < ds.episodes.size(); ++e) {
    CHECK(loaded.episodes[e].split == ds.episodes[e].split);
    CHECK(loaded.episodes[e].params.length == ds.episodes[e].params.length);
    REQUIRE(loaded.episodes[e].records.size() == ds.episodes[e].records.size());
    for (std::size_t i = 0; i < ds.episodes[e].records.size(); ++i) {
      CHECK(loaded.episodes[e].records[i].d_obj.dx == ds.episodes[e].records[i].d_obj.dx);
      CHECK(loaded.episodes[e].records[i].d_ro.v == ds.episodes[e].records[i].d_ro.v);
    }
  }

  const std::string again = "test_dataset_tmp2.jsonl";
  data::save_dataset(loaded, again);
  CHECK(slurp(path) == slurp(again));
  std::remove(path.c_str());
  std::remove(again.c_str());
}
