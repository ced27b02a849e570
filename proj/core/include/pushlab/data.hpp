#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushlab/sim.hpp"

namespace pushlab::data {

struct DataConfig {
  int episodes{10000};
  int pushes_per_episode{100};
  double mag_min{0.002};
  double mag_max{0.03};
  /// Total aperture of the push-direction cone about the inward face
  /// normal, degrees. 90 matches the sampled -45..45 range; 45 is the
  /// narrow reading.
  double cone_total_deg{90.0};
  double perimeter_margin{0.01};
  std::uint64_t master_seed{1};
  double train_frac{0.7};
  double val_frac{0.2};
  /// Boundary between the small and big test partitions (push magnitude).
  double small_big_split{0.008};
  sim::SimConfig sim_cfg{};
  sim::DomainRandomization randomization{};

  /// Preset matching the wider-push dataset of the improved controller.
  static DataConfig improved() {
    DataConfig c;
    c.mag_min = 0.003;
    c.mag_max = 0.05;
    return c;
  }
};

/// One push: the realized object motion of this push (pre-push body frame),
/// the pusher placement and the commanded push vector, both object frame.
struct InteractionRecord {
  PlanarMotion d_obj;
  ObjectFramePoint ro;
  ObjectFramePoint d_ro;
  int episode_id{0};
  int step_index{0};
};

enum class Split { train, val, test };

const char* split_name(Split s);

struct Episode {
  int episode_id{0};
  sim::ObjectParams params;
  Split split{Split::train};
  std::vector<InteractionRecord> records;
};

struct Dataset {
  DataConfig cfg;
  std::vector<Episode> episodes;

  std::size_t record_count() const;
};

/// Generates one episode: initial yaw = episode_index degrees (mod 360),
/// per-episode randomized params, pushes sampled on the inflated perimeter
/// with cone directions and configured magnitudes.
Episode generate_episode(int episode_index, const DataConfig& cfg, std::uint64_t rng_seed);

/// Same, with an explicit initial pose (pose invariance checks).
Episode generate_episode_at(const PlanarPose& initial_pose, int episode_index,
                            const DataConfig& cfg, std::uint64_t rng_seed);

/// All episodes (parallel across workers, deterministic by episode id) plus
/// seeded 0.7/0.2/0.1 split assignment by episode.
Dataset generate_dataset(const DataConfig& cfg);

/// State-action triple: previous object motion plus the current action.
struct Triple {
  PlanarMotion d_obj;
  ObjectFramePoint ro;
  ObjectFramePoint d_ro;
};

/// Sliding window of w triples (oldest first); the last one is the
/// "current" slot whose (ro, d_ro) is the action under evaluation.
struct HistoryWindow {
  std::vector<Triple> triples;
};

struct WindowSample {
  HistoryWindow window;
  PlanarMotion target;
  Split split{Split::train};
  int episode_id{0};
  double current_mag{0.0};
};

/// Windows of w consecutive records within each episode. With padding, the
/// first steps are filled with zero-motion/zero-action triples, yielding
/// one window per record; without, only fully observed windows are kept.
std::vector<WindowSample> make_windows(const Dataset& ds, int w, bool padded = true);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Validates the stated dataset invariants (perimeter placement, cone
/// directions, magnitude range, split disjointness). Throws on violation.
void validate_dataset(const Dataset& ds);

}  // namespace pushlab::data
