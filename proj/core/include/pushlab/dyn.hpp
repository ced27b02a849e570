#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pushlab/data.hpp"
#include "pushlab/net.hpp"

namespace pushlab::dyn {

using data::Dataset;
using data::HistoryWindow;
using data::Split;
using data::Triple;
using net::Mat;
using net::Vec;

/// Sampled controller action a_i = [RO^i, dRO^i], object frame.
struct PushAction {
  ObjectFramePoint ro;
  ObjectFramePoint d_ro;
};

enum class Arch { gru, no_history, lstm };
const char* arch_name(Arch a);
Arch arch_from_name(const std::string& s);

/// Batch of windows. Triples flatten to 7 floats:
/// [dO.dx, dO.dy, dO.dyaw, RO.u, RO.v, dRO.u, dRO.v].
struct WindowBatch {
  Mat cur;                // B x 7 (current triple; its (ro, d_ro) is the action)
  std::vector<Mat> hist;  // w-1 matrices, oldest first, each B x 7
  int batch() const { return static_cast<int>(cur.rows()); }
};

void set_triple_row(Mat& m, int row, const Triple& t);
WindowBatch window_to_batch(const HistoryWindow& w);

/// One prediction head (translation nets output 2, rotation nets 1).
class SingleNet {
 public:
  virtual ~SingleNet() = default;
  virtual Mat forward(const WindowBatch& wb) const = 0;  // pure, thread-safe
  virtual Mat forward_train(const WindowBatch& wb) = 0;  // caches for backward
  virtual void backward(const Mat& dy) = 0;
  virtual std::vector<net::Tensor*> params() = 0;
  virtual std::unique_ptr<SingleNet> clone() const = 0;
  virtual int window_len() const = 0;
};

std::unique_ptr<SingleNet> make_net(Arch arch, int out_dim, int w, int hidden, Rng& rng,
                                    const std::string& name_prefix);

/// Prediction interface consumed by rollouts and controllers; implemented by
/// DualModel and by test oracles.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int window_len() const = 0;
  /// B x 3 rows (dx, dy, dyaw); dyaw normalized to (-pi, pi].
  virtual Mat predict(const WindowBatch& wb) const = 0;
};

/// Translation + rotation model pair sharing one architecture.
class DualModel : public Predictor {
 public:
  DualModel() = default;
  DualModel(std::unique_ptr<SingleNet> trans, std::unique_ptr<SingleNet> rot, Arch arch, int w,
            int hidden);
  DualModel(const DualModel& o);
  DualModel& operator=(const DualModel& o);
  DualModel(DualModel&&) = default;
  DualModel& operator=(DualModel&&) = default;

  static DualModel make(Arch arch, int w, int hidden, std::uint64_t seed);

  Mat predict(const WindowBatch& wb) const override;
  int window_len() const override { return w_; }

  /// Single-window forward.
  PlanarMotion predict_one(const HistoryWindow& window) const;

  void save(const std::string& path) const;
  static DualModel load(const std::string& path);

  Arch arch() const { return arch_; }
  int hidden() const { return hidden_; }
  SingleNet& trans() { return *trans_; }
  SingleNet& rot() { return *rot_; }
  const SingleNet& trans() const { return *trans_; }
  const SingleNet& rot() const { return *rot_; }

 private:
  std::unique_ptr<SingleNet> trans_;
  std::unique_ptr<SingleNet> rot_;
  Arch arch_{Arch::gru};
  int w_{4};
  int hidden_{64};
};

struct EmptyDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  Arch arch{Arch::gru};
  int w{4};
  bool padded{true};
  int epochs{40};
  int batch{256};
  double base_lr{1e-3};
  int lr_decay_every{15};
  double lr_decay{0.5};
  int hidden{64};
  std::uint64_t seed{0};
};

struct EpochLog {
  double train_trans{0.0};
  double train_rot{0.0};
  double val_trans{0.0};
  double val_rot{0.0};
  double lr{0.0};
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  int best_trans_epoch{-1};
  int best_rot_epoch{-1};
};

struct TrainResult {
  DualModel model;
  TrainLog log;
};

/// Trains the dual models; returns the best-validation checkpoints.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

enum class Subset { small, big, all };

struct EvalReport {
  double pos_mean{0.0};
  double pos_std{0.0};
  double ang_mean{0.0};
  double ang_std{0.0};
  std::size_t count{0};
};

/// One-step teacher-forced evaluation on a dataset split; subset selects by
/// the window's current push magnitude.
EvalReport evaluate(const Predictor& model, const Dataset& ds, Split split, Subset subset,
                    int w, bool padded = true);

std::string eval_report_json(const EvalReport& r);

// --- rollouts ----------------------------------------------------------------

/// Executed history available at a control step: bar{H}_t plus the latest
/// realized object motion.
struct HistoryContext {
  std::vector<Triple> past;  // executed triples, oldest first; may be short
  PlanarMotion latest_motion;
};

struct RolloutConfig {
  bool tracked_ro{true};  // re-express + re-project RO between rollout steps
  double perimeter_margin{0.01};
  double pusher_radius{0.0125};
};

struct SampleRollout {
  std::vector<PlanarMotion> motions;   // predicted, per step
  std::vector<PlanarPose> rel_poses;   // cumulative motion from the current pose
  std::vector<ObjectFramePoint> ro;    // pusher placement used at each step
  std::vector<ObjectFramePoint> d_ro;  // push vector used at each step
};

/// H_t for a candidate action: the last w-1 executed triples (zero padded)
/// plus the current triple (latest motion, action).
HistoryWindow assemble_window(const HistoryContext& history, const PushAction& action, int w);

/// Autoregressive rollouts for N candidate actions, batched per step.
/// dir_deltas (optional, per sample / per step, radians) rotate the push
/// direction relative to the previous step; entry 0 is ignored.
std::vector<SampleRollout> rollout_batch(const Predictor& model, const HistoryContext& history,
                                         const std::vector<PushAction>& actions, int T,
                                         const std::vector<std::vector<double>>* dir_deltas,
                                         const sim::ObjectParams& params,
                                         const RolloutConfig& cfg);

std::vector<PlanarMotion> rollout(const Predictor& model, const HistoryContext& history,
                                  const PushAction& action, int T,
                                  const std::vector<double>* dir_deltas,
                                  const sim::ObjectParams& params, const RolloutConfig& cfg);

}  // namespace pushlab::dyn
