#include "pushlab/dyn.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace pushlab::dyn {

using json = nlohmann::ordered_json;

const char* arch_name(Arch a) {
  switch (a) {
    case Arch::gru:
      return "gru";
    case Arch::no_history:
      return "no_history";
    default:
      return "lstm";
  }
}

Arch arch_from_name(const std::string& s) {
  if (s == "gru") return Arch::gru;
  if (s == "no_history" || s == "nohist") return Arch::no_history;
  if (s == "lstm") return Arch::lstm;
  throw std::invalid_argument("unknown architecture: " + s);
}

// Push-aligned output parameterization: translation targets/predictions are
// expressed in the frame of the current push direction. The mapping is an
// isometry (the MSE loss is unchanged); it removes the direction dependence
// the trunk would otherwise have to encode.
double push_angle(const Mat& cur, int row) {
  const double u = cur(row, 5);
  const double v = cur(row, 6);
  if (u == 0.0 && v == 0.0) return 0.0;
  return std::atan2(v, u);
}

void set_triple_row(Mat& m, int row, const Triple& t) {
  m(row, 0) = t.d_obj.dx;
  m(row, 1) = t.d_obj.dy;
  m(row, 2) = t.d_obj.dyaw;
  m(row, 3) = t.ro.u;
  m(row, 4) = t.ro.v;
  m(row, 5) = t.d_ro.u;
  m(row, 6) = t.d_ro.v;
}

WindowBatch window_to_batch(const HistoryWindow& w) {
  WindowBatch wb;
  const int len = static_cast<int>(w.triples.size());
  wb.cur = Mat::Zero(1, 7);
  set_triple_row(wb.cur, 0, w.triples.back());
  wb.hist.resize(len - 1);
  for (int k = 0; k < len - 1; ++k) {
    wb.hist[k] = Mat::Zero(1, 7);
    set_triple_row(wb.hist[k], 0, w.triples[k]);
  }
  return wb;
}

namespace {

constexpr int kTripleDim = 7;

// Raw triples are centimeter scale; gates and relu units condition much
// better on O(1) features. Fixed per-feature scales (motion, placement and
// push columns have different natural magnitudes), applied identically by
// every architecture and recorded in checkpoints.
inline Mat scale_inputs(const Mat& x) {
  static const double kScale[7] = {50.0, 50.0, 20.0, 10.0, 10.0, 50.0, 50.0};
  Mat out = x;
  for (int c = 0; c < 7; ++c) out.col(c) *= kScale[c];
  return out;
}

// Our architecture: current triple through an FC branch, the historical
// triples through a GRU; concat, two FC layers, linear head.
class GruNet final : public SingleNet {
 public:
  GruNet(int out_dim, int w, int hidden, Rng& rng, const std::string& prefix)
      : w_(w), hidden_(hidden) {
    current_.init(rng, kTripleDim, hidden, net::Activation::relu, prefix + "/current");
    gru_.init(rng, kTripleDim, hidden, prefix + "/gru");
    trunk1_.init(rng, 2 * hidden, hidden, net::Activation::relu, prefix + "/trunk1");
    trunk2_.init(rng, hidden, hidden, net::Activation::relu, prefix + "/trunk2");
    head_.init(rng, hidden, out_dim, net::Activation::none, prefix + "/head");
    // start the trunk nearly history-blind: the action pathway trains first,
    // the recurrent features get recruited once their encoding stabilizes
    trunk1_.w.value.rightCols(hidden) *= 0.1;
  }

  Mat forward(const WindowBatch& wb) const override { return run(wb, nullptr); }

  Mat forward_train(const WindowBatch& wb) override {
    cache_ = Cache{};
    return run(wb, &cache_);
  }

  void backward(const Mat& dy) override {
    Mat dtrunk = head_.backward(dy, cache_.head);
    dtrunk = trunk2_.backward(dtrunk, cache_.t2);
    const Mat dconcat = trunk1_.backward(dtrunk, cache_.t1);
    const Mat da = dconcat.leftCols(hidden_);
    Mat dh = dconcat.rightCols(hidden_);
    current_.backward(da, cache_.cur);
    for (int t = static_cast<int>(cache_.gru.size()) - 1; t >= 0; --t) {
      dh = gru_.backward(dh, cache_.gru[t], nullptr);
    }
  }

  std::vector<net::Tensor*> params() override {
    std::vector<net::Tensor*> out;
    for (auto* p : current_.params()) out.push_back(p);
    for (auto* p : gru_.params()) out.push_back(p);
    for (auto* p : trunk1_.params()) out.push_back(p);
    for (auto* p : trunk2_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  std::unique_ptr<SingleNet> clone() const override { return std::make_unique<GruNet>(*this); }
  int window_len() const override { return w_; }

 private:
  struct Cache {
    net::DenseCache cur, t1, t2, head;
    std::vector<net::GruCache> gru;
  };

  Mat run(const WindowBatch& wb, Cache* c) const {
    const int b = wb.batch();
    const Mat a = current_.forward(scale_inputs(wb.cur), c ? &c->cur : nullptr);
    Mat h = Mat::Zero(b, hidden_);
    if (c) c->gru.resize(wb.hist.size());
    for (std::size_t t = 0; t < wb.hist.size(); ++t) {
      h = gru_.forward(scale_inputs(wb.hist[t]), h, c ? &c->gru[t] : nullptr);
    }
    Mat concat(b, 2 * hidden_);
    concat << a, h;
    const Mat t1 = trunk1_.forward(concat, c ? &c->t1 : nullptr);
    const Mat t2 = trunk2_.forward(t1, c ? &c->t2 : nullptr);
    return head_.forward(t2, c ? &c->head : nullptr);
  }

  int w_;
  int hidden_;
  net::Dense current_, trunk1_, trunk2_, head_;
  net::GruCell gru_;
  Cache cache_;
};

// Ablation baseline: the current triple only.
class NoHistNet final : public SingleNet {
 public:
  NoHistNet(int out_dim, int w, int hidden, Rng& rng, const std::string& prefix) : w_(w) {
    l1_.init(rng, kTripleDim, hidden, net::Activation::relu, prefix + "/l1");
    t1_.init(rng, hidden, hidden, net::Activation::relu, prefix + "/trunk1");
    t2_.init(rng, hidden, hidden, net::Activation::relu, prefix + "/trunk2");
    head_.init(rng, hidden, out_dim, net::Activation::none, prefix + "/head");
  }

  Mat forward(const WindowBatch& wb) const override { return run(wb, nullptr); }
  Mat forward_train(const WindowBatch& wb) override {
    cache_ = Cache{};
    return run(wb, &cache_);
  }

  void backward(const Mat& dy) override {
    Mat d = head_.backward(dy, cache_.head);
    d = t2_.backward(d, cache_.t2);
    d = t1_.backward(d, cache_.t1);
    l1_.backward(d, cache_.l1);
  }

  std::vector<net::Tensor*> params() override {
    std::vector<net::Tensor*> out;
    for (auto* p : l1_.params()) out.push_back(p);
    for (auto* p : t1_.params()) out.push_back(p);
    for (auto* p : t2_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  std::unique_ptr<SingleNet> clone() const override { return std::make_unique<NoHistNet>(*this); }
  int window_len() const override { return w_; }

 private:
  struct Cache {
    net::DenseCache l1, t1, t2, head;
  };

  Mat run(const WindowBatch& wb, Cache* c) const {
    const Mat a = l1_.forward(scale_inputs(wb.cur), c ? &c->l1 : nullptr);
    const Mat b = t1_.forward(a, c ? &c->t1 : nullptr);
    const Mat d = t2_.forward(b, c ? &c->t2 : nullptr);
    return head_.forward(d, c ? &c->head : nullptr);
  }

  int w_;
  net::Dense l1_, t1_, t2_, head_;
  Cache cache_;
};

// 2-layer LSTM baseline over the whole window, linear head on the last
// hidden state.
class LstmNet final : public SingleNet {
 public:
  LstmNet(int out_dim, int w, int hidden, Rng& rng, const std::string& prefix)
      : w_(w), hidden_(hidden) {
    l1_.init(rng, kTripleDim, hidden, prefix + "/lstm1");
    l2_.init(rng, hidden, hidden, prefix + "/lstm2");
    head_.init(rng, hidden, out_dim, net::Activation::none, prefix + "/head");
  }

  Mat forward(const WindowBatch& wb) const override { return run(wb, nullptr); }
  Mat forward_train(const WindowBatch& wb) override {
    cache_ = Cache{};
    return run(wb, &cache_);
  }

  void backward(const Mat& dy) override {
    const int steps = static_cast<int>(cache_.c1.size());
    const int b = static_cast<int>(dy.rows());
    Mat dh2 = head_.backward(dy, cache_.head);
    Mat dc2 = Mat::Zero(b, hidden_);
    Mat dh1_carry = Mat::Zero(b, hidden_);
    Mat dc1 = Mat::Zero(b, hidden_);
    for (int t = steps - 1; t >= 0; --t) {
      Mat dx2 = Mat::Zero(b, hidden_);
      auto [dh2p, dc2p] = l2_.backward(dh2, dc2, cache_.c2[t], &dx2);
      dh2 = std::move(dh2p);
      dc2 = std::move(dc2p);
      const Mat dh1 = dx2 + dh1_carry;
      auto [dh1p, dc1p] = l1_.backward(dh1, dc1, cache_.c1[t], nullptr);
      dh1_carry = std::move(dh1p);
      dc1 = std::move(dc1p);
    }
  }

  std::vector<net::Tensor*> params() override {
    std::vector<net::Tensor*> out;
    for (auto* p : l1_.params()) out.push_back(p);
    for (auto* p : l2_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  std::unique_ptr<SingleNet> clone() const override { return std::make_unique<LstmNet>(*this); }
  int window_len() const override { return w_; }

 private:
  struct Cache {
    std::vector<net::LstmCache> c1, c2;
    net::DenseCache head;
  };

  Mat run(const WindowBatch& wb, Cache* c) const {
    const int b = wb.batch();
    const int steps = static_cast<int>(wb.hist.size()) + 1;
    Mat h1 = Mat::Zero(b, hidden_);
    Mat c1 = Mat::Zero(b, hidden_);
    Mat h2 = Mat::Zero(b, hidden_);
    Mat c2 = Mat::Zero(b, hidden_);
    if (c) {
      c->c1.resize(steps);
      c->c2.resize(steps);
    }
    for (int t = 0; t < steps; ++t) {
      const Mat x = scale_inputs(t + 1 < steps ? wb.hist[t] : wb.cur);
      auto [h1n, c1n] = l1_.forward(x, h1, c1, c ? &c->c1[t] : nullptr);
      h1 = std::move(h1n);
      c1 = std::move(c1n);
      auto [h2n, c2n] = l2_.forward(h1, h2, c2, c ? &c->c2[t] : nullptr);
      h2 = std::move(h2n);
      c2 = std::move(c2n);
    }
    return head_.forward(h2, c ? &c->head : nullptr);
  }

  int w_;
  int hidden_;
  net::LstmCell l1_, l2_;
  net::Dense head_;
  Cache cache_;
};

}  // namespace

std::unique_ptr<SingleNet> make_net(Arch arch, int out_dim, int w, int hidden, Rng& rng,
                                    const std::string& name_prefix) {
  switch (arch) {
    case Arch::gru:
      return std::make_unique<GruNet>(out_dim, w, hidden, rng, name_prefix);
    case Arch::no_history:
      return std::make_unique<NoHistNet>(out_dim, w, hidden, rng, name_prefix);
    default:
      return std::make_unique<LstmNet>(out_dim, w, hidden, rng, name_prefix);
  }
}

DualModel::DualModel(std::unique_ptr<SingleNet> trans, std::unique_ptr<SingleNet> rot, Arch arch,
                     int w, int hidden)
    : trans_(std::move(trans)), rot_(std::move(rot)), arch_(arch), w_(w), hidden_(hidden) {}

DualModel::DualModel(const DualModel& o)
    : trans_(o.trans_ ? o.trans_->clone() : nullptr),
      rot_(o.rot_ ? o.rot_->clone() : nullptr),
      arch_(o.arch_),
      w_(o.w_),
      hidden_(o.hidden_) {}

DualModel& DualModel::operator=(const DualModel& o) {
  if (this != &o) {
    trans_ = o.trans_ ? o.trans_->clone() : nullptr;
    rot_ = o.rot_ ? o.rot_->clone() : nullptr;
    arch_ = o.arch_;
    w_ = o.w_;
    hidden_ = o.hidden_;
  }
  return *this;
}

DualModel DualModel::make(Arch arch, int w, int hidden, std::uint64_t seed) {
  Rng rng(seed);
  auto trans = make_net(arch, 2, w, hidden, rng, "trans");
  auto rot = make_net(arch, 1, w, hidden, rng, "rot");
  return DualModel(std::move(trans), std::move(rot), arch, w, hidden);
}

Mat DualModel::predict(const WindowBatch& wb) const {
  const Mat xy = trans_->forward(wb);
  const Mat yaw = rot_->forward(wb);
  Mat out(wb.batch(), 3);
  for (int i = 0; i < out.rows(); ++i) {
    const double a = push_angle(wb.cur, i);
    const double c = std::cos(a), s = std::sin(a);
    out(i, 0) = c * xy(i, 0) - s * xy(i, 1);
    out(i, 1) = s * xy(i, 0) + c * xy(i, 1);
    out(i, 2) = wrap_angle(yaw(i, 0));
  }
  return out;
}

PlanarMotion DualModel::predict_one(const HistoryWindow& window) const {
  if (static_cast<int>(window.triples.size()) != w_) {
    throw net::ShapeMismatch("window length does not match training w");
  }
  const Mat out = predict(window_to_batch(window));
  return {out(0, 0), out(0, 1), out(0, 2)};
}

void DualModel::save(const std::string& path) const {
  json meta{{"schema", "pushlab.model/1"},
            {"arch", arch_name(arch_)},
            {"w", w_},
            {"hidden", hidden_},
            {"input_scale", "per_feature_v2"}};
  std::vector<const net::Tensor*> tensors;
  for (auto* p : const_cast<SingleNet&>(*trans_).params()) tensors.push_back(p);
  for (auto* p : const_cast<SingleNet&>(*rot_).params()) tensors.push_back(p);
  net::write_checkpoint(path, meta.dump(), tensors);
}

DualModel DualModel::load(const std::string& path) {
  const auto ckpt = net::read_checkpoint(path);
  const json meta = json::parse(ckpt.meta_json);
  if (meta.at("schema") != "pushlab.model/1") {
    throw std::runtime_error("unsupported model schema");
  }
  const Arch arch = arch_from_name(meta.at("arch"));
  const int w = meta.at("w");
  const int hidden = meta.at("hidden");
  if (meta.contains("input_scale") && meta.at("input_scale") != json("per_feature_v2")) {
    throw std::runtime_error("checkpoint uses an unsupported input scale");
  }
  DualModel m = make(arch, w, hidden, 0);
  std::vector<net::Tensor*> tensors;
  for (auto* p : m.trans().params()) tensors.push_back(p);
  for (auto* p : m.rot().params()) tensors.push_back(p);
  net::load_into(ckpt, tensors);
  return m;
}

// --- training ------------------------------------------------------------------

namespace {

struct SplitTensors {
  WindowBatch inputs;
  Mat target_xy;   // n x 2
  Vec target_yaw;  // n
  std::vector<double> current_mag;
  int n{0};
};

SplitTensors tensorize(const std::vector<data::WindowSample>& windows, Split split, int w) {
  SplitTensors st;
  std::vector<const data::WindowSample*> sel;
  for (const auto& ws : windows) {
    if (ws.split == split) sel.push_back(&ws);
  }
  st.n = static_cast<int>(sel.size());
  st.inputs.cur = Mat::Zero(st.n, kTripleDim);
  st.inputs.hist.assign(w - 1, Mat::Zero(st.n, kTripleDim));
  st.target_xy = Mat::Zero(st.n, 2);
  st.target_yaw = Vec::Zero(st.n);
  st.current_mag.resize(st.n);
  for (int i = 0; i < st.n; ++i) {
    const auto& ws = *sel[i];
    for (int k = 0; k < w - 1; ++k) set_triple_row(st.inputs.hist[k], i, ws.window.triples[k]);
    set_triple_row(st.inputs.cur, i, ws.window.triples[w - 1]);
    st.target_xy(i, 0) = ws.target.dx;
    st.target_xy(i, 1) = ws.target.dy;
    st.target_yaw(i) = ws.target.dyaw;
    st.current_mag[i] = ws.current_mag;
  }
  return st;
}

WindowBatch gather(const WindowBatch& src, const std::vector<int>& rows) {
  WindowBatch out;
  out.cur = src.cur(rows, Eigen::all);
  out.hist.reserve(src.hist.size());
  for (const auto& h : src.hist) out.hist.push_back(h(rows, Eigen::all));
  return out;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// mean squared translation distance
double trans_loss(const Mat& pred, const Mat& target) {
  return (pred - target).rowwise().squaredNorm().mean();
}

// mean non-oriented angular difference
double rot_loss(const Mat& pred, const Vec& target) {
  double acc = 0.0;
  for (int i = 0; i < pred.rows(); ++i) acc += ang_diff(pred(i, 0), target(i));
  return acc / static_cast<double>(pred.rows());
}

struct ValLosses {
  double trans{0.0};
  double rot{0.0};
};

ValLosses validation_losses(SingleNet& trans, SingleNet& rot, const SplitTensors& val) {
  ValLosses out;
  if (val.n == 0) return out;
  const int chunk = 8192;
  double t_acc = 0.0, r_acc = 0.0;
  for (int start = 0; start < val.n; start += chunk) {
    const int len = std::min(chunk, val.n - start);
    std::vector<int> rows(len);
    for (int i = 0; i < len; ++i) rows[i] = start + i;
    const WindowBatch wb = gather(val.inputs, rows);
    const Mat tp = trans.forward(wb);
    const Mat rp = rot.forward(wb);
    Mat txy = val.target_xy(rows, Eigen::all);
    for (int i = 0; i < len; ++i) {
      const double a = push_angle(wb.cur, i);
      const double c = std::cos(a), s = std::sin(a);
      const double tx = txy(i, 0), ty = txy(i, 1);
      txy(i, 0) = c * tx + s * ty;
      txy(i, 1) = -s * tx + c * ty;
    }
    t_acc += (tp - txy).rowwise().squaredNorm().sum();
    for (int i = 0; i < len; ++i) r_acc += ang_diff(rp(i, 0), val.target_yaw(rows[i]));
  }
  out.trans = t_acc / val.n;
  out.rot = r_acc / val.n;
  return out;
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  const auto windows = data::make_windows(ds, cfg.w, cfg.padded);
  const SplitTensors tr = tensorize(windows, Split::train, cfg.w);
  const SplitTensors val = tensorize(windows, Split::val, cfg.w);
  if (tr.n == 0) throw EmptyDataset("no training windows");

  Rng rng(derive_seed(cfg.seed, 0xd714));
  auto trans = make_net(cfg.arch, 2, cfg.w, cfg.hidden, rng, "trans");
  auto rot = make_net(cfg.arch, 1, cfg.w, cfg.hidden, rng, "rot");
  net::Adam adam_trans, adam_rot;

  TrainLog log;
  std::unique_ptr<SingleNet> best_trans = trans->clone();
  std::unique_ptr<SingleNet> best_rot = rot->clone();
  double best_trans_loss = std::numeric_limits<double>::infinity();
  double best_rot_loss = std::numeric_limits<double>::infinity();

  std::vector<int> order(tr.n);
  for (int i = 0; i < tr.n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = net::lr_schedule(epoch, cfg.base_lr, cfg.lr_decay_every, cfg.lr_decay);
    rng.shuffle(order);
    double t_acc = 0.0, r_acc = 0.0;
    std::size_t seen = 0;
    for (int start = 0; start < tr.n; start += cfg.batch) {
      const int len = std::min(cfg.batch, tr.n - start);
      const std::vector<int> rows(order.begin() + start, order.begin() + start + len);
      const WindowBatch wb = gather(tr.inputs, rows);
      Mat txy = tr.target_xy(rows, Eigen::all);
      // targets into the push-aligned frame (isometry: loss unchanged)
      for (int i = 0; i < len; ++i) {
        const double a = push_angle(wb.cur, i);
        const double c = std::cos(a), s = std::sin(a);
        const double tx = txy(i, 0), ty = txy(i, 1);
        txy(i, 0) = c * tx + s * ty;
        txy(i, 1) = -s * tx + c * ty;
      }

      // translation head: mean squared distance
      for (auto* p : trans->params()) p->zero_grad();
      const Mat tp = trans->forward_train(wb);
      const Mat terr = tp - txy;
      t_acc += terr.rowwise().squaredNorm().sum();
      trans->backward(terr * (2.0 / len));
      adam_trans.step(trans->params(), lr);

      // rotation head: mean non-oriented angle, signed-wrap gradient
      for (auto* p : rot->params()) p->zero_grad();
      const Mat rp = rot->forward_train(wb);
      Mat rgrad(len, 1);
      for (int i = 0; i < len; ++i) {
        const double d = wrap_angle(rp(i, 0) - tr.target_yaw(rows[i]));
        r_acc += std::fabs(d);
        rgrad(i, 0) = sign_of(d) / len;
      }
      rot->backward(rgrad);
      adam_rot.step(rot->params(), lr);
      seen += len;
    }

    const ValLosses v = validation_losses(*trans, *rot, val);
    EpochLog el;
    el.train_trans = t_acc / static_cast<double>(seen);
    el.train_rot = r_acc / static_cast<double>(seen);
    el.val_trans = v.trans;
    el.val_rot = v.rot;
    el.lr = lr;
    log.epochs.push_back(el);

    const double vt = val.n > 0 ? v.trans : el.train_trans;
    const double vr = val.n > 0 ? v.rot : el.train_rot;
    if (vt < best_trans_loss) {
      best_trans_loss = vt;
      best_trans = trans->clone();
      log.best_trans_epoch = epoch;
    }
    if (vr < best_rot_loss) {
      best_rot_loss = vr;
      best_rot = rot->clone();
      log.best_rot_epoch = epoch;
    }
  }

  TrainResult out{DualModel(std::move(best_trans), std::move(best_rot), cfg.arch, cfg.w,
                            cfg.hidden),
                  std::move(log)};
  return out;
}

EvalReport evaluate(const Predictor& model, const Dataset& ds, Split split, Subset subset, int w,
                    bool padded) {
  const auto windows = data::make_windows(ds, w, padded);
  const SplitTensors st = tensorize(windows, split, w);
  std::vector<int> rows;
  for (int i = 0; i < st.n; ++i) {
    const double mag = st.current_mag[i];
    const bool is_small = mag < ds.cfg.small_big_split;
    if (subset == Subset::all || (subset == Subset::small && is_small) ||
        (subset == Subset::big && !is_small)) {
      rows.push_back(i);
    }
  }
  EvalReport rep;
  rep.count = rows.size();
  if (rows.empty()) return rep;

  std::vector<double> pos_errs, ang_errs;
  pos_errs.reserve(rows.size());
  ang_errs.reserve(rows.size());
  const int chunk = 8192;
  for (std::size_t start = 0; start < rows.size(); start += chunk) {
    const std::size_t len = std::min<std::size_t>(chunk, rows.size() - start);
    const std::vector<int> sel(rows.begin() + start, rows.begin() + start + len);
    const Mat pred = model.predict(gather(st.inputs, sel));
    for (std::size_t i = 0; i < len; ++i) {
      const int r = sel[i];
      const double ex = pred(i, 0) - st.target_xy(r, 0);
      const double ey = pred(i, 1) - st.target_xy(r, 1);
      pos_errs.push_back(std::hypot(ex, ey));
      ang_errs.push_back(ang_diff(pred(i, 2), st.target_yaw(r)));
    }
  }
  auto mean_std = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::make_pair(m, std::sqrt(v / static_cast<double>(xs.size())));
  };
  std::tie(rep.pos_mean, rep.pos_std) = mean_std(pos_errs);
  std::tie(rep.ang_mean, rep.ang_std) = mean_std(ang_errs);
  return rep;
}

std::string eval_report_json(const EvalReport& r) {
  json j{{"position_error", {{"mean_m", r.pos_mean}, {"std_m", r.pos_std}}},
         {"orientation_error", {{"mean_rad", r.ang_mean}, {"std_rad", r.ang_std}}},
         {"count", r.count}};
  return j.dump(2);
}

// --- rollouts --------------------------------------------------------------------

HistoryWindow assemble_window(const HistoryContext& history, const PushAction& action, int w) {
  HistoryWindow win;
  win.triples.resize(w);
  const int past = static_cast<int>(history.past.size());
  for (int k = 0; k < w - 1; ++k) {
    const int idx = past - (w - 1) + k;
    if (idx >= 0) win.triples[k] = history.past[idx];
  }
  win.triples[w - 1] = Triple{history.latest_motion, action.ro, action.d_ro};
  return win;
}

std::vector<SampleRollout> rollout_batch(const Predictor& model, const HistoryContext& history,
                                         const std::vector<PushAction>& actions, int T,
                                         const std::vector<std::vector<double>>* dir_deltas,
                                         const sim::ObjectParams& params,
                                         const RolloutConfig& cfg) {
  const int n = static_cast<int>(actions.size());
  const int w = model.window_len();
  const double px = params.half_length() + cfg.perimeter_margin + cfg.pusher_radius;
  const double py = params.half_width() + cfg.perimeter_margin + cfg.pusher_radius;

  // Per-sample evolving state.
  struct State {
    std::vector<Triple> hist;  // length w-1, oldest first
    PlanarMotion latest;
    ObjectFramePoint ro, d_ro;
    PlanarPose rel;
  };
  std::vector<State> states(n);
  std::vector<Triple> base(w - 1);
  {
    const int past = static_cast<int>(history.past.size());
    for (int k = 0; k < w - 1; ++k) {
      const int idx = past - (w - 1) + k;
      if (idx >= 0) base[k] = history.past[idx];
    }
  }
  for (int i = 0; i < n; ++i) {
    states[i].hist = base;
    states[i].latest = history.latest_motion;
    states[i].ro = actions[i].ro;
    states[i].d_ro = actions[i].d_ro;
  }

  std::vector<SampleRollout> out(n);
  for (auto& r : out) {
    r.motions.reserve(T);
    r.rel_poses.reserve(T);
    r.ro.reserve(T);
    r.d_ro.reserve(T);
  }

  WindowBatch wb;
  wb.cur = Mat::Zero(n, kTripleDim);
  wb.hist.assign(w - 1, Mat::Zero(n, kTripleDim));

  for (int step = 0; step < T; ++step) {
    for (int i = 0; i < n; ++i) {
      if (step > 0 && dir_deltas) {
        const double delta = (*dir_deltas)[i][step];
        states[i].d_ro = ObjectFramePoint(rotate(states[i].d_ro.vec(), delta));
      }
      for (int k = 0; k < w - 1; ++k) set_triple_row(wb.hist[k], i, states[i].hist[k]);
      set_triple_row(wb.cur, i, Triple{states[i].latest, states[i].ro, states[i].d_ro});
    }
    const Mat pred = model.predict(wb);
    for (int i = 0; i < n; ++i) {
      const PlanarMotion m{pred(i, 0), pred(i, 1), pred(i, 2)};
      auto& st = states[i];
      out[i].ro.push_back(st.ro);
      out[i].d_ro.push_back(st.d_ro);
      out[i].motions.push_back(m);
      st.rel = advance(st.rel, m);
      out[i].rel_poses.push_back(st.rel);

      // shift the hypothetical triple into the history
      if (w > 1) {
        st.hist.erase(st.hist.begin());
        st.hist.push_back(Triple{st.latest, st.ro, st.d_ro});
      }
      st.latest = m;
      if (cfg.tracked_ro) {
        // Re-express the contact point in the predicted frame, then project
        // back onto the sampling perimeter so rollout inputs stay on the
        // training manifold.
        const Vec2 moved = rotate(st.ro.vec() - m.translation(), -m.dyaw);
        st.ro = ObjectFramePoint(geom::closest_boundary_point(px, py, moved));
      }
    }
  }
  return out;
}

std::vector<PlanarMotion> rollout(const Predictor& model, const HistoryContext& history,
                                  const PushAction& action, int T,
                                  const std::vector<double>* dir_deltas,
                                  const sim::ObjectParams& params, const RolloutConfig& cfg) {
  std::vector<std::vector<double>> deltas;
  const std::vector<std::vector<double>>* ptr = nullptr;
  if (dir_deltas) {
    deltas.push_back(*dir_deltas);
    ptr = &deltas;
  }
  const auto rolls = rollout_batch(model, history, {action}, T, ptr, params, cfg);
  return rolls[0].motions;
}

}  // namespace pushlab::dyn
