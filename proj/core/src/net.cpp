#include "pushlab/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace pushlab::net {

void Adam::step(const std::vector<Tensor*>& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Tensor* p : params) {
    p->m1 = cfg_.beta1 * p->m1 + (1.0 - cfg_.beta1) * p->grad;
    p->m2.array() =
        cfg_.beta2 * p->m2.array() + (1.0 - cfg_.beta2) * p->grad.array().square();
    p->value.array() -=
        lr * (p->m1.array() / bc1) / ((p->m2.array() / bc2).sqrt() + cfg_.eps);
  }
}

double lr_schedule(int epoch, double base_lr, int decay_every, double factor) {
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
  if (decay_every <= 0) return base_lr;
  return base_lr * std::pow(factor, epoch / decay_every);
}

namespace {

inline Mat sigmoid(const Mat& x) { return ((-x.array()).exp() + 1.0).inverse().matrix(); }

inline Mat relu_mask(const Mat& y) { return (y.array() > 0.0).cast<double>().matrix(); }

}  // namespace

void Dense::init(Rng& rng, int in, int out, Activation a, const std::string& name) {
  act = a;
  w.setup(out, in, name + "/w");
  b.setup(out, 1, name + "/b");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  w.fill_uniform(rng, bound);
  // biases: small but nonzero; centimeter-scale inputs leave units dead
  // under the full fan-in bound
  b.fill_uniform(rng, 0.01 * bound);
}

Mat Dense::forward(const Mat& x, DenseCache* cache) const {
  if (x.cols() != w.value.cols()) throw ShapeMismatch("dense input width");
  Mat y = x * w.value.transpose();
  y.rowwise() += b.value.col(0).transpose();
  if (act == Activation::relu) y = y.cwiseMax(0.0);
  if (cache) {
    cache->x = x;
    cache->y = y;
  }
  return y;
}

Mat Dense::backward(const Mat& dy, const DenseCache& cache) {
  Mat d = dy;
  if (act == Activation::relu) d = d.cwiseProduct(relu_mask(cache.y));
  w.grad.noalias() += d.transpose() * cache.x;
  b.grad.col(0).noalias() += d.colwise().sum().transpose();
  return d * w.value;
}

std::vector<Tensor*> Dense::params() { return {&w, &b}; }

void GruCell::init(Rng& rng, int in, int hidden, const std::string& name) {
  const double bound_x = 1.0 / std::sqrt(static_cast<double>(in));
  const double bound_h = 1.0 / std::sqrt(static_cast<double>(hidden));
  wz.setup(hidden, in, name + "/wz");
  uz.setup(hidden, hidden, name + "/uz");
  bz.setup(hidden, 1, name + "/bz");
  wr.setup(hidden, in, name + "/wr");
  ur.setup(hidden, hidden, name + "/ur");
  br.setup(hidden, 1, name + "/br");
  wh.setup(hidden, in, name + "/wh");
  uh.setup(hidden, hidden, name + "/uh");
  bh.setup(hidden, 1, name + "/bh");
  wz.fill_uniform(rng, bound_x);
  uz.fill_uniform(rng, bound_h);
  bz.fill_uniform(rng, 0.01 * bound_h);
  wr.fill_uniform(rng, bound_x);
  ur.fill_uniform(rng, bound_h);
  br.fill_uniform(rng, 0.01 * bound_h);
  wh.fill_uniform(rng, bound_x);
  uh.fill_uniform(rng, bound_h);
  bh.fill_uniform(rng, 0.01 * bound_h);
}

Mat GruCell::forward(const Mat& x, const Mat& h_prev, GruCache* cache) const {
  if (x.cols() != wz.value.cols() || h_prev.cols() != uz.value.cols()) {
    throw ShapeMismatch("gru input width");
  }
  Mat zp = x * wz.value.transpose() + h_prev * uz.value.transpose();
  zp.rowwise() += bz.value.col(0).transpose();
  const Mat z = sigmoid(zp);
  Mat rp = x * wr.value.transpose() + h_prev * ur.value.transpose();
  rp.rowwise() += br.value.col(0).transpose();
  const Mat r = sigmoid(rp);
  const Mat rh = r.cwiseProduct(h_prev);
  Mat hp = x * wh.value.transpose() + rh * uh.value.transpose();
  hp.rowwise() += bh.value.col(0).transpose();
  const Mat hh = hp.array().tanh().matrix();
  Mat h = (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(hh);
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = z;
    cache->r = r;
    cache->hh = hh;
  }
  return h;
}

Mat GruCell::backward(const Mat& dh, const GruCache& c, Mat* dx) {
  // dh -> gates
  const Mat dz =
      dh.cwiseProduct(c.hh - c.h_prev).cwiseProduct(c.z).cwiseProduct((1.0 - c.z.array()).matrix());
  const Mat dhh = dh.cwiseProduct(c.z).cwiseProduct((1.0 - c.hh.array().square()).matrix());
  Mat dh_prev = dh.cwiseProduct((1.0 - c.z.array()).matrix());

  // candidate path
  const Mat rh = c.r.cwiseProduct(c.h_prev);
  wh.grad.noalias() += dhh.transpose() * c.x;
  uh.grad.noalias() += dhh.transpose() * rh;
  bh.grad.col(0).noalias() += dhh.colwise().sum().transpose();
  const Mat drh = dhh * uh.value;
  const Mat dr =
      drh.cwiseProduct(c.h_prev).cwiseProduct(c.r).cwiseProduct((1.0 - c.r.array()).matrix());
  dh_prev.noalias() += drh.cwiseProduct(c.r);

  // update gate path
  wz.grad.noalias() += dz.transpose() * c.x;
  uz.grad.noalias() += dz.transpose() * c.h_prev;
  bz.grad.col(0).noalias() += dz.colwise().sum().transpose();
  dh_prev.noalias() += dz * uz.value;

  // reset gate path
  wr.grad.noalias() += dr.transpose() * c.x;
  ur.grad.noalias() += dr.transpose() * c.h_prev;
  br.grad.col(0).noalias() += dr.colwise().sum().transpose();
  dh_prev.noalias() += dr * ur.value;

  if (dx) {
    dx->noalias() += dz * wz.value;
    dx->noalias() += dr * wr.value;
    dx->noalias() += dhh * wh.value;
  }
  return dh_prev;
}

std::vector<Tensor*> GruCell::params() {
  return {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh};
}

void LstmCell::init(Rng& rng, int in, int hidden, const std::string& name) {
  const double bx = 1.0 / std::sqrt(static_cast<double>(in));
  const double bhid = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto mk = [&](Tensor& wt, Tensor& ut, Tensor& bt, const char* gate) {
    wt.setup(hidden, in, name + "/w" + gate);
    ut.setup(hidden, hidden, name + "/u" + gate);
    bt.setup(hidden, 1, name + "/b" + gate);
    wt.fill_uniform(rng, bx);
    ut.fill_uniform(rng, bhid);
    bt.fill_uniform(rng, 0.01 * bhid);
  };
  mk(wi, ui, bi, "i");
  mk(wf, uf, bf, "f");
  mk(wg, ug, bg, "g");
  mk(wo, uo, bo, "o");
}

std::pair<Mat, Mat> LstmCell::forward(const Mat& x, const Mat& h_prev, const Mat& c_prev,
                                      LstmCache* cache) const {
  if (x.cols() != wi.value.cols()) throw ShapeMismatch("lstm input width");
  auto gate = [&](const Tensor& wt, const Tensor& ut, const Tensor& bt) {
    Mat p = x * wt.value.transpose() + h_prev * ut.value.transpose();
    p.rowwise() += bt.value.col(0).transpose();
    return p;
  };
  const Mat i = sigmoid(gate(wi, ui, bi));
  const Mat f = sigmoid(gate(wf, uf, bf));
  const Mat g = gate(wg, ug, bg).array().tanh().matrix();
  const Mat o = sigmoid(gate(wo, uo, bo));
  const Mat c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  const Mat tc = c.array().tanh().matrix();
  const Mat h = o.cwiseProduct(tc);
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tc = tc;
  }
  return {h, c};
}

std::pair<Mat, Mat> LstmCell::backward(const Mat& dh, const Mat& dc_in, const LstmCache& c,
                                       Mat* dx) {
  const Mat do_ = dh.cwiseProduct(c.tc).cwiseProduct(c.o).cwiseProduct(
      (1.0 - c.o.array()).matrix());
  Mat dc = dc_in + dh.cwiseProduct(c.o).cwiseProduct((1.0 - c.tc.array().square()).matrix());
  const Mat di =
      dc.cwiseProduct(c.g).cwiseProduct(c.i).cwiseProduct((1.0 - c.i.array()).matrix());
  const Mat df =
      dc.cwiseProduct(c.c_prev).cwiseProduct(c.f).cwiseProduct((1.0 - c.f.array()).matrix());
  const Mat dg = dc.cwiseProduct(c.i).cwiseProduct((1.0 - c.g.array().square()).matrix());
  const Mat dc_prev = dc.cwiseProduct(c.f);

  Mat dh_prev = Mat::Zero(dh.rows(), hidden());
  auto backgate = [&](const Mat& d, Tensor& wt, Tensor& ut, Tensor& bt) {
    wt.grad.noalias() += d.transpose() * c.x;
    ut.grad.noalias() += d.transpose() * c.h_prev;
    bt.grad.col(0).noalias() += d.colwise().sum().transpose();
    dh_prev.noalias() += d * ut.value;
    if (dx) dx->noalias() += d * wt.value;
  };
  backgate(di, wi, ui, bi);
  backgate(df, wf, uf, bf);
  backgate(dg, wg, ug, bg);
  backgate(do_, wo, uo, bo);
  return {dh_prev, dc_prev};
}

std::vector<Tensor*> LstmCell::params() {
  return {&wi, &ui, &bi, &wf, &uf, &bf, &wg, &ug, &bg, &wo, &uo, &bo};
}

// --- checkpoint I/O ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'S', 'H', 'L', 'B', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::string& meta_json,
                      const std::vector<const Tensor*>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(meta_json.size()));
  out.write(meta_json.data(), static_cast<std::streamsize>(meta_json.size()));
  write_pod(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor* t : tensors) {
    write_pod(out, static_cast<std::uint32_t>(t->name.size()));
    out.write(t->name.data(), static_cast<std::streamsize>(t->name.size()));
    write_pod(out, static_cast<std::uint32_t>(t->value.rows()));
    write_pod(out, static_cast<std::uint32_t>(t->value.cols()));
  }
  for (const Tensor* t : tensors) {
    for (Eigen::Index r = 0; r < t->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t->value.cols(); ++c) {
        write_pod(out, t->value(r, c));
      }
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

const Mat* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a pushlab checkpoint: " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
  const auto meta_len = read_pod<std::uint64_t>(in);
  Checkpoint ckpt;
  ckpt.meta_json.resize(meta_len);
  in.read(ckpt.meta_json.data(), static_cast<std::streamsize>(meta_len));
  const auto count = read_pod<std::uint32_t>(in);
  std::vector<std::pair<std::string, std::pair<std::uint32_t, std::uint32_t>>> manifest;
  manifest.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    manifest.emplace_back(std::move(name), std::make_pair(rows, cols));
  }
  for (auto& [name, shape] : manifest) {
    Mat m(shape.first, shape.second);
    for (std::uint32_t r = 0; r < shape.first; ++r) {
      for (std::uint32_t c = 0; c < shape.second; ++c) {
        m(r, c) = read_pod<double>(in);
      }
    }
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ckpt;
}

void load_into(const Checkpoint& ckpt, const std::vector<Tensor*>& params) {
  for (Tensor* p : params) {
    const Mat* src = ckpt.find(p->name);
    if (!src) throw ShapeMismatch("checkpoint misses tensor " + p->name);
    if (src->rows() != p->value.rows() || src->cols() != p->value.cols()) {
      throw ShapeMismatch("checkpoint shape mismatch for " + p->name);
    }
    p->value = *src;
    p->grad.setZero();
    p->m1.setZero();
    p->m2.setZero();
  }
}

}  // namespace pushlab::net
