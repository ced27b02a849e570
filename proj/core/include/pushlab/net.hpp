#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pushlab/rng.hpp"

namespace pushlab::net {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named parameter with gradient accumulator and Adam moment buffers.
struct Tensor {
  std::string name;
  Mat value;
  Mat grad;
  Mat m1;
  Mat m2;

  void setup(int rows, int cols, std::string n) {
    name = std::move(n);
    value = Mat::Zero(rows, cols);
    grad = Mat::Zero(rows, cols);
    m1 = Mat::Zero(rows, cols);
    m2 = Mat::Zero(rows, cols);
  }

  /// Uniform(-bound, bound) fill in row-major order (deterministic).
  void fill_uniform(Rng& rng, double bound) {
    for (Eigen::Index r = 0; r < value.rows(); ++r) {
      for (Eigen::Index c = 0; c < value.cols(); ++c) {
        value(r, c) = rng.uniform(-bound, bound);
      }
    }
  }

  void zero_grad() { grad.setZero(); }
};

struct AdamConfig {
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
};

/// Bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Tensor*>& params, double lr);
  long steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_{0};
};

/// Step decay: base_lr * factor^(epoch / decay_every). Non-increasing for
/// factor <= 1.
double lr_schedule(int epoch, double base_lr, int decay_every = 15, double factor = 0.5);

enum class Activation { relu, none };

struct DenseCache {
  Mat x;
  Mat y;
};

/// Fully connected layer; batches are rows.
struct Dense {
  Tensor w;  // out x in
  Tensor b;  // out x 1
  Activation act{Activation::relu};

  void init(Rng& rng, int in, int out, Activation a, const std::string& name);
  Mat forward(const Mat& x, DenseCache* cache = nullptr) const;
  /// Accumulates parameter gradients, returns dL/dx.
  Mat backward(const Mat& dy, const DenseCache& cache);
  std::vector<Tensor*> params();
};

struct GruCache {
  Mat x;
  Mat h_prev;
  Mat z;
  Mat r;
  Mat hh;
};

/// GRU cell: z and r sigmoid gates, tanh candidate,
/// h = (1-z) (.) h_prev + z (.) hh.
struct GruCell {
  Tensor wz, uz, bz;
  Tensor wr, ur, br;
  Tensor wh, uh, bh;

  void init(Rng& rng, int in, int hidden, const std::string& name);
  int hidden() const { return static_cast<int>(wz.value.rows()); }
  Mat forward(const Mat& x, const Mat& h_prev, GruCache* cache = nullptr) const;
  /// dh is dL/dh_next; accumulates parameter gradients; adds dL/dx into
  /// *dx when given. Returns dL/dh_prev.
  Mat backward(const Mat& dh, const GruCache& cache, Mat* dx);
  std::vector<Tensor*> params();
};

struct LstmCache {
  Mat x;
  Mat h_prev;
  Mat c_prev;
  Mat i;
  Mat f;
  Mat g;
  Mat o;
  Mat c;
  Mat tc;
};

struct LstmCell {
  Tensor wi, ui, bi;
  Tensor wf, uf, bf;
  Tensor wg, ug, bg;
  Tensor wo, uo, bo;

  void init(Rng& rng, int in, int hidden, const std::string& name);
  int hidden() const { return static_cast<int>(wi.value.rows()); }
  std::pair<Mat, Mat> forward(const Mat& x, const Mat& h_prev, const Mat& c_prev,
                              LstmCache* cache = nullptr) const;
  std::pair<Mat, Mat> backward(const Mat& dh, const Mat& dc, const LstmCache& cache, Mat* dx);
  std::vector<Tensor*> params();
};

// --- checkpoint format -----------------------------------------------------
// Versioned binary layout: magic, schema version, JSON metadata blob, then a
// manifest (name + shape per tensor) followed by row-major little-endian
// float64 payloads in manifest order.

void write_checkpoint(const std::string& path, const std::string& meta_json,
                      const std::vector<const Tensor*>& tensors);

struct Checkpoint {
  std::string meta_json;
  std::vector<std::pair<std::string, Mat>> tensors;

  const Mat* find(const std::string& name) const;
};

Checkpoint read_checkpoint(const std::string& path);

/// Copies checkpoint tensors into `params` by name. Throws ShapeMismatch on
/// missing names or shape disagreement. Gradients and moments are reset.
void load_into(const Checkpoint& ckpt, const std::vector<Tensor*>& params);

}  // namespace pushlab::net
