#pragma once

// Perfect-information predictor backed by the simulation oracle: given a
// window it executes the current (ro, dRO) action on the true physics with
// known params. Predictions are exact, so controller logic can be exercised
// independently of model training. Test-only; the learned models never see
// params.

#include "pushlab/dyn.hpp"
#include "pushlab/sim.hpp"

namespace testing_support {

class OracleSimPredictor final : public pushlab::dyn::Predictor {
 public:
  OracleSimPredictor(pushlab::sim::ObjectParams params, int window_len,
                     pushlab::sim::SimConfig cfg = {})
      : params_(params), w_(window_len), cfg_(cfg) {}

  int window_len() const override { return w_; }

  pushlab::net::Mat predict(const pushlab::dyn::WindowBatch& wb) const override {
    pushlab::net::Mat out(wb.batch(), 3);
    pushlab::sim::WorldState st;
    st.object_pose = pushlab::PlanarPose();
    st.params = params_;
    for (int i = 0; i < wb.batch(); ++i) {
      const pushlab::ObjectFramePoint ro(wb.cur(i, 3), wb.cur(i, 4));
      const pushlab::ObjectFramePoint d_ro(wb.cur(i, 5), wb.cur(i, 6));
      // queries from a mismatched object's perimeter may start inside this
      // oracle's footprint; a network would extrapolate, the oracle returns rest
      if (pushlab::sim::pusher_collides(params_, ro, cfg_.pusher_radius)) {
        out(i, 0) = out(i, 1) = out(i, 2) = 0.0;
        continue;
      }
      const auto res = pushlab::sim::execute_push(st, ro, d_ro, cfg_);
      out(i, 0) = res.motion.dx;
      out(i, 1) = res.motion.dy;
      out(i, 2) = res.motion.dyaw;
    }
    return out;
  }

 private:
  pushlab::sim::ObjectParams params_;
  int w_;
  pushlab::sim::SimConfig cfg_;
};

}  // namespace testing_support
