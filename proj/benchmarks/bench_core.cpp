#include <benchmark/benchmark.h>

#include "pushlab/ctrl.hpp"
#include "pushlab/dyn.hpp"
#include "pushlab/geom.hpp"
#include "pushlab/sim.hpp"

using namespace pushlab;

namespace {

sim::ObjectParams bench_params() { return sim::sample_object_params(1u); }

sim::PushCommand bench_push(const sim::ObjectParams& p, double mag) {
  const double px = p.half_length() + 0.0225;
  return {{-px, p.half_width() / 3.0}, {mag + 0.0125, 0.0}};
}

void BM_StepPush(benchmark::State& state) {
  const auto p = bench_params();
  const sim::WorldState st{PlanarPose(), {0.0, 0.0}, p};
  const auto cmd = bench_push(p, 1e-3 * state.range(0));
  for (auto _ : state) {
    auto res = sim::step_push(st, cmd);
    benchmark::DoNotOptimize(res.motion.dx);
  }
}
BENCHMARK(BM_StepPush)->Arg(5)->Arg(15)->Arg(30);

void BM_LimitSurfaceRatio(benchmark::State& state) {
  const auto p = bench_params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::limit_surface_ratio(p));
  }
}
BENCHMARK(BM_LimitSurfaceRatio);

void BM_ObbDistance(benchmark::State& state) {
  const geom::Obb a{PlanarPose(0.0, 0.0, 0.3), 0.06, 0.05};
  const geom::Obb b{PlanarPose(0.2, 0.05, -0.7), 0.015, 0.015};
  for (auto _ : state) {
    benchmark::DoNotOptimize(geom::obb_distance(a, b));
  }
}
BENCHMARK(BM_ObbDistance);

void BM_ModelForward(benchmark::State& state) {
  const auto model = dyn::DualModel::make(dyn::Arch::gru, 4, 64, 1);
  Rng rng(2);
  dyn::WindowBatch wb;
  const int n = static_cast<int>(state.range(0));
  wb.cur = net::Mat::Random(n, 7) * 0.02;
  for (int t = 0; t < 3; ++t) wb.hist.push_back(net::Mat::Random(n, 7) * 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(wb).sum());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ModelForward)->Arg(1)->Arg(20)->Arg(100);

void BM_SelectActionImproved(benchmark::State& state) {
  const auto p = bench_params();
  const auto model = dyn::DualModel::make(dyn::Arch::gru, 4, 64, 1);
  ctrl::ControllerConfig cfg;
  cfg.mode = ctrl::Mode::improved;
  cfg.n_samples = 100;
  cfg.horizon = 3;
  const sim::WorldState st{PlanarPose(), {0.2, 0.0}, p};
  tasks::TaskSpec task;
  task.kind = tasks::TaskKind::posing;
  task.target = PlanarPose(0.15, 0.0, 0.2);
  tasks::TaskState ts;
  const auto fn = tasks::make_objective(task, ts, {st.object_pose, st.pusher_pos, p});
  dyn::HistoryContext hist;
  Rng rng(3);
  for (auto _ : state) {
    auto sel = ctrl::select_action_improved(model, hist, st, fn, cfg, rng);
    benchmark::DoNotOptimize(sel.action.ro.u);
  }
}
BENCHMARK(BM_SelectActionImproved);

}  // namespace

BENCHMARK_MAIN();
