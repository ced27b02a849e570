#include <doctest.h>

#include <cmath>

#include "pushlab/sim.hpp"

using namespace pushlab;

namespace {

sim::ObjectParams midpoint_params() {
  sim::ObjectParams p;
  p.friction = 0.6;
  p.restitution = 0.5;
  p.length = 0.12;
  p.width = 0.10;
  p.mass = 0.5;
  p.com_offset = {0.0, 0.0};
  return p;
}

sim::WorldState state_at(const PlanarPose& pose, const sim::ObjectParams& p) {
  return {pose, Vec2{10.0, 10.0}, p};
}

// a push drawn from the data-collection distribution
sim::PushCommand random_data_push(const sim::ObjectParams& p, Rng& rng, double margin,
                                  double rp) {
  const double px = p.half_length() + margin + rp;
  const double py = p.half_width() + margin + rp;
  const auto per = geom::rect_perimeter_point(px, py, rng.uniform01());
  const double base = std::atan2(per.inward_normal.y, per.inward_normal.x);
  const double ang = base + rng.uniform(-kPi / 4.0, kPi / 4.0);
  const double mag = rng.uniform(0.002, 0.03);
  const Vec2 dir{std::cos(ang), std::sin(ang)};
  const auto hit = geom::ray_rounded_rect(per.point, dir, p.half_length(), p.half_width(), rp);
  const double travel = (hit ? *hit : 0.0) + mag;
  return {ObjectFramePoint(per.point), ObjectFramePoint(dir * travel)};
}

}  // namespace

TEST_CASE("sample_object_params: determinism and Table-1 ranges") {
  const auto a = sim::sample_object_params(1234u);
  const auto b = sim::sample_object_params(1234u);
  CHECK(a.friction == b.friction);
  CHECK(a.length == b.length);
  CHECK(a.com_offset.x == b.com_offset.x);

  Rng rng(99);
  double len_min = 1e9, len_max = -1e9, len_acc = 0.0;
  double mass_min = 1e9, mass_max = -1e9;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = sim::sample_object_params(rng);
    CHECK(p.friction >= 0.5);
    CHECK(p.friction <= 0.7);
    CHECK(p.restitution >= 0.4);
    CHECK(p.restitution <= 0.6);
    CHECK(p.length >= 0.11);
    CHECK(p.length <= 0.13);
    CHECK(p.width >= 0.09);
    CHECK(p.width <= 0.11);
    CHECK(std::fabs(p.com_offset.x) <= 0.1 * p.half_length());
    CHECK(std::fabs(p.com_offset.y) <= 0.1 * p.half_width());
    len_min = std::min(len_min, p.length);
    len_max = std::max(len_max, p.length);
    len_acc += p.length;
    mass_min = std::min(mass_min, p.mass);
    mass_max = std::max(mass_max, p.mass);
  }
  CHECK(mass_min >= 0.3);
  CHECK(mass_max <= 0.7);
  const double len_mean = len_acc / n;
  CHECK(len_mean >= 0.118);
  CHECK(len_mean <= 0.122);
}

TEST_CASE("limit surface ratio positive and com-dependent") {
  auto p = midpoint_params();
  const double c0 = sim::limit_surface_ratio(p);
  CHECK(c0 > 0.03);
  CHECK(c0 < 0.06);
  p.com_offset = {0.005, -0.004};
  const double c1 = sim::limit_surface_ratio(p);
  CHECK(c1 > c0);  // off-center pivot sees larger mean distance
}

TEST_CASE("pusher_collides") {
  const auto p = midpoint_params();
  CHECK(sim::pusher_collides(p, {0.0, 0.0}));
  CHECK(!sim::pusher_collides(p, {1.0, 0.0}));
  CHECK(!sim::pusher_collides(p, {0.0, p.half_width() + 0.0125 + 1e-6}));
  CHECK(sim::pusher_collides(p, {0.0, p.half_width() + 0.0125 - 1e-6}));
}

TEST_CASE("step_push: zero delta is a no-op") {
  const auto p = midpoint_params();
  const auto st = state_at(PlanarPose(0.2, 0.1, 0.4), p);
  const sim::PushCommand cmd{{-(p.half_length() + 0.02), 0.0}, {0.0, 0.0}};
  const auto res = sim::step_push(st, cmd);
  CHECK(res.motion.dx == 0.0);
  CHECK(res.motion.dy == 0.0);
  CHECK(res.motion.dyaw == 0.0);
  CHECK(res.state.object_pose.x == st.object_pose.x);
}

TEST_CASE("step_push: penetrating start throws InvalidCommand") {
  const auto p = midpoint_params();
  const auto st = state_at(PlanarPose(), p);
  CHECK_THROWS_AS(sim::step_push(st, {{0.0, 0.0}, {0.01, 0.0}}), sim::InvalidCommand);
}

TEST_CASE("step_push: centered head-on push is a pure translation") {
  const auto p = midpoint_params();  // com_offset = 0
  const auto st = state_at(PlanarPose(), p);
  const double rp = 0.0125;
  const sim::PushCommand cmd{{-(p.half_length() + rp), 0.0}, {0.02, 0.0}};
  const auto res = sim::step_push(st, cmd);
  CHECK(res.contact);
  CHECK(res.motion.dx > 0.015);
  CHECK(std::fabs(res.motion.dy) < 1e-12);
  CHECK(std::fabs(res.motion.dyaw) < 1e-12);
}

TEST_CASE("step_push: off-center push converges in substep (self-oracle)") {
  const auto p = midpoint_params();
  const auto st = state_at(PlanarPose(), p);
  const double rp = 0.0125;
  const sim::PushCommand cmd{{-(p.half_length() + rp), p.width / 4.0}, {0.02, 0.0}};

  sim::SimConfig coarse;
  coarse.substep = 1e-4;
  sim::SimConfig fine;
  fine.substep = 1e-5;
  const auto rc = sim::step_push(st, cmd, coarse);
  const auto rf = sim::step_push(st, cmd, fine);
  CHECK(rc.contact);
  CHECK(std::fabs(rc.motion.dyaw) > 1e-3);  // genuinely rotates
  CHECK((rc.motion.translation() - rf.motion.translation()).norm() < 1e-4);
  CHECK(std::fabs(wrap_angle(rc.motion.dyaw - rf.motion.dyaw)) < 0.005);
}

TEST_CASE("step_push: substep convergence over the data distribution") {
  Rng rng(41);
  sim::SimConfig coarse;
  coarse.substep = 1e-4;
  sim::SimConfig fine;
  fine.substep = 0.5e-4;  // halving
  for (int i = 0; i < 150; ++i) {
    const auto p = sim::sample_object_params(rng);
    const auto cmd = random_data_push(p, rng, 0.01, coarse.pusher_radius);
    const auto st = state_at(PlanarPose(), p);
    const auto rc = sim::step_push(st, cmd, coarse);
    const auto rf = sim::step_push(st, cmd, fine);
    CHECK((rc.motion.translation() - rf.motion.translation()).norm() < 1e-4);
    CHECK(std::fabs(wrap_angle(rc.motion.dyaw - rf.motion.dyaw)) < 0.005);
  }
}

TEST_CASE("step_push: SE(2) equivariance") {
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const auto p = sim::sample_object_params(rng);
    const auto cmd = random_data_push(p, rng, 0.01, 0.0125);
    const PlanarPose pose(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                          rng.uniform(-3.0, 3.0));
    const PlanarPose xform(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                           rng.uniform(-3.0, 3.0));

    const auto r1 = sim::step_push(state_at(pose, p), cmd);
    const auto r2 = sim::step_push(state_at(compose(xform, pose), p), cmd);

    const PlanarPose moved = compose(xform, r1.state.object_pose);
    CHECK(std::fabs(moved.x - r2.state.object_pose.x) < 1e-9);
    CHECK(std::fabs(moved.y - r2.state.object_pose.y) < 1e-9);
    CHECK(std::fabs(wrap_angle(moved.yaw - r2.state.object_pose.yaw)) < 1e-9);

    const Vec2 pusher_moved = rotate(r1.state.pusher_pos, xform.yaw) + Vec2{xform.x, xform.y};
    CHECK((pusher_moved - r2.state.pusher_pos).norm() < 1e-9);

    // motion is reported in the body frame: identical in both runs
    CHECK(std::fabs(r1.motion.dx - r2.motion.dx) < 1e-12);
    CHECK(std::fabs(r1.motion.dy - r2.motion.dy) < 1e-12);
    CHECK(std::fabs(r1.motion.dyaw - r2.motion.dyaw) < 1e-12);
  }
}

TEST_CASE("step_push: the object is never pulled") {
  Rng rng(47);
  for (int i = 0; i < 500; ++i) {
    const auto p = sim::sample_object_params(rng);
    const auto cmd = random_data_push(p, rng, 0.01, 0.0125);
    const auto res = sim::step_push(state_at(PlanarPose(), p), cmd);
    if (res.contact) CHECK(res.min_normal_progress >= -1e-12);
  }
}

TEST_CASE("step_push: bit-identical determinism") {
  Rng rng(53);
  const auto p = sim::sample_object_params(rng);
  const auto cmd = random_data_push(p, rng, 0.01, 0.0125);
  const auto st = state_at(PlanarPose(0.3, -0.2, 1.1), p);
  const auto a = sim::step_push(st, cmd);
  const auto b = sim::step_push(st, cmd);
  CHECK(a.motion.dx == b.motion.dx);
  CHECK(a.motion.dy == b.motion.dy);
  CHECK(a.motion.dyaw == b.motion.dyaw);
  CHECK(a.state.object_pose.x == b.state.object_pose.x);
}

TEST_CASE("execute_push: approach makes short pushes effective") {
  const auto p = midpoint_params();
  const auto st = state_at(PlanarPose(), p);
  // pusher on the sampling perimeter (1 cm + r_p standoff), 5 mm commanded push
  const double px = p.half_length() + 0.01 + 0.0125;
  const auto res = sim::execute_push(st, {-px, 0.0}, {0.005, 0.0});
  CHECK(res.contact);
  CHECK(res.motion.dx > 0.003);  // most of the commanded 5 mm arrives as motion
  CHECK(res.motion.dx < 0.0056);
}

TEST_CASE("execute_push: a miss produces zero motion") {
  const auto p = midpoint_params();
  const auto st = state_at(PlanarPose(), p);
  const double px = p.half_length() + 0.01 + 0.0125;
  // shooting away from the object
  const auto res = sim::execute_push(st, {-px, 0.0}, {-0.02, 0.0});
  CHECK(!res.contact);
  CHECK(res.motion.dx == 0.0);
  CHECK(res.motion.dy == 0.0);
}

TEST_CASE("step_push: pusher never left penetrating") {
  Rng rng(59);
  for (int i = 0; i < 200; ++i) {
    const auto p = sim::sample_object_params(rng);
    const auto cmd = random_data_push(p, rng, 0.01, 0.0125);
    const auto res = sim::step_push(state_at(PlanarPose(), p), cmd);
    const auto end_body = to_object_frame(res.state.object_pose, res.state.pusher_pos);
    const double d = geom::point_rect_distance(p.half_length(), p.half_width(), end_body.vec());
    CHECK(d >= 0.0125 - 2e-5);
  }
}
