#include "pushlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pushlab::sim {

ObjectParams sample_object_params(Rng& rng, const DomainRandomization& dr) {
  ObjectParams p;
  p.friction = rng.uniform(dr.friction_min, dr.friction_max);
  p.restitution = rng.uniform(dr.restitution_min, dr.restitution_max);
  p.length = rng.uniform(dr.length_min, dr.length_max);
  p.width = rng.uniform(dr.width_min, dr.width_max);
  p.mass = rng.uniform(dr.mass_min, dr.mass_max);
  const double bx = dr.com_frac * p.half_length();
  const double by = dr.com_frac * p.half_width();
  p.com_offset = {rng.uniform(-bx, bx), rng.uniform(-by, by)};
  return p;
}

ObjectParams sample_object_params(std::uint64_t rng_seed, const DomainRandomization& dr) {
  Rng rng(rng_seed);
  return sample_object_params(rng, dr);
}

double limit_surface_ratio(const ObjectParams& p) {
  return geom::mean_distance_to_point(p.half_length(), p.half_width(), p.com_offset);
}

bool pusher_collides(const ObjectParams& p, const ObjectFramePoint& candidate,
                     double pusher_radius) {
  return geom::point_rect_distance(p.half_length(), p.half_width(), candidate.vec()) <
         pusher_radius;
}

namespace {

struct Twist {
  Vec2 v;          // displacement of the center of friction, current body frame
  double w{0.0};   // rotation about the center of friction
  double normal_progress{0.0};
  bool contact{false};
};

// Quasi-static single-contact solve: given the pusher displacement `du`
// (current body frame) at contact point `cp` with inward normal `n`,
// returns the object twist from the ellipsoidal limit-surface model
// (c2 = c^2) with friction cone coefficient mu.
Twist contact_twist(const Vec2& cp, const Vec2& n, const Vec2& du, const Vec2& com, double c2,
                    double mu) {
  Twist out;
  const Vec2 rho = cp - com;
  const Vec2 pp = rho.perp();

  // Sticking hypothesis: contact point moves with the pusher.
  // Solve (I + pp pp^T / c2) f = du.
  const double a11 = 1.0 + pp.x * pp.x / c2;
  const double a12 = pp.x * pp.y / c2;
  const double a22 = 1.0 + pp.y * pp.y / c2;
  const double det = a11 * a22 - a12 * a12;
  const Vec2 f{(a22 * du.x - a12 * du.y) / det, (a11 * du.y - a12 * du.x) / det};

  const Vec2 t = n.perp();
  const double fn = f.dot(n);
  const double ft = f.dot(t);
  if (fn > 0.0 && std::fabs(ft) <= mu * fn) {
    out.v = f;
    out.w = rho.cross(f) / c2;
    out.normal_progress = fn;
    out.contact = true;
    return out;
  }

  // Sliding: wrench pinned to the violated friction-cone edge; the normal
  // components of pusher and contact-point motion must match.
  const double side = ft >= 0.0 ? 1.0 : -1.0;
  const Vec2 fe = n + mu * side * t;
  const double we = rho.cross(fe) / c2;
  const Vec2 ue = fe + we * pp;
  const double denom = ue.dot(n);
  if (denom <= 1e-12) return out;
  const double k = du.dot(n) / denom;
  if (k <= 0.0) return out;
  out.v = k * fe;
  out.w = k * we;
  out.normal_progress = k * fe.dot(n);
  out.contact = true;
  return out;
}

PlanarPose apply_twist(const PlanarPose& x, const Twist& t, const Vec2& com, double scale) {
  const double w = t.w * scale;
  const Vec2 v = t.v * scale;
  // Body-frame increment: rotation w about com plus translation v of com.
  const Vec2 trans = com + v - rotate(com, w);
  return compose(x, PlanarPose(trans.x, trans.y, w));
}

}  // namespace

StepResult step_push(const WorldState& state, const PushCommand& cmd, const SimConfig& cfg) {
  const ObjectParams& par = state.params;
  const double hx = par.half_length();
  const double hy = par.half_width();
  const double rp = cfg.pusher_radius;
  const double ctol = cfg.contact_tol;
  const Vec2 start = cmd.start.vec();

  if (geom::point_rect_distance(hx, hy, start) < rp - ctol) {
    throw InvalidCommand("push start penetrates the object");
  }

  StepResult res;
  res.min_normal_progress = 0.0;
  const double total = cmd.delta.norm();
  if (total == 0.0) {
    res.state = state;
    res.state.pusher_pos = to_world_frame(state.object_pose, cmd.start);
    res.motion = PlanarMotion{};
    return res;
  }
  const Vec2 u0 = cmd.delta.vec() * (1.0 / total);

  const double mu = cfg.friction_wiring == FrictionWiring::kPusherObject
                        ? par.friction
                        : cfg.fixed_pusher_friction;
  const double c = limit_surface_ratio(par);
  const double c2 = c * c;
  const Vec2 com = par.com_offset;

  // Everything below runs in the body frame of the pre-push object pose, so
  // the result is exactly SE(2) equivariant. X is the object's relative pose.
  PlanarPose X;
  double s = 0.0;
  bool any_contact = false;
  double min_prog = std::numeric_limits<double>::infinity();

  const auto pusher_at = [&](double arc) { return start + arc * u0; };

  // Twist for advancing the pusher by `h` from arc position `arc`, with the
  // object at relative pose `x`.
  const auto eval = [&](const PlanarPose& x, double arc, double h) -> Twist {
    const Vec2 qb = to_object_frame(x, pusher_at(arc)).vec();
    if (geom::point_rect_distance(hx, hy, qb) >= rp + ctol) return {};
    Vec2 n_out;
    const Vec2 cp = geom::closest_boundary_point(hx, hy, qb, &n_out);
    const Vec2 n_in = -n_out;
    const Vec2 du = rotate(u0, -x.yaw) * h;
    if (du.dot(n_in) <= 0.0) return {};
    return contact_twist(cp, n_in, du, com, c2, mu);
  };

  int guard = 0;
  const int max_iters = static_cast<int>(total / cfg.substep) + 1024;
  while (s < total - 1e-15 && ++guard < 4 * max_iters) {
    const Vec2 qb = to_object_frame(X, pusher_at(s)).vec();
    const double dist = geom::point_rect_distance(hx, hy, qb);

    if (dist >= rp + ctol) {
      // Free flight: exact ray query against the r_p-inflated footprint in
      // the current body frame (the object cannot move without contact).
      const Vec2 ub = rotate(u0, -X.yaw);
      const auto hit = geom::ray_rounded_rect(qb, ub, hx, hy, rp);
      if (!hit || s + *hit >= total) {
        s = total;
        break;
      }
      s += std::max(*hit, 0.0);
      continue;
    }

    const double h = std::min(cfg.substep, total - s);
    const Twist t1 = eval(X, s, h);
    if (t1.contact) {
      any_contact = true;
      // Midpoint step; fall back to the full Euler twist if the midpoint
      // evaluation loses contact.
      const PlanarPose xh = apply_twist(X, t1, com, 0.5);
      const Twist t2 = eval(xh, s + 0.5 * h, h);
      const Twist& applied = t2.contact ? t2 : t1;
      X = apply_twist(X, applied, com, 1.0);
      min_prog = std::min(min_prog, applied.normal_progress);
    }
    s += h;

    // Positional correction: keep the pusher from sinking into the object.
    const Vec2 qb2 = to_object_frame(X, pusher_at(s)).vec();
    const double d2 = geom::point_rect_distance(hx, hy, qb2);
    if (d2 < rp - ctol) {
      Vec2 n_out;
      geom::closest_boundary_point(hx, hy, qb2, &n_out);
      const double depth = rp - d2;
      X = compose(X, PlanarPose(-depth * n_out.x, -depth * n_out.y, 0.0));
    }
  }

  res.motion = PlanarMotion(X.x, X.y, X.yaw);
  res.contact = any_contact;
  res.min_normal_progress = any_contact ? min_prog : 0.0;
  res.state.params = par;
  res.state.object_pose = compose(state.object_pose, X);
  res.state.pusher_pos =
      to_world_frame(state.object_pose, ObjectFramePoint(pusher_at(total)));
  return res;
}

StepResult execute_push(const WorldState& state, const ObjectFramePoint& ro,
                        const ObjectFramePoint& d_ro, const SimConfig& cfg) {
  const double mag = d_ro.norm();
  if (mag == 0.0) {
    return step_push(state, PushCommand{ro, d_ro}, cfg);
  }
  const Vec2 dir = d_ro.vec() * (1.0 / mag);
  const auto hit = geom::ray_rounded_rect(ro.vec(), dir, state.params.half_length(),
                                          state.params.half_width(), cfg.pusher_radius);
  const double travel = (hit ? *hit : 0.0) + mag;
  return step_push(state, PushCommand{ro, ObjectFramePoint(dir * travel)}, cfg);
}

}  // namespace pushlab::sim
