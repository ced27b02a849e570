#pragma once

#include <cmath>

#include "pushlab/vec2.hpp"

namespace pushlab {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

/// SE(2) element: object poses, targets, waypoints. Yaw is normalized to
/// (-pi, pi] on construction.
struct PlanarPose {
  double x{0.0};
  double y{0.0};
  double yaw{0.0};

  PlanarPose() = default;
  PlanarPose(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(wrap_angle(yaw_)) {}

  Vec2 position() const { return {x, y}; }
};

/// Relative SE(2) motion expressed in the body frame of the earlier pose.
struct PlanarMotion {
  double dx{0.0};
  double dy{0.0};
  double dyaw{0.0};

  PlanarMotion() = default;
  PlanarMotion(double dx_, double dy_, double dyaw_) : dx(dx_), dy(dy_), dyaw(wrap_angle(dyaw_)) {}

  Vec2 translation() const { return {dx, dy}; }
};

/// A point expressed in the object's body frame (pusher position RO,
/// push vector dRO).
struct ObjectFramePoint {
  double u{0.0};
  double v{0.0};

  ObjectFramePoint() = default;
  ObjectFramePoint(double u_, double v_) : u(u_), v(v_) {}
  explicit ObjectFramePoint(const Vec2& p) : u(p.x), v(p.y) {}

  Vec2 vec() const { return {u, v}; }
  double norm() const { return std::hypot(u, v); }
};

inline PlanarPose compose(const PlanarPose& a, const PlanarPose& b) {
  const double c = std::cos(a.yaw);
  const double s = std::sin(a.yaw);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.yaw + b.yaw};
}

inline PlanarPose inverse(const PlanarPose& p) {
  const double c = std::cos(p.yaw);
  const double s = std::sin(p.yaw);
  return {-(c * p.x + s * p.y), -(-s * p.x + c * p.y), -p.yaw};
}

/// O_{t+1} = O_t applied with the body-frame motion.
inline PlanarPose advance(const PlanarPose& pose, const PlanarMotion& m) {
  return compose(pose, PlanarPose(m.dx, m.dy, m.dyaw));
}

/// Motion prev^-1 * curr, expressed in the body frame of `prev`.
inline PlanarMotion relative_motion(const PlanarPose& prev, const PlanarPose& curr) {
  const double c = std::cos(prev.yaw);
  const double s = std::sin(prev.yaw);
  const double dx = curr.x - prev.x;
  const double dy = curr.y - prev.y;
  return {c * dx + s * dy, -s * dx + c * dy, curr.yaw - prev.yaw};
}

inline ObjectFramePoint to_object_frame(const PlanarPose& object, const Vec2& world_point) {
  const double c = std::cos(object.yaw);
  const double s = std::sin(object.yaw);
  const double dx = world_point.x - object.x;
  const double dy = world_point.y - object.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

inline Vec2 to_world_frame(const PlanarPose& object, const ObjectFramePoint& p) {
  const double c = std::cos(object.yaw);
  const double s = std::sin(object.yaw);
  return {object.x + c * p.u - s * p.v, object.y + s * p.u + c * p.v};
}

/// Non-oriented angular difference: min(|t1-t2|, 2pi - |t1-t2|), in [0, pi].
inline double ang_diff(double t1, double t2) {
  double d = std::fmod(std::fabs(t1 - t2), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

/// Squared position distance plus weighted squared non-oriented yaw distance.
inline double pose_diff(const PlanarPose& p1, const PlanarPose& p2, double w_theta) {
  const double dx = p1.x - p2.x;
  const double dy = p1.y - p2.y;
  const double da = ang_diff(p1.yaw, p2.yaw);
  return dx * dx + dy * dy + w_theta * da * da;
}

}  // namespace pushlab
