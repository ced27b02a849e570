#include "pushlab/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pushlab::geom {

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// integral of |r| over [0,a]x[0,b], a,b >= 0
double corner_integral(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  const double d = std::hypot(a, b);
  return (2.0 * a * b * d + a * a * a * std::asinh(b / a) + b * b * b * std::asinh(a / b)) / 6.0;
}

}  // namespace

Vec2 closest_point_on_rect(double hx, double hy, const Vec2& p) {
  return {clampd(p.x, -hx, hx), clampd(p.y, -hy, hy)};
}

double point_rect_distance(double hx, double hy, const Vec2& p) {
  return (p - closest_point_on_rect(hx, hy, p)).norm();
}

double signed_point_rect_distance(double hx, double hy, const Vec2& p) {
  const double dx = std::fabs(p.x) - hx;
  const double dy = std::fabs(p.y) - hy;
  if (dx > 0.0 || dy > 0.0) {
    return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  }
  return std::max(dx, dy);  // negative: -depth
}

Vec2 closest_boundary_point(double hx, double hy, const Vec2& p, Vec2* outward_normal) {
  const double dx = std::fabs(p.x) - hx;
  const double dy = std::fabs(p.y) - hy;
  if (dx > 0.0 || dy > 0.0) {
    const Vec2 cp = closest_point_on_rect(hx, hy, p);
    if (outward_normal) {
      const Vec2 d = p - cp;
      const double n = d.norm();
      *outward_normal = n > 0.0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
    }
    return cp;
  }
  // interior (or exactly on the boundary): project to the nearest face
  if (dx >= dy) {
    const double sx = p.x >= 0.0 ? 1.0 : -1.0;
    if (outward_normal) *outward_normal = {sx, 0.0};
    return {sx * hx, p.y};
  }
  const double sy = p.y >= 0.0 ? 1.0 : -1.0;
  if (outward_normal) *outward_normal = {0.0, sy};
  return {p.x, sy * hy};
}

std::optional<double> ray_rounded_rect(const Vec2& origin, const Vec2& dir_unit, double hx,
                                       double hy, double radius) {
  double best = std::numeric_limits<double>::infinity();
  const double eps = 1e-15;

  // Offset face lines, restricted to the face extent.
  struct Face {
    Vec2 n;       // outward
    double off;   // plane offset: n . p == off on the offset face
    double hext;  // tangential half extent
  };
  const Face faces[4] = {
      {{1.0, 0.0}, hx + radius, hy},
      {{-1.0, 0.0}, hx + radius, hy},
      {{0.0, 1.0}, hy + radius, hx},
      {{0.0, -1.0}, hy + radius, hx},
  };
  for (const auto& f : faces) {
    const double dn = f.n.dot(dir_unit);
    if (dn >= -eps) continue;  // not entering through this face
    const double t = (f.off - f.n.dot(origin)) / dn;
    if (t < -1e-12 || t >= best) continue;
    const Vec2 hit = origin + std::max(t, 0.0) * dir_unit;
    const double tang = std::fabs(f.n.x) > 0.5 ? hit.y : hit.x;
    if (std::fabs(tang) <= f.hext) best = std::max(t, 0.0);
  }

  // Corner circles.
  for (int sx = -1; sx <= 1; sx += 2) {
    for (int sy = -1; sy <= 1; sy += 2) {
      const Vec2 c{sx * hx, sy * hy};
      const Vec2 oc = origin - c;
      const double b = oc.dot(dir_unit);
      const double q = oc.squared_norm() - radius * radius;
      const double disc = b * b - q;
      if (disc < 0.0) continue;
      const double root = std::sqrt(disc);
      double t = -b - root;  // first intersection
      if (t < -1e-12) continue;
      t = std::max(t, 0.0);
      // entering only
      const Vec2 hit = origin + t * dir_unit;
      if ((hit - c).dot(dir_unit) >= 0.0) continue;
      best = std::min(best, t);
    }
  }

  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

PerimeterPoint rect_face_point(double hx, double hy, int face, double s) {
  switch (face & 3) {
    case 0:
      return {{hx, -hy + 2.0 * hy * s}, {-1.0, 0.0}, 0};
    case 1:
      return {{hx - 2.0 * hx * s, hy}, {0.0, -1.0}, 1};
    case 2:
      return {{-hx, hy - 2.0 * hy * s}, {1.0, 0.0}, 2};
    default:
      return {{-hx + 2.0 * hx * s, -hy}, {0.0, 1.0}, 3};
  }
}

PerimeterPoint rect_perimeter_point(double hx, double hy, double t) {
  t -= std::floor(t);
  const double lx = 2.0 * hx;
  const double ly = 2.0 * hy;
  const double total = 2.0 * lx + 2.0 * ly;
  double d = t * total;
  if (d < ly) return rect_face_point(hx, hy, 0, d / ly);
  d -= ly;
  if (d < lx) return rect_face_point(hx, hy, 1, d / lx);
  d -= lx;
  if (d < ly) return rect_face_point(hx, hy, 2, d / ly);
  d -= ly;
  return rect_face_point(hx, hy, 3, std::min(d / lx, 1.0));
}

double mean_distance_to_point(double hx, double hy, const Vec2& c) {
  const double a1 = hx - c.x;
  const double a2 = hx + c.x;
  const double b1 = hy - c.y;
  const double b2 = hy + c.y;
  const double integral = corner_integral(a1, b1) + corner_integral(a1, b2) +
                          corner_integral(a2, b1) + corner_integral(a2, b2);
  return integral / (4.0 * hx * hy);
}

std::array<Vec2, 4> Obb::corners() const {
  const double cs = std::cos(pose.yaw);
  const double sn = std::sin(pose.yaw);
  const Vec2 ex{cs * hx, sn * hx};
  const Vec2 ey{-sn * hy, cs * hy};
  const Vec2 ctr{pose.x, pose.y};
  return {ctr + ex + ey, ctr - ex + ey, ctr - ex - ey, ctr + ex - ey};
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = clampd((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

namespace {

bool obbs_overlap(const std::array<Vec2, 4>& pa, const std::array<Vec2, 4>& pb) {
  // Separating axis test on the 4 face normals.
  const std::array<Vec2, 4>* polys[2] = {&pa, &pb};
  for (int pi = 0; pi < 2; ++pi) {
    const auto& poly = *polys[pi];
    for (int i = 0; i < 4; ++i) {
      const Vec2 edge = poly[(i + 1) & 3] - poly[i];
      const Vec2 axis = edge.perp();
      double amin = std::numeric_limits<double>::infinity(), amax = -amin;
      double bmin = amin, bmax = amax;
      for (int k = 0; k < 4; ++k) {
        const double a = axis.dot(pa[k]);
        const double b = axis.dot(pb[k]);
        amin = std::min(amin, a);
        amax = std::max(amax, a);
        bmin = std::min(bmin, b);
        bmax = std::max(bmax, b);
      }
      if (amax < bmin || bmax < amin) return false;
    }
  }
  return true;
}

}  // namespace

double obb_distance(const Obb& a, const Obb& b) {
  const auto pa = a.corners();
  const auto pb = b.corners();
  if (obbs_overlap(pa, pb)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(pa[i], pb[j], pb[(j + 1) & 3]));
      best = std::min(best, point_segment_distance(pb[i], pa[j], pa[(j + 1) & 3]));
    }
  }
  return best;
}

double point_obb_distance(const Vec2& p, const Obb& o) {
  const ObjectFramePoint local = to_object_frame(o.pose, p);
  return point_rect_distance(o.hx, o.hy, local.vec());
}

}  // namespace pushlab::geom
