#pragma once

#include <array>
#include <optional>

#include "pushlab/se2.hpp"

namespace pushlab::geom {

// Axis-aligned rectangle centered at the origin with half extents (hx, hy).
// Oriented rectangles are handled through Obb below.

/// Closest point of the solid rectangle to p (p itself when inside).
Vec2 closest_point_on_rect(double hx, double hy, const Vec2& p);

/// Euclidean distance from p to the solid rectangle; 0 inside.
double point_rect_distance(double hx, double hy, const Vec2& p);

/// Positive outside, negative (= -penetration depth) inside.
double signed_point_rect_distance(double hx, double hy, const Vec2& p);

/// Closest point on the rectangle *boundary*, with the outward normal there.
/// Well-defined for interior points too (nearest face).
Vec2 closest_boundary_point(double hx, double hy, const Vec2& p, Vec2* outward_normal = nullptr);

/// Smallest t >= 0 such that |origin + t*dir - rect| == radius with the ray
/// entering the inflated (rounded-rectangle) set. nullopt when the ray
/// misses or only exits.
std::optional<double> ray_rounded_rect(const Vec2& origin, const Vec2& dir_unit, double hx,
                                       double hy, double radius);

struct PerimeterPoint {
  Vec2 point;
  Vec2 inward_normal;
  int face;  // 0:+x 1:+y 2:-x 3:-y
};

/// Arc-length parametrization of the rectangle boundary, t in [0, 1).
PerimeterPoint rect_perimeter_point(double hx, double hy, double t);

/// Point at parameter s in [0,1) along one face of the rectangle boundary.
PerimeterPoint rect_face_point(double hx, double hy, int face, double s);

/// Mean distance from c to the rectangle area: (1/A) * integral |r - c| dA.
/// Closed form; c must lie inside the rectangle. This is the ellipsoidal
/// limit-surface ratio tau_max / f_max for a uniform pressure distribution.
double mean_distance_to_point(double hx, double hy, const Vec2& c);

/// Oriented box (obstacles, object footprints).
struct Obb {
  PlanarPose pose;
  double hx{0.0};
  double hy{0.0};

  std::array<Vec2, 4> corners() const;
};

/// Exact separation distance between two oriented boxes; 0 when overlapping.
double obb_distance(const Obb& a, const Obb& b);

/// Distance from a world point to an oriented box; 0 inside.
double point_obb_distance(const Vec2& p, const Obb& o);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace pushlab::geom
