#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace cadkit {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed axis-aligned rectangle [lo, hi].
struct Box2 {
  Point2 lo{kInf, kInf};
  Point2 hi{-kInf, -kInf};

  static Box2 from_corner(const Point2& corner, double side) {
    return {corner, corner + Point2(side, side)};
  }
  bool empty() const { return lo.x() > hi.x() || lo.y() > hi.y(); }
  void expand(const Point2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Point2 center() const { return 0.5 * (lo + hi); }
  Point2 size() const { return hi - lo; }
  double area() const { return empty() ? 0.0 : size().x() * size().y(); }
  double diameter() const { return size().norm(); }
  bool contains(const Point2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  bool contains_open(const Point2& p) const {
    return p.x() > lo.x() && p.x() < hi.x() && p.y() > lo.y() && p.y() < hi.y();
  }
  // Dilation about the center by `factor` (so factor 1 + lambda gives I*).
  Box2 scaled(double factor) const {
    const Point2 c = center();
    const Point2 half = 0.5 * factor * size();
    return {c - half, c + half};
  }
  Box2 inflated(double margin) const {
    return {lo - Point2(margin, margin), hi + Point2(margin, margin)};
  }
  bool intersects(const Box2& o) const {
    return lo.x() <= o.hi.x() && o.lo.x() <= hi.x() && lo.y() <= o.hi.y() && o.lo.y() <= hi.y();
  }
  Box2 intersection(const Box2& o) const {
    return {lo.cwiseMax(o.lo), hi.cwiseMin(o.hi)};
  }
  double distance_to(const Point2& p) const {
    const double dx = std::max({lo.x() - p.x(), 0.0, p.x() - hi.x()});
    const double dy = std::max({lo.y() - p.y(), 0.0, p.y() - hi.y()});
    return std::hypot(dx, dy);
  }
  double distance_to(const Box2& o) const {
    const double dx = std::max({lo.x() - o.hi.x(), 0.0, o.lo.x() - hi.x()});
    const double dy = std::max({lo.y() - o.hi.y(), 0.0, o.lo.y() - hi.y()});
    return std::hypot(dx, dy);
  }
};

struct SegmentProjection {
  double t = 0.0;  // parameter on [0, 1]
  double distance = kInf;
};

inline SegmentProjection project_to_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {t, (a + t * ab - p).norm()};
}

inline double cross2(const Point2& u, const Point2& v) { return u.x() * v.y() - u.y() * v.x(); }

// Parameter interval of segment a->b lying in the open ball B(c, r); nullopt when empty.
inline std::optional<std::pair<double, double>> segment_ball_interval(const Point2& a, const Point2& b,
                                                                      const Point2& c, double r) {
  const Point2 d = b - a;
  const Point2 f = a - c;
  const double qa = d.squaredNorm();
  if (qa == 0.0) return std::nullopt;
  const double qb = 2.0 * f.dot(d);
  const double qc = f.squaredNorm() - r * r;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
  const double t1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
  if (t1 <= t0) return std::nullopt;
  return std::make_pair(t0, t1);
}

// True when the segments [a,b] and [c,d] share a point.
inline bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  auto orient = [](const Point2& p, const Point2& q, const Point2& r) {
    const double v = cross2(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_seg = [](const Point2& p, const Point2& q, const Point2& r) {
    return std::min(p.x(), r.x()) <= q.x() && q.x() <= std::max(p.x(), r.x()) &&
           std::min(p.y(), r.y()) <= q.y() && q.y() <= std::max(p.y(), r.y());
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(a, c, b)) return true;
  if (o2 == 0 && on_seg(a, d, b)) return true;
  if (o3 == 0 && on_seg(c, a, d)) return true;
  if (o4 == 0 && on_seg(c, b, d)) return true;
  return false;
}

inline double segment_segment_distance(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({project_to_segment(a, c, d).distance, project_to_segment(b, c, d).distance,
                   project_to_segment(c, a, b).distance, project_to_segment(d, a, b).distance});
}

// Exact distance between a closed axis-aligned box and a segment.
inline double box_segment_distance(const Box2& box, const Point2& a, const Point2& b) {
  if (box.contains(a) || box.contains(b)) return 0.0;
  const Point2 c00 = box.lo, c11 = box.hi;
  const Point2 c10(c11.x(), c00.y()), c01(c00.x(), c11.y());
  return std::min({segment_segment_distance(a, b, c00, c10), segment_segment_distance(a, b, c10, c11),
                   segment_segment_distance(a, b, c11, c01), segment_segment_distance(a, b, c01, c00)});
}

// Closest point on triangle (a,b,c) to p (Ericson, Real-Time Collision Detection 5.1.5).
inline Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  const Point3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Point3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Point3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace cadkit
