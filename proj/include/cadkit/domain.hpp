#pragma once

#include "cadkit/geometry.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cadkit {

// One boundary component: a piecewise-linear curve. Closed curves repeat no vertex;
// the closing segment runs from the last vertex back to the first.
struct Polyline {
  std::vector<Point2> vertices;
  bool closed = true;
};

// A point of the boundary together with its position in the arc-length chart.
struct BoundaryPoint {
  Point2 position = Point2::Zero();
  int component = -1;
  int segment = -1;
  double t = 0.0;          // parameter along the segment, in [0, 1]
  double arclength = 0.0;  // coordinate along the component, in [0, length)
};

// A sub-segment [t0, t1] of one boundary segment.
struct ArcPiece {
  int component = -1;
  int segment = -1;
  double t0 = 0.0;
  double t1 = 0.0;
  Point2 a = Point2::Zero();
  Point2 b = Point2::Zero();

  double length() const { return (b - a).norm(); }
};

// Delta(x, r) = B(x, r) ∩ ∂Ω for the open Euclidean ball.
struct SurfaceBall {
  Point2 center = Point2::Zero();
  double radius = 0.0;
  std::vector<ArcPiece> arcs;
  double measure = 0.0;
};

// Piecewise-linear boundary in the plane with an arc-length chart and a uniform
// spatial hash over its segments. Open curves are allowed here (a boundary may be
// studied on its own); a Domain requires every component to be closed.
class Boundary {
 public:
  explicit Boundary(std::vector<Polyline> components);

  std::size_t num_components() const { return components_.size(); }
  const Polyline& component(int c) const { return components_[c]; }
  int num_segments(int c) const { return static_cast<int>(seg_start_[c + 1] - seg_start_[c]); }
  int total_segments() const { return static_cast<int>(seg_start_.back()); }
  Point2 segment_a(int c, int i) const;
  Point2 segment_b(int c, int i) const;
  double segment_length(int c, int i) const { return cum_[c][i + 1] - cum_[c][i]; }
  double segment_start_arclength(int c, int i) const { return cum_[c][i]; }

  double component_length(int c) const { return cum_[c].back(); }
  double total_length() const { return total_length_; }
  // Exact max over vertex pairs; vertices realise the diameter of a polyline set.
  double diameter() const { return diameter_; }
  const Box2& bbox() const { return bbox_; }

  BoundaryPoint point_at(int c, double s) const;
  BoundaryPoint nearest(const Point2& x) const;
  double unsigned_distance(const Point2& x) const;
  // Exact dist(box, ∂Ω) for a closed axis-aligned box.
  double distance_to_box(const Box2& box) const;
  double brute_force_distance(const Point2& x) const;

  // Pieces covering the arc-length interval [s0, s1) of component c. On closed
  // components s1 may exceed the length (the interval wraps).
  std::vector<ArcPiece> arc_pieces(int c, double s0, double s1) const;
  double arclength_of(int c, int segment, double t) const { return cum_[c][segment] + t * segment_length(c, segment); }

  // Boundary ∩ B(x, r) without any admissibility checks.
  SurfaceBall ball_intersection(const Point2& x, double r) const;

  // Points equally spaced in arc length over the whole boundary.
  std::vector<BoundaryPoint> sample(int count) const;

  // Visit the global ids of segments registered in hash cells meeting `region`.
  template <class F>
  void for_each_candidate(const Box2& region, F&& f) const;

  std::pair<int, int> segment_of_global(int g) const { return seg_owner_[g]; }

  // Ray-parity crossing count of the horizontal ray from p towards +x.
  int crossings_to_right(const Point2& p) const;
  int crossings_brute_force(const Point2& p) const;

 private:
  struct Hash {
    Point2 origin = Point2::Zero();
    double cell = 1.0;
    int nx = 1;
    int ny = 1;
    std::vector<std::vector<int>> cells;
  };

  void build_hash();
  int cell_x(double x) const;
  int cell_y(double y) const;

  std::vector<Polyline> components_;
  std::vector<std::vector<double>> cum_;
  std::vector<std::size_t> seg_start_;
  std::vector<std::pair<int, int>> seg_owner_;
  double total_length_ = 0.0;
  double diameter_ = 0.0;
  Box2 bbox_;
  Hash hash_;
};

// Open planar set bounded by closed polylines. Points are interior when the
// horizontal ray parity is odd. Immutable after construction.
class Domain {
 public:
  Domain(std::vector<Polyline> components, std::optional<Point2> interior_hint = std::nullopt);

  static Domain from_json(const nlohmann::json& j);
  static Domain load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  int ambient_dim() const { return 2; }
  const Boundary& boundary() const { return boundary_; }
  const Box2& bbox() const { return boundary_.bbox(); }
  double boundary_diameter() const { return boundary_.diameter(); }

  // δ(X) = dist(X, ∂Ω), negative outside the closure.
  double signed_distance(const Point2& x) const;
  double delta(const Point2& x) const { return boundary_.unsigned_distance(x); }
  bool inside(const Point2& x) const;
  bool inside_brute_force(const Point2& x) const;
  // True when the interior lies to the left when walking component c forwards.
  bool interior_on_left(int c) const { return interior_left_[c]; }

  // Half-plane proxies and similar truncations of unbounded sets carry this mark so
  // reports can flag them.
  bool truncated_proxy() const { return truncated_proxy_; }
  void set_truncated_proxy(bool v) { truncated_proxy_ = v; }
  const std::optional<Point2>& interior_hint() const { return interior_hint_; }

 private:
  Boundary boundary_;
  std::vector<bool> interior_left_;
  std::optional<Point2> interior_hint_;
  bool truncated_proxy_ = false;
};

// Checked surface ball: x must lie on ∂Ω (within 1e-9) and 0 < r < diam(∂Ω).
SurfaceBall surface_ball(const Boundary& boundary, const Point2& x, double r);
inline SurfaceBall surface_ball(const Domain& domain, const Point2& x, double r) {
  return surface_ball(domain.boundary(), x, r);
}

struct ARScale {
  double radius = 0.0;
  double lower = kInf;
  double upper = 0.0;
};

struct ARReport {
  double lower = kInf;  // min σ(Δ(x,r)) / r^n
  double upper = 0.0;   // max σ(Δ(x,r)) / r^n
  bool pass = false;
  bool truncated_proxy = false;
  std::vector<ARScale> per_scale;
};

// Ahlfors-regularity constants over centres × radii (n = 1 in the plane).
ARReport ar_check(const Boundary& boundary, std::span<const BoundaryPoint> centers, std::span<const double> radii);
ARReport ar_check(const Domain& domain, std::span<const BoundaryPoint> centers, std::span<const double> radii);

// Geometric ladder r_max·2^{-i}, i = 0..count-1.
std::vector<double> radius_ladder(double r_max, int count);

// ---- implementation of the template member ----

template <class F>
void Boundary::for_each_candidate(const Box2& region, F&& f) const {
  const int x0 = cell_x(region.lo.x()), x1 = cell_x(region.hi.x());
  const int y0 = cell_y(region.lo.y()), y1 = cell_y(region.hi.y());
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      for (int g : hash_.cells[static_cast<std::size_t>(iy) * hash_.nx + ix]) f(g);
    }
  }
}

}  // namespace cadkit
