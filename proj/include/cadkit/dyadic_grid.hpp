#pragma once

#include "cadkit/domain.hpp"

#include "json.hpp"

#include <memory>
#include <span>
#include <vector>

namespace cadkit {

// Arc-length interval [s0, s1) of one component.
struct ArcSpan {
  int component = -1;
  double s0 = 0.0;
  double s1 = 0.0;
};

struct DyadicCube {
  int id = -1;
  int k = 0;  // generation
  int j = 0;  // index within the generation
  std::vector<ArcSpan> spans;
  double length = 0.0;  // ℓ(Q) = scale · 2^{-k}
  BoundaryPoint center;  // x_Q
  double radius = 0.0;   // r_Q
  double sigma = 0.0;    // σ(Q)
  double diameter = 0.0;
  double separation = 0.0;  // dist(x_Q, ∂Ω \ Q), infinite for the whole boundary
  int parent = -1;
  std::vector<int> children;
};

struct GridConstants {
  double a0 = kInf;  // min dist(x_Q, E \ Q) / ℓ(Q)
  double c = kInf;   // min r_Q / ℓ(Q)
  double C = 0.0;    // max sup_{y ∈ Q} |y - x_Q| / r_Q (slightly inflated so Q ⊂ open ball)
  double C1 = 0.0;   // max diam(Q) / ℓ(Q)
};

struct ThinBoundaryResult {
  double tau = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;  // indexed by cube id
};

struct ThinBoundaryFit {
  std::vector<ThinBoundaryResult> ladder;
  double eta = 0.0;  // fitted exponent
  double C1 = 0.0;   // envelope constant: max_ratio ≤ C1 τ^η on the ladder
};

// Boundary cubes obtained by repeated arc-length bisection. Generation 0 is the whole
// boundary; generation-k cubes carry arc length about L · 2^{-k} (L the total boundary
// length) and ℓ(Q) = diam(∂Ω) · 2^{-k}. A component whose length is L · 2^{-k_c} stays a
// single cube down to generation k_c and is then bisected.
class DyadicGrid {
 public:
  static DyadicGrid build(const Domain& domain, int depth);
  static DyadicGrid build(std::shared_ptr<const Boundary> boundary, int depth);

  const Boundary& boundary() const { return *boundary_; }
  int depth() const { return depth_; }
  double scale() const { return scale_; }
  double length(int k) const { return std::ldexp(scale_, -k); }
  std::size_t size() const { return cubes_.size(); }
  const std::vector<DyadicCube>& cubes() const { return cubes_; }
  const DyadicCube& cube(int id) const { return cubes_[id]; }
  std::span<const int> generation(int k) const { return generations_[k]; }
  const GridConstants& constants() const { return constants_; }

  // Cube of generation k containing the boundary point p.
  int locate(int k, const BoundaryPoint& p) const;
  int locate(int k, const Point2& x) const { return locate(k, boundary_->nearest(x)); }
  bool contains(int id, const BoundaryPoint& p) const;
  // True when cube a contains cube b (a == b included).
  bool is_ancestor(int a, int b) const;
  int ancestor(int id, int k) const;

  // D_Q: Q and all its descendants, breadth-first.
  std::vector<int> subtree(int id) const;
  // Cubes Q' ⊂ Q with ℓ(Q') = 2^{-levels} ℓ(Q).
  std::vector<int> descendants_at(int id, int levels) const;
  std::vector<ArcPiece> pieces(int id) const;
  // Δ_Q = Δ(x_Q, r_Q).
  SurfaceBall surface_ball(int id) const { return boundary_->ball_intersection(cubes_[id].center.position, cubes_[id].radius); }
  // Boundary points of ∂Ω \ Q within distance `reach` of the box `near`, as segments.
  std::vector<std::pair<Point2, Point2>> complement_near(int id, const Box2& near) const;

  nlohmann::json to_json() const;

 private:
  void measure_cube(DyadicCube& q) const;

  std::shared_ptr<const Boundary> boundary_;
  int depth_ = 0;
  double scale_ = 0.0;
  std::vector<int> split_level_;  // k_c per component
  std::vector<DyadicCube> cubes_;
  std::vector<std::vector<int>> generations_;
  // first cube id of component c within generation k; -1 when c shares the root cube
  std::vector<std::vector<int>> comp_first_;
  GridConstants constants_;
};

// Thin boundaries: per-cube collar ratios H^1{x ∈ Q : dist(x, E \ Q) ≤ τ ℓ(Q)} / σ(Q).
ThinBoundaryResult thin_boundary_check(const DyadicGrid& grid, double tau);
// Least-squares fit of log(max ratio) against log τ over the ladder.
ThinBoundaryFit thin_boundary_fit(const DyadicGrid& grid, std::span<const double> taus);

struct GridAxiomReport {
  double covering_error = 0.0;  // max relative |Σ σ(Q^k_j) - σ(∂Ω)| over generations
  bool nesting = false;
  bool unique_ancestor = false;
  bool diameter_bound = false;  // with the measured C1
  bool inner_ball = false;      // with the measured a0 > 0
  bool containment = false;     // Δ(x_Q, 2 r_Q) ⊂ Q ⊂ Δ(x_Q, C r_Q) on samples
  ThinBoundaryFit thin;
  bool pass = false;
};

// Checks covering, nesting, unique ancestors, the diameter bound, inner balls and thin
// boundaries independently of the construction.
GridAxiomReport check_grid_axioms(const DyadicGrid& grid, std::span<const double> taus);

}  // namespace cadkit
