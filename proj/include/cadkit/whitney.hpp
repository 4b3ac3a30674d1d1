#pragma once

#include "cadkit/domain.hpp"
#include "cadkit/dyadic_grid.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace cadkit {

struct WhitneyBox {
  int id = -1;
  int k = 0;  // generation: side = unit · 2^{-k}
  std::int64_t ix = 0, iy = 0;
  Box2 box;
  double side = 0.0;
  double dist = 0.0;  // dist(I, ∂Ω), exact
  Point2 center() const { return box.center(); }
  double diameter() const { return side * std::sqrt(2.0); }
};

struct WhitneyParams {
  double lambda = 0.125;
  // Whitney generation k has side (grid scale) · 2^{-k - generation_offset}, which puts
  // generation-k boxes at height comparable to ℓ(Q) for generation-k cubes.
  int generation_offset = 6;
  // Boxes finer than this generation are not generated (the decomposition is truncated
  // near ∂Ω). Negative means grid depth + 1.
  int finest_generation = -1;
};

// Dyadic Whitney decomposition of a truncation of Ω: maximal lattice squares I with
// dist(I, ∂Ω) ≥ 16 diam(I), anchored at the lower-left corner of the boundary's bounding box.
class Whitney {
 public:
  static Whitney build(const Domain& domain, const DyadicGrid& grid, const WhitneyParams& params = {});

  const Domain& domain() const { return *domain_; }
  const DyadicGrid& grid() const { return *grid_; }
  const WhitneyParams& params() const { return params_; }
  double lambda() const { return params_.lambda; }
  int finest_generation() const { return finest_; }
  int coarsest_generation() const { return coarsest_; }
  double side(int k) const { return std::ldexp(unit_, -k); }

  std::size_t size() const { return boxes_.size(); }
  const std::vector<WhitneyBox>& boxes() const { return boxes_; }
  const WhitneyBox& box(int id) const { return boxes_[id]; }
  const std::vector<int>& by_generation(int k) const;

  // Box whose half-open cell [lo, hi) contains X, or -1.
  int locate(const Point2& x) const;
  // Boxes sharing a side segment of positive length.
  const std::vector<int>& face_neighbors(int id) const { return face_[id]; }
  // Boxes whose boundaries meet (sides or corners).
  const std::vector<int>& touching(int id) const { return touch_[id]; }
  // True when the boundary of box `id` meets an interior point of Ω not covered by
  // any generated box (the truncation layer).
  bool touches_truncation(int id) const { return touches_gap_[id]; }

  // Fattening (1 + level·λ)I for level 1, 2, 4 (I*, I**, I***), or any factor.
  Box2 fattened(int id, double factor) const { return boxes_[id].box.scaled(factor); }
  Box2 star(int id, int stars) const;

  // Q_I*: the cube of generation k_I (clamped to the grid) containing a boundary point
  // that realises dist(I, ∂Ω); ties resolved by lowest cube id.
  int nearest_cube(int id) const;

 private:
  static std::uint64_t key(int k, std::int64_t ix, std::int64_t iy);
  int find(int k, std::int64_t ix, std::int64_t iy) const;

  const Domain* domain_ = nullptr;
  const DyadicGrid* grid_ = nullptr;
  WhitneyParams params_;
  double unit_ = 1.0;
  Point2 origin_ = Point2::Zero();
  int coarsest_ = 0;
  int finest_ = 0;
  std::vector<WhitneyBox> boxes_;
  std::vector<std::vector<int>> by_gen_;
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<std::vector<int>> face_, touch_;
  std::vector<bool> touches_gap_;
};

// Exact closest point on segment [a, b] to the box, with its distance.
std::pair<Point2, double> segment_box_closest(const Point2& a, const Point2& b, const Box2& box);

struct WhitneyCheck {
  double min_dist_ratio = kInf;  // min dist(I, ∂Ω) / diam(I)
  double max_dist_ratio = 0.0;   // max dist(I, ∂Ω) / diam(I)
  double min_dilated_ratio = kInf;  // min dist(4I, ∂Ω) / diam(I)
  double max_neighbor_ratio = 0.0;  // max side ratio over touching pairs
  bool overlap_free = false;
  bool pass = false;
};

// Exhaustive check of the Whitney bracket 4 diam(I) ≤ dist(4I, ∂Ω) ≤ dist(I, ∂Ω) ≤ 40 diam(I)
// and of the neighbour side ratio ≤ 4, recomputing every distance by brute force.
WhitneyCheck check_whitney(const Whitney& w);

}  // namespace cadkit
