#include "cadkit/whitney.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace cadkit {

namespace {

constexpr double kSelect = 16.0;

}  // namespace

std::pair<Point2, double> segment_box_closest(const Point2& a, const Point2& b, const Box2& box) {
  Point2 best_p = a;
  double best = box.distance_to(a);
  auto consider = [&](const Point2& p) {
    const double d = box.distance_to(p);
    if (d < best) {
      best = d;
      best_p = p;
    }
  };
  consider(b);
  const Point2 corners[4] = {box.lo, {box.hi.x(), box.lo.y()}, box.hi, {box.lo.x(), box.hi.y()}};
  for (const auto& c : corners) {
    const auto pr = project_to_segment(c, a, b);
    consider(a + pr.t * (b - a));
  }
  if (segments_intersect(a, b, corners[0], corners[1]) || segments_intersect(a, b, corners[1], corners[2]) ||
      segments_intersect(a, b, corners[2], corners[3]) || segments_intersect(a, b, corners[3], corners[0])) {
    best = 0.0;
  }
  return {best_p, best};
}

std::uint64_t Whitney::key(int k, std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(k + 64) << 52) | (static_cast<std::uint64_t>(ix) << 26) |
         static_cast<std::uint64_t>(iy);
}

int Whitney::find(int k, std::int64_t ix, std::int64_t iy) const {
  if (ix < 0 || iy < 0 || ix >= (std::int64_t{1} << 26) || iy >= (std::int64_t{1} << 26)) return -1;
  auto it = index_.find(key(k, ix, iy));
  return it == index_.end() ? -1 : it->second;
}

const std::vector<int>& Whitney::by_generation(int k) const {
  static const std::vector<int> empty;
  if (k < coarsest_ || k > finest_) return empty;
  return by_gen_[k - coarsest_];
}

Box2 Whitney::star(int id, int stars) const {
  const int level = stars == 1 ? 1 : stars == 2 ? 2 : 4;
  return fattened(id, 1.0 + level * params_.lambda);
}

Whitney Whitney::build(const Domain& domain, const DyadicGrid& grid, const WhitneyParams& params) {
  if (!(params.lambda > 0.0 && params.lambda <= 0.125)) {
    throw ParameterError("lambda must lie in (0, 1/8] so that fattened boxes meet only touching neighbours");
  }
  Whitney w;
  w.domain_ = &domain;
  w.grid_ = &grid;
  w.params_ = params;
  w.unit_ = std::ldexp(grid.scale(), -params.generation_offset);
  w.finest_ = params.finest_generation < 0 ? grid.depth() + 1 : params.finest_generation;
  const Box2& bb = domain.bbox();
  const double ext = std::max(bb.size().x(), bb.size().y());
  w.coarsest_ = static_cast<int>(std::floor(std::log2(w.unit_ / ext)));
  if (w.finest_ < w.coarsest_) throw ParameterError("finest Whitney generation coarser than the domain");
  if (w.finest_ - w.coarsest_ > 24) throw ResolutionError("Whitney truncation too deep for the lattice index");
  w.origin_ = bb.lo;
  w.by_gen_.assign(w.finest_ - w.coarsest_ + 1, {});

  const Boundary& bd = domain.boundary();
  struct Cell {
    int k;
    std::int64_t ix, iy;
  };
  std::vector<Cell> stack{{w.coarsest_, 0, 0}};
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    const double s = w.side(c.k);
    const Box2 box = Box2::from_corner(w.origin_ + s * Point2(static_cast<double>(c.ix), static_cast<double>(c.iy)), s);
    const double d = bd.distance_to_box(box);
    if (d > 0.0 && !domain.inside(box.center())) continue;
    if (d > 0.0 && d >= kSelect * s * std::sqrt(2.0)) {
      WhitneyBox wb;
      wb.id = static_cast<int>(w.boxes_.size());
      wb.k = c.k;
      wb.ix = c.ix;
      wb.iy = c.iy;
      wb.box = box;
      wb.side = s;
      wb.dist = d;
      w.index_[key(c.k, c.ix, c.iy)] = wb.id;
      w.by_gen_[c.k - w.coarsest_].push_back(wb.id);
      w.boxes_.push_back(wb);
      continue;
    }
    if (c.k == w.finest_) continue;
    for (int q = 3; q >= 0; --q) stack.push_back({c.k + 1, 2 * c.ix + (q & 1), 2 * c.iy + (q >> 1)});
  }
  // Deterministic order: coarse to fine, then row-major.
  std::vector<WhitneyBox> sorted = w.boxes_;
  std::sort(sorted.begin(), sorted.end(), [](const WhitneyBox& a, const WhitneyBox& b) {
    return std::tie(a.k, a.iy, a.ix) < std::tie(b.k, b.iy, b.ix);
  });
  w.boxes_ = std::move(sorted);
  w.index_.clear();
  for (auto& g : w.by_gen_) g.clear();
  for (int i = 0; i < static_cast<int>(w.boxes_.size()); ++i) {
    auto& b = w.boxes_[i];
    b.id = i;
    w.index_[key(b.k, b.ix, b.iy)] = i;
    w.by_gen_[b.k - w.coarsest_].push_back(i);
  }

  const int n = static_cast<int>(w.boxes_.size());
  w.face_.assign(n, {});
  w.touch_.assign(n, {});
  w.touches_gap_.assign(n, false);
  for (int i = 0; i < n; ++i) {
    const Box2& b = w.boxes_[i].box;
    const double s = w.boxes_[i].side, e = 1e-7 * s;
    auto probe = [&](const Point2& p, bool face) {
      const int j = w.locate(p);
      if (j >= 0 && j != i) {
        if (face) w.face_[i].push_back(j);
        w.touch_[i].push_back(j);
      } else if (j < 0 && bd.unsigned_distance(p) > 0.0 && domain.inside(p)) {
        w.touches_gap_[i] = true;
      }
    };
    for (double f : {0.25, 0.75}) {
      probe({b.lo.x() - e, b.lo.y() + f * s}, true);
      probe({b.hi.x() + e, b.lo.y() + f * s}, true);
      probe({b.lo.x() + f * s, b.lo.y() - e}, true);
      probe({b.lo.x() + f * s, b.hi.y() + e}, true);
    }
    probe({b.lo.x() - e, b.lo.y() - e}, false);
    probe({b.hi.x() + e, b.lo.y() - e}, false);
    probe({b.hi.x() + e, b.hi.y() + e}, false);
    probe({b.lo.x() - e, b.hi.y() + e}, false);
    for (auto* v : {&w.face_[i], &w.touch_[i]}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
  }
  return w;
}

int Whitney::locate(const Point2& x) const {
  for (int k = coarsest_; k <= finest_; ++k) {
    const double s = side(k);
    const double fx = std::floor((x.x() - origin_.x()) / s), fy = std::floor((x.y() - origin_.y()) / s);
    if (fx < 0 || fy < 0) return -1;
    const int id = find(k, static_cast<std::int64_t>(fx), static_cast<std::int64_t>(fy));
    if (id >= 0) return id;
  }
  return -1;
}

int Whitney::nearest_cube(int id) const {
  const WhitneyBox& wb = boxes_[id];
  const Boundary& bd = domain_->boundary();
  const int k = std::clamp(wb.k, 0, grid_->depth());
  struct Foot {
    Point2 p;
    int g;
  };
  std::vector<Foot> feet;
  double best = kInf;
  std::vector<int> cand;
  bd.for_each_candidate(wb.box.inflated(wb.dist * (1.0 + 1e-9) + 1e-12), [&](int g) { cand.push_back(g); });
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (int g : cand) {
    const auto [c, i] = bd.segment_of_global(g);
    const auto [p, d] = segment_box_closest(bd.segment_a(c, i), bd.segment_b(c, i), wb.box);
    if (d < best * (1.0 - 1e-12)) {
      feet.clear();
      best = d;
    }
    if (d <= best * (1.0 + 1e-12)) feet.push_back({p, g});
  }
  int out = -1;
  for (const auto& f : feet) {
    const auto [c, i] = bd.segment_of_global(f.g);
    const auto pr = project_to_segment(f.p, bd.segment_a(c, i), bd.segment_b(c, i));
    BoundaryPoint bp;
    bp.position = f.p;
    bp.component = c;
    bp.segment = i;
    bp.t = pr.t;
    bp.arclength = bd.arclength_of(c, i, pr.t);
    if (bd.component(c).closed && bp.arclength >= bd.component_length(c)) bp.arclength = 0.0;
    const int q = grid_->locate(k, bp);
    if (out < 0 || q < out) out = q;
  }
  return out;
}

WhitneyCheck check_whitney(const Whitney& w) {
  WhitneyCheck chk;
  const Boundary& bd = w.domain().boundary();
  // Scan of every segment, skipping only those whose bounding box is already farther than
  // the best distance so far; starting from the previous winner keeps the bound tight.
  const int m = bd.total_segments();
  std::vector<Point2> sa(m), sb(m);
  std::vector<Box2> aabb(m);
  for (int g = 0; g < m; ++g) {
    const auto [c, i] = bd.segment_of_global(g);
    sa[g] = bd.segment_a(c, i);
    sb[g] = bd.segment_b(c, i);
    aabb[g] = {sa[g].cwiseMin(sb[g]), sa[g].cwiseMax(sb[g])};
  }
  int hint = 0;
  auto brute = [&](const Box2& box) {
    double d = box_segment_distance(box, sa[hint], sb[hint]);
    for (int g = 0; g < m; ++g) {
      if (aabb[g].distance_to(box) >= d) continue;
      const double e = box_segment_distance(box, sa[g], sb[g]);
      if (e < d) {
        d = e;
        hint = g;
      }
    }
    return d;
  };
  chk.overlap_free = true;
  for (const auto& b : w.boxes()) {
    const double diam = b.diameter();
    const double d = brute(b.box);
    const double d4 = brute(b.box.scaled(4.0));
    chk.min_dist_ratio = std::min(chk.min_dist_ratio, d / diam);
    chk.max_dist_ratio = std::max(chk.max_dist_ratio, d / diam);
    chk.min_dilated_ratio = std::min(chk.min_dilated_ratio, d4 / diam);
    for (int j : w.touching(b.id)) chk.max_neighbor_ratio = std::max(chk.max_neighbor_ratio, w.box(j).side / b.side);
    // Lattice squares either nest or have disjoint interiors, and locate scans coarse to
    // fine, so any box containing this one would be found at its centre first.
    if (w.locate(b.center()) != b.id) chk.overlap_free = false;
  }
  chk.pass = chk.overlap_free && chk.min_dilated_ratio >= 4.0 && chk.max_dist_ratio <= 40.0 &&
             chk.min_dist_ratio >= 4.0 && chk.max_neighbor_ratio <= 4.0;
  return chk;
}

}  // namespace cadkit
