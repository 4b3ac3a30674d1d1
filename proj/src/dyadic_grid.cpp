#include "cadkit/dyadic_grid.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cadkit {

namespace {

int arcs_at(int k, int split) { return k <= split ? 1 : (1 << (k - split)); }

std::vector<std::pair<Point2, Point2>> complement_segments(const Boundary& b, const std::vector<ArcSpan>& spans,
                                                           const Box2& near) {
  std::vector<int> cand;
  b.for_each_candidate(near, [&](int g) { cand.push_back(g); });
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::vector<std::pair<Point2, Point2>> out;
  std::vector<std::pair<double, double>> cut;
  for (int g : cand) {
    const auto [c, i] = b.segment_of_global(g);
    const double a = b.segment_start_arclength(c, i);
    const double len = b.segment_length(c, i);
    const Point2 pa = b.segment_a(c, i), pb = b.segment_b(c, i);
    cut.clear();
    for (const auto& s : spans) {
      if (s.component == c && s.s1 > a && s.s0 < a + len) cut.emplace_back(std::max(s.s0, a), std::min(s.s1, a + len));
    }
    std::sort(cut.begin(), cut.end());
    double cursor = a;
    auto emit = [&](double u, double v) {
      if (v - u <= 1e-15 * len) return;
      out.emplace_back(pa + ((u - a) / len) * (pb - pa), pa + ((v - a) / len) * (pb - pa));
    };
    for (const auto& [u, v] : cut) {
      emit(cursor, u);
      cursor = std::max(cursor, v);
    }
    emit(cursor, a + len);
    // Keep the endpoints of removed stretches: they belong to the closure of E \ Q.
    for (const auto& [u, v] : cut) {
      if (u > a) out.emplace_back(pa + ((u - a) / len) * (pb - pa), pa + ((u - a) / len) * (pb - pa));
      if (v < a + len) out.emplace_back(pa + ((v - a) / len) * (pb - pa), pa + ((v - a) / len) * (pb - pa));
    }
  }
  return out;
}

double point_piece_distance(const Point2& x, const std::pair<Point2, Point2>& s) {
  return project_to_segment(x, s.first, s.second).distance;
}

// Length of {t ∈ [0,1] : dist(p0 + t (p1 - p0), R) ≤ eps} for a union of segments R,
// using convexity of each single-segment distance along a line.
double collar_length(const Point2& p0, const Point2& p1, const std::vector<std::pair<Point2, Point2>>& rs, double eps) {
  std::vector<std::pair<double, double>> ivs;
  for (const auto& r : rs) {
    auto f = [&](double t) { return point_piece_distance(p0 + t * (p1 - p0), r); };
    if (segment_segment_distance(p0, p1, r.first, r.second) > eps) continue;
    double lo = 0.0, hi = 1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      if (f(m1) <= f(m2)) hi = m2; else lo = m1;
    }
    double tm = 0.5 * (lo + hi);
    if (f(0.0) <= f(tm)) tm = 0.0;
    if (f(1.0) <= f(tm)) tm = 1.0;
    if (f(tm) > eps) continue;
    double left = 0.0, right = 1.0;
    if (f(0.0) > eps) {
      double a = 0.0, b = tm;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) > eps) a = m; else b = m;
      }
      left = b;
    }
    if (f(1.0) > eps) {
      double a = tm, b = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) > eps) b = m; else a = m;
      }
      right = a;
    }
    if (right > left) ivs.emplace_back(left, right);
  }
  std::sort(ivs.begin(), ivs.end());
  double total = 0.0, cur_lo = -1.0, cur_hi = -1.0;
  for (const auto& [u, v] : ivs) {
    if (u > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = u;
      cur_hi = v;
    } else {
      cur_hi = std::max(cur_hi, v);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total * (p1 - p0).norm();
}

bool covers_all(const Boundary& b, const std::vector<ArcSpan>& spans) {
  double s = 0.0;
  for (const auto& sp : spans) s += sp.s1 - sp.s0;
  return s >= b.total_length() * (1.0 - 1e-14);
}

}  // namespace

DyadicGrid DyadicGrid::build(const Domain& domain, int depth) {
  return build(std::make_shared<const Boundary>(domain.boundary()), depth);
}

DyadicGrid DyadicGrid::build(std::shared_ptr<const Boundary> boundary, int depth) {
  if (depth < 1) throw RangeError("grid depth must be at least 1");
  DyadicGrid g;
  g.boundary_ = std::move(boundary);
  const Boundary& b = *g.boundary_;
  g.depth_ = depth;
  g.scale_ = b.diameter();
  const double total = b.total_length();
  const double finest_arc = std::ldexp(total, -depth);
  const int nc = static_cast<int>(b.num_components());
  for (int c = 0; c < nc; ++c) {
    const double lc = b.component_length(c);
    if (lc < finest_arc) {
      throw ResolutionError("component " + std::to_string(c) + " (length " + std::to_string(lc) +
                            ") is shorter than the finest cube arc " + std::to_string(finest_arc));
    }
    g.split_level_.push_back(nc == 1 ? 0 : std::max(0, static_cast<int>(std::lround(std::log2(total / lc)))));
  }

  g.generations_.resize(depth + 1);
  g.comp_first_.assign(depth + 1, std::vector<int>(nc, -1));
  auto add = [&](DyadicCube q) {
    q.id = static_cast<int>(g.cubes_.size());
    q.j = static_cast<int>(g.generations_[q.k].size());
    q.length = g.length(q.k);
    g.generations_[q.k].push_back(q.id);
    g.cubes_.push_back(std::move(q));
    return g.cubes_.back().id;
  };

  DyadicCube root;
  root.k = 0;
  for (int c = 0; c < nc; ++c) root.spans.push_back({c, 0.0, b.component_length(c)});
  const int root_id = add(std::move(root));
  if (nc == 1) g.comp_first_[0][0] = root_id;

  for (int k = 1; k <= depth; ++k) {
    for (int c = 0; c < nc; ++c) {
      const int m = arcs_at(k, g.split_level_[c]);
      const double lc = b.component_length(c);
      const int m_prev = arcs_at(k - 1, g.split_level_[c]);
      const int prev_first = g.comp_first_[k - 1][c];
      for (int i = 0; i < m; ++i) {
        DyadicCube q;
        q.k = k;
        q.spans.push_back({c, lc * i / m, i + 1 == m ? lc : lc * (i + 1) / m});
        q.parent = prev_first < 0 ? root_id : prev_first + i / (m / m_prev);
        const int id = add(std::move(q));
        if (i == 0) g.comp_first_[k][c] = id;
        g.cubes_[g.cubes_[id].parent].children.push_back(id);
      }
    }
  }

  for (auto& q : g.cubes_) g.measure_cube(q);
  GridConstants& k = g.constants_;
  for (const auto& q : g.cubes_) {
    if (std::isfinite(q.separation)) k.a0 = std::min(k.a0, q.separation / q.length);
    k.c = std::min(k.c, q.radius / q.length);
    k.C1 = std::max(k.C1, q.diameter / q.length);
  }
  for (const auto& q : g.cubes_) {
    double reach = 0.0;
    for (const auto& p : g.pieces(q.id)) {
      reach = std::max({reach, (p.a - q.center.position).norm(), (p.b - q.center.position).norm()});
    }
    k.C = std::max(k.C, reach / q.radius * (1.0 + 1e-9));
  }
  return g;
}

void DyadicGrid::measure_cube(DyadicCube& q) const {
  const Boundary& b = *boundary_;
  q.sigma = 0.0;
  const ArcSpan* longest = nullptr;
  for (const auto& s : q.spans) {
    q.sigma += s.s1 - s.s0;
    if (!longest || s.s1 - s.s0 > longest->s1 - longest->s0) longest = &s;
  }
  q.center = b.point_at(longest->component, 0.5 * (longest->s0 + longest->s1));
  if (covers_all(b, q.spans)) {
    q.separation = kInf;
  } else {
    const Box2 all = b.bbox().inflated(1.0);
    double best = kInf;
    for (const auto& s : complement_segments(b, q.spans, all)) best = std::min(best, point_piece_distance(q.center.position, s));
    q.separation = best;
  }
  q.radius = std::min(q.length, q.separation / 2.0);
  std::vector<Point2> pts;
  for (const auto& s : q.spans) {
    for (const auto& p : b.arc_pieces(s.component, s.s0, s.s1)) {
      pts.push_back(p.a);
      pts.push_back(p.b);
    }
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
  }
  q.diameter = std::sqrt(d2);
}

int DyadicGrid::locate(int k, const BoundaryPoint& p) const {
  if (k < 0 || k > depth_) throw RangeError("generation " + std::to_string(k) + " outside the grid");
  const int first = comp_first_[k][p.component];
  if (first < 0) return generations_[k].front();
  const int m = arcs_at(k, split_level_[p.component]);
  const double lc = boundary_->component_length(p.component);
  const int idx = std::clamp(static_cast<int>(std::floor(p.arclength * m / lc)), 0, m - 1);
  return first + idx;
}

bool DyadicGrid::contains(int id, const BoundaryPoint& p) const {
  for (const auto& s : cubes_[id].spans) {
    if (s.component == p.component && p.arclength >= s.s0 && p.arclength < s.s1) return true;
  }
  return false;
}

bool DyadicGrid::is_ancestor(int a, int b) const {
  while (b >= 0 && cubes_[b].k > cubes_[a].k) b = cubes_[b].parent;
  return b == a;
}

int DyadicGrid::ancestor(int id, int k) const {
  while (id >= 0 && cubes_[id].k > k) id = cubes_[id].parent;
  return id;
}

std::vector<int> DyadicGrid::subtree(int id) const {
  std::vector<int> out{id};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int ch : cubes_[out[i]].children) out.push_back(ch);
  }
  return out;
}

std::vector<int> DyadicGrid::descendants_at(int id, int levels) const {
  if (levels < 0) throw RangeError("descendant level must be nonnegative");
  if (cubes_[id].k + levels > depth_) {
    throw ResolutionError("grid depth " + std::to_string(depth_) + " too shallow for " + std::to_string(levels) +
                          " levels below generation " + std::to_string(cubes_[id].k));
  }
  std::vector<int> cur{id};
  for (int l = 0; l < levels; ++l) {
    std::vector<int> next;
    for (int q : cur) next.insert(next.end(), cubes_[q].children.begin(), cubes_[q].children.end());
    cur = std::move(next);
  }
  return cur;
}

std::vector<ArcPiece> DyadicGrid::pieces(int id) const {
  std::vector<ArcPiece> out;
  for (const auto& s : cubes_[id].spans) {
    auto p = boundary_->arc_pieces(s.component, s.s0, s.s1);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<std::pair<Point2, Point2>> DyadicGrid::complement_near(int id, const Box2& near) const {
  return complement_segments(*boundary_, cubes_[id].spans, near);
}

nlohmann::json DyadicGrid::to_json() const {
  nlohmann::json j;
  j["scale"] = scale_;
  j["depth"] = depth_;
  j["constants"] = {{"a0", constants_.a0}, {"c", constants_.c}, {"C", constants_.C}, {"C1", constants_.C1}};
  j["cubes"] = nlohmann::json::array();
  for (const auto& q : cubes_) {
    nlohmann::json jq;
    jq["id"] = q.id;
    jq["k"] = q.k;
    jq["j"] = q.j;
    jq["sigma"] = q.sigma;
    jq["x_Q"] = {q.center.position.x(), q.center.position.y()};
    jq["r_Q"] = q.radius;
    jq["parent"] = q.parent;
    jq["children"] = q.children;
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& s : q.spans) spans.push_back({s.component, s.s0, s.s1});
    jq["spans"] = spans;
    j["cubes"].push_back(std::move(jq));
  }
  return j;
}

ThinBoundaryResult thin_boundary_check(const DyadicGrid& grid, double tau) {
  const double a0 = grid.constants().a0;
  if (!(tau > 0.0) || !(tau < a0)) {
    throw RangeError("thin-boundary tau " + std::to_string(tau) + " outside (0, a0 = " + std::to_string(a0) + ")");
  }
  ThinBoundaryResult res;
  res.tau = tau;
  res.ratios.assign(grid.size(), 0.0);
  for (const auto& q : grid.cubes()) {
    if (!std::isfinite(q.separation)) continue;
    const double eps = tau * q.length;
    double collar = 0.0;
    for (const auto& p : grid.pieces(q.id)) {
      Box2 box;
      box.expand(p.a);
      box.expand(p.b);
      const auto rs = grid.complement_near(q.id, box.inflated(eps));
      if (!rs.empty()) collar += collar_length(p.a, p.b, rs, eps);
    }
    res.ratios[q.id] = collar / q.sigma;
    res.max_ratio = std::max(res.max_ratio, res.ratios[q.id]);
  }
  return res;
}

ThinBoundaryFit thin_boundary_fit(const DyadicGrid& grid, std::span<const double> taus) {
  ThinBoundaryFit fit;
  std::vector<double> xs, ys;
  for (double t : taus) {
    fit.ladder.push_back(thin_boundary_check(grid, t));
    if (fit.ladder.back().max_ratio > 0.0) {
      xs.push_back(std::log(t));
      ys.push_back(std::log(fit.ladder.back().max_ratio));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    fit.eta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  for (const auto& r : fit.ladder) fit.C1 = std::max(fit.C1, r.max_ratio / std::pow(r.tau, fit.eta));
  return fit;
}

namespace {

bool arc_inside(const Boundary& b, const DyadicCube& q, const ArcPiece& a, double tol) {
  const double u = b.arclength_of(a.component, a.segment, a.t0);
  const double v = b.arclength_of(a.component, a.segment, a.t1);
  for (const auto& s : q.spans) {
    if (s.component == a.component && u >= s.s0 - tol && v <= s.s1 + tol) return true;
  }
  return false;
}

bool interval_within(const DyadicCube& inner, const DyadicCube& outer, double tol) {
  for (const auto& s : inner.spans) {
    bool ok = false;
    for (const auto& t : outer.spans) ok = ok || (s.component == t.component && s.s0 >= t.s0 - tol && s.s1 <= t.s1 + tol);
    if (!ok) return false;
  }
  return true;
}

bool interval_disjoint(const DyadicCube& a, const DyadicCube& b, double tol) {
  for (const auto& s : a.spans) {
    for (const auto& t : b.spans) {
      if (s.component == t.component && std::min(s.s1, t.s1) - std::max(s.s0, t.s0) > tol) return false;
    }
  }
  return true;
}

}  // namespace

GridAxiomReport check_grid_axioms(const DyadicGrid& grid, std::span<const double> taus) {
  GridAxiomReport rep;
  const Boundary& b = grid.boundary();
  const double total = b.total_length();
  const double tol = 1e-12 * total;
  for (int k = 0; k <= grid.depth(); ++k) {
    double s = 0.0;
    for (int id : grid.generation(k)) s += grid.cube(id).sigma;
    rep.covering_error = std::max(rep.covering_error, std::abs(s - total) / total);
  }

  const int kmax = std::min(grid.depth(), 6);
  rep.nesting = true;
  rep.unique_ancestor = true;
  for (int m = 0; m <= kmax; ++m) {
    for (int qi : grid.generation(m)) {
      const auto& q = grid.cube(qi);
      for (int k = 0; k <= m; ++k) {
        int holders = 0;
        for (int pi : grid.generation(k)) {
          const auto& p = grid.cube(pi);
          const bool inside = interval_within(q, p, tol);
          if (inside) {
            ++holders;
            if (grid.ancestor(qi, k) != pi) rep.unique_ancestor = false;
          } else if (!interval_disjoint(q, p, tol)) {
            rep.nesting = false;
          }
        }
        if (holders != 1) rep.unique_ancestor = false;
      }
    }
  }

  const auto& K = grid.constants();
  rep.diameter_bound = std::isfinite(K.C1);
  rep.inner_ball = K.a0 > 0.0;
  rep.containment = true;
  for (const auto& q : grid.cubes()) {
    rep.diameter_bound = rep.diameter_bound && q.diameter <= K.C1 * q.length * (1.0 + 1e-12);
    if (std::isfinite(q.separation)) {
      // the surface ball of radius a0 ℓ(Q) stays in Q.
      for (const auto& a : b.ball_intersection(q.center.position, K.a0 * q.length * (1.0 - 1e-12)).arcs) {
        rep.inner_ball = rep.inner_ball && arc_inside(b, q, a, tol);
      }
      for (const auto& a : b.ball_intersection(q.center.position, 2.0 * q.radius * (1.0 - 1e-12)).arcs) {
        rep.containment = rep.containment && arc_inside(b, q, a, tol);
      }
    }
    for (const auto& p : grid.pieces(q.id)) {
      const double lim = K.C * q.radius;
      rep.containment = rep.containment && (p.a - q.center.position).norm() < lim && (p.b - q.center.position).norm() < lim;
    }
    rep.containment = rep.containment && q.radius >= K.c * q.length * (1.0 - 1e-12) && q.radius <= q.length;
  }
  rep.thin = thin_boundary_fit(grid, taus);
  rep.pass = rep.covering_error <= 1e-9 && rep.nesting && rep.unique_ancestor && rep.diameter_bound && rep.inner_ball &&
             rep.containment && rep.thin.eta > 0.0;
  return rep;
}

}  // namespace cadkit
