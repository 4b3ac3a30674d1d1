#include "cadkit/surface3.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace cadkit {

namespace {

double triangle_area(const Point3& a, const Point3& b, const Point3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

double ball_triangle_area(const Point3& x, double r, const Point3& a, const Point3& b, const Point3& c, int depth) {
  const double r2 = r * r;
  const bool ia = (a - x).squaredNorm() < r2, ib = (b - x).squaredNorm() < r2, ic = (c - x).squaredNorm() < r2;
  if (ia && ib && ic) return triangle_area(a, b, c);
  const double d = (closest_point_on_triangle(x, a, b, c) - x).norm();
  if (d >= r) return 0.0;
  if (depth == 0) {
    const Point3 g = (a + b + c) / 3.0;
    return (g - x).squaredNorm() < r2 ? triangle_area(a, b, c) : 0.0;
  }
  const Point3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return ball_triangle_area(x, r, a, ab, ca, depth - 1) + ball_triangle_area(x, r, ab, b, bc, depth - 1) +
         ball_triangle_area(x, r, ca, bc, c, depth - 1) + ball_triangle_area(x, r, ab, bc, ca, depth - 1);
}

// Moller-Trumbore along +x; returns the ray parameter or a negative value.
double ray_hit(const Point3& o, const Point3& dir, const Point3& a, const Point3& b, const Point3& c) {
  const Point3 e1 = b - a, e2 = c - a;
  const Point3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return -1.0;
  const double inv = 1.0 / det;
  const Point3 s = o - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Point3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  return e2.dot(q) * inv;
}

}  // namespace

Domain3::Domain3(std::vector<Point3> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.empty() || triangles_.empty()) throw InvalidDomainError("surface has no triangles");
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= static_cast<int>(vertices_.size())) throw InvalidDomainError("triangle index out of range");
      const int u = t[k], v = t[(k + 1) % 3];
      edge_use[{std::min(u, v), std::max(u, v)}]++;
    }
    const double a = triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (!(a > 0.0)) throw InvalidDomainError("degenerate boundary: zero-area triangle");
    area_ += a;
  }
  for (const auto& [e, n] : edge_use) {
    if (n != 2) throw InvalidDomainError("surface is not closed: an edge is used " + std::to_string(n) + " times");
  }
  lo_ = hi_ = vertices_.front();
  for (const auto& v : vertices_) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) d2 = std::max(d2, (vertices_[i] - vertices_[j]).squaredNorm());
  }
  diameter_ = std::sqrt(d2);

  const Point3 ext = hi_ - lo_;
  const double span = ext.maxCoeff();
  cell_ = std::max(span / 64.0, std::cbrt(std::max(ext.prod(), 1e-300) / static_cast<double>(triangles_.size())));
  const double margin = 0.25 * span;
  origin_ = lo_ - Point3::Constant(margin);
  nx_ = static_cast<int>(std::ceil((ext.x() + 2 * margin) / cell_)) + 1;
  ny_ = static_cast<int>(std::ceil((ext.y() + 2 * margin) / cell_)) + 1;
  nz_ = static_cast<int>(std::ceil((ext.z() + 2 * margin) / cell_)) + 1;
  cells_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, {});
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    Point3 tl = vertices_[triangles_[t][0]], th = tl;
    for (int k = 1; k < 3; ++k) {
      tl = tl.cwiseMin(vertices_[triangles_[t][k]]);
      th = th.cwiseMax(vertices_[triangles_[t][k]]);
    }
    const auto c0 = cell_of(tl - Point3::Constant(1e-9 * cell_));
    const auto c1 = cell_of(th + Point3::Constant(1e-9 * cell_));
    for (int iz = c0[2]; iz <= c1[2]; ++iz)
      for (int iy = c0[1]; iy <= c1[1]; ++iy)
        for (int ix = c0[0]; ix <= c1[0]; ++ix) cells_[cell_index(ix, iy, iz)].push_back(t);
  }
}

std::array<int, 3> Domain3::cell_of(const Point3& x) const {
  const int n[3] = {nx_, ny_, nz_};
  std::array<int, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const double f = std::floor((x[k] - origin_[k]) / cell_);
    out[k] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(n[k] - 1)));
  }
  return out;
}

Point3 Domain3::nearest_in_cells(const Point3& x, double& best) const {
  Point3 best_p = Point3::Zero();
  best = kInf;
  auto visit = [&](int t) {
    const auto& tr = triangles_[t];
    const Point3 p = closest_point_on_triangle(x, vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]);
    const double d = (p - x).norm();
    if (d < best) {
      best = d;
      best_p = p;
    }
  };
  const Point3 top = origin_ + cell_ * Point3(nx_, ny_, nz_);
  const bool in_grid = (x.array() >= origin_.array()).all() && (x.array() <= top.array()).all();
  if (!in_grid) {
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) visit(t);
    return best_p;
  }
  const auto c = cell_of(x);
  const int kmax = std::max({nx_, ny_, nz_});
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0 && (k - 1) * cell_ > best) break;
    for (int iz = c[2] - k; iz <= c[2] + k; ++iz) {
      if (iz < 0 || iz >= nz_) continue;
      for (int iy = c[1] - k; iy <= c[1] + k; ++iy) {
        if (iy < 0 || iy >= ny_) continue;
        for (int ix = c[0] - k; ix <= c[0] + k; ++ix) {
          if (ix < 0 || ix >= nx_) continue;
          const int cheb = std::max({std::abs(ix - c[0]), std::abs(iy - c[1]), std::abs(iz - c[2])});
          if (cheb != k) continue;
          for (int t : cells_[cell_index(ix, iy, iz)]) visit(t);
        }
      }
    }
  }
  return best_p;
}

double Domain3::unsigned_distance(const Point3& x) const {
  double best = kInf;
  nearest_in_cells(x, best);
  return best;
}

Point3 Domain3::nearest(const Point3& x) const {
  double best = kInf;
  return nearest_in_cells(x, best);
}

double Domain3::brute_force_distance(const Point3& x) const {
  double best = kInf;
  for (const auto& tr : triangles_) {
    best = std::min(best, (closest_point_on_triangle(x, vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]) - x).norm());
  }
  return best;
}

bool Domain3::inside(const Point3& x) const {
  if ((x.array() < lo_.array()).any() || (x.array() > hi_.array()).any()) return false;
  // Slightly skewed direction keeps the ray off mesh edges for typical inputs.
  const Point3 dir = Point3(1.0, 0.3183098861837907, 0.2718281828459045).normalized();
  int hits = 0;
  for (const auto& tr : triangles_) {
    if (ray_hit(x, dir, vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]) > 0.0) ++hits;
  }
  return hits % 2 == 1;
}

double Domain3::signed_distance(const Point3& x) const {
  const double d = unsigned_distance(x);
  return inside(x) ? d : -d;
}

double Domain3::ball_measure(const Point3& x, double r, int max_depth) const {
  double total = 0.0;
  const auto c0 = cell_of(x - Point3::Constant(r));
  const auto c1 = cell_of(x + Point3::Constant(r));
  std::vector<int> cand;
  for (int iz = c0[2]; iz <= c1[2]; ++iz)
    for (int iy = c0[1]; iy <= c1[1]; ++iy)
      for (int ix = c0[0]; ix <= c1[0]; ++ix)
        for (int t : cells_[cell_index(ix, iy, iz)]) cand.push_back(t);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (int t : cand) {
    const auto& tr = triangles_[t];
    total += ball_triangle_area(x, r, vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]], max_depth);
  }
  return total;
}

Domain3 Domain3::from_json(const nlohmann::json& j) {
  if (j.value("dim", 0) != 3) throw InputError("surface loader expects \"dim\": 3");
  std::vector<Point3> v;
  std::vector<std::array<int, 3>> t;
  for (const auto& p : j.at("vertices")) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  for (const auto& f : j.at("triangles")) t.push_back({f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});
  return Domain3(std::move(v), std::move(t));
}

nlohmann::json Domain3::to_json() const {
  nlohmann::json j;
  j["dim"] = 3;
  j["vertices"] = nlohmann::json::array();
  for (const auto& p : vertices_) j["vertices"].push_back({p.x(), p.y(), p.z()});
  j["triangles"] = nlohmann::json::array();
  for (const auto& f : triangles_) j["triangles"].push_back({f[0], f[1], f[2]});
  return j;
}

Domain3 make_icosphere(int level, double radius) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                           {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      v.push_back((0.5 * (v[a] + v[b])).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> nf;
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      nf.push_back({t[0], a, c});
      nf.push_back({t[1], b, a});
      nf.push_back({t[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  for (auto& x : v) x *= radius;
  return Domain3(std::move(v), std::move(f));
}

ARReport3 ar_check(const Domain3& domain, std::span<const Point3> centers, std::span<const double> radii) {
  if (centers.size() < 32) throw InputError("ar_check needs at least 32 centres");
  ARReport3 rep;
  for (double r : radii) {
    if (!(r > 0.0) || !(r < domain.boundary_diameter())) throw RangeError("ar_check radius outside (0, diam)");
    for (const auto& x : centers) {
      const double ratio = domain.ball_measure(x, r) / (r * r);
      rep.lower = std::min(rep.lower, ratio);
      rep.upper = std::max(rep.upper, ratio);
    }
  }
  rep.pass = rep.lower > 0.0 && std::isfinite(rep.upper);
  return rep;
}

}  // namespace cadkit
