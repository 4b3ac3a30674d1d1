#include "cadkit/domain.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cadkit {

namespace {

constexpr int kMaxCellsPerAxis = 1024;

}  // namespace

Boundary::Boundary(std::vector<Polyline> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidDomainError("boundary has no components");
  seg_start_.push_back(0);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& pl = components_[c];
    const std::size_t nv = pl.vertices.size();
    if (nv < 2 || (pl.closed && nv < 3)) {
      throw InvalidDomainError("component " + std::to_string(c) + " has too few vertices");
    }
    const std::size_t nseg = pl.closed ? nv : nv - 1;
    std::vector<double> cum(nseg + 1, 0.0);
    for (std::size_t i = 0; i < nseg; ++i) {
      const double len = (pl.vertices[(i + 1) % nv] - pl.vertices[i]).norm();
      if (!(len > 0.0)) {
        throw InvalidDomainError("degenerate boundary: zero-length segment " + std::to_string(i) +
                                 " in component " + std::to_string(c));
      }
      cum[i + 1] = cum[i] + len;
      seg_owner_.emplace_back(static_cast<int>(c), static_cast<int>(i));
    }
    total_length_ += cum.back();
    cum_.push_back(std::move(cum));
    seg_start_.push_back(seg_start_.back() + nseg);
    for (const auto& v : pl.vertices) bbox_.expand(v);
  }

  std::vector<Point2> all;
  for (const auto& pl : components_) all.insert(all.end(), pl.vertices.begin(), pl.vertices.end());
  double d2 = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) d2 = std::max(d2, (all[i] - all[j]).squaredNorm());
  }
  diameter_ = std::sqrt(d2);
  build_hash();
}

Point2 Boundary::segment_a(int c, int i) const { return components_[c].vertices[i]; }

Point2 Boundary::segment_b(int c, int i) const {
  const auto& v = components_[c].vertices;
  return v[(static_cast<std::size_t>(i) + 1) % v.size()];
}

void Boundary::build_hash() {
  const Point2 ext = bbox_.size();
  const double span = std::max(ext.x(), ext.y());
  const double n = static_cast<double>(total_segments());
  double cell = std::sqrt(std::max(ext.x() * ext.y(), 0.0) / n);
  cell = std::max(cell, span / 512.0);
  const double margin = 0.25 * span;
  cell = std::max(cell, (span + 2.0 * margin) / kMaxCellsPerAxis);
  hash_.cell = cell;
  hash_.origin = bbox_.lo - Point2(margin, margin);
  hash_.nx = std::max(1, static_cast<int>(std::ceil((ext.x() + 2.0 * margin) / cell)) + 1);
  hash_.ny = std::max(1, static_cast<int>(std::ceil((ext.y() + 2.0 * margin) / cell)) + 1);
  hash_.cells.assign(static_cast<std::size_t>(hash_.nx) * hash_.ny, {});
  const double pad = 1e-9 * cell;
  for (int g = 0; g < total_segments(); ++g) {
    const auto [c, i] = seg_owner_[g];
    const Point2 a = segment_a(c, i), b = segment_b(c, i);
    const int x0 = cell_x(std::min(a.x(), b.x()) - pad), x1 = cell_x(std::max(a.x(), b.x()) + pad);
    const int y0 = cell_y(std::min(a.y(), b.y()) - pad), y1 = cell_y(std::max(a.y(), b.y()) + pad);
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) hash_.cells[static_cast<std::size_t>(iy) * hash_.nx + ix].push_back(g);
    }
  }
}

int Boundary::cell_x(double x) const {
  const double f = std::floor((x - hash_.origin.x()) / hash_.cell);
  return static_cast<int>(std::clamp(f, 0.0, static_cast<double>(hash_.nx - 1)));
}

int Boundary::cell_y(double y) const {
  const double f = std::floor((y - hash_.origin.y()) / hash_.cell);
  return static_cast<int>(std::clamp(f, 0.0, static_cast<double>(hash_.ny - 1)));
}

BoundaryPoint Boundary::point_at(int c, double s) const {
  const auto& cum = cum_[c];
  const double len = cum.back();
  if (components_[c].closed) {
    s = std::fmod(s, len);
    if (s < 0.0) s += len;
  } else {
    s = std::clamp(s, 0.0, len);
  }
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  int i = static_cast<int>(it - cum.begin()) - 1;
  i = std::clamp(i, 0, num_segments(c) - 1);
  const double t = std::clamp((s - cum[i]) / segment_length(c, i), 0.0, 1.0);
  BoundaryPoint p;
  p.position = segment_a(c, i) + t * (segment_b(c, i) - segment_a(c, i));
  p.component = c;
  p.segment = i;
  p.t = t;
  p.arclength = s;
  return p;
}

BoundaryPoint Boundary::nearest(const Point2& x) const {
  const Box2 grid{hash_.origin, hash_.origin + Point2(hash_.nx * hash_.cell, hash_.ny * hash_.cell)};
  double best = kInf;
  int best_g = -1;
  double best_t = 0.0;
  auto visit = [&](int g) {
    const auto [c, i] = seg_owner_[g];
    const auto pr = project_to_segment(x, segment_a(c, i), segment_b(c, i));
    if (pr.distance < best || (pr.distance == best && g < best_g)) {
      best = pr.distance;
      best_g = g;
      best_t = pr.t;
    }
  };
  if (!grid.contains(x)) {
    for (int g = 0; g < total_segments(); ++g) visit(g);
  } else {
    const int cx = cell_x(x.x()), cy = cell_y(x.y());
    const int kmax = std::max(hash_.nx, hash_.ny);
    for (int k = 0; k <= kmax; ++k) {
      if (k > 0 && (k - 1) * hash_.cell > best) break;
      for (int iy = cy - k; iy <= cy + k; ++iy) {
        if (iy < 0 || iy >= hash_.ny) continue;
        const bool edge_row = (iy == cy - k || iy == cy + k);
        for (int ix = cx - k; ix <= cx + k; ix += (edge_row || k == 0) ? 1 : 2 * k) {
          if (ix < 0 || ix >= hash_.nx) continue;
          for (int g : hash_.cells[static_cast<std::size_t>(iy) * hash_.nx + ix]) visit(g);
        }
      }
    }
  }
  const auto [c, i] = seg_owner_[best_g];
  BoundaryPoint p;
  p.component = c;
  p.segment = i;
  p.t = best_t;
  p.position = segment_a(c, i) + best_t * (segment_b(c, i) - segment_a(c, i));
  p.arclength = arclength_of(c, i, best_t);
  return p;
}

double Boundary::unsigned_distance(const Point2& x) const { return (nearest(x).position - x).norm(); }

double Boundary::brute_force_distance(const Point2& x) const {
  double best = kInf;
  for (int g = 0; g < total_segments(); ++g) {
    const auto [c, i] = seg_owner_[g];
    best = std::min(best, project_to_segment(x, segment_a(c, i), segment_b(c, i)).distance);
  }
  return best;
}

double Boundary::distance_to_box(const Box2& box) const {
  const double ub = unsigned_distance(box.center());
  double best = ub;
  for_each_candidate(box.inflated(ub), [&](int g) {
    if (best == 0.0) return;
    const auto [c, i] = seg_owner_[g];
    best = std::min(best, box_segment_distance(box, segment_a(c, i), segment_b(c, i)));
  });
  return best;
}

std::vector<ArcPiece> Boundary::arc_pieces(int c, double s0, double s1) const {
  std::vector<ArcPiece> out;
  const double len = component_length(c);
  auto emit = [&](double a, double b) {
    if (!(b > a)) return;
    const auto& cum = cum_[c];
    int i = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), a) - cum.begin()) - 1;
    i = std::clamp(i, 0, num_segments(c) - 1);
    for (; i < num_segments(c) && cum[i] < b; ++i) {
      const double L = segment_length(c, i);
      const double t0 = std::clamp((a - cum[i]) / L, 0.0, 1.0);
      const double t1 = std::clamp((b - cum[i]) / L, 0.0, 1.0);
      if (t1 <= t0) continue;
      const Point2 pa = segment_a(c, i), pb = segment_b(c, i);
      out.push_back({c, i, t0, t1, pa + t0 * (pb - pa), pa + t1 * (pb - pa)});
    }
  };
  if (components_[c].closed) {
    if (s1 - s0 >= len) {
      emit(0.0, len);
      return out;
    }
    double a = std::fmod(s0, len);
    if (a < 0.0) a += len;
    const double b = a + (s1 - s0);
    if (b <= len) {
      emit(a, b);
    } else {
      emit(a, len);
      emit(0.0, b - len);
    }
  } else {
    emit(std::max(0.0, s0), std::min(len, s1));
  }
  return out;
}

SurfaceBall Boundary::ball_intersection(const Point2& x, double r) const {
  SurfaceBall ball;
  ball.center = x;
  ball.radius = r;
  const Box2 region{x - Point2(r, r), x + Point2(r, r)};
  std::vector<int> seen;
  for_each_candidate(region, [&](int g) { seen.push_back(g); });
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (int g : seen) {
    const auto [c, i] = seg_owner_[g];
    const Point2 a = segment_a(c, i), b = segment_b(c, i);
    if (const auto iv = segment_ball_interval(a, b, x, r)) {
      ball.arcs.push_back({c, i, iv->first, iv->second, a + iv->first * (b - a), a + iv->second * (b - a)});
      ball.measure += (iv->second - iv->first) * segment_length(c, i);
    }
  }
  return ball;
}

std::vector<BoundaryPoint> Boundary::sample(int count) const {
  std::vector<BoundaryPoint> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    double s = (k + 0.5) * total_length_ / count;
    int c = 0;
    while (c + 1 < static_cast<int>(components_.size()) && s >= component_length(c)) {
      s -= component_length(c);
      ++c;
    }
    out.push_back(point_at(c, s));
  }
  return out;
}

int Boundary::crossings_to_right(const Point2& p) const {
  const double y_lo = hash_.origin.y(), y_hi = y_lo + hash_.ny * hash_.cell;
  const double x_hi = hash_.origin.x() + hash_.nx * hash_.cell;
  if (p.y() < y_lo || p.y() >= y_hi || p.x() >= x_hi) return 0;
  const int row = cell_y(p.y());
  int count = 0;
  for (int col = cell_x(p.x()); col < hash_.nx; ++col) {
    for (int g : hash_.cells[static_cast<std::size_t>(row) * hash_.nx + col]) {
      const auto [c, i] = seg_owner_[g];
      const Point2 a = segment_a(c, i), b = segment_b(c, i);
      if ((a.y() > p.y()) == (b.y() > p.y())) continue;
      double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      xc = std::clamp(xc, std::min(a.x(), b.x()), std::max(a.x(), b.x()));
      if (xc > p.x() && cell_x(xc) == col) ++count;
    }
  }
  return count;
}

int Boundary::crossings_brute_force(const Point2& p) const {
  int count = 0;
  for (int g = 0; g < total_segments(); ++g) {
    const auto [c, i] = seg_owner_[g];
    const Point2 a = segment_a(c, i), b = segment_b(c, i);
    if ((a.y() > p.y()) == (b.y() > p.y())) continue;
    double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
    xc = std::clamp(xc, std::min(a.x(), b.x()), std::max(a.x(), b.x()));
    if (xc > p.x()) ++count;
  }
  return count;
}

namespace {

void check_simple(const Boundary& b) {
  for (int c = 0; c < static_cast<int>(b.num_components()); ++c) {
    const int n = b.num_segments(c);
    for (int i = 0; i < n; ++i) {
      const Point2 a0 = b.segment_a(c, i), a1 = b.segment_b(c, i);
      Box2 box;
      box.expand(a0);
      box.expand(a1);
      std::vector<int> cand;
      b.for_each_candidate(box, [&](int g) { cand.push_back(g); });
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (int g : cand) {
        const auto [c2, j] = b.segment_of_global(g);
        if (c2 != c || j <= i) continue;
        const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
        const Point2 b0 = b.segment_a(c, j), b1 = b.segment_b(c, j);
        if (adjacent) {
          // Adjacent segments share one vertex; they must not fold back onto each other.
          const Point2 shared = (j == i + 1) ? a1 : a0;
          const Point2 u = ((j == i + 1) ? a0 : a1) - shared;
          const Point2 v = ((j == i + 1) ? b1 : b0) - shared;
          if (std::abs(cross2(u, v)) <= 1e-14 * u.norm() * v.norm() && u.dot(v) > 0.0) {
            throw InvalidDomainError("component " + std::to_string(c) + " folds back at segment " +
                                     std::to_string(j));
          }
          continue;
        }
        if (segments_intersect(a0, a1, b0, b1)) {
          throw InvalidDomainError("component " + std::to_string(c) + " self-intersects (segments " +
                                   std::to_string(i) + ", " + std::to_string(j) + ")");
        }
      }
    }
  }
}

double signed_area(const Polyline& pl) {
  double a = 0.0;
  const std::size_t n = pl.vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(pl.vertices[i], pl.vertices[(i + 1) % n]);
  return 0.5 * a;
}

}  // namespace

Domain::Domain(std::vector<Polyline> components, std::optional<Point2> interior_hint)
    : boundary_([&] {
        for (std::size_t c = 0; c < components.size(); ++c) {
          if (!components[c].closed) throw InvalidDomainError("component " + std::to_string(c) + " is open");
        }
        return Boundary(std::move(components));
      }()),
      interior_hint_(interior_hint) {
  check_simple(boundary_);
  const int nc = static_cast<int>(boundary_.num_components());
  interior_left_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    // A component is a hole when a point on it (away from the other components) has
    // odd ray parity with respect to the other components.
    int best_i = 0;
    double best_d = -1.0;
    for (int i = 0; i < boundary_.num_segments(c) && nc > 1; ++i) {
      const Point2 m = 0.5 * (boundary_.segment_a(c, i) + boundary_.segment_b(c, i));
      double d = kInf;
      for (int c2 = 0; c2 < nc; ++c2) {
        if (c2 == c) continue;
        for (int j = 0; j < boundary_.num_segments(c2); ++j) {
          d = std::min(d, project_to_segment(m, boundary_.segment_a(c2, j), boundary_.segment_b(c2, j)).distance);
        }
      }
      if (d > best_d) {
        best_d = d;
        best_i = i;
      }
    }
    const Point2 m = 0.5 * (boundary_.segment_a(c, best_i) + boundary_.segment_b(c, best_i));
    int crossings = 0;
    for (int c2 = 0; c2 < nc; ++c2) {
      if (c2 == c) continue;
      for (int j = 0; j < boundary_.num_segments(c2); ++j) {
        const Point2 a = boundary_.segment_a(c2, j), b = boundary_.segment_b(c2, j);
        if ((a.y() > m.y()) == (b.y() > m.y())) continue;
        const double xc = a.x() + (m.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (xc > m.x()) ++crossings;
      }
    }
    const bool hole = crossings % 2 == 1;
    interior_left_[c] = (signed_area(boundary_.component(c)) > 0.0) != hole;
  }
  if (interior_hint_ && !inside(*interior_hint_)) {
    throw InvalidDomainError("interior_hint lies outside the domain");
  }
}

bool Domain::inside(const Point2& x) const {
  if (!bbox().contains(x)) return false;
  return boundary_.crossings_to_right(x) % 2 == 1;
}

bool Domain::inside_brute_force(const Point2& x) const { return boundary_.crossings_brute_force(x) % 2 == 1; }

double Domain::signed_distance(const Point2& x) const {
  const double d = boundary_.unsigned_distance(x);
  if (d == 0.0) return 0.0;
  return inside(x) ? d : -d;
}

Domain Domain::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("domain document must be a JSON object");
  const int dim = j.value("dim", 2);
  if (dim != 2) throw InputError("planar domain loader expects \"dim\": 2, got " + std::to_string(dim));
  if (!j.contains("components") || !j["components"].is_array()) throw InputError("domain needs a \"components\" array");
  std::vector<Polyline> comps;
  for (std::size_t c = 0; c < j["components"].size(); ++c) {
    const auto& jc = j["components"][c];
    if (!jc.is_array()) throw InputError("component " + std::to_string(c) + " must be an array of points");
    Polyline pl;
    for (const auto& jp : jc) {
      if (!jp.is_array() || jp.size() != 2) throw InputError("component " + std::to_string(c) + ": points are [x, y]");
      pl.vertices.emplace_back(jp[0].get<double>(), jp[1].get<double>());
    }
    if (pl.vertices.size() < 4 || pl.vertices.front() != pl.vertices.back()) {
      throw InputError("component " + std::to_string(c) +
                       " is an open polyline (close it by repeating the first vertex)");
    }
    pl.vertices.pop_back();
    comps.push_back(std::move(pl));
  }
  std::optional<Point2> hint;
  if (j.contains("interior_hint")) {
    const auto& h = j["interior_hint"];
    if (!h.is_array() || h.size() != 2) throw InputError("interior_hint must be [x, y]");
    hint = Point2(h[0].get<double>(), h[1].get<double>());
  }
  Domain d(std::move(comps), hint);
  d.set_truncated_proxy(j.value("truncated", false));
  return d;
}

Domain Domain::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open domain file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("domain file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json Domain::to_json() const {
  nlohmann::json j;
  j["dim"] = 2;
  j["components"] = nlohmann::json::array();
  for (std::size_t c = 0; c < boundary_.num_components(); ++c) {
    nlohmann::json jc = nlohmann::json::array();
    const auto& v = boundary_.component(static_cast<int>(c)).vertices;
    for (const auto& p : v) jc.push_back({p.x(), p.y()});
    jc.push_back({v.front().x(), v.front().y()});
    j["components"].push_back(std::move(jc));
  }
  if (interior_hint_) j["interior_hint"] = {interior_hint_->x(), interior_hint_->y()};
  if (truncated_proxy_) j["truncated"] = true;
  return j;
}

SurfaceBall surface_ball(const Boundary& boundary, const Point2& x, double r) {
  const double tol = 1e-9 * std::max(1.0, boundary.diameter());
  if (boundary.unsigned_distance(x) > tol) {
    std::ostringstream os;
    os << "surface ball centre (" << x.x() << ", " << x.y() << ") is not on the boundary";
    throw InputError(os.str());
  }
  if (!(r > 0.0) || !(r < boundary.diameter())) {
    std::ostringstream os;
    os << "surface ball radius " << r << " outside (0, diam) = (0, " << boundary.diameter() << ")";
    throw RangeError(os.str());
  }
  return boundary.ball_intersection(x, r);
}

ARReport ar_check(const Boundary& boundary, std::span<const BoundaryPoint> centers, std::span<const double> radii) {
  if (centers.size() < 32) throw InputError("ar_check needs at least 32 centres");
  for (double r : radii) {
    if (!(r > 0.0) || !(r < boundary.diameter())) throw RangeError("ar_check radius outside (0, diam)");
  }
  ARReport rep;
  for (double r : radii) {
    ARScale s;
    s.radius = r;
    for (const auto& x : centers) {
      const double ratio = boundary.ball_intersection(x.position, r).measure / r;
      s.lower = std::min(s.lower, ratio);
      s.upper = std::max(s.upper, ratio);
    }
    rep.lower = std::min(rep.lower, s.lower);
    rep.upper = std::max(rep.upper, s.upper);
    rep.per_scale.push_back(s);
  }
  rep.pass = rep.lower > 0.0 && std::isfinite(rep.upper);
  return rep;
}

ARReport ar_check(const Domain& domain, std::span<const BoundaryPoint> centers, std::span<const double> radii) {
  ARReport rep = ar_check(domain.boundary(), centers, radii);
  rep.truncated_proxy = domain.truncated_proxy();
  return rep;
}

std::vector<double> radius_ladder(double r_max, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::ldexp(r_max, -i));
  return out;
}

}  // namespace cadkit
