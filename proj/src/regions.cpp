#include "cadkit/regions.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace cadkit {

namespace {

using Interval = std::pair<double, double>;

std::vector<Interval> merge(std::vector<Interval> v) {
  std::sort(v.begin(), v.end());
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double total(const std::vector<Interval>& v) {
  double s = 0.0;
  for (const auto& iv : v) s += iv.second - iv.first;
  return s;
}

double overlap(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first), hi = std::min(a[i].second, b[j].second);
    if (hi > lo) s += hi - lo;
    if (a[i].second < b[j].second) ++i; else ++j;
  }
  return s;
}

double smoothstep5(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double cube_box_distance(const DyadicGrid& g, int q, const Box2& box) {
  double d = kInf;
  for (const auto& p : g.pieces(q)) d = std::min(d, box_segment_distance(box, p.a, p.b));
  return d;
}

// Boxes within reach of x: the box containing it and two rings of touching boxes. Points in
// the truncation layer start from a stencil at the finest box size.
std::vector<int> nearby(const Whitney& w, const Point2& x, int rings) {
  std::vector<int> seed;
  const int k = w.locate(x);
  if (k >= 0) {
    seed.push_back(k);
  } else {
    const double e = 0.375 * w.side(w.finest_generation());
    for (int a = -1; a <= 1; ++a) {
      for (int b = -1; b <= 1; ++b) {
        const int j = w.locate(x + Point2(a * e, b * e));
        if (j >= 0) seed.push_back(j);
      }
    }
  }
  std::vector<int> out = seed;
  std::vector<int> frontier = seed;
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int i : frontier) {
      for (int j : w.touching(i)) next.push_back(j);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double fat_factor(Fat fat, double lambda) {
  switch (fat) {
    case Fat::one: return 1.0 + lambda;
    case Fat::two: return 1.0 + 2.0 * lambda;
    case Fat::three: return 1.0 + 4.0 * lambda;
  }
  return 1.0;
}

UnionMeasure union_measure(std::span<const Box2> boxes) {
  UnionMeasure m;
  if (boxes.empty()) return m;
  std::vector<double> xs;
  for (const auto& b : boxes) {
    xs.push_back(b.lo.x());
    xs.push_back(b.hi.x());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<int> order(boxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return boxes[a].lo.x() < boxes[b].lo.x(); });
  std::vector<int> active;
  std::size_t next = 0;
  std::vector<Interval> prev;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double x0 = xs[s], x1 = xs[s + 1];
    while (next < order.size() && boxes[order[next]].lo.x() <= x0) active.push_back(order[next++]);
    std::erase_if(active, [&](int i) { return boxes[i].hi.x() <= x0; });
    std::vector<Interval> iv;
    for (int i : active) iv.emplace_back(boxes[i].lo.y(), boxes[i].hi.y());
    const auto cur = merge(std::move(iv));
    const double len = total(cur);
    m.area += (x1 - x0) * len;
    m.perimeter += (x1 - x0) * 2.0 * static_cast<double>(cur.size());
    m.perimeter += len + total(prev) - 2.0 * overlap(prev, cur);
    prev = cur;
  }
  m.perimeter += total(prev);
  return m;
}

nlohmann::json SawtoothRegion::to_json() const {
  return {{"root", root}, {"family", family}, {"cubes", cubes}, {"boxes", region.boxes},
          {"fat", static_cast<int>(region.fat)}};
}

Regions::Regions(const Whitney& whitney, const RegionParams& params) : w_(&whitney), params_(params) {
  if (params.kstar < 0) throw ParameterError("k* must be nonnegative");
  if (!(params.K0 > 0.0)) throw ParameterError("K0 must be positive");
}

const std::optional<CorkscrewWitness>& Regions::corkscrew(int cube) const {
  auto it = corkscrew_.find(cube);
  if (it != corkscrew_.end()) return it->second;
  const DyadicCube& q = grid().cube(cube);
  return corkscrew_.emplace(cube, find_corkscrew(domain(), q.center.position, q.radius)).first->second;
}

const std::vector<int>& Regions::whitney_set(int cube) const {
  auto it = wset_.find(cube);
  if (it != wset_.end()) return it->second;
  const auto& ck = corkscrew(cube);
  if (!ck) throw ParameterError("cube " + std::to_string(cube) + " has no corkscrew point; W_Q cannot be anchored");
  const int anchor = w_->locate(ck->center);
  if (anchor < 0) {
    throw ResolutionError("corkscrew point of cube " + std::to_string(cube) +
                          " lies in the Whitney truncation layer; deepen the decomposition");
  }
  const DyadicCube& q = grid().cube(cube);
  const double reach = params_.K0 * q.length;
  Box2 hull;
  for (const auto& p : grid().pieces(cube)) {
    hull.expand(p.a);
    hull.expand(p.b);
  }
  const Box2 zone = hull.inflated(reach);
  std::vector<char> in(w_->size(), 0);
  in[anchor] = 1;
  for (int k = q.k - params_.kstar; k <= q.k + params_.kstar; ++k) {
    for (int id : w_->by_generation(k)) {
      const Box2& b = w_->box(id).box;
      if (!b.intersects(zone)) continue;
      if (cube_box_distance(grid(), cube, b) <= reach) in[id] = 1;
    }
  }
  std::vector<int> out;
  std::vector<char> seen(w_->size(), 0);
  std::queue<int> bfs;
  bfs.push(anchor);
  seen[anchor] = 1;
  while (!bfs.empty()) {
    const int i = bfs.front();
    bfs.pop();
    out.push_back(i);
    for (int j : w_->face_neighbors(i)) {
      if (in[j] && !seen[j]) {
        seen[j] = 1;
        bfs.push(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return wset_.emplace(cube, std::move(out)).first->second;
}

std::vector<int> Regions::sawtooth_cubes(std::span<const int> family, int root) const {
  const DyadicGrid& g = grid();
  for (std::size_t a = 0; a < family.size(); ++a) {
    if (!g.is_ancestor(root, family[a])) {
      throw InputError("family member " + std::to_string(family[a]) + " is not below cube " + std::to_string(root));
    }
    for (std::size_t b = a + 1; b < family.size(); ++b) {
      if (g.is_ancestor(family[a], family[b]) || g.is_ancestor(family[b], family[a])) {
        throw InputError("family members " + std::to_string(family[a]) + " and " + std::to_string(family[b]) +
                         " are not disjoint");
      }
    }
  }
  std::vector<char> stop(g.size(), 0);
  for (int f : family) stop[f] = 1;
  std::vector<int> out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    if (stop[q]) continue;
    out.push_back(q);
    for (int c : g.cube(q).children) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SawtoothRegion Regions::sawtooth(std::span<const int> family, int root, Fat fat) const {
  SawtoothRegion s;
  s.root = root;
  s.family.assign(family.begin(), family.end());
  s.cubes = sawtooth_cubes(family, root);
  s.region.fat = fat;
  for (int q : s.cubes) {
    const auto& ws = whitney_set(q);
    s.region.boxes.insert(s.region.boxes.end(), ws.begin(), ws.end());
  }
  std::sort(s.region.boxes.begin(), s.region.boxes.end());
  s.region.boxes.erase(std::unique(s.region.boxes.begin(), s.region.boxes.end()), s.region.boxes.end());
  return s;
}

std::vector<int> Regions::augment_family(std::span<const int> family, double rho, int root) const {
  if (!(rho > 0.0)) throw RangeError("augmentation scale rho must be positive");
  const DyadicGrid& g = grid();
  (void)sawtooth_cubes(family, root);  // validates F
  std::vector<char> stop(g.size(), 0);
  for (int f : family) stop[f] = 1;
  std::vector<int> out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    const DyadicCube& c = g.cube(q);
    if (stop[q] || c.length <= rho) {
      out.push_back(q);
      continue;
    }
    if (c.children.empty()) {
      throw ResolutionError("grid depth " + std::to_string(g.depth()) + " too shallow for rho = " + std::to_string(rho));
    }
    for (int ch : c.children) stack.push_back(ch);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SawtoothRegion Regions::u_q_eps(int cube, double eps, Fat fat) const {
  int m = 0;
  const double f = std::frexp(eps, &m);
  if (!(eps > 0.0 && eps < 1.0) || f != 0.5) throw RangeError("epsilon must be 2^{-m} with m ≥ 1");
  const auto fam = augment_family({}, eps * grid().cube(cube).length, cube);
  return sawtooth(fam, cube, fat);
}

std::vector<Box2> Regions::boxes_of(const BoxRegion& r) const {
  const double f = fat_factor(r.fat, w_->lambda());
  std::vector<Box2> out;
  out.reserve(r.boxes.size());
  for (int id : r.boxes) out.push_back(w_->fattened(id, f));
  return out;
}

bool Regions::contains(const BoxRegion& r, const Point2& x) const {
  const double f = fat_factor(r.fat, w_->lambda());
  for (int id : nearby(*w_, x, 2)) {
    if (std::binary_search(r.boxes.begin(), r.boxes.end(), id) && w_->fattened(id, f).contains_open(x)) return true;
  }
  return false;
}

double Regions::tent_kappa(int cube) const {
  const auto t = carleson_box(cube, Fat::three);
  const DyadicCube& q = grid().cube(cube);
  double kappa = 0.0;
  for (const auto& b : boxes_of(t.region)) {
    const Point2 c[4] = {b.lo, b.hi, {b.lo.x(), b.hi.y()}, {b.hi.x(), b.lo.y()}};
    for (const auto& p : c) kappa = std::max(kappa, (p - q.center.position).norm() / q.radius);
  }
  return kappa;
}

int overlap_multiplicity(const Regions& regions, std::span<const BoxRegion> family, double pitch) {
  Box2 hull;
  std::vector<std::vector<Box2>> sets;
  for (const auto& r : family) {
    sets.push_back(regions.boxes_of(r));
    for (const auto& b : sets.back()) {
      hull.expand(b.lo);
      hull.expand(b.hi);
    }
  }
  if (hull.empty()) return 0;
  const long nx = static_cast<long>(std::ceil(hull.size().x() / pitch)) + 1;
  const long ny = static_cast<long>(std::ceil(hull.size().y() / pitch)) + 1;
  if (nx * ny > 50'000'000L) throw ResolutionError("overlap probe lattice too fine for the region family");
  std::vector<int> count(static_cast<std::size_t>(nx * ny), 0);
  std::vector<long> cells;
  for (const auto& set : sets) {
    cells.clear();
    for (const auto& b : set) {
      // Probe points (i + 1/2)·pitch strictly inside the box.
      const long i0 = std::max(0L, static_cast<long>(std::floor((b.lo.x() - hull.lo.x()) / pitch - 0.5)) + 1);
      const long i1 = std::min(nx - 1, static_cast<long>(std::ceil((b.hi.x() - hull.lo.x()) / pitch - 0.5)) - 1);
      const long j0 = std::max(0L, static_cast<long>(std::floor((b.lo.y() - hull.lo.y()) / pitch - 0.5)) + 1);
      const long j1 = std::min(ny - 1, static_cast<long>(std::ceil((b.hi.y() - hull.lo.y()) / pitch - 0.5)) - 1);
      for (long j = j0; j <= j1; ++j) {
        for (long i = i0; i <= i1; ++i) cells.push_back(j * nx + i);
      }
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    for (long c : cells) ++count[static_cast<std::size_t>(c)];
  }
  return *std::max_element(count.begin(), count.end());
}

Cutoff::Cutoff(const Regions& regions, std::span<const int> boxes) : regions_(&regions), boxes_(boxes.begin(), boxes.end()) {
  const Whitney& w = regions.whitney();
  if (w.lambda() > 0.125) throw ParameterError("lambda too large for the cutoff bumps");
  std::sort(boxes_.begin(), boxes_.end());
  boxes_.erase(std::unique(boxes_.begin(), boxes_.end()), boxes_.end());
  member_.assign(w.size(), 0);
  for (int b : boxes_) member_[b] = 1;
  for (int b : boxes_) {
    bool edge = w.touches_truncation(b);
    for (int j : w.touching(b)) edge = edge || !member_[j];
    if (edge) sigma_.push_back(b);
  }
}

double Cutoff::bump(const Box2& box, double lambda, const Point2& x) {
  const Point2 c = box.center();
  const double half = 0.5 * box.size().x();
  const double inner = 1.0 + 2.0 * lambda, outer = 1.0 + 3.0 * lambda;
  double v = 1.0;
  for (int a = 0; a < 2; ++a) {
    const double t = std::abs(x[a] - c[a]) / half;
    v *= smoothstep5((outer - t) / (outer - inner));
    if (v == 0.0) return 0.0;
  }
  return v;
}

std::vector<int> Cutoff::candidates(const Point2& x) const { return nearby(regions_->whitney(), x, 1); }

double Cutoff::operator()(const Point2& x) const {
  const Whitney& w = regions_->whitney();
  double num = 0.0, den = 0.0;
  for (int id : candidates(x)) {
    const double phi = bump(w.box(id).box, w.lambda(), x);
    den += phi;
    if (member_[id]) num += phi;
  }
  return den > 0.0 ? num / den : 0.0;
}

double Cutoff::partition_sum(const Point2& x) const {
  const Whitney& w = regions_->whitney();
  std::vector<double> phi;
  double den = 0.0;
  for (int id : candidates(x)) {
    phi.push_back(bump(w.box(id).box, w.lambda(), x));
    den += phi.back();
  }
  if (den <= 0.0) return 0.0;
  double s = 0.0;
  for (double p : phi) s += p / den;
  return s;
}

FieldSample Cutoff::sample(const Domain& domain, const Box2& box, double h) const {
  FieldSample f = FieldSample::uniform(domain, box, h);
  f.fill([&](const Point2& x) { return (*this)(x); });
  return f;
}

CutoffReport check_cutoff(const Cutoff& psi, int probes_per_box) {
  if (probes_per_box < 1) throw RangeError("probes per box must be positive");
  const Regions& regions = psi.regions();
  const Whitney& w = regions.whitney();
  const Domain& dom = regions.domain();
  const double lam = w.lambda();
  CutoffReport rep;
  std::vector<char> edge(w.size(), 0);
  for (int b : psi.boundary_boxes()) {
    edge[b] = 1;
    rep.sigma_sum += w.box(b).side;
  }
  std::vector<Box2> support;
  for (int b : psi.boxes()) support.push_back(w.fattened(b, 1.0 + 3.0 * lam));
  auto grad = [&](const Point2& x, double eta) {
    const double gx = psi(x + Point2(eta, 0.0)) - psi(x - Point2(eta, 0.0));
    const double gy = psi(x + Point2(0.0, eta)) - psi(x - Point2(0.0, eta));
    return Point2(gx, gy).norm() / (2.0 * eta);
  };
  const int m = probes_per_box;
  for (int b : psi.boxes()) {
    const WhitneyBox& I = w.box(b);
    const Box2 outer = w.fattened(b, 1.0 + 4.0 * lam);
    const Box2 one = w.fattened(b, 1.0 + lam), two = w.fattened(b, 1.0 + 2.0 * lam);
    const double eta = 1e-4 * I.side;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const Point2 x = outer.lo + Point2((i + 0.5) / m * outer.size().x(), (j + 0.5) / m * outer.size().y());
        const double dx = dom.delta(x);
        if (!(dx > 0.0) || !dom.inside(x)) continue;
        const double v = psi(x);
        if (one.contains(x)) rep.lower = std::min(rep.lower, v);
        if (two.contains(x)) rep.partition_error = std::max(rep.partition_error, std::abs(psi.partition_sum(x) - 1.0));
        const double g = grad(x, eta);
        rep.grad_delta = std::max(rep.grad_delta, g * dx);
        if (!edge[b]) rep.interior_grad = std::max(rep.interior_grad, g);
      }
    }
  }
  // Leak: probes in touching boxes outside W_N that lie off every member support.
  for (int b : psi.boundary_boxes()) {
    for (int j : w.touching(b)) {
      if (psi.in_family(j)) continue;
      const Box2 box = w.box(j).box;
      for (int jj = 0; jj < m; ++jj) {
        for (int ii = 0; ii < m; ++ii) {
          const Point2 x = box.lo + Point2((ii + 0.5) / m * box.size().x(), (jj + 0.5) / m * box.size().y());
          bool covered = false;
          for (const auto& s : support) covered = covered || s.contains(x);
          if (!covered) rep.upper_leak = std::max(rep.upper_leak, psi(x));
        }
      }
    }
  }
  if (psi.boxes().empty()) rep.lower = 0.0;
  return rep;
}

double poincare_check(const Regions& regions, const BoxRegion& region, const FieldSample& f, double p, double ell) {
  if (region.boxes.empty()) throw InputError("Poincaré check on an empty region");
  if (!(p >= 1.0)) throw RangeError("Poincaré exponent must be at least 1");
  std::vector<double> w, v, g;
  for (int j = 0; j < f.ny(); ++j) {
    for (int i = 0; i < f.nx(); ++i) {
      if (!f.active(i, j) || !regions.contains(region, f.node(i, j))) continue;
      const auto grad = f.gradient(i, j);
      if (!grad) continue;
      w.push_back(f.cell_area(i, j));
      v.push_back(f.at(i, j));
      g.push_back(grad->norm());
    }
  }
  if (w.empty()) throw InputError("no field nodes inside the region");
  double sw = 0.0, mean = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    sw += w[n];
    mean += w[n] * v[n];
  }
  mean /= sw;
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    num += w[n] * std::pow(std::abs(v[n] - mean), p);
    den += w[n] * std::pow(g[n], p);
  }
  num = std::pow(num, 1.0 / p);
  den = ell * std::pow(den, 1.0 / p);
  if (den <= 1e-300) return 0.0;
  return num / den;
}

}  // namespace cadkit
