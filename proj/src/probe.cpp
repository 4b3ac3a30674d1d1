#include "cadkit/probe.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace cadkit {

namespace {

struct Offset {
  int i, j;
  double norm;
};

// Lattice offsets strictly inside the disk of radius `res`, nearest first.
const std::vector<Offset>& disk_offsets(int res) {
  static std::mutex mu;
  static std::map<int, std::vector<Offset>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(res);
  if (it != cache.end()) return it->second;
  std::vector<Offset> v;
  for (int j = -res; j <= res; ++j) {
    for (int i = -res; i <= res; ++i) {
      if (i * i + j * j < res * res) v.push_back({i, j, std::sqrt(double(i * i + j * j))});
    }
  }
  std::stable_sort(v.begin(), v.end(), [](const Offset& a, const Offset& b) { return a.norm < b.norm; });
  return cache.emplace(res, std::move(v)).first->second;
}

// Largest ρ = min(dist to the wanted side, R − |X − z|) over the lattice around z.
// `want_inside` selects Ω or the exterior of Ω̄. Stops early once `enough` is reached.
std::pair<Point2, double> best_ball(const Domain& d, const Point2& z, double R, int res, bool want_inside,
                                    double enough = kInf) {
  const double h = R / res;
  double best = 0.0;
  Point2 best_x = z;
  for (const auto& o : disk_offsets(res)) {
    const double margin = R - o.norm * h;
    if (margin <= best) break;
    const Point2 X = z + h * Point2(o.i, o.j);
    const double u = d.delta(X);
    if (std::min(u, margin) <= best || u <= 0.0) continue;
    if (d.inside(X) != want_inside) continue;
    best = std::min(u, margin);
    best_x = X;
    if (best >= enough) break;
  }
  return {best_x, best};
}

}  // namespace

std::optional<CorkscrewWitness> find_corkscrew(const Domain& domain, const Point2& x, double r, int resolution) {
  if (!(r > 0.0)) throw RangeError("corkscrew radius must be positive");
  const auto [X, rho] = best_ball(domain, x, r, resolution, true);
  const double c = rho / r;
  if (c < 1.0 / 128) return std::nullopt;
  return CorkscrewWitness{X, rho, c, x, r};
}

bool verify_corkscrew(const Domain& domain, const CorkscrewWitness& w, int samples, std::mt19937_64& rng) {
  if (domain.signed_distance(w.center) < w.radius * (1 - 1e-12)) return false;
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int taken = 0;
  while (taken < samples) {
    const Point2 u(U(rng), U(rng));
    if (u.squaredNorm() >= 1.0) continue;
    ++taken;
    const Point2 p = w.center + w.radius * u;
    if (!domain.inside(p) || (p - w.x).norm() >= w.r) return false;
  }
  return true;
}

ExteriorWitness exterior_corkscrew_check(const Domain& domain, const DyadicGrid& grid, int cube, double c0,
                                         const ExteriorParams& params) {
  const DyadicCube& q = grid.cube(cube);
  ExteriorWitness out;
  out.cube = cube;
  out.c0 = c0;
  const double need = c0 * q.length;
  const double R = q.radius / 4.0;
  const SurfaceBall ball = grid.surface_ball(cube);
  const int n = std::max(params.z_samples, 64);
  double best = 0.0;
  std::size_t arc = 0;
  double before = 0.0;
  for (int i = 0; i < n && !ball.arcs.empty(); ++i) {
    const double s = (i + 0.5) * ball.measure / n;
    while (arc + 1 < ball.arcs.size() && before + ball.arcs[arc].length() < s) before += ball.arcs[arc++].length();
    const ArcPiece& a = ball.arcs[arc];
    const double f = a.length() > 0.0 ? std::clamp((s - before) / a.length(), 0.0, 1.0) : 0.0;
    const Point2 z = a.a + f * (a.b - a.a);
    const auto [X, rho] = best_ball(domain, z, R, params.resolution, false, need);
    if (rho > best) {
      best = rho;
      out.z = z;
      out.center = X;
      out.radius = rho;
    }
    if (best >= need) break;
  }
  out.c_achieved = best / q.length;
  out.pass = best >= need;
  return out;
}

BadCubeReport bad_cubes(const Domain& domain, const DyadicGrid& grid, double c0, int max_generation,
                        const ExteriorParams& params) {
  BadCubeReport rep;
  rep.c0 = c0;
  const int top = max_generation < 0 ? grid.depth() : std::min(max_generation, grid.depth());
  for (const auto& q : grid.cubes()) {
    if (q.k > top) continue;
    rep.rows.push_back(exterior_corkscrew_check(domain, grid, q.id, c0, params));
    if (!rep.rows.back().pass) rep.bad.push_back(q.id);
  }
  return rep;
}

std::optional<HarnackChain> harnack_chain(const Whitney& whitney, const Point2& x, const Point2& x2) {
  const Domain& d = whitney.domain();
  if (!(d.signed_distance(x) > 0.0) || !(d.signed_distance(x2) > 0.0)) {
    throw RangeError("Harnack chain endpoints must lie in the domain");
  }
  HarnackChain ch;
  ch.x = x;
  ch.x2 = x2;
  const double dx = d.delta(x), dx2 = d.delta(x2);
  ch.lambda = (x - x2).norm() / std::min(dx, dx2);
  if (x == x2) {
    ch.balls.push_back({x, 0.5 * dx});
    ch.n = 1;
    ch.sandwich = 2.0;
    return ch;
  }
  const int a = whitney.locate(x), b = whitney.locate(x2);
  if (a < 0 || b < 0) throw ResolutionError("Harnack chain endpoint lies in the Whitney truncation layer");
  std::vector<int> prev(whitney.size(), -2);
  std::queue<int> bfs;
  bfs.push(a);
  prev[a] = -1;
  while (!bfs.empty() && prev[b] == -2) {
    const int i = bfs.front();
    bfs.pop();
    for (int j : whitney.face_neighbors(i)) {
      if (prev[j] != -2) continue;
      prev[j] = i;
      bfs.push(j);
    }
  }
  if (prev[b] == -2) return std::nullopt;
  for (int i = b; i != -1; i = prev[i]) ch.path.push_back(i);
  std::reverse(ch.path.begin(), ch.path.end());

  std::vector<Ball> all{{x, 0.5 * dx}};
  for (int i : ch.path) {
    const Point2 c = whitney.box(i).center();
    all.push_back({c, 0.5 * d.delta(c)});
  }
  all.push_back({x2, 0.5 * dx2});
  auto meet = [&](const Ball& p, const Ball& q) { return (p.center - q.center).norm() < p.radius + q.radius; };
  std::size_t i = 0;
  ch.balls.push_back(all[0]);
  while (i + 1 < all.size()) {
    std::size_t j = all.size() - 1;
    while (j > i + 1 && !meet(all[i], all[j])) --j;
    ch.balls.push_back(all[j]);
    i = j;
  }
  ch.n = static_cast<int>(ch.balls.size());
  for (const auto& bl : ch.balls) {
    const double dist = d.delta(bl.center) - bl.radius;
    const double diam = 2.0 * bl.radius;
    ch.sandwich = std::max({ch.sandwich, diam / dist, dist / diam});
  }
  return ch;
}

Classification classify(const Domain& domain, const DyadicGrid& grid, const Whitney& whitney,
                        const ClassifyParams& params) {
  Classification out;
  const auto centers = domain.boundary().sample(64);
  const auto radii = radius_ladder(0.25 * domain.boundary_diameter(), 6);
  out.ar = ar_check(domain, centers, radii);
  if (!out.ar.pass) throw PreconditionError("classification needs an Ahlfors-regular boundary");

  std::vector<int> gens = params.generations;
  if (gens.empty()) {
    for (int k = 1; k < grid.depth(); ++k) gens.push_back(k);
  }
  std::sort(gens.begin(), gens.end());
  out.interior_ok = true;
  out.exterior_ok = true;
  out.harnack_ok = true;
  std::map<int, Point2> corkscrew;
  for (int k : gens) {
    ScaleRow row;
    row.generation = k;
    for (int id : grid.generation(k)) {
      const DyadicCube& q = grid.cube(id);
      const auto w = find_corkscrew(domain, q.center.position, q.radius);
      if (w) {
        corkscrew[id] = w->center;
        row.corkscrew_c = std::min(row.corkscrew_c, w->c);
      } else {
        row.corkscrew_c = 0.0;
        out.interior_ok = false;
      }
      const auto ext = exterior_corkscrew_check(domain, grid, id, params.c0, params.exterior);
      row.exterior_c = std::min(row.exterior_c, ext.c_achieved);
      if (!ext.pass) {
        ++row.exterior_failures;
        out.exterior_ok = false;
      }
      ++row.cubes;
    }
    out.corkscrew_c = std::min(out.corkscrew_c, row.corkscrew_c);
    out.exterior_c = std::min(out.exterior_c, row.exterior_c);
    out.scales.push_back(row);
  }
  const int g0 = gens.front();
  for (int k : gens) {
    if (k == g0) continue;
    for (int id : grid.generation(k)) {
      const int top = grid.ancestor(id, g0);
      if (!corkscrew.count(id) || !corkscrew.count(top)) continue;
      HarnackRow row;
      row.cube = id;
      try {
        const auto ch = harnack_chain(whitney, corkscrew[id], corkscrew[top]);
        if (ch) {
          row.lambda = ch->lambda;
          row.n = ch->n;
          out.harnack_ratio = std::max(out.harnack_ratio, ch->n / (1.0 + std::log2(std::max(ch->lambda, 1.0))));
        } else {
          out.harnack_ok = false;
        }
      } catch (const ResolutionError&) {
        continue;
      }
      out.harnack.push_back(row);
    }
  }
  if (out.harnack_ratio > params.harnack_bound) out.harnack_ok = false;
  if (out.interior_ok && out.harnack_ok) {
    out.verdict = out.exterior_ok ? "CAD" : "1-sided CAD";
  } else {
    out.verdict = "neither";
  }
  return out;
}

}  // namespace cadkit
