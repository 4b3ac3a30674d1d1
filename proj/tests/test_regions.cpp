#include "doctest.h"

#include "cadkit/error.hpp"
#include "cadkit/regions.hpp"
#include "cadkit/shapes.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

using namespace cadkit;

namespace {

struct Setup {
  Domain domain;
  DyadicGrid grid;
  Whitney whitney;
  Setup(Domain d, int depth)
      : domain(std::move(d)), grid(DyadicGrid::build(domain, depth)), whitney(Whitney::build(domain, grid)) {}
};

const Setup& half_plane() {
  static const Setup s(make_half_plane_proxy(), 3);
  return s;
}

std::vector<int> floor_cubes(const DyadicGrid& g, int k) {
  std::vector<int> out;
  for (int id : g.generation(k)) {
    if (std::abs(g.cube(id).center.position.y()) < 1e-12) out.push_back(id);
  }
  return out;
}

// Area and a moment of f(x) = x over a union of boxes, from the coverage of each x-slab.
struct SlabMoments {
  double area = 0.0, m1 = 0.0, m2 = 0.0;
};
SlabMoments slab_moments(const std::vector<Box2>& boxes) {
  std::set<double> cuts;
  for (const auto& b : boxes) {
    cuts.insert(b.lo.x());
    cuts.insert(b.hi.x());
  }
  const std::vector<double> xs(cuts.begin(), cuts.end());
  SlabMoments m;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s], b = xs[s + 1], mid = 0.5 * (a + b);
    std::vector<std::pair<double, double>> iv;
    for (const auto& box : boxes) {
      if (box.lo.x() < mid && box.hi.x() > mid) iv.emplace_back(box.lo.y(), box.hi.y());
    }
    std::sort(iv.begin(), iv.end());
    double len = 0.0, hi = -kInf;
    for (const auto& [lo, up] : iv) {
      if (up <= hi) continue;
      len += up - std::max(lo, hi);
      hi = up;
    }
    m.area += (b - a) * len;
    m.m1 += (b * b - a * a) / 2.0 * len;
    m.m2 += (b * b * b - a * a * a) / 3.0 * len;
  }
  return m;
}

}  // namespace

TEST_CASE("union area and perimeter against a unit-cell count") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> corner(0, 17), extent(1, 6);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Box2> boxes;
    bool cell[24][24] = {};
    const int n = 1 + trial % 9;
    for (int b = 0; b < n; ++b) {
      const int x = corner(rng), y = corner(rng), w = extent(rng), h = extent(rng);
      boxes.push_back({Point2(x, y), Point2(x + w, y + h)});
      for (int i = x; i < x + w; ++i) {
        for (int j = y; j < y + h; ++j) cell[i][j] = true;
      }
    }
    int area = 0, edges = 0;
    auto at = [&](int i, int j) { return i >= 0 && j >= 0 && i < 24 && j < 24 && cell[i][j]; };
    for (int i = 0; i < 24; ++i) {
      for (int j = 0; j < 24; ++j) {
        if (!cell[i][j]) continue;
        ++area;
        edges += !at(i - 1, j) + !at(i + 1, j) + !at(i, j - 1) + !at(i, j + 1);
      }
    }
    const auto m = union_measure(boxes);
    CHECK(m.area == doctest::Approx(area).epsilon(1e-12));
    CHECK(m.perimeter == doctest::Approx(edges).epsilon(1e-12));
  }
  CHECK(union_measure({}).area == 0.0);
}

TEST_CASE("Whitney regions on the half-plane") {
  const Setup& s = half_plane();
  const Regions r(s.whitney);
  for (int k : {1, 2, 3}) {
    for (int q : floor_cubes(s.grid, k)) {
      const double l = s.grid.cube(q).length;
      const auto u = r.whitney_region(q);
      REQUIRE_FALSE(u.boxes.empty());
      const double ratio = r.area(u) / (l * l);
      CHECK(ratio >= 0.5);
      CHECK(ratio <= 50.0);
      const auto& x = r.corkscrew(q);
      REQUIRE(x);
      CHECK(r.contains(u, x->center));
      for (int b : u.boxes) {
        const int kb = s.whitney.box(b).k;
        if (b != s.whitney.locate(x->center)) CHECK(std::abs(kb - k) <= 2);
      }
    }
  }
  SUBCASE("Carleson boxes") {
    for (int q : floor_cubes(s.grid, 2)) {
      const double l = s.grid.cube(q).length;
      const double ratio = r.area(r.carleson_box(q).region) / (l * l);
      CHECK(ratio >= 0.2);
      CHECK(ratio <= 5.0);
    }
  }
  SUBCASE("tent nesting and sawtooth boundary") {
    const int q = floor_cubes(s.grid, 2).front();
    const auto t1 = r.carleson_box(q, Fat::one), t2 = r.carleson_box(q, Fat::two), t3 = r.carleson_box(q, Fat::three);
    CHECK(t1.region.boxes == t3.region.boxes);
    const auto a = union_measure(r.boxes_of(t1.region)), b = union_measure(r.boxes_of(t2.region)),
               c = union_measure(r.boxes_of(t3.region));
    CHECK(a.area <= b.area);
    CHECK(b.area <= c.area);
    const double l = s.grid.cube(q).length;
    CHECK(a.perimeter / l < 1e3);
    MESSAGE("sawtooth perimeter / l(Q) = " << a.perimeter / l);
    const auto j = t1.to_json();
    CHECK(j["root"] == q);
    CHECK(j["boxes"].size() == t1.region.boxes.size());
  }
}

TEST_CASE("sawtooths and augmented families") {
  const Setup& s = half_plane();
  const Regions r(s.whitney);
  const DyadicGrid& g = s.grid;
  const int root = g.generation(0).front();
  SUBCASE("F empty gives the Carleson box; F = children gives U_Q") {
    const int q = floor_cubes(g, 1).front();
    CHECK(r.sawtooth({}, q).region.boxes == r.carleson_box(q).region.boxes);
    const auto& kids = g.cube(q).children;
    const auto st = r.sawtooth(kids, q);
    CHECK(st.cubes == std::vector<int>{q});
    CHECK(st.region.boxes == r.whitney_set(q));
  }
  SUBCASE("overlapping families are rejected") {
    const int q = floor_cubes(g, 1).front();
    const int c = g.cube(q).children.front();
    const std::vector<int> bad{q, c};
    CHECK_THROWS_AS(r.sawtooth(bad, root), InputError);
  }
  SUBCASE("F(rho) with rho = 2^-3 l(Q0) stops at generation 3") {
    const auto f = r.augment_family({}, std::ldexp(g.cube(root).length, -3), root);
    CHECK(f.size() == g.generation(3).size());
    for (int id : f) CHECK(g.cube(id).k == 3);
    const auto cubes = r.sawtooth_cubes(f, root);
    std::size_t expect = 0;
    for (int k = 0; k <= 2; ++k) expect += g.generation(k).size();
    CHECK(cubes.size() == expect);
    for (int id : cubes) CHECK(g.cube(id).k <= 2);
  }
  SUBCASE("F(rho) keeps coarser members of F") {
    const int q = floor_cubes(g, 1).front();
    const std::vector<int> fam{q};
    const auto f = r.augment_family(fam, std::ldexp(g.cube(root).length, -2), root);
    CHECK(std::binary_search(f.begin(), f.end(), q));
    for (int id : f) CHECK((id == q || !g.is_ancestor(q, id)));
  }
  SUBCASE("U_{Q,eps}") {
    const int q = floor_cubes(g, 1).front();
    CHECK(r.u_q_eps(q, 0.5).cubes == std::vector<int>{q});
    auto quarter = r.u_q_eps(q, 0.25).cubes;
    std::vector<int> expect{q};
    for (int c : g.cube(q).children) expect.push_back(c);
    std::sort(expect.begin(), expect.end());
    CHECK(quarter == expect);
    CHECK_FALSE(r.u_q_eps(q, 0.5).region.boxes.empty());
    CHECK_THROWS_AS(r.u_q_eps(q, 0.3), RangeError);
    CHECK_THROWS_AS(r.u_q_eps(q, 1.0 / 32), ResolutionError);
  }
  SUBCASE("bounded overlap of U_{Q,1/4} over one generation") {
    std::vector<BoxRegion> fam;
    for (int q : g.generation(1)) fam.push_back(r.u_q_eps(q, 0.25).region);
    const int mult = overlap_multiplicity(r, fam, 0.05);
    MESSAGE("overlap multiplicity " << mult);
    CHECK(mult >= 1);
    CHECK(mult <= 25);
  }
}

TEST_CASE("tent containment on the disk") {
  const Setup s(make_disk(512), 3);
  const Regions r(s.whitney);
  double kappa = 0.0;
  for (std::size_t q = 0; q < s.grid.size(); ++q) kappa = std::max(kappa, r.tent_kappa(static_cast<int>(q)));
  MESSAGE("kappa0 = " << kappa);
  CHECK(std::isfinite(kappa));
  // Independent scan: random points of every T_Q** box lie in kappa0·B_Q.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int outside = 0;
  for (std::size_t q = 0; q < s.grid.size(); ++q) {
    const auto& c = s.grid.cube(static_cast<int>(q));
    for (const auto& b : r.boxes_of(r.carleson_box(static_cast<int>(q), Fat::three).region)) {
      const Point2 p = b.lo + Point2(u(rng) * b.size().x(), u(rng) * b.size().y());
      outside += (p - c.center.position).norm() > kappa * c.radius;
    }
  }
  CHECK(outside == 0);
}

TEST_CASE("smooth cutoff") {
  const Setup& s = half_plane();
  const Regions r(s.whitney);
  const Whitney& w = s.whitney;
  const double lam = w.lambda();
  auto oracle = [&](const Cutoff& psi, const Point2& x) {
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) {
      const double phi = Cutoff::bump(w.box(static_cast<int>(b)).box, lam, x);
      den += phi;
      if (psi.in_family(static_cast<int>(b))) num += phi;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  SUBCASE("bump profile") {
    const Box2 b{Point2(0.0, 0.0), Point2(1.0, 1.0)};
    CHECK(Cutoff::bump(b, lam, Point2(0.5, 0.5)) == 1.0);
    CHECK(Cutoff::bump(b, lam, b.scaled(1 + 2 * lam).hi - Point2(1e-12, 1e-12)) == 1.0);
    CHECK(Cutoff::bump(b, lam, b.scaled(1 + 3 * lam).hi) == 0.0);
    const double mid = Cutoff::bump(b, lam, Point2(0.5, 0.5 + 0.5 * (1 + 2.5 * lam)));
    CHECK(mid == doctest::Approx(0.5));
  }
  SUBCASE("single box") {
    const int b = w.locate(Point2(0.0, 8.0));
    REQUIRE(b >= 0);
    const std::vector<int> one{b};
    const Cutoff psi(r, one);
    const Box2 box = w.box(b).box;
    CHECK(psi(box.center()) == 1.0);
    CHECK(psi(box.scaled(1 + 3 * lam).hi + Point2(1e-9, 1e-9)) == 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < 200; ++i) {
      const Point2 x = box.center() + w.box(b).side * Point2(u(rng), u(rng));
      CHECK(psi(x) == doctest::Approx(oracle(psi, x)).epsilon(1e-12));
    }
  }
  SUBCASE("Carleson-box cutoff: properties and the brute-force quotient") {
    const int q = floor_cubes(s.grid, 2).front();
    const auto t = r.carleson_box(q);
    const Cutoff psi(r, t.region.boxes);
    std::mt19937_64 rng(6);
    Box2 hull;
    for (const auto& b : r.boxes_of({t.region.boxes, Fat::three})) {
      hull.expand(b.lo);
      hull.expand(b.hi);
    }
    std::uniform_real_distribution<double> ux(hull.lo.x(), hull.hi.x()), uy(0.0, hull.hi.y());
    for (int i = 0; i < 60; ++i) {
      const Point2 x(ux(rng), uy(rng));
      CHECK(psi(x) == doctest::Approx(oracle(psi, x)).epsilon(1e-12));
    }
    const auto rep = check_cutoff(psi, 6);
    MESSAGE("lower " << rep.lower << " grad*delta " << rep.grad_delta << " sigma " << rep.sigma_sum);
    CHECK(rep.lower > 0.0);
    CHECK(rep.upper_leak == 0.0);
    CHECK(rep.partition_error <= 1e-9);
    CHECK(rep.interior_grad < 1e-10);
    CHECK(std::isfinite(rep.grad_delta));
  }
  SUBCASE("boundary boxes at depth 4") {
    const Setup deep(make_half_plane_proxy(), 4);
    const Regions rd(deep.whitney);
    const int q = floor_cubes(deep.grid, 1).front();
    const Cutoff psi(rd, rd.carleson_box(q).region.boxes);
    double sum = 0.0;
    for (int b : psi.boundary_boxes()) sum += deep.whitney.box(b).side;
    const double ratio = sum / deep.grid.cube(q).sigma;
    MESSAGE("sum over boundary boxes / sigma = " << ratio);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("Poincaré ratio on sawtooth regions") {
  const Setup& s = half_plane();
  const Regions r(s.whitney);
  const int q = floor_cubes(s.grid, 1).front();
  const double l = s.grid.cube(q).length;
  const auto u = r.u_q_eps(q, 0.25).region;
  Box2 hull;
  const auto boxes = r.boxes_of(u);
  for (const auto& b : boxes) {
    hull.expand(b.lo);
    hull.expand(b.hi);
  }
  SUBCASE("f = x1 against exact quadrature on the box union") {
    const auto m = slab_moments(boxes);
    const double mean = m.m1 / m.area;
    const double exact = std::sqrt(m.m2 - 2 * mean * m.m1 + mean * mean * m.area) / (l * std::sqrt(m.area));
    auto f = FieldSample::uniform(s.domain, hull, l / 256);
    f.fill([](const Point2& x) { return x.x(); });
    const double ratio = poincare_check(r, u, f, 2.0, l);
    MESSAGE("x1 ratio " << ratio << " exact " << exact);
    CHECK(ratio <= 2.0);
    CHECK(ratio == doctest::Approx(exact).epsilon(0.03));
  }
  SUBCASE("constants give 0") {
    auto f = FieldSample::uniform(s.domain, hull, l / 64);
    f.fill([](const Point2&) { return 3.0; });
    CHECK(poincare_check(r, u, f, 2.0, l) == 0.0);
  }
  SUBCASE("stable under refinement") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
      const double a = c(rng), b = c(rng), k1 = 2.0 + c(rng), k2 = 2.0 + c(rng);
      auto fn = [&](const Point2& x) { return a * std::sin(k1 * x.x() / l) + b * std::cos(k2 * x.y() / l) + x.x() * x.y() / (l * l); };
      auto coarse = FieldSample::uniform(s.domain, hull, l / 128);
      auto fine = FieldSample::uniform(s.domain, hull, l / 256);
      coarse.fill(fn);
      fine.fill(fn);
      for (double p : {1.5, 2.0, 4.0}) {
        const double rc = poincare_check(r, u, coarse, p, l), rf = poincare_check(r, u, fine, p, l);
        CHECK(std::abs(rc - rf) <= 0.1 * rf);
      }
    }
  }
  SUBCASE("empty region") {
    auto f = FieldSample::uniform(s.domain, hull, l / 16);
    CHECK_THROWS_AS(poincare_check(r, BoxRegion{}, f, 2.0, l), InputError);
  }
}

TEST_CASE("field samples") {
  const Domain disk = make_disk(256);
  SUBCASE("gradient is exact for quadratics on uneven tensor grids") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
      const double t = -1.0 + 2.0 * i / 40;
      xs.push_back(t * std::abs(t));
      ys.push_back(std::sin(0.5 * M_PI * t));
    }
    auto f = FieldSample::tensor(disk, xs, ys);
    f.fill([](const Point2& x) { return 3 * x.x() * x.x() - 2 * x.x() * x.y() + x.y() * x.y() + x.x(); });
    int checked = 0;
    for (int j = 1; j + 1 < f.ny(); ++j) {
      for (int i = 1; i + 1 < f.nx(); ++i) {
        if (!f.active(i - 1, j) || !f.active(i + 1, j) || !f.active(i, j - 1) || !f.active(i, j + 1) || !f.active(i, j)) continue;
        const Point2 x = f.node(i, j);
        const auto g = f.gradient(i, j);
        REQUIRE(g);
        CHECK(g->x() == doctest::Approx(6 * x.x() - 2 * x.y() + 1).epsilon(1e-9));
        CHECK(g->y() == doctest::Approx(-2 * x.x() + 2 * x.y()).epsilon(1e-9));
        ++checked;
      }
    }
    CHECK(checked > 500);
  }
  SUBCASE("save and load round trip") {
    const auto dir = std::filesystem::temp_directory_path();
    auto u = FieldSample::uniform(disk, Box2{Point2(-1.1, -1.1), Point2(1.1, 1.1)}, 0.05);
    u.fill([](const Point2& x) { return std::exp(x.x()) * x.y(); });
    u.save(dir / "cadkit_u.cadf");
    const auto u2 = FieldSample::load(dir / "cadkit_u.cadf");
    CHECK(u2.xs == u.xs);
    CHECK(u2.ys == u.ys);
    CHECK(u2.pitch == u.pitch);
    for (std::size_t n = 0; n < u.values.size(); ++n) {
      CHECK((u2.values[n] == u.values[n] || (std::isnan(u2.values[n]) && std::isnan(u.values[n]))));
    }
    auto t = FieldSample::tensor(disk, {-1.0, -0.2, 0.1, 0.9}, {-0.5, 0.0, 0.7});
    t.fill([](const Point2& x) { return x.norm(); });
    t.save(dir / "cadkit_t.cadf");
    const auto t2 = FieldSample::load(dir / "cadkit_t.cadf");
    CHECK(t2.xs == t.xs);
    CHECK(t2.ys == t.ys);
    std::filesystem::remove(dir / "cadkit_u.cadf");
    std::filesystem::remove(dir / "cadkit_t.cadf");
    CHECK_THROWS_AS(FieldSample::load(dir / "cadkit_missing.cadf"), InputError);
  }
  CHECK(FieldSample::uniform(disk, Box2{Point2(-1, -1), Point2(1, 1)}, 0.5).nx() == 5);
}
