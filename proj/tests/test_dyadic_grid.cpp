#include "doctest.h"

#include "cadkit/dyadic_grid.hpp"
#include "cadkit/error.hpp"
#include "cadkit/shapes.hpp"

#include <chrono>
#include <cmath>
#include <random>

using namespace cadkit;

namespace {

std::shared_ptr<const Boundary> unit_segment() {
  return std::make_shared<const Boundary>(std::vector<Polyline>{Polyline{{{0.0, 0.0}, {1.0, 0.0}}, false}});
}

std::vector<double> tau_ladder(double a0) {
  std::vector<double> t;
  for (int i = 1; i <= 6; ++i) {
    if (std::ldexp(1.0, -i) < a0) t.push_back(std::ldexp(1.0, -i));
  }
  return t;
}

}  // namespace

TEST_CASE("segment grid is the standard dyadic intervals") {
  const auto g = DyadicGrid::build(unit_segment(), 3);
  for (int k = 0; k <= 3; ++k) {
    const auto gen = g.generation(k);
    REQUIRE(gen.size() == (1u << k));
    for (std::size_t j = 0; j < gen.size(); ++j) {
      const auto& q = g.cube(gen[j]);
      REQUIRE(q.spans.size() == 1);
      CHECK(q.spans[0].s0 == doctest::Approx(std::ldexp(double(j), -k)));
      CHECK(q.spans[0].s1 == doctest::Approx(std::ldexp(double(j + 1), -k)));
      CHECK(q.center.position.x() == doctest::Approx(std::ldexp(j + 0.5, -k)));
    }
  }
  CHECK(g.constants().a0 == doctest::Approx(0.5));
  CHECK(g.constants().C1 == doctest::Approx(1.0));
}

TEST_CASE("circle grid: equal arcs and a0 at least 0.4") {
  const Domain disk = make_disk(1024);
  const auto g = DyadicGrid::build(disk, 6);
  for (int k = 0; k <= 6; ++k) {
    const auto gen = g.generation(k);
    REQUIRE(gen.size() == (1u << k));
    for (int id : gen) CHECK(g.cube(id).sigma == doctest::Approx(disk.boundary().total_length() / gen.size()).epsilon(1e-12));
  }
  CHECK(g.constants().a0 >= 0.4);
  for (const auto& q : g.cubes()) {
    if (q.k == 0) continue;
    // (v) with the measured a0, independently via the surface ball.
    for (const auto& a : disk.boundary().ball_intersection(q.center.position, 0.4 * q.length).arcs) {
      const double u = disk.boundary().arclength_of(a.component, a.segment, 0.5 * (a.t0 + a.t1));
      CHECK(u >= q.spans[0].s0);
      CHECK(u <= q.spans[0].s1);
    }
  }
}

TEST_CASE("grid axioms on segment, circle and Koch at depth 6") {
  struct Case {
    const char* name;
    DyadicGrid grid;
  };
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Case> cases;
  cases.push_back({"segment", DyadicGrid::build(unit_segment(), 6)});
  cases.push_back({"circle", DyadicGrid::build(make_disk(1024), 6)});
  cases.push_back({"koch", DyadicGrid::build(make_koch(3), 6)});
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto taus = tau_ladder(c.grid.constants().a0);
    REQUIRE(taus.size() >= 2);
    const auto rep = check_grid_axioms(c.grid, taus);
    CHECK(rep.covering_error <= 1e-9);
    CHECK(rep.nesting);
    CHECK(rep.unique_ancestor);
    CHECK(rep.diameter_bound);
    CHECK(rep.inner_ball);
    CHECK(rep.containment);
    CHECK(rep.thin.eta > 0.0);
    CHECK(rep.pass);
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 30.0);
}

TEST_CASE("thin boundary collars") {
  SUBCASE("segment: two endpoint collars of length tau l") {
    const auto g = DyadicGrid::build(unit_segment(), 5);
    const auto res = thin_boundary_check(g, 0.125);
    CHECK(res.max_ratio == doctest::Approx(0.25).epsilon(1e-9));
    for (const auto& q : g.cubes()) {
      const bool interior = q.spans[0].s0 > 0.0 && q.spans[0].s1 < 1.0;
      if (q.k > 0) CHECK(res.ratios[q.id] == doctest::Approx(interior ? 0.25 : 0.125).epsilon(1e-9));
    }
    const double taus[] = {0.25, 0.125, 0.0625};
    const auto fit = thin_boundary_fit(g, taus);
    CHECK(fit.eta == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.C1 == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("circle at tau = 1/16") {
    const auto g = DyadicGrid::build(make_disk(1024), 6);
    CHECK(thin_boundary_check(g, 1.0 / 16).max_ratio <= 0.25);
  }
  SUBCASE("Koch ladder fits a positive exponent") {
    const auto g = DyadicGrid::build(make_koch(3), 5);
    const auto fit = thin_boundary_fit(g, tau_ladder(g.constants().a0));
    CHECK(fit.eta > 0.0);
    for (const auto& r : fit.ladder) CHECK(r.max_ratio <= fit.C1 * std::pow(r.tau, fit.eta) * (1 + 1e-12));
  }
  SUBCASE("tau out of range") {
    const auto g = DyadicGrid::build(unit_segment(), 3);
    CHECK_THROWS_AS(thin_boundary_check(g, 0.6), RangeError);
    CHECK_THROWS_AS(thin_boundary_check(g, 0.0), RangeError);
  }
}

TEST_CASE("descendants at a relative scale") {
  const auto seg = DyadicGrid::build(unit_segment(), 5);
  const int q = seg.generation(2)[1];
  const auto d = seg.descendants_at(q, 2);
  REQUIRE(d.size() == 4);
  double s = 0.0;
  for (int id : d) {
    CHECK(seg.cube(id).k == 4);
    CHECK(seg.is_ancestor(q, id));
    s += seg.cube(id).sigma;
  }
  CHECK(s == doctest::Approx(seg.cube(q).sigma).epsilon(1e-15));
  CHECK_THROWS_AS(seg.descendants_at(q, 4), ResolutionError);

  const auto circ = DyadicGrid::build(make_disk(256), 4);
  const int c = circ.generation(2)[3];
  CHECK(circ.descendants_at(c, 1) == circ.cube(c).children);

  const auto koch = DyadicGrid::build(make_koch(3), 6);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gen = koch.generation(std::uniform_int_distribution<int>(0, 3)(rng));
    const int id = gen[std::uniform_int_distribution<std::size_t>(0, gen.size() - 1)(rng)];
    double sum = 0.0;
    for (int x : koch.descendants_at(id, 3)) sum += koch.cube(x).sigma;
    CHECK(std::abs(sum - koch.cube(id).sigma) <= 1e-10);
  }
}

TEST_CASE("tree structure and lookup") {
  const auto g = DyadicGrid::build(make_koch(3), 5);
  for (const auto& q : g.cubes()) {
    double s = 0.0;
    for (int ch : q.children) {
      s += g.cube(ch).sigma;
      CHECK(g.cube(ch).parent == q.id);
    }
    if (!q.children.empty()) CHECK(s == doctest::Approx(q.sigma).epsilon(1e-12));
    CHECK(q.radius <= q.length);
    CHECK(q.radius >= g.constants().c * q.length * (1 - 1e-12));
  }
  for (const auto& p : g.boundary().sample(100)) {
    for (int k = 0; k <= g.depth(); ++k) CHECK(g.contains(g.locate(k, p), p));
  }
  const auto j = g.to_json();
  CHECK(j["cubes"].size() == g.size());
  CHECK(j["cubes"][0]["children"].size() == 2);
}

TEST_CASE("multi-component boundaries") {
  const auto g = DyadicGrid::build(make_two_squares(), 4);
  CHECK(g.generation(0).size() == 1);
  CHECK(g.generation(1).size() == 2);
  CHECK(g.generation(2).size() == 4);
  CHECK(g.cube(g.generation(1)[0]).spans[0].component == 0);
  CHECK(g.cube(g.generation(1)[1]).spans[0].component == 1);
  const double taus[] = {0.125, 0.0625};
  CHECK(check_grid_axioms(g, taus).pass);

  Polyline big{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, true};
  Polyline tiny{{{20, 20}, {20.01, 20}, {20.01, 20.01}, {20, 20.01}}, true};
  const Domain d({big, tiny});
  CHECK_THROWS_AS(DyadicGrid::build(d, 8), ResolutionError);
  CHECK_THROWS_AS(DyadicGrid::build(d, 0), RangeError);
}
