#include "cadkit/shapes.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace cadkit {

Domain make_disk(int vertices, double radius, const Point2& center) {
  if (vertices < 3) throw ParameterError("disk needs at least 3 vertices");
  Polyline pl;
  for (int i = 0; i < vertices; ++i) {
    const double a = 2.0 * kPi * i / vertices;
    pl.vertices.push_back(center + radius * Point2(std::cos(a), std::sin(a)));
  }
  return Domain({pl}, center);
}

Domain make_square(double side, const Point2& corner, int per_edge) {
  const Point2 c[4] = {corner, corner + Point2(side, 0), corner + Point2(side, side), corner + Point2(0, side)};
  Polyline pl;
  for (int e = 0; e < 4; ++e) {
    for (int k = 0; k < per_edge; ++k) pl.vertices.push_back(c[e] + (c[(e + 1) % 4] - c[e]) * (double(k) / per_edge));
  }
  return Domain({pl}, corner + Point2(side / 2, side / 2));
}

Domain make_koch(int level, double side) {
  std::vector<Point2> pts = {{0.0, 0.0}, {side, 0.0}, {side / 2, side * std::sqrt(3.0) / 2}};
  // Clockwise start so the bumps point outward after the CCW reversal below.
  std::vector<Point2> cur = {pts[0], pts[2], pts[1]};
  for (int l = 0; l < level; ++l) {
    std::vector<Point2> next;
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = cur[i], b = cur[(i + 1) % n];
      const Point2 d = (b - a) / 3.0;
      const Point2 p1 = a + d, p3 = a + 2.0 * d;
      const Point2 p2 = p1 + Point2(0.5 * d.x() - std::sqrt(3.0) / 2 * d.y(), std::sqrt(3.0) / 2 * d.x() + 0.5 * d.y());
      next.insert(next.end(), {a, p1, p2, p3});
    }
    cur = std::move(next);
  }
  std::reverse(cur.begin(), cur.end());
  Polyline pl{cur, true};
  return Domain({pl}, Point2(side / 2, side * std::sqrt(3.0) / 6));
}

Domain make_slit_disk(int vertices, double width, double tip_x) {
  if (!(width > 0.0 && width < 0.5)) throw ParameterError("slit width must lie in (0, 0.5)");
  if (!(tip_x > -1.0 + width && tip_x < 1.0 - width)) throw ParameterError("slit tip must lie inside the disk");
  const double a0 = std::asin(width / 2);
  Polyline pl;
  for (int i = 0; i <= vertices; ++i) {
    const double a = a0 + (2.0 * kPi - 2.0 * a0) * i / vertices;
    pl.vertices.emplace_back(std::cos(a), std::sin(a));
  }
  pl.vertices.emplace_back(tip_x, -width / 2);
  pl.vertices.emplace_back(tip_x, width / 2);
  return Domain({pl}, Point2(-0.5, 0.0));
}

Domain make_half_plane_proxy(double half_width) {
  const double h = half_width;
  Polyline pl{{{-h, 0.0}, {h, 0.0}, {h, 2 * h}, {-h, 2 * h}}, true};
  Domain d({pl}, Point2(0.0, h));
  d.set_truncated_proxy(true);
  return d;
}

Domain make_lipschitz_graph(double half_width, double height, double slope, double period) {
  Polyline pl;
  const int teeth = static_cast<int>(std::lround(2.0 * half_width / period));
  if (teeth < 1 || std::abs(teeth * period - 2.0 * half_width) > 1e-12 * half_width) {
    throw ParameterError("zigzag period must divide the floor width");
  }
  for (int i = 0; i < teeth; ++i) {
    const double x = -half_width + i * period;
    pl.vertices.emplace_back(x, 0.0);
    pl.vertices.emplace_back(x + period / 2, slope * period / 2);
  }
  pl.vertices.emplace_back(half_width, 0.0);
  pl.vertices.emplace_back(half_width, height);
  pl.vertices.emplace_back(-half_width, height);
  Domain d({pl}, Point2(0.0, height / 2));
  d.set_truncated_proxy(true);
  return d;
}

Domain make_cusp_domain(double half_side, double coefficient, double exponent, int samples) {
  const double h = half_side;
  auto width = [&](double x) { return coefficient * std::pow(x, exponent); };
  if (!(width(h) < h)) throw ParameterError("cusp spike wider than the square");
  // Samples accumulate geometrically toward the tip.
  std::vector<double> xs;
  for (int i = 0; i < samples; ++i) xs.push_back(h * std::pow(2.0, -16.0 * i / samples));
  Polyline pl;
  pl.vertices.emplace_back(-h, -h);
  pl.vertices.emplace_back(h, -h);
  for (double x : xs) pl.vertices.emplace_back(x, -width(x));
  pl.vertices.emplace_back(0.0, 0.0);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) pl.vertices.emplace_back(*it, width(*it));
  pl.vertices.emplace_back(h, h);
  pl.vertices.emplace_back(-h, h);
  return Domain({pl}, Point2(-h / 2, 0.0));
}

Domain make_two_squares() {
  Polyline a{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true};
  Polyline b{{{2, 0}, {3, 0}, {3, 1}, {2, 1}}, true};
  return Domain({a, b}, Point2(0.5, 0.5));
}

Domain make_line_complement(double half_width) {
  const double h = half_width;
  Polyline upper{{{-h, 0.0}, {h, 0.0}, {h, 2 * h}, {-h, 2 * h}}, true};
  Polyline lower{{{h, 0.0}, {-h, 0.0}, {-h, -2 * h}, {h, -2 * h}}, true};
  Domain d({upper, lower}, Point2(0.0, h));
  d.set_truncated_proxy(true);
  return d;
}

Domain make_named_domain(const std::string& name) {
  if (name == "disk") return make_disk(1024);
  if (name == "square") return make_square(1.0, Point2::Zero(), 16);
  if (name == "koch") return make_koch(3);
  if (name == "slit_disk") return make_slit_disk(1024);
  if (name == "half_plane") return make_half_plane_proxy();
  if (name == "lipschitz") return make_lipschitz_graph();
  if (name == "cusp") return make_cusp_domain();
  if (name == "two_squares") return make_two_squares();
  if (name == "line_complement") return make_line_complement();
  throw InputError("unknown domain shape '" + name + "'");
}

}  // namespace cadkit
