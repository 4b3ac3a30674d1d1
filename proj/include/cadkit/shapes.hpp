#pragma once

#include "cadkit/domain.hpp"

#include <string>

namespace cadkit {

// Regular n-gon inscribed in the circle |X - center| = radius, first vertex at angle 0,
// counter-clockwise.
Domain make_disk(int vertices, double radius = 1.0, const Point2& center = Point2::Zero());

// Axis-aligned square [x0, x0 + side] x [y0, y0 + side], each edge split into `per_edge` pieces.
Domain make_square(double side = 1.0, const Point2& corner = Point2::Zero(), int per_edge = 1);

// Koch snowflake prefractal; level 3 has 192 edges.
Domain make_koch(int level, double side = 1.0);

// Unit-radius disk with a radial slit of the given width cut from the circle at angle 0
// inward to the tip at `tip_x` on the positive axis.
Domain make_slit_disk(int vertices, double width = 1e-3, double tip_x = 0.0);

// Box [-half_width, half_width] x [0, 2 half_width] standing in for the upper half-plane;
// the walk starts at the floor's left end so floor cubes are dyadic intervals.
Domain make_half_plane_proxy(double half_width = 8.0);

// Graph domain {(x, t) : |x| < half_width, f(x) < t < height} with f a zigzag of slope
// `slope` and period `period`; the floor is walked first, left to right.
Domain make_lipschitz_graph(double half_width = 2.0, double height = 4.0, double slope = 0.5, double period = 1.0);

// Square [-h, h]^2 with the thin spike {0 <= x <= h, |y| <= a x^p} removed; the spike's
// tip sits at the origin, so the complement has zero density there.
Domain make_cusp_domain(double half_side = 0.5, double coefficient = 0.5, double exponent = 3.0, int samples = 256);

// Two disjoint squares; the open set has two connected components.
Domain make_two_squares();

// The box [-h, h] x [-2h, 2h] with the segment {t = 0} removed: both sides of the floor
// belong to the domain, so there is no exterior near the floor.
Domain make_line_complement(double half_width = 8.0);

// Named shapes for configuration files: disk, square, koch, slit_disk, half_plane,
// lipschitz, cusp, two_squares, line_complement.
Domain make_named_domain(const std::string& name);

}  // namespace cadkit
