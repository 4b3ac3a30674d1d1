#pragma once

#include "cadkit/geometry.hpp"

#include "json.hpp"

#include <array>
#include <span>
#include <vector>

namespace cadkit {

// Open set in R^3 bounded by a closed triangulated surface. Used for distance
// queries, walk-on-spheres and Ahlfors-regularity spot checks.
class Domain3 {
 public:
  Domain3(std::vector<Point3> vertices, std::vector<std::array<int, 3>> triangles);

  static Domain3 from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int ambient_dim() const { return 3; }
  std::size_t num_triangles() const { return triangles_.size(); }
  const std::vector<Point3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  double boundary_diameter() const { return diameter_; }
  double surface_area() const { return area_; }
  const Point3& bbox_lo() const { return lo_; }
  const Point3& bbox_hi() const { return hi_; }

  double unsigned_distance(const Point3& x) const;
  Point3 nearest(const Point3& x) const;
  double brute_force_distance(const Point3& x) const;
  bool inside(const Point3& x) const;
  double signed_distance(const Point3& x) const;

  // σ(B(x, r) ∩ ∂Ω) by recursive subdivision of straddling triangles.
  double ball_measure(const Point3& x, double r, int max_depth = 7) const;

 private:
  Point3 nearest_in_cells(const Point3& x, double& best) const;
  int cell_index(int ix, int iy, int iz) const { return (iz * ny_ + iy) * nx_ + ix; }
  std::array<int, 3> cell_of(const Point3& x) const;

  std::vector<Point3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  double diameter_ = 0.0;
  double area_ = 0.0;
  Point3 lo_, hi_;
  Point3 origin_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::vector<int>> cells_;
};

// Triangulated unit sphere obtained by `level` midpoint subdivisions of an icosahedron.
Domain3 make_icosphere(int level, double radius = 1.0);

struct ARReport3 {
  double lower = kInf;
  double upper = 0.0;
  bool pass = false;
};

// σ(Δ(x,r))/r^2 over the given centres (vertices of the mesh are natural choices).
ARReport3 ar_check(const Domain3& domain, std::span<const Point3> centers, std::span<const double> radii);

}  // namespace cadkit
