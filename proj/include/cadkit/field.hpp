#pragma once

#include "cadkit/domain.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace cadkit {

// Values on a tensor grid (xs × ys) restricted to Ω; nodes outside Ω hold NaN.
// A uniform grid is the case of equally spaced coordinates.
struct FieldSample {
  std::vector<double> xs, ys;
  std::vector<double> values;  // row-major: index j * nx + i
  double pitch = 0.0;          // spacing when uniform, 0 for graded grids

  int nx() const { return static_cast<int>(xs.size()); }
  int ny() const { return static_cast<int>(ys.size()); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * xs.size() + i; }
  double at(int i, int j) const { return values[index(i, j)]; }
  double& at(int i, int j) { return values[index(i, j)]; }
  bool active(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx() && j < ny() && !std::isnan(values[index(i, j)]);
  }
  Point2 node(int i, int j) const { return {xs[i], ys[j]}; }
  // Area of the midpoint cell around node (i, j).
  double cell_area(int i, int j) const;

  // Centred differences, one-sided where a neighbour is inactive; absent when both
  // neighbours along an axis are inactive.
  std::optional<Point2> gradient(int i, int j) const;
  // Second differences on the 3×3 neighbourhood; absent unless all nine nodes are active.
  // Exact for quadratics on uneven spacing.
  std::optional<Eigen::Matrix2d> hessian(int i, int j) const;

  static FieldSample uniform(const Domain& domain, const Box2& box, double h);
  static FieldSample tensor(const Domain& domain, std::vector<double> xs, std::vector<double> ys);

  template <class F>
  void fill(F&& f) {
    for (int j = 0; j < ny(); ++j) {
      for (int i = 0; i < nx(); ++i) {
        if (active(i, j)) at(i, j) = f(node(i, j));
      }
    }
  }

  // Binary file: "CADF", int32 nx, ny, float64 pitch, origin x, y; when pitch is 0 the
  // coordinate arrays follow; then nx·ny float64 values row-major (NaN outside Ω).
  void save(const std::filesystem::path& path) const;
  static FieldSample load(const std::filesystem::path& path);
};

}  // namespace cadkit
