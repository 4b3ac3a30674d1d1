#pragma once

#include "cadkit/coefficients.hpp"
#include "cadkit/dyadic_grid.hpp"
#include "cadkit/field.hpp"

#include "json.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cadkit {

// lo, lo + h, ... up to hi (the last gap may be shorter).
std::vector<double> uniform_axis(double lo, double hi, double h);
// Spacing h_fine inside the focus intervals, growing by about `ratio` per node away from
// them, capped at h_coarse.
std::vector<double> graded_axis(double lo, double hi, double h_fine, double h_coarse,
                                std::span<const std::pair<double, double>> focus, double ratio = 1.15);

using BoundaryData = std::function<double(const BoundaryPoint&)>;

// A point mass of a discrete boundary measure.
struct BoundaryAtom {
  BoundaryPoint point;
  double mass = 0.0;
};

// ω^X as point masses at the grid/boundary crossings.
struct BoundaryMeasure {
  Point2 pole = Point2::Zero();
  std::vector<BoundaryAtom> atoms;

  double total() const;
  double integrate(const BoundaryData& f) const;
  // ω(Δ(x, r)) for the open ball.
  double ball(const Point2& x, double r) const;
  // ω(Q) for the cubes of generation k, in the order of grid.generation(k).
  std::vector<double> cubes(const DyadicGrid& grid, int k) const;
};

struct SolverOptions {
  double residual_tol = 1e-8;
  bool mixed_term = true;
  // Nodes closer to ∂Ω than this fraction of the local spacing are replaced by the value
  // at their nearest boundary point.
  double snap_fraction = 0.05;
};

struct SolverStats {
  int unknowns = 0;
  int boundary_links = 0;
  int mixed_dropped = 0;  // nodes whose mixed-derivative term was omitted
  double h_min = 0.0, h_max = 0.0;
  double residual = 0.0;  // last solve, diagonally scaled max norm relative to max|u|
  nlohmann::json to_json() const;
};

// Finite differences for L u = -div(A∇u) on the active nodes of a tensor grid: conservative
// diagonal part with Shortley–Weller arms cut at ∂Ω, monotone 7-point mixed term where the
// stencil allows it, upwinded first-order terms from ∇A. The matrix M ≈ L is an M-matrix,
// factorised once and reused for every right-hand side and for the adjoint.
class DirichletProblem {
 public:
  DirichletProblem(const Domain& domain, CoefficientField a, std::vector<double> xs, std::vector<double> ys,
                   SolverOptions opts = {});
  // Uniform grid of pitch h over the domain's bounding box plus two cells.
  static DirichletProblem uniform(const Domain& domain, CoefficientField a, double h, SolverOptions opts = {});

  const Domain& domain() const { return *domain_; }
  const CoefficientField& coefficients() const { return a_; }
  // Active nodes hold 0, others NaN.
  const FieldSample& layout() const { return layout_; }
  const SolverStats& stats() const { return stats_; }
  double h_max() const { return stats_.h_max; }
  int node_of(int i, int j) const { return node_[layout_.index(i, j)]; }

  // u with L u = 0 in Ω, u = g on ∂Ω.
  FieldSample solve(const BoundaryData& g) const;
  // L G = δ_pole: unit mass at the active node nearest to the pole (returned in *snapped).
  // Throws PreconditionError when δ(pole) < 10·h_max.
  FieldSample green(const Point2& pole, Point2* snapped = nullptr) const;
  // Discrete ω^X: u(X) = ∫ g dω^X for every solution computed by solve().
  BoundaryMeasure measure(const Point2& x) const;

  // Bilinear weights of X over the active corners of its cell (renormalised).
  std::vector<std::pair<int, double>> weights(const Point2& x) const;
  double interpolate(const FieldSample& f, const Point2& x) const;
  // Node nearest to X among the active ones, as (i, j).
  std::pair<int, int> nearest_node(const Point2& x) const;

  const Eigen::SparseMatrix<double>& matrix() const { return M_; }

 private:
  struct Link {
    int row = -1;
    double coeff = 0.0;
    BoundaryPoint point;
  };

  void assemble();
  Eigen::VectorXd rhs(const BoundaryData& g) const;
  Eigen::VectorXd factor_solve(const Eigen::VectorXd& b, bool transpose) const;
  double check_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& b) const;
  FieldSample to_field(const Eigen::VectorXd& u) const;

  const Domain* domain_ = nullptr;
  CoefficientField a_;
  SolverOptions opts_;
  FieldSample layout_;
  std::vector<int> node_;  // grid index -> unknown, or -1
  std::vector<std::pair<int, int>> ij_;
  Eigen::SparseMatrix<double> M_;
  std::vector<Link> links_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  mutable SolverStats stats_;
};

// Exact first crossing of the segment p->q with ∂Ω, as a fraction of the segment.
std::optional<std::pair<double, BoundaryPoint>> first_crossing(const Boundary& boundary, const Point2& p,
                                                               const Point2& q);

// Closed forms used as oracles and exact routes.
// Harmonic measure of the angular arc (a, b) (counter-clockwise) of the circle |X - c| = R seen from P.
double circle_arc_measure(const Point2& center, double radius, const Point2& pole, double a, double b);
// Same for the cubes of generation k of a grid on a circle-like polygon, the boundary being
// projected radially onto the circle.
std::vector<double> circle_cube_measure(const DyadicGrid& grid, int k, const Point2& center, double radius,
                                        const Point2& pole);
// Upper half-plane: ω^{(x,t)}([a, b]).
double half_plane_measure(const Point2& pole, double a, double b);

// Normalised measure: ω = C0 σ(Q0) ω^{X0} with C0 = 1/ω^{X0}(Q0).
struct Normalization {
  int cube = -1;  // Q0
  Point2 pole = Point2::Zero();
  double C0 = 0.0;
  double sigma = 0.0;
  double factor() const { return C0 * sigma; }
  nlohmann::json to_json() const;
};
Normalization normalization(const DyadicGrid& grid, int cube, const BoundaryMeasure& omega);

struct EllipticMeasureEstimate {
  Point2 pole = Point2::Zero();
  int generation = 0;
  std::vector<int> cubes;
  std::vector<double> mass;
  std::vector<double> stderr_;  // Monte Carlo only; zeros for the solver
  double h = 0.0;               // discretisation scale for solver estimates
  std::optional<Normalization> normalized;
  double sum() const;
  nlohmann::json to_json() const;
};
EllipticMeasureEstimate elliptic_measure(const DirichletProblem& problem, const Point2& pole, const DyadicGrid& grid,
                                         int k);

}  // namespace cadkit
