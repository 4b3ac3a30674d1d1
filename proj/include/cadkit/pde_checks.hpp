#pragma once

#include "cadkit/elliptic.hpp"
#include "cadkit/regions.hpp"

#include "json.hpp"

#include <span>
#include <vector>

namespace cadkit {

struct BourgainReport {
  double min = kInf;  // min over nodes Y ∈ B(x, c·r) ∩ Ω of ω^Y(Δ(x, r))
  double C = kInf;    // 1/min
  Point2 argmin = Point2::Zero();
  int samples = 0;
  double at_corkscrew = 0.0;  // ω^{X_Δ}(Δ(x, r))
  nlohmann::json to_json() const;
};
BourgainReport bourgain_check(const DirichletProblem& problem, const Point2& x, double r, double c);

// ω^X(Δ(x, 2r)) / ω^X(Δ(x, r)); X must lie outside B(x, 4r).
double doubling_check(const BoundaryMeasure& omega, const Point2& x, double r);

struct CfmsReport {
  double green = 0.0;  // G_L(X, X_Δ)
  double omega = 0.0;  // ω^X(Δ)
  double ratio = 0.0;  // r^{n-1} G / ω with n = 1
  Point2 corkscrew = Point2::Zero();
  nlohmann::json to_json() const;
};
// green_top = G_{L^T}(·, X) on `adjoint` (the problem for A^T), omega = ω_L^X; X ∉ 2B(x, r).
CfmsReport cfms_check(const DirichletProblem& adjoint, const FieldSample& green_top, const BoundaryMeasure& omega,
                      const Point2& x, double r);

struct RhqRow {
  int cube = -1;
  double average = 0.0;     // ⨏_Q k
  double q_average = 0.0;   // (⨏_Q k^q)^{1/q}
  double ratio = 0.0;
  double integral = 0.0;    // ∫_Q k^q dσ · σ(Q)^{q-1}
};
struct RhqReport {
  double q = 2.0;
  double rh_constant = 0.0;
  int rh_argmax = -1;
  double scan_max = 0.0;  // max integral over the tested cubes
  int scan_argmax = -1;
  double fit_C = 0.0, fit_s = 0.0;  // ω(E)/ω(Q) ≤ C (σ(E)/σ(Q))^s over descendants E of tested Q
  std::vector<RhqRow> rows;
  nlohmann::json to_json() const;
};
// k = ω(Q')/σ(Q') on the finest generation kf (masses in the order of grid.generation(kf));
// reverse-Hölder and higher-integrability constants over the tested cubes.
RhqReport rhq_fit(const DyadicGrid& grid, int kf, std::span<const double> finest_mass, std::span<const int> tested,
                  double q);

// For each tested Q, rhq_fit of ω^{X_Q} with the pole X_Q at the corkscrew point of Δ_Q.
RhqReport corkscrew_pole_scan(const DirichletProblem& problem, const DyadicGrid& grid, int kf, std::span<const int> tested,
                              double q);

struct GradientBoundReport {
  double sup = 0.0;
  Point2 argmax = Point2::Zero();
  int nodes = 0;
  nlohmann::json to_json() const;
};
// sup |∇u(X)|·δ(X)/u(X) over active nodes with δ ≥ min_delta and u > 0.
GradientBoundReport gradient_bound_check(const FieldSample& u, const Domain& domain, double min_delta);

// ℓ(I)² ∬_I |∇²u|² / ∬_{2I} |∇u|² by cell-clipped nodal quadrature; needs 6I ⊂ Ω.
double caccioppoli2_check(const FieldSample& u, const Domain& domain, const Box2& box);

struct SquareFunctionReport {
  double upsilon = 0.0;
  double sigma_root = 0.0;
  double ratio = 0.0;
  std::vector<std::pair<int, double>> per_cube;  // Υ_Q over W_Q
  int boxes = 0;
  nlohmann::json to_json() const;
};
// Υ = Σ_I |I|·(|∇(A^T∇G)|² w)(X(I)) over the boxes I of the region (box-wise midpoint rule),
// the integrand interpolated from nodal second differences. `weight` is the sampled 𝒢 or 𝒢_⊤,
// or null for w = δ; `scale` multiplies G and the sampled weight (the normalisation factor).
SquareFunctionReport square_function_carleson(const DirichletProblem& problem, const FieldSample& G,
                                              const CoefficientField& AT, const Regions& regions,
                                              const SawtoothRegion& region, const FieldSample* weight, double scale,
                                              const Point2& pole);
// The integrand |∇(A^T∇G)|²·w at X (scale applied as above).
double square_function_density(const DirichletProblem& problem, const FieldSample& G, const CoefficientField& AT,
                               const FieldSample* weight, double scale, const Point2& x);

struct IbpReport {
  int cube = -1;
  double phi_omega = 0.0;  // ∫Φ dω
  double I = 0.0;
  double II = 0.0;
  Point2 beta = Point2::Zero();
  double residual = 0.0;   // |∫Φdω − (−I + II)|
  double tolerance = 0.0;  // 5h·σ(Q)
  double omega_ratio = 0.0;  // ω(Q)/σ(Q), normalised
  double sigma = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};
// Radial C² bump: 1 on B(z, ρ/2), 0 off B(z, ρ).
double bump_phi(const Point2& z, double rho, const Point2& x);
Point2 bump_grad(const Point2& z, double rho, const Point2& x);
// The four quantities of the integration-by-parts identity for Φ adapted to B(z_Q, support·r_Q/4).
// green_top = G_{L^T}(·, X0) on `adjoint`, omega = ω_L^{X0}, both normalised by `norm`.
IbpReport ibp_identity_check(const DirichletProblem& adjoint, const FieldSample& green_top, const BoundaryMeasure& omega,
                             const Normalization& norm, const Regions& regions, int cube, double eps,
                             double support = 1.0);

struct KpRow {
  double ell = 0.0;
  double value = 0.0;  // (1/ℓ) ∬_{R_Q} |∇u|² t
  double mu = 0.0;     // (1/ℓ) ∬_{R_Q} |∇A|² t
};
struct KpReport {
  std::vector<KpRow> rows;
  double sup = 0.0;
  double mu_norm = 0.0, nu_norm = 0.0;
  double bound = 0.0;  // 3(1 + ‖μ‖ + ‖ν‖)
  double fit = 0.0;    // sup / (1 + ‖μ‖ + ‖ν‖)
  bool pass = false;
  nlohmann::json to_json() const;
};
// Ladder R_Q = [xc − ℓ/2, xc + ℓ/2] × (0, ℓ) on the upper half-plane; u bounded by 1, a22 = 1,
// no drift term (ν = 0).
KpReport kenig_pipher_carleson(const CoefficientField& a, const FieldSample& u, std::span<const double> ladder,
                               double xc = 0.0);

// (1/ℓ) ∬_{[xc−ℓ/2, xc+ℓ/2]×(0,ℓ)} t/(π²(x²+t²)): the exact value for the half-line harmonic measure.
double kp_half_line_exact(double ell, double xc = 0.0);

}  // namespace cadkit
