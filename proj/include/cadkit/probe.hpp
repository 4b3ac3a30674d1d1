#pragma once

#include "cadkit/domain.hpp"
#include "cadkit/dyadic_grid.hpp"
#include "cadkit/whitney.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cadkit {

struct CorkscrewWitness {
  Point2 center = Point2::Zero();  // X_Δ
  double radius = 0.0;             // c·r
  double c = 0.0;
  Point2 x = Point2::Zero();
  double r = 0.0;
};

// Maximises ρ(X) = min(δ(X), r − |X − x|) over interior candidates on a lattice of pitch
// r/resolution centred at x. Absent when the best c = ρ/r falls below 1/128.
std::optional<CorkscrewWitness> find_corkscrew(const Domain& domain, const Point2& x, double r, int resolution = 64);

// Rejection-sampling re-check that B(X, c·r) ⊆ B(x, r) ∩ Ω, plus the margin δ(X) ≥ c·r.
bool verify_corkscrew(const Domain& domain, const CorkscrewWitness& w, int samples, std::mt19937_64& rng);

struct ExteriorWitness {
  int cube = -1;
  double c0 = 0.0;
  bool pass = false;
  double c_achieved = 0.0;  // best exterior radius / ℓ(Q)
  Point2 z = Point2::Zero();
  Point2 center = Point2::Zero();  // X_Q^-
  double radius = 0.0;
};

struct ExteriorParams {
  int z_samples = 64;
  int resolution = 32;  // candidate pitch (r_Q/4) / resolution
};

// c0-exterior corkscrew for cube Q: some z ∈ Δ_Q and X⁻ with
// B(X⁻, c0·ℓ(Q)) ⊆ B(z, r_Q/4) \ Ω̄. Stops at the first z that succeeds.
ExteriorWitness exterior_corkscrew_check(const Domain& domain, const DyadicGrid& grid, int cube, double c0,
                                         const ExteriorParams& params = {});

// B(c0), sorted by cube id, with one witness row per cube examined.
struct BadCubeReport {
  double c0 = 0.0;
  std::vector<int> bad;
  std::vector<ExteriorWitness> rows;
};
BadCubeReport bad_cubes(const Domain& domain, const DyadicGrid& grid, double c0, int max_generation = -1,
                        const ExteriorParams& params = {});

struct Ball {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};

struct HarnackChain {
  std::vector<Ball> balls;
  Point2 x = Point2::Zero(), x2 = Point2::Zero();
  double lambda = 0.0;  // |X − X'| / min(δ(X), δ(X'))
  int n = 0;
  double sandwich = 0.0;  // smallest C with C⁻¹ diam ≤ dist(B, ∂Ω) ≤ C diam over the chain
  std::vector<int> path;  // Whitney boxes visited
};

// Chain of balls B(Y, δ(Y)/2) through the shortest face-adjacent Whitney path from the box
// of X to the box of X', thinned greedily. Absent when the boxes are not connected.
// Throws ResolutionError when X or X' lies in the truncation layer.
std::optional<HarnackChain> harnack_chain(const Whitney& whitney, const Point2& x, const Point2& x2);

struct ClassifyParams {
  std::vector<int> generations;  // empty: 1 .. depth − 1
  double c0 = 1.0 / 32;
  double harnack_bound = 8.0;  // admissible N / (1 + log2 Λ)
  ExteriorParams exterior;
};

struct ScaleRow {
  int generation = 0;
  double corkscrew_c = kInf;  // min interior c at this generation
  double exterior_c = kInf;   // min exterior c_achieved
  int exterior_failures = 0;
  int cubes = 0;
};

struct HarnackRow {
  int cube = -1;
  double lambda = 0.0;
  int n = 0;  // 0 when absent
};

struct Classification {
  double corkscrew_c = kInf;
  double exterior_c = kInf;
  double harnack_ratio = 0.0;  // max N / (1 + log2 Λ)
  bool interior_ok = false;
  bool exterior_ok = false;
  bool harnack_ok = false;
  std::string verdict;  // "CAD", "1-sided CAD" or "neither"
  std::vector<ScaleRow> scales;
  std::vector<HarnackRow> harnack;
  ARReport ar;
};

// Requires the AR check to pass (PreconditionError otherwise).
Classification classify(const Domain& domain, const DyadicGrid& grid, const Whitney& whitney,
                        const ClassifyParams& params = {});

}  // namespace cadkit
