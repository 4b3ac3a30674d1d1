#pragma once

#include "cadkit/elliptic.hpp"
#include "cadkit/surface3.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>

namespace cadkit {

struct WosOptions {
  long walks = 100000;
  std::uint64_t seed = 1;
  double shell = 1e-6;  // stopping shell width relative to diam(∂Ω)
  long max_steps = 100000;
};

struct WosEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long walks = 0;
  long diverged = 0;  // walks that exhausted max_steps; excluded from the mean
  double mean_steps = 0.0;
  nlohmann::json to_json() const;
};

// Uniform double in [0, 1) from (seed, stream, counter); every walk owns one stream.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Brownian motion (A = I) started at X, run by walk-on-spheres until it is within the shell
// of ∂Ω, then projected to the nearest boundary point.
WosEstimate walk_on_spheres(const Domain& domain, const Point2& x, const BoundaryData& f, const WosOptions& opts = {});

// ω^X(Q) for the cubes of generation k with binomial standard errors.
EllipticMeasureEstimate wos_measure(const Domain& domain, const Point2& x, const DyadicGrid& grid, int k,
                                    const WosOptions& opts = {});

WosEstimate walk_on_spheres3(const Domain3& domain, const Point3& x, const std::function<double(const Point3&)>& f,
                             const WosOptions& opts = {});

// G(X, Y) = Γ(X − Y) − E[Γ(W_τ − Y)] for the Laplacian in R³, Γ(Z) = 1/(4π|Z|).
WosEstimate green3_wos(const Domain3& domain, const Point3& x, const Point3& y, const WosOptions& opts = {});

}  // namespace cadkit
