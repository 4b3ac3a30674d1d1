#pragma once

#include "cadkit/dyadic_grid.hpp"

#include "json.hpp"

#include <functional>
#include <span>
#include <vector>

namespace cadkit {

// A finite cube tree: ids ordered so that every parent precedes its children; id 0 is the root.
struct CubeTree {
  std::vector<int> parent;
  std::vector<int> generation;
  std::vector<double> sigma;
  std::vector<std::vector<int>> children;

  std::size_t size() const { return sigma.size(); }
  bool is_ancestor(int a, int b) const;
  std::vector<int> subtree(int id) const;

  static CubeTree from_grid(const DyadicGrid& grid);
  // Every cube splits into two halves of equal measure, `depth` generations below the root.
  static CubeTree halving(int depth, double root_sigma = 1.0);
};

// α or μ indexed by cube id.
using CubeWeights = std::vector<double>;

// m_α(D_Q) for every Q.
CubeWeights subtree_sums(const CubeTree& tree, std::span<const double> alpha);

// μ(Q) for all Q from leaf masses (non-leaf entries of `leaf` are ignored).
CubeWeights measure_from_leaves(const CubeTree& tree, std::span<const double> leaf);

struct CarlesonNorm {
  double norm = 0.0;
  int argmax = -1;
};
// sup_{Q ⊆ root} m_α(D_Q)/σ(Q).
CarlesonNorm carleson_norm(const CubeTree& tree, std::span<const double> alpha, int root = 0);

// Norms of α restricted to generations ≤ k(root) + N, for N = 0, 1, ...
std::vector<double> truncated_norms(const CubeTree& tree, std::span<const double> alpha, int root = 0);

struct StoppingParams {
  double K0 = 1.0;
  double theta = 1.0;
  // Depth of the subtree-representable sets F used to check the hypothesis on μ.
  int hypothesis_depth = 4;
  double slack = 1e-12;
};

struct StoppingFamily {
  int root = -1;
  std::vector<int> family;
  double K0 = 0.0, theta = 0.0, K1 = 0.0;
  double ample = 0.0;  // σ(Q0 \ ∪Q_j)/σ(Q0)
  double min_ratio = 0.0, max_ratio = 0.0;  // μ(Q)/σ(Q) over D_{F,Q0}
  bool ample_ok = false;
  bool ratios_ok = false;
  nlohmann::json to_json() const;
};

double stopping_K1(double K0, double theta);

// Maximal Q ⊊ Q0 with μ(Q)/σ(Q) < 1/2 or > K0·K1. μ holds μ(Q) for every cube.
StoppingFamily stopping_time(const CubeTree& tree, std::span<const double> mu, int root, const StoppingParams& params = {});

using FamilyOracle = std::function<std::vector<int>(int)>;

struct CertificateRow {
  int root = -1;
  std::vector<int> family;
  double ample = 0.0;     // σ(Q0 \ ∪F)/σ(Q0)
  double sawtooth = 0.0;  // m_α(D_{F,Q0})/σ(Q0)
  double outside = 0.0;   // m_α(D_{Q0} \ D_{F,Q0})/σ(Q0)
};

struct CarlesonCertificate {
  double K1 = 0.0, M1 = 0.0;
  double bound = 0.0;  // K1·M1
  double norm = 0.0;   // direct carleson_norm
  bool holds = false;
  std::vector<CertificateRow> rows;
  nlohmann::json to_json() const;
};

// Checks ample contact (≥ 1/K1) and the sawtooth packing (≤ M1) for every Q0 ⊆ root, then
// compares the direct norm with K1·M1. Throws CertificationError naming the first Q0 whose
// family violates a hypothesis. M1 < 0 means: use the measured sup of the sawtooth ratios.
CarlesonCertificate sawtooth_to_carleson(const CubeTree& tree, std::span<const double> alpha, const FamilyOracle& oracle,
                                         double K1, double M1 = -1.0, int root = 0);

// m_α(D_{F,Q0}) for one Q0.
double sawtooth_mass(const CubeTree& tree, std::span<const double> alpha, int root, std::span<const int> family);

struct PackingReport {
  double m1_hat = 0.0;
  int argmax = -1;
  std::vector<double> profile;  // Σ_{Q'∈B, Q'⊆Q} σ(Q')/σ(Q) per cube id
};
PackingReport packing_test(const CubeTree& tree, std::span<const int> bad);

struct PackingCorkscrew {
  int cube = -1;  // Q
  int q1 = -1;    // maximal cube inside Δ_Q containing x_Q
  int good = -1;  // Q' ∈ D_{Q1} \ B
  int levels = 0; // k(Q') − k(Q1)
  double c0_prime = 0.0;
};
PackingCorkscrew corkscrew_from_packing(const DyadicGrid& grid, int cube, double M1, std::span<const int> bad, double c0);

}  // namespace cadkit
