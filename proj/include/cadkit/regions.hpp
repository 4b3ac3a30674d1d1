#pragma once

#include "cadkit/field.hpp"
#include "cadkit/probe.hpp"
#include "cadkit/whitney.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cadkit {

struct RegionParams {
  int kstar = 2;
  // dist(I, Q) ≤ K0·ℓ(Q) for I ∈ W*_Q.
  double K0 = 1.0;
};

enum class Fat { one = 1, two = 2, three = 3 };  // I*, I**, I***

// A region given by Whitney boxes and the fattening used to realise it.
struct BoxRegion {
  std::vector<int> boxes;  // sorted, unique
  Fat fat = Fat::one;
};

struct SawtoothRegion {
  int root = -1;
  std::vector<int> family;  // F
  std::vector<int> cubes;   // D_{F,Q}
  BoxRegion region;
  nlohmann::json to_json() const;
};

// Exact area and perimeter of a union of axis-aligned rectangles (slab sweep).
struct UnionMeasure {
  double area = 0.0;
  double perimeter = 0.0;
};
UnionMeasure union_measure(std::span<const Box2> boxes);

class Regions {
 public:
  Regions(const Whitney& whitney, const RegionParams& params = {});

  const Whitney& whitney() const { return *w_; }
  const DyadicGrid& grid() const { return w_->grid(); }
  const Domain& domain() const { return w_->domain(); }
  const RegionParams& params() const { return params_; }

  // X_Q: the corkscrew witness of Δ_Q, cached.
  const std::optional<CorkscrewWitness>& corkscrew(int cube) const;
  // W_Q: W*_Q plus the box of X_Q, restricted to boxes face-connected to it inside the set.
  const std::vector<int>& whitney_set(int cube) const;
  BoxRegion whitney_region(int cube, Fat fat = Fat::one) const { return {whitney_set(cube), fat}; }

  // D_{F,Q}: cubes of D_Q not contained in any member of F. F must be pairwise disjoint.
  std::vector<int> sawtooth_cubes(std::span<const int> family, int root) const;
  SawtoothRegion sawtooth(std::span<const int> family, int root, Fat fat = Fat::one) const;
  SawtoothRegion carleson_box(int root, Fat fat = Fat::one) const { return sawtooth({}, root, fat); }

  // F(ρ) relative to `root`: maximal members of F ∪ {Q' ⊆ root : ℓ(Q') ≤ ρ}.
  std::vector<int> augment_family(std::span<const int> family, double rho, int root) const;
  // U_{Q,ε} = Ω_{F0(εℓ(Q)),Q} with F0 = ∅; ε = 2^{-m}.
  SawtoothRegion u_q_eps(int cube, double eps, Fat fat = Fat::one) const;

  std::vector<Box2> boxes_of(const BoxRegion& r) const;
  double area(const BoxRegion& r) const { return union_measure(boxes_of(r)).area; }
  bool contains(const BoxRegion& r, const Point2& x) const;

  // Smallest κ with every box of T_Q** (I*** fattening) inside κ·B_Q.
  double tent_kappa(int cube) const;

 private:
  const Whitney* w_;
  RegionParams params_;
  mutable std::map<int, std::optional<CorkscrewWitness>> corkscrew_;
  mutable std::map<int, std::vector<int>> wset_;
};

double fat_factor(Fat fat, double lambda);

// Maximal number of regions covering a point of a probe lattice with the given pitch.
int overlap_multiplicity(const Regions& regions, std::span<const BoxRegion> family, double pitch);

// Ψ_N = Σ_{I ∈ W_N} φ_I / Σ_{I ∈ W} φ_I with φ_I a C² tensor bump, 1 on I** and 0 off (1 + 3λ)I.
class Cutoff {
 public:
  Cutoff(const Regions& regions, std::span<const int> boxes);

  double operator()(const Point2& x) const;
  // Σ_{I ∈ W} φ_I(X) / Σ_{I ∈ W} φ_I(X): 1 wherever some bump is positive, 0 elsewhere.
  double partition_sum(const Point2& x) const;
  bool in_family(int box) const { return member_[box]; }
  // W_N^Σ: boxes of W_N touching a box outside W_N or the truncation layer.
  const std::vector<int>& boundary_boxes() const { return sigma_; }
  const std::vector<int>& boxes() const { return boxes_; }
  const Regions& regions() const { return *regions_; }
  FieldSample sample(const Domain& domain, const Box2& box, double h) const;

  static double bump(const Box2& box, double lambda, const Point2& x);

 private:
  std::vector<int> candidates(const Point2& x) const;

  const Regions* regions_;
  std::vector<int> boxes_;
  std::vector<char> member_;
  std::vector<int> sigma_;
};

struct CutoffReport {
  double lower = kInf;        // min Ψ_N over probes in ∪ I* of W_N
  double upper_leak = 0.0;    // max Ψ_N over probes outside ∪ I*** of W_N
  double grad_delta = 0.0;    // sup |∇Ψ_N|·δ (finite differences)
  double interior_grad = 0.0; // max |∇Ψ_N| on I*** of W_N \ W_N^Σ
  double partition_error = 0.0;
  double sigma_sum = 0.0;     // Σ_{W_N^Σ} ℓ(I)
};
CutoffReport check_cutoff(const Cutoff& psi, int probes_per_box = 4);

// ‖f − mean‖_p / (ℓ·‖∇f‖_p) over field nodes inside the region; 0 when ∇f vanishes.
double poincare_check(const Regions& regions, const BoxRegion& region, const FieldSample& f, double p, double ell);

}  // namespace cadkit
