#include "cadkit/carleson.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace cadkit {

namespace {

void check_weights(const CubeTree& tree, std::span<const double> w, const char* what) {
  if (w.size() != tree.size()) throw InputError(std::string(what) + " has the wrong number of entries");
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be finite and nonnegative");
  }
}

void check_ids(const CubeTree& tree, std::span<const int> ids) {
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(tree.size())) throw InputError("cube id " + std::to_string(id) + " out of range");
  }
}

bool below(double r, double t, double slack) { return r < t * (1.0 - slack); }
bool above(double r, double t, double slack) { return r > t * (1.0 + slack); }

// Nonempty unions F of disjoint cubes of D_Q down to `depth` levels below Q, reduced to the
// Pareto front of (σ(F), μ(F)): a union with no larger μ at no larger σ is dropped, which
// never hides the worst violation of a cap increasing in σ.
struct SetPoint {
  double s = 0.0, m = 0.0;
  std::vector<int> ids;
};

std::vector<SetPoint> pareto(std::vector<SetPoint> v) {
  std::sort(v.begin(), v.end(), [](const SetPoint& a, const SetPoint& b) { return a.s < b.s || (a.s == b.s && a.m > b.m); });
  std::vector<SetPoint> out;
  for (auto& p : v) {
    if (out.empty() || p.m > out.back().m) out.push_back(std::move(p));
  }
  return out;
}

std::vector<SetPoint> union_front(const CubeTree& t, std::span<const double> mu, int q, int depth) {
  std::vector<SetPoint> front{{t.sigma[q], mu[q], {q}}};
  if (depth == 0 || t.children[q].empty()) return front;
  std::vector<SetPoint> acc{{0.0, 0.0, {}}};  // includes the empty union
  for (int c : t.children[q]) {
    const auto child = union_front(t, mu, c, depth - 1);
    std::vector<SetPoint> next(acc);
    for (const auto& a : acc) {
      for (const auto& b : child) {
        SetPoint p{a.s + b.s, a.m + b.m, a.ids};
        p.ids.insert(p.ids.end(), b.ids.begin(), b.ids.end());
        next.push_back(std::move(p));
      }
    }
    acc = pareto(std::move(next));
  }
  for (auto& p : acc) {
    if (!p.ids.empty()) front.push_back(std::move(p));
  }
  return pareto(std::move(front));
}

}  // namespace

bool CubeTree::is_ancestor(int a, int b) const {
  while (b >= 0 && generation[b] > generation[a]) b = parent[b];
  return b == a;
}

std::vector<int> CubeTree::subtree(int id) const {
  std::vector<int> out{id};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int c : children[out[i]]) out.push_back(c);
  }
  return out;
}

CubeTree CubeTree::from_grid(const DyadicGrid& grid) {
  CubeTree t;
  for (const auto& q : grid.cubes()) {
    if (q.parent >= q.id) throw InputError("grid ids are not parent-first");
    t.parent.push_back(q.parent);
    t.generation.push_back(q.k);
    t.sigma.push_back(q.sigma);
    t.children.push_back(q.children);
  }
  return t;
}

CubeTree CubeTree::halving(int depth, double root_sigma) {
  if (depth < 0 || depth > 24) throw RangeError("halving tree depth must lie in [0, 24]");
  CubeTree t;
  const int n = (1 << (depth + 1)) - 1;
  t.parent.resize(n);
  t.generation.resize(n);
  t.sigma.resize(n);
  t.children.resize(n);
  for (int i = 0; i < n; ++i) {
    t.parent[i] = i == 0 ? -1 : (i - 1) / 2;
    t.generation[i] = i == 0 ? 0 : t.generation[t.parent[i]] + 1;
    t.sigma[i] = std::ldexp(root_sigma, -t.generation[i]);
    if (2 * i + 2 < n) t.children[i] = {2 * i + 1, 2 * i + 2};
  }
  return t;
}

CubeWeights subtree_sums(const CubeTree& tree, std::span<const double> alpha) {
  check_weights(tree, alpha, "alpha");
  CubeWeights s(alpha.begin(), alpha.end());
  for (int i = static_cast<int>(tree.size()) - 1; i > 0; --i) s[tree.parent[i]] += s[i];
  return s;
}

CubeWeights measure_from_leaves(const CubeTree& tree, std::span<const double> leaf) {
  CubeWeights m(tree.size(), 0.0);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.children[i].empty()) m[i] = leaf[i];
  }
  check_weights(tree, m, "leaf masses");
  for (int i = static_cast<int>(tree.size()) - 1; i > 0; --i) m[tree.parent[i]] += m[i];
  return m;
}

CarlesonNorm carleson_norm(const CubeTree& tree, std::span<const double> alpha, int root) {
  const auto s = subtree_sums(tree, alpha);
  CarlesonNorm n;
  for (int q : tree.subtree(root)) {
    const double r = s[q] / tree.sigma[q];
    if (r > n.norm || n.argmax < 0) {
      n.norm = r;
      n.argmax = q;
    }
  }
  return n;
}

std::vector<double> truncated_norms(const CubeTree& tree, std::span<const double> alpha, int root) {
  int deepest = tree.generation[root];
  for (int q : tree.subtree(root)) deepest = std::max(deepest, tree.generation[q]);
  std::vector<double> out;
  CubeWeights a(tree.size(), 0.0);
  for (int k = tree.generation[root]; k <= deepest; ++k) {
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (tree.generation[i] == k) a[i] = alpha[i];
    }
    out.push_back(carleson_norm(tree, a, root).norm);
  }
  return out;
}

double stopping_K1(double K0, double theta) { return std::pow(4.0 * K0, 1.0 / theta); }

nlohmann::json StoppingFamily::to_json() const {
  return {{"root", root}, {"family", family}, {"K0", K0}, {"theta", theta}, {"K1", K1},
          {"ample", ample}, {"min_ratio", min_ratio}, {"max_ratio", max_ratio},
          {"ample_ok", ample_ok}, {"ratios_ok", ratios_ok}};
}

StoppingFamily stopping_time(const CubeTree& tree, std::span<const double> mu, int root, const StoppingParams& p) {
  if (!(p.K0 >= 1.0)) throw ParameterError("K0 must be at least 1");
  if (!(p.theta > 0.0 && p.theta <= 1.0)) throw ParameterError("theta must lie in (0, 1]");
  check_weights(tree, mu, "mu");
  const double s0 = tree.sigma[root];
  const double r0 = mu[root] / s0;
  if (below(r0, 1.0, p.slack) || above(r0, p.K0, p.slack)) {
    throw PreconditionError("mu(Q0)/sigma(Q0) = " + std::to_string(r0) + " is outside [1, K0]");
  }
  std::vector<int> violator;
  double worst = 0.0;
  for (const auto& f : union_front(tree, mu, root, p.hypothesis_depth)) {
    const double cap = p.K0 * std::pow(f.s / s0, p.theta) * s0;
    if (above(f.m, cap, p.slack) && f.m - cap > worst) {
      worst = f.m - cap;
      violator = f.ids;
    }
  }
  if (!violator.empty()) {
    std::string ids;
    for (int id : violator) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw PreconditionError("mu(F) exceeds K0 (sigma(F)/sigma(Q0))^theta sigma(Q0) for F = {" + ids + "}");
  }

  StoppingFamily f;
  f.root = root;
  f.K0 = p.K0;
  f.theta = p.theta;
  f.K1 = stopping_K1(p.K0, p.theta);
  const double hi = p.K0 * f.K1;
  f.min_ratio = f.max_ratio = r0;
  double stopped = 0.0;
  std::vector<int> stack(tree.children[root].rbegin(), tree.children[root].rend());
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    const double r = mu[q] / tree.sigma[q];
    if (below(r, 0.5, p.slack) || above(r, hi, p.slack)) {
      f.family.push_back(q);
      stopped += tree.sigma[q];
      continue;
    }
    f.min_ratio = std::min(f.min_ratio, r);
    f.max_ratio = std::max(f.max_ratio, r);
    for (auto it = tree.children[q].rbegin(); it != tree.children[q].rend(); ++it) stack.push_back(*it);
  }
  std::sort(f.family.begin(), f.family.end());
  f.ample = 1.0 - stopped / s0;
  f.ample_ok = !below(f.ample, 1.0 / f.K1, p.slack);
  f.ratios_ok = !below(f.min_ratio, 0.5, p.slack) && !above(f.max_ratio, hi, p.slack);
  return f;
}

double sawtooth_mass(const CubeTree& tree, std::span<const double> alpha, int root, std::span<const int> family) {
  std::vector<int> stop(family.begin(), family.end());
  std::sort(stop.begin(), stop.end());
  double m = 0.0;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    if (std::binary_search(stop.begin(), stop.end(), q)) continue;
    m += alpha[q];
    for (int c : tree.children[q]) stack.push_back(c);
  }
  return m;
}

nlohmann::json CarlesonCertificate::to_json() const {
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) {
    rj.push_back({{"root", r.root}, {"family", r.family}, {"ample", r.ample}, {"sawtooth", r.sawtooth}, {"outside", r.outside}});
  }
  return {{"K1", K1}, {"M1", M1}, {"bound", bound}, {"norm", norm}, {"holds", holds}, {"rows", rj}};
}

CarlesonCertificate sawtooth_to_carleson(const CubeTree& tree, std::span<const double> alpha, const FamilyOracle& oracle,
                                         double K1, double M1, int root) {
  if (!(K1 >= 1.0)) throw ParameterError("K1 must be at least 1");
  const auto sums = subtree_sums(tree, alpha);
  constexpr double slack = 1e-12;
  CarlesonCertificate c;
  c.K1 = K1;
  double measured = 0.0;
  for (int q0 : tree.subtree(root)) {
    CertificateRow row;
    row.root = q0;
    row.family = oracle(q0);
    check_ids(tree, row.family);
    double covered = 0.0;
    for (std::size_t a = 0; a < row.family.size(); ++a) {
      const int f = row.family[a];
      if (!tree.is_ancestor(q0, f)) {
        throw CertificationError("family of cube " + std::to_string(q0) + " has member " + std::to_string(f) + " outside it");
      }
      for (std::size_t b = a + 1; b < row.family.size(); ++b) {
        if (tree.is_ancestor(f, row.family[b]) || tree.is_ancestor(row.family[b], f)) {
          throw CertificationError("family of cube " + std::to_string(q0) + " is not pairwise disjoint");
        }
      }
      covered += tree.sigma[f];
    }
    const double s = tree.sigma[q0];
    row.ample = 1.0 - covered / s;
    const double saw = sawtooth_mass(tree, alpha, q0, row.family);
    row.sawtooth = saw / s;
    row.outside = (sums[q0] - saw) / s;
    if (below(row.ample, 1.0 / K1, slack)) {
      throw CertificationError("cube " + std::to_string(q0) + ": ample contact " + std::to_string(row.ample) +
                               " below 1/K1 = " + std::to_string(1.0 / K1));
    }
    measured = std::max(measured, row.sawtooth);
    c.rows.push_back(std::move(row));
  }
  if (M1 < 0.0) {
    M1 = measured;
  } else if (above(measured, M1, slack)) {
    for (const auto& r : c.rows) {
      if (above(r.sawtooth, M1, slack)) {
        throw CertificationError("cube " + std::to_string(r.root) + ": sawtooth mass ratio " + std::to_string(r.sawtooth) +
                                 " exceeds M1 = " + std::to_string(M1));
      }
    }
  }
  c.M1 = M1;
  c.bound = K1 * M1;
  c.norm = carleson_norm(tree, alpha, root).norm;
  c.holds = !above(c.norm, c.bound, slack);
  return c;
}

PackingReport packing_test(const CubeTree& tree, std::span<const int> bad) {
  check_ids(tree, bad);
  CubeWeights alpha(tree.size(), 0.0);
  for (int q : bad) alpha[q] = tree.sigma[q];
  const auto s = subtree_sums(tree, alpha);
  PackingReport r;
  r.profile.resize(tree.size());
  for (std::size_t q = 0; q < tree.size(); ++q) {
    r.profile[q] = s[q] / tree.sigma[q];
    if (r.profile[q] > r.m1_hat) {
      r.m1_hat = r.profile[q];
      r.argmax = static_cast<int>(q);
    }
  }
  return r;
}

PackingCorkscrew corkscrew_from_packing(const DyadicGrid& grid, int cube, double M1, std::span<const int> bad, double c0) {
  if (!(M1 >= 0.0)) throw ParameterError("M1 must be nonnegative");
  if (cube < 0 || cube >= static_cast<int>(grid.size())) throw InputError("cube id out of range");
  const DyadicCube& q = grid.cube(cube);
  PackingCorkscrew out;
  out.cube = cube;
  for (int k = q.k; k <= grid.depth() && out.q1 < 0; ++k) {
    const int c = grid.locate(k, q.center);
    bool inside = c >= 0;
    for (const auto& p : c >= 0 ? grid.pieces(c) : std::vector<ArcPiece>{}) {
      inside = inside && (p.a - q.center.position).norm() < q.radius && (p.b - q.center.position).norm() < q.radius;
    }
    if (inside) out.q1 = c;
  }
  if (out.q1 < 0) throw ResolutionError("no grid cube inside the surface ball of cube " + std::to_string(cube));
  std::vector<int> b(bad.begin(), bad.end());
  std::sort(b.begin(), b.end());
  const int levels = static_cast<int>(std::floor(M1));
  std::vector<int> layer{out.q1};
  for (int m = 0; m <= levels; ++m) {
    if (layer.empty()) throw ResolutionError("grid too shallow to search " + std::to_string(levels + 1) + " generations");
    std::sort(layer.begin(), layer.end());
    for (int id : layer) {
      if (!std::binary_search(b.begin(), b.end(), id)) {
        out.good = id;
        out.levels = m;
        out.c0_prime = c0 * grid.constants().c * std::ldexp(1.0, -levels);
        return out;
      }
    }
    std::vector<int> next;
    for (int id : layer) {
      for (int ch : grid.cube(id).children) next.push_back(ch);
    }
    layer = std::move(next);
  }
  throw ContradictionError("every cube within " + std::to_string(levels + 1) + " generations below cube " +
                           std::to_string(out.q1) + " is bad; the packing bound M1 = " + std::to_string(M1) +
                           " cannot hold");
}

}  // namespace cadkit
