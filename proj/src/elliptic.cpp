#include "cadkit/elliptic.hpp"

#include "cadkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace cadkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Dir { kE = 0, kW = 1, kN = 2, kS = 3 };

struct Arm {
  int nb = -1;  // unknown id, or -1 for a boundary value
  double len = 0.0;
  BoundaryPoint point;
};

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

}  // namespace

std::vector<double> uniform_axis(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) throw RangeError("uniform axis needs h > 0 and hi > lo");
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / h + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(lo + i * h);
  if (hi - v.back() > 1e-9 * h) v.push_back(hi);
  return v;
}

std::vector<double> graded_axis(double lo, double hi, double h_fine, double h_coarse,
                                std::span<const std::pair<double, double>> focus, double ratio) {
  if (!(h_fine > 0.0) || h_coarse < h_fine || !(hi > lo) || !(ratio > 1.0)) {
    throw RangeError("graded axis needs 0 < h_fine ≤ h_coarse, hi > lo and ratio > 1");
  }
  auto spacing = [&](double x) {
    double d = kInf;
    for (const auto& [a, b] : focus) d = std::min(d, x < a ? a - x : (x > b ? x - b : 0.0));
    if (focus.empty()) return h_coarse;
    return std::min(h_coarse, h_fine + (ratio - 1.0) * d);
  };
  std::vector<double> v{lo};
  double x = lo;
  while (true) {
    double s = spacing(x);
    for (int it = 0; it < 3; ++it) s = std::min(s, spacing(x + s));
    if (x + 1.25 * s >= hi) {
      v.push_back(hi);
      break;
    }
    x += s;
    v.push_back(x);
  }
  return v;
}

double BoundaryMeasure::total() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass;
  return s;
}

double BoundaryMeasure::integrate(const BoundaryData& f) const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass * f(a.point);
  return s;
}

double BoundaryMeasure::ball(const Point2& x, double r) const {
  double s = 0.0;
  for (const auto& a : atoms) {
    if ((a.point.position - x).norm() < r) s += a.mass;
  }
  return s;
}

std::vector<double> BoundaryMeasure::cubes(const DyadicGrid& grid, int k) const {
  if (k < 0 || k > grid.depth()) throw RangeError("generation outside the grid");
  const auto gen = grid.generation(k);
  std::vector<int> pos(grid.size(), -1);
  for (std::size_t i = 0; i < gen.size(); ++i) pos[gen[i]] = static_cast<int>(i);
  std::vector<double> out(gen.size(), 0.0);
  for (const auto& a : atoms) {
    const int id = grid.locate(k, a.point);
    if (id >= 0 && pos[id] >= 0) out[pos[id]] += a.mass;
  }
  return out;
}

nlohmann::json SolverStats::to_json() const {
  return {{"unknowns", unknowns}, {"boundary_links", boundary_links}, {"mixed_dropped", mixed_dropped},
          {"h_min", h_min},       {"h_max", h_max},                   {"residual", residual}};
}

std::optional<std::pair<double, BoundaryPoint>> first_crossing(const Boundary& boundary, const Point2& p,
                                                               const Point2& q) {
  Box2 region;
  region.lo = p.cwiseMin(q);
  region.hi = p.cwiseMax(q);
  const Point2 r = q - p;
  double best = kInf;
  BoundaryPoint bp;
  boundary.for_each_candidate(region, [&](int g) {
    const auto [c, i] = boundary.segment_of_global(g);
    const Point2 a = boundary.segment_a(c, i), b = boundary.segment_b(c, i);
    const Point2 s = b - a;
    const double den = cross2(r, s);
    if (std::abs(den) <= 1e-300) return;
    const double th = cross2(a - p, s) / den;
    const double u = cross2(a - p, r) / den;
    constexpr double eps = 1e-12;
    if (th < -eps || th > 1.0 + eps || u < -eps || u > 1.0 + eps) return;
    if (th < best) {
      best = th;
      const double uc = std::clamp(u, 0.0, 1.0);
      bp.position = a + uc * s;
      bp.component = c;
      bp.segment = i;
      bp.t = uc;
      bp.arclength = boundary.arclength_of(c, i, uc);
    }
  });
  if (best == kInf) return std::nullopt;
  return std::make_pair(std::clamp(best, 0.0, 1.0), bp);
}

DirichletProblem::DirichletProblem(const Domain& domain, CoefficientField a, std::vector<double> xs,
                                   std::vector<double> ys, SolverOptions opts)
    : domain_(&domain), a_(std::move(a)), opts_(opts) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InputError("grid coordinates must increase");
  }
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (!(ys[i] > ys[i - 1])) throw InputError("grid coordinates must increase");
  }
  layout_ = FieldSample::tensor(domain, std::move(xs), std::move(ys));
  assemble();
}

DirichletProblem DirichletProblem::uniform(const Domain& domain, CoefficientField a, double h, SolverOptions opts) {
  if (!(h > 0.0)) throw RangeError("pitch must be positive");
  const Box2& b = domain.bbox();
  if (std::max(b.size().x(), b.size().y()) / h > 20000.0) throw ResolutionError("pitch too small for the domain");
  auto xs = uniform_axis(b.lo.x() - 2 * h, b.hi.x() + 2 * h, h);
  auto ys = uniform_axis(b.lo.y() - 2 * h, b.hi.y() + 2 * h, h);
  DirichletProblem p(domain, std::move(a), std::move(xs), std::move(ys), opts);
  p.layout_.pitch = h;
  return p;
}

void DirichletProblem::assemble() {
  const FieldSample& f = layout_;
  const int nx = f.nx(), ny = f.ny();
  const Boundary& bd = domain_->boundary();
  node_.assign(f.values.size(), -1);
  std::vector<double> delta(f.values.size(), 0.0);

  stats_ = {};
  stats_.h_min = kInf;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!f.active(i, j)) continue;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) throw InputError("solver grid does not cover the domain");
      const double hloc = std::min({f.xs[i] - f.xs[i - 1], f.xs[i + 1] - f.xs[i], f.ys[j] - f.ys[j - 1],
                                    f.ys[j + 1] - f.ys[j]});
      const double d = domain_->delta(f.node(i, j));
      delta[f.index(i, j)] = d;
      if (d < opts_.snap_fraction * hloc) continue;
      node_[f.index(i, j)] = static_cast<int>(ij_.size());
      ij_.emplace_back(i, j);
      stats_.h_min = std::min(stats_.h_min, hloc);
      stats_.h_max = std::max({stats_.h_max, f.xs[i] - f.xs[i - 1], f.xs[i + 1] - f.xs[i], f.ys[j] - f.ys[j - 1],
                               f.ys[j + 1] - f.ys[j]});
    }
  }
  for (std::size_t k = 0; k < layout_.values.size(); ++k) {
    if (node_[k] < 0) layout_.values[k] = kNaN;
  }
  const int n = static_cast<int>(ij_.size());
  if (n == 0) throw ResolutionError("no grid node inside the domain");
  stats_.unknowns = n;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  links_.clear();
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};

  for (int row = 0; row < n; ++row) {
    const auto [i, j] = ij_[row];
    const Point2 p = f.node(i, j);
    const double dp = delta[f.index(i, j)];
    Arm arm[4];
    bool cut[4];
    for (int d = 0; d < 4; ++d) {
      const int ii = i + di[d], jj = j + dj[d];
      const Point2 q = f.node(ii, jj);
      const double full = (q - p).norm();
      const int nb = node_[f.index(ii, jj)];
      cut[d] = false;
      if (nb >= 0 && dp > full) {
        arm[d] = {nb, full, {}};
        continue;
      }
      if (auto c = first_crossing(bd, p, q)) {
        arm[d] = {-1, std::max(c->first, 1e-6) * full, c->second};
        cut[d] = true;
      } else if (nb >= 0) {
        arm[d] = {nb, full, {}};
      } else {
        arm[d] = {-1, full, bd.nearest(q)};
        cut[d] = true;
      }
    }
    const double hE = arm[kE].len, hW = arm[kW].len, hN = arm[kN].len, hS = arm[kS].len;
    double c[4];
    c[kE] = a_(p + Point2(hE / 2, 0))(0, 0) * 2.0 / (hE * (hE + hW));
    c[kW] = a_(p - Point2(hW / 2, 0))(0, 0) * 2.0 / (hW * (hE + hW));
    c[kN] = a_(p + Point2(0, hN / 2))(1, 1) * 2.0 / (hN * (hN + hS));
    c[kS] = a_(p - Point2(0, hS / 2))(1, 1) * 2.0 / (hS * (hN + hS));

    const Matrix2 A = a_(p);
    if (!a_.constant()) {
      const auto g = a_.gradient(p);
      const double bx = g[1](1, 0), by = g[0](0, 1);
      if (bx > 0.0) c[kE] += bx / hE; else c[kW] -= bx / hW;
      if (by > 0.0) c[kN] += by / hN; else c[kS] -= by / hS;
    }

    // mixed term 2b·u_xy on the NE/SW (b > 0) or NW/SE (b < 0) diagonal
    std::vector<std::pair<int, double>> diag;
    const double b = 0.5 * (A(0, 1) + A(1, 0));
    if (opts_.mixed_term && std::abs(b) > 1e-14 * (std::abs(A(0, 0)) + std::abs(A(1, 1)))) {
      bool ok = !cut[kE] && !cut[kW] && !cut[kN] && !cut[kS];
      const int s1x = b > 0 ? 1 : -1;  // first diagonal: (s1x, +1); second: (-s1x, -1)
      int n1 = -1, n2 = -1;
      if (ok) {
        n1 = node_[f.index(i + s1x, j + 1)];
        n2 = node_[f.index(i - s1x, j - 1)];
        ok = n1 >= 0 && n2 >= 0;
      }
      if (ok) {
        const double diag_len = std::hypot(std::max(hE, hW), std::max(hN, hS));
        if (dp <= diag_len) {
          ok = !first_crossing(bd, p, f.node(i + s1x, j + 1)) && !first_crossing(bd, p, f.node(i - s1x, j - 1));
        }
      }
      if (ok) {
        const double ab = std::abs(b);
        const Dir x1 = b > 0 ? kE : kW, x2 = b > 0 ? kW : kE;
        const double w1 = ab / (arm[x1].len * hN), w2 = ab / (arm[x2].len * hS);
        double t[4] = {c[0], c[1], c[2], c[3]};
        t[x1] -= w1;
        t[kN] -= w1;
        t[x2] -= w2;
        t[kS] -= w2;
        ok = t[0] >= 0.0 && t[1] >= 0.0 && t[2] >= 0.0 && t[3] >= 0.0;
        if (ok) {
          std::copy(t, t + 4, c);
          diag = {{n1, w1}, {n2, w2}};
        }
      }
      if (!ok) ++stats_.mixed_dropped;
    }

    double sum = 0.0;
    for (int d = 0; d < 4; ++d) {
      sum += c[d];
      if (c[d] == 0.0) continue;
      if (arm[d].nb >= 0) {
        trip.emplace_back(row, arm[d].nb, -c[d]);
      } else {
        links_.push_back({row, c[d], arm[d].point});
      }
    }
    for (const auto& [nb, w] : diag) {
      sum += w;
      trip.emplace_back(row, nb, -w);
    }
    trip.emplace_back(row, row, sum);
  }
  stats_.boundary_links = static_cast<int>(links_.size());
  M_.resize(n, n);
  M_.setFromTriplets(trip.begin(), trip.end());
  M_.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(M_);
  lu_->factorize(M_);
  if (lu_->info() != Eigen::Success) throw SolverError("sparse LU factorisation failed: " + lu_->lastErrorMessage(), kNaN);
}

Eigen::VectorXd DirichletProblem::rhs(const BoundaryData& g) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(stats_.unknowns);
  for (const auto& l : links_) b[l.row] += l.coeff * g(l.point);
  return b;
}

Eigen::VectorXd DirichletProblem::factor_solve(const Eigen::VectorXd& b, bool transpose) const {
  Eigen::VectorXd u = transpose ? Eigen::VectorXd(lu_->transpose().solve(b)) : Eigen::VectorXd(lu_->solve(b));
  if (lu_->info() != Eigen::Success) throw SolverError("sparse LU solve failed", kNaN);
  return u;
}

double DirichletProblem::check_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd r = M_ * u - b;
  const double scale = std::max(u.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (int k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k]) / M_.coeff(k, k));
  worst /= scale;
  stats_.residual = worst;
  if (!(worst < opts_.residual_tol)) {
    std::ostringstream os;
    os << "linear solve residual " << worst << " exceeds " << opts_.residual_tol;
    throw SolverError(os.str(), worst);
  }
  return worst;
}

FieldSample DirichletProblem::to_field(const Eigen::VectorXd& u) const {
  FieldSample out = layout_;
  for (std::size_t k = 0; k < ij_.size(); ++k) out.at(ij_[k].first, ij_[k].second) = u[static_cast<int>(k)];
  return out;
}

FieldSample DirichletProblem::solve(const BoundaryData& g) const {
  const Eigen::VectorXd b = rhs(g);
  Eigen::VectorXd u = factor_solve(b, false);
  try {
    check_residual(u, b);
  } catch (const SolverError&) {
    u += factor_solve(b - M_ * u, false);
    check_residual(u, b);
  }
  return to_field(u);
}

std::pair<int, int> DirichletProblem::nearest_node(const Point2& x) const {
  const FieldSample& f = layout_;
  const int ci = static_cast<int>(std::upper_bound(f.xs.begin(), f.xs.end(), x.x()) - f.xs.begin()) - 1;
  const int cj = static_cast<int>(std::upper_bound(f.ys.begin(), f.ys.end(), x.y()) - f.ys.begin()) - 1;
  std::pair<int, int> best{-1, -1};
  double bd = kInf;
  for (int r = 1; r <= 64 && best.first < 0; r *= 2) {
    for (int j = std::max(0, cj - r + 1); j <= std::min(f.ny() - 1, cj + r); ++j) {
      for (int i = std::max(0, ci - r + 1); i <= std::min(f.nx() - 1, ci + r); ++i) {
        if (node_[f.index(i, j)] < 0) continue;
        const double d = (f.node(i, j) - x).squaredNorm();
        if (d < bd) {
          bd = d;
          best = {i, j};
        }
      }
    }
  }
  if (best.first < 0) throw ResolutionError("no active grid node near the query point");
  return best;
}

std::vector<std::pair<int, double>> DirichletProblem::weights(const Point2& x) const {
  const FieldSample& f = layout_;
  const int i = static_cast<int>(std::upper_bound(f.xs.begin(), f.xs.end(), x.x()) - f.xs.begin()) - 1;
  const int j = static_cast<int>(std::upper_bound(f.ys.begin(), f.ys.end(), x.y()) - f.ys.begin()) - 1;
  std::vector<std::pair<int, double>> w;
  if (i >= 0 && j >= 0 && i + 1 < f.nx() && j + 1 < f.ny()) {
    const double s = (x.x() - f.xs[i]) / (f.xs[i + 1] - f.xs[i]);
    const double t = (x.y() - f.ys[j]) / (f.ys[j + 1] - f.ys[j]);
    const double ws[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
    const int ii[4] = {i, i + 1, i, i + 1}, jj[4] = {j, j, j + 1, j + 1};
    double tot = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int nb = node_[f.index(ii[k], jj[k])];
      if (nb >= 0 && ws[k] > 0.0) {
        w.emplace_back(nb, ws[k]);
        tot += ws[k];
      }
    }
    if (tot > 0.0) {
      for (auto& e : w) e.second /= tot;
      return w;
    }
  }
  const auto [ni, nj] = nearest_node(x);
  return {{node_[f.index(ni, nj)], 1.0}};
}

double DirichletProblem::interpolate(const FieldSample& fs, const Point2& x) const {
  double v = 0.0;
  for (const auto& [k, w] : weights(x)) v += w * fs.at(ij_[k].first, ij_[k].second);
  return v;
}

FieldSample DirichletProblem::green(const Point2& pole, Point2* snapped) const {
  if (!domain_->inside(pole)) throw PreconditionError("Green function pole outside the domain");
  const auto [i, j] = nearest_node(pole);
  const FieldSample& f = layout_;
  const double hloc = std::max({f.xs[i] - f.xs[i - 1], f.xs[i + 1] - f.xs[i], f.ys[j] - f.ys[j - 1],
                                f.ys[j + 1] - f.ys[j]});
  if (domain_->delta(pole) < 10.0 * hloc) {
    std::ostringstream os;
    os << "Green function pole at distance " << domain_->delta(pole) << " from the boundary needs at least "
       << 10.0 * hloc;
    throw PreconditionError(os.str());
  }
  if (snapped) *snapped = f.node(i, j);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(stats_.unknowns);
  b[node_[f.index(i, j)]] = 1.0 / f.cell_area(i, j);
  Eigen::VectorXd u = factor_solve(b, false);
  try {
    check_residual(u, b);
  } catch (const SolverError&) {
    u += factor_solve(b - M_ * u, false);
    check_residual(u, b);
  }
  return to_field(u);
}

BoundaryMeasure DirichletProblem::measure(const Point2& x) const {
  if (!domain_->inside(x)) throw PreconditionError("elliptic measure pole outside the domain");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(stats_.unknowns);
  for (const auto& [k, w] : weights(x)) e[k] += w;
  const Eigen::VectorXd z = factor_solve(e, true);
  BoundaryMeasure m;
  m.pole = x;
  m.atoms.reserve(links_.size());
  for (const auto& l : links_) m.atoms.push_back({l.point, z[l.row] * l.coeff});
  return m;
}

double circle_arc_measure(const Point2& center, double radius, const Point2& pole, double a, double b) {
  const double len = b - a;
  if (len >= 2.0 * kPi) return 1.0;
  if (len <= 0.0) return 0.0;
  const std::complex<double> w((pole.x() - center.x()) / radius, (pole.y() - center.y()) / radius);
  if (std::abs(w) >= 1.0) throw PreconditionError("pole outside the circle");
  auto phi = [&](double t) {
    const std::complex<double> z = std::polar(1.0, t);
    return std::arg((z - w) / (1.0 - std::conj(w) * z));
  };
  return wrap_2pi(phi(b) - phi(a)) / (2.0 * kPi);
}

std::vector<double> circle_cube_measure(const DyadicGrid& grid, int k, const Point2& center, double radius,
                                        const Point2& pole) {
  const auto gen = grid.generation(k);
  std::vector<double> out;
  out.reserve(gen.size());
  for (int id : gen) {
    double m = 0.0;
    for (const auto& piece : grid.pieces(id)) {
      const double ta = std::atan2(piece.a.y() - center.y(), piece.a.x() - center.x());
      double tb = std::atan2(piece.b.y() - center.y(), piece.b.x() - center.x());
      double span = wrap_2pi(tb - ta);
      if (span == 0.0) continue;
      if (span > kPi) {
        m += circle_arc_measure(center, radius, pole, tb, tb + (2.0 * kPi - span));
      } else {
        m += circle_arc_measure(center, radius, pole, ta, ta + span);
      }
    }
    out.push_back(m);
  }
  return out;
}

double half_plane_measure(const Point2& pole, double a, double b) {
  if (!(pole.y() > 0.0)) throw PreconditionError("half-plane pole must have t > 0");
  return (std::atan((b - pole.x()) / pole.y()) - std::atan((a - pole.x()) / pole.y())) / kPi;
}

nlohmann::json Normalization::to_json() const {
  return {{"cube", cube}, {"pole", {pole.x(), pole.y()}}, {"C0", C0}, {"sigma", sigma}};
}

Normalization normalization(const DyadicGrid& grid, int cube, const BoundaryMeasure& omega) {
  double m = 0.0;
  for (const auto& a : omega.atoms) {
    if (grid.contains(cube, a.point)) m += a.mass;
  }
  if (!(m > 0.0)) throw PreconditionError("pole sees no elliptic measure on Q0");
  Normalization n;
  n.cube = cube;
  n.pole = omega.pole;
  n.C0 = 1.0 / m;
  n.sigma = grid.cube(cube).sigma;
  return n;
}

double EllipticMeasureEstimate::sum() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

nlohmann::json EllipticMeasureEstimate::to_json() const {
  nlohmann::json j = {{"pole", {pole.x(), pole.y()}}, {"generation", generation}, {"cubes", cubes},
                      {"mass", mass},                 {"stderr", stderr_},      {"h", h}};
  if (normalized) j["normalization"] = normalized->to_json();
  return j;
}

EllipticMeasureEstimate elliptic_measure(const DirichletProblem& problem, const Point2& pole, const DyadicGrid& grid,
                                         int k) {
  EllipticMeasureEstimate e;
  e.pole = pole;
  e.generation = k;
  const auto gen = grid.generation(k);
  e.cubes.assign(gen.begin(), gen.end());
  e.mass = problem.measure(pole).cubes(grid, k);
  e.stderr_.assign(e.mass.size(), 0.0);
  e.h = problem.h_max();
  return e;
}

}  // namespace cadkit
