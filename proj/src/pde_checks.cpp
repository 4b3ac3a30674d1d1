#include "cadkit/pde_checks.hpp"

#include "cadkit/error.hpp"
#include "cadkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace cadkit {

namespace {

double half_gap(const std::vector<double>& v, int i, bool upper) {
  if (upper) return i + 1 < static_cast<int>(v.size()) ? 0.5 * (v[i + 1] - v[i]) : 0.0;
  return i > 0 ? 0.5 * (v[i] - v[i - 1]) : 0.0;
}

// Index range [first, last] of nodes whose midpoint cells meet [lo, hi].
std::pair<int, int> node_range(const std::vector<double>& v, double lo, double hi) {
  int a = static_cast<int>(std::lower_bound(v.begin(), v.end(), lo) - v.begin()) - 1;
  int b = static_cast<int>(std::upper_bound(v.begin(), v.end(), hi) - v.begin());
  return {std::max(a, 0), std::min(b, static_cast<int>(v.size()) - 1)};
}

// Area of the midpoint cell of node (i, j) inside the box.
double clipped_area(const FieldSample& f, int i, int j, const Box2& box) {
  const double x0 = std::max(f.xs[i] - half_gap(f.xs, i, false), box.lo.x());
  const double x1 = std::min(f.xs[i] + half_gap(f.xs, i, true), box.hi.x());
  const double y0 = std::max(f.ys[j] - half_gap(f.ys, j, false), box.lo.y());
  const double y1 = std::min(f.ys[j] + half_gap(f.ys, j, true), box.hi.y());
  return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
}

template <class F>
void for_nodes_in(const FieldSample& f, const Box2& box, F&& fn) {
  const auto [i0, i1] = node_range(f.xs, box.lo.x(), box.hi.x());
  const auto [j0, j1] = node_range(f.ys, box.lo.y(), box.hi.y());
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (!f.active(i, j)) continue;
      const double a = clipped_area(f, i, j, box);
      if (a > 0.0) fn(i, j, a);
    }
  }
}

double local_pitch(const FieldSample& f, const Point2& x) {
  const int i = std::clamp(static_cast<int>(std::upper_bound(f.xs.begin(), f.xs.end(), x.x()) - f.xs.begin()) - 1, 0,
                           f.nx() - 2);
  const int j = std::clamp(static_cast<int>(std::upper_bound(f.ys.begin(), f.ys.end(), x.y()) - f.ys.begin()) - 1, 0,
                           f.ny() - 2);
  return std::max(f.xs[i + 1] - f.xs[i], f.ys[j + 1] - f.ys[j]);
}

double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace

nlohmann::json BourgainReport::to_json() const {
  return {{"min", min}, {"C", C}, {"argmin", {argmin.x(), argmin.y()}}, {"samples", samples},
          {"at_corkscrew", at_corkscrew}};
}

BourgainReport bourgain_check(const DirichletProblem& problem, const Point2& x, double r, double c) {
  if (!(r > 0.0) || !(c > 0.0) || c > 1.0) throw RangeError("Bourgain check needs r > 0 and 0 < c ≤ 1");
  const FieldSample u = problem.solve([&](const BoundaryPoint& b) { return (b.position - x).norm() < r ? 1.0 : 0.0; });
  BourgainReport rep;
  for (int j = 0; j < u.ny(); ++j) {
    for (int i = 0; i < u.nx(); ++i) {
      if (!u.active(i, j) || (u.node(i, j) - x).norm() >= c * r) continue;
      ++rep.samples;
      if (u.at(i, j) < rep.min) {
        rep.min = u.at(i, j);
        rep.argmin = u.node(i, j);
      }
    }
  }
  if (rep.samples == 0) throw ResolutionError("no grid node inside B(x, c·r)");
  rep.C = rep.min > 0.0 ? 1.0 / rep.min : kInf;
  if (auto w = find_corkscrew(problem.domain(), x, r)) rep.at_corkscrew = problem.interpolate(u, w->center);
  return rep;
}

double doubling_check(const BoundaryMeasure& omega, const Point2& x, double r) {
  if (!(r > 0.0)) throw RangeError("doubling check needs r > 0");
  if ((omega.pole - x).norm() < 4.0 * r) throw PreconditionError("doubling check needs the pole outside B(x, 4r)");
  const double small = omega.ball(x, r);
  if (!(small > 0.0)) throw ResolutionError("no elliptic-measure atom inside Δ(x, r)");
  return omega.ball(x, 2.0 * r) / small;
}

nlohmann::json CfmsReport::to_json() const {
  return {{"green", green}, {"omega", omega}, {"ratio", ratio}, {"corkscrew", {corkscrew.x(), corkscrew.y()}}};
}

CfmsReport cfms_check(const DirichletProblem& adjoint, const FieldSample& green_top, const BoundaryMeasure& omega,
                      const Point2& x, double r) {
  if ((omega.pole - x).norm() < 2.0 * r) throw PreconditionError("CFMS check needs the pole outside B(x, 2r)");
  const auto w = find_corkscrew(adjoint.domain(), x, r);
  if (!w) throw ResolutionError("no corkscrew point for Δ(x, r)");
  CfmsReport rep;
  rep.corkscrew = w->center;
  rep.green = adjoint.interpolate(green_top, w->center);
  rep.omega = omega.ball(x, r);
  if (!(rep.omega > 0.0)) throw ResolutionError("no elliptic-measure atom inside Δ(x, r)");
  rep.ratio = rep.green / rep.omega;
  return rep;
}

nlohmann::json RhqReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    rs.push_back({{"cube", r.cube}, {"average", r.average}, {"q_average", r.q_average}, {"ratio", r.ratio},
                  {"integral", r.integral}});
  }
  return {{"q", q},         {"rh_constant", rh_constant}, {"rh_argmax", rh_argmax}, {"scan_max", scan_max},
          {"scan_argmax", scan_argmax}, {"fit_C", fit_C}, {"fit_s", fit_s}, {"rows", rs}};
}

namespace {

RhqRow rhq_row(const DyadicGrid& grid, int kf, const std::unordered_map<int, double>& mass, int cube, double q) {
  const DyadicCube& Q = grid.cube(cube);
  RhqRow row;
  row.cube = cube;
  double sigma = 0.0, m = 0.0, mq = 0.0;
  for (int id : grid.descendants_at(cube, kf - Q.k)) {
    const double s = grid.cube(id).sigma;
    const double w = mass.at(id);
    sigma += s;
    m += w;
    if (s > 0.0) mq += std::pow(w / s, q) * s;
  }
  row.average = m / sigma;
  row.q_average = std::pow(mq / sigma, 1.0 / q);
  row.ratio = row.average > 0.0 ? row.q_average / row.average : kInf;
  row.integral = mq * std::pow(sigma, q - 1.0);
  return row;
}

void summarise(RhqReport& rep) {
  for (const auto& r : rep.rows) {
    if (r.ratio > rep.rh_constant) {
      rep.rh_constant = r.ratio;
      rep.rh_argmax = r.cube;
    }
    if (r.integral > rep.scan_max) {
      rep.scan_max = r.integral;
      rep.scan_argmax = r.cube;
    }
  }
}

}  // namespace

RhqReport rhq_fit(const DyadicGrid& grid, int kf, std::span<const double> finest_mass, std::span<const int> tested,
                  double q) {
  if (!(q > 1.0)) throw RangeError("reverse Hölder exponent must exceed 1");
  if (kf < 0 || kf > grid.depth()) throw RangeError("finest generation outside the grid");
  const auto gen = grid.generation(kf);
  if (finest_mass.size() != gen.size()) throw InputError("mass vector does not match the finest generation");
  std::unordered_map<int, double> mass;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (finest_mass[i] < 0.0) throw InputError("negative elliptic-measure mass");
    mass[gen[i]] = finest_mass[i];
  }
  RhqReport rep;
  rep.q = q;
  std::vector<double> lx, ly;
  std::vector<std::pair<double, double>> pairs;
  for (int c : tested) {
    if (grid.cube(c).k > kf) throw InputError("tested cube finer than the density generation");
    rep.rows.push_back(rhq_row(grid, kf, mass, c, q));
    const DyadicCube& Q = grid.cube(c);
    double wq = 0.0;
    for (int id : grid.descendants_at(c, kf - Q.k)) wq += mass.at(id);
    if (!(wq > 0.0)) continue;
    for (int lev = 1; lev <= kf - Q.k; ++lev) {
      for (int e : grid.descendants_at(c, lev)) {
        double we = 0.0;
        for (int id : grid.descendants_at(e, kf - Q.k - lev)) we += mass.at(id);
        if (!(we > 0.0)) continue;
        const double x = grid.cube(e).sigma / Q.sigma, y = we / wq;
        pairs.emplace_back(x, y);
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
      }
    }
  }
  summarise(rep);
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / n;
      my += ly[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.fit_s = sxx > 0.0 ? std::clamp(sxy / sxx, 1e-6, 1.0) : 1.0;
    for (const auto& [x, y] : pairs) rep.fit_C = std::max(rep.fit_C, y / std::pow(x, rep.fit_s));
  }
  return rep;
}

RhqReport corkscrew_pole_scan(const DirichletProblem& problem, const DyadicGrid& grid, int kf, std::span<const int> tested,
                            double q) {
  if (!(q > 1.0)) throw RangeError("reverse Hölder exponent must exceed 1");
  RhqReport rep;
  rep.q = q;
  const auto gen = grid.generation(kf);
  for (int c : tested) {
    const DyadicCube& Q = grid.cube(c);
    const auto w = find_corkscrew(problem.domain(), Q.center.position, Q.radius);
    if (!w) throw ResolutionError("no corkscrew point for the tested cube");
    const auto m = problem.measure(w->center).cubes(grid, kf);
    std::unordered_map<int, double> mass;
    for (std::size_t i = 0; i < gen.size(); ++i) mass[gen[i]] = std::max(0.0, m[i]);
    rep.rows.push_back(rhq_row(grid, kf, mass, c, q));
  }
  summarise(rep);
  return rep;
}

nlohmann::json GradientBoundReport::to_json() const {
  return {{"sup", sup}, {"argmax", {argmax.x(), argmax.y()}}, {"nodes", nodes}};
}

GradientBoundReport gradient_bound_check(const FieldSample& u, const Domain& domain, double min_delta) {
  GradientBoundReport rep;
  for (int j = 0; j < u.ny(); ++j) {
    for (int i = 0; i < u.nx(); ++i) {
      if (!u.active(i, j)) continue;
      const double v = u.at(i, j);
      if (v < 0.0) throw PreconditionError("gradient bound needs a nonnegative solution");
      const Point2 p = u.node(i, j);
      const double d = domain.delta(p);
      if (d < min_delta || v <= 0.0) continue;
      const auto g = u.gradient(i, j);
      if (!g) continue;
      ++rep.nodes;
      const double r = g->norm() * d / v;
      if (r > rep.sup) {
        rep.sup = r;
        rep.argmax = p;
      }
    }
  }
  if (rep.nodes == 0) throw ResolutionError("no node with δ ≥ min_delta");
  return rep;
}

double caccioppoli2_check(const FieldSample& u, const Domain& domain, const Box2& box) {
  if (!domain.inside(box.center()) || domain.boundary().distance_to_box(box.scaled(6.0)) <= 0.0) {
    throw PreconditionError("Caccioppoli check needs 6I inside the domain");
  }
  const double ell = box.size().x();
  double num = 0.0, den = 0.0;
  for_nodes_in(u, box, [&](int i, int j, double a) {
    const auto H = u.hessian(i, j);
    if (!H) throw ResolutionError("second differences unavailable inside the box");
    num += H->squaredNorm() * a;
  });
  for_nodes_in(u, box.scaled(2.0), [&](int i, int j, double a) {
    const auto g = u.gradient(i, j);
    if (!g) throw ResolutionError("gradient unavailable inside 2I");
    den += g->squaredNorm() * a;
  });
  if (den <= 1e-300) return 0.0;
  return ell * ell * num / den;
}

nlohmann::json SquareFunctionReport::to_json() const {
  nlohmann::json pc = nlohmann::json::array();
  for (const auto& [c, v] : per_cube) pc.push_back({{"cube", c}, {"upsilon", v}});
  return {{"upsilon", upsilon}, {"sigma_root", sigma_root}, {"ratio", ratio}, {"boxes", boxes}, {"per_cube", pc}};
}

double square_function_density(const DirichletProblem& problem, const FieldSample& G, const CoefficientField& AT,
                                const FieldSample* weight, double scale, const Point2& x) {
  const FieldSample& f = G;
  const int i = static_cast<int>(std::upper_bound(f.xs.begin(), f.xs.end(), x.x()) - f.xs.begin()) - 1;
  const int j = static_cast<int>(std::upper_bound(f.ys.begin(), f.ys.end(), x.y()) - f.ys.begin()) - 1;
  if (i < 0 || j < 0 || i + 1 >= f.nx() || j + 1 >= f.ny()) throw ResolutionError("point outside the solver grid");
  auto nodal = [&](int a, int b) -> std::optional<double> {
    const auto H = G.hessian(a, b);
    const auto g = G.gradient(a, b);
    if (!H || !g) return std::nullopt;
    const Point2 p = G.node(a, b);
    const Matrix2 M = AT(p);
    const auto dM = AT.gradient(p);
    double s = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) {
        const double v = dM[k](r, 0) * (*g)[0] + dM[k](r, 1) * (*g)[1] + M(r, 0) * (*H)(0, k) + M(r, 1) * (*H)(1, k);
        s += v * v;
      }
    }
    s *= scale * scale;
    const double w = weight ? scale * weight->at(a, b) : problem.domain().delta(p);
    return s * w;
  };
  const double sx = (x.x() - f.xs[i]) / (f.xs[i + 1] - f.xs[i]);
  const double sy = (x.y() - f.ys[j]) / (f.ys[j + 1] - f.ys[j]);
  const double ws[4] = {(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy};
  const int ii[4] = {i, i + 1, i, i + 1}, jj[4] = {j, j, j + 1, j + 1};
  double v = 0.0, tot = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (ws[k] <= 0.0) continue;
    if (const auto d = nodal(ii[k], jj[k])) {
      v += ws[k] * *d;
      tot += ws[k];
    }
  }
  if (!(tot > 0.0)) throw ResolutionError("second differences unavailable at the quadrature point");
  return v / tot;
}

SquareFunctionReport square_function_carleson(const DirichletProblem& problem, const FieldSample& G,
                                              const CoefficientField& AT, const Regions& regions,
                                              const SawtoothRegion& region, const FieldSample* weight, double scale,
                                              const Point2& pole) {
  const Whitney& w = regions.whitney();
  const double exclusion = 5.0 * local_pitch(G, pole);
  for (int id : region.region.boxes) {
    if (w.box(id).box.distance_to(pole) < exclusion) {
      throw PreconditionError("sawtooth region touches the pole cell");
    }
  }
  std::unordered_map<int, double> per_box;
  auto box_value = [&](int id) {
    auto it = per_box.find(id);
    if (it != per_box.end()) return it->second;
    const WhitneyBox& b = w.box(id);
    const double v = b.side * b.side * square_function_density(problem, G, AT, weight, scale, b.center());
    per_box.emplace(id, v);
    return v;
  };
  SquareFunctionReport rep;
  for (int id : region.region.boxes) rep.upsilon += box_value(id);
  rep.boxes = static_cast<int>(region.region.boxes.size());
  for (int c : region.cubes) {
    double v = 0.0;
    for (int id : regions.whitney_set(c)) v += box_value(id);
    rep.per_cube.emplace_back(c, v);
  }
  rep.sigma_root = regions.grid().cube(region.root).sigma;
  rep.ratio = rep.upsilon / rep.sigma_root;
  return rep;
}

double bump_phi(const Point2& z, double rho, const Point2& x) {
  const double s = (x - z).norm() / rho;
  return 1.0 - smoothstep5(2.0 * s - 1.0);
}

Point2 bump_grad(const Point2& z, double rho, const Point2& x) {
  const Point2 d = x - z;
  const double r = d.norm();
  if (r == 0.0) return Point2::Zero();
  const double s = std::clamp(2.0 * r / rho - 1.0, 0.0, 1.0);
  const double ds = 30.0 * s * s * (1.0 - s) * (1.0 - s);
  return -(ds * 2.0 / rho) * d / r;
}

nlohmann::json IbpReport::to_json() const {
  return {{"cube", cube},   {"phi_omega", phi_omega}, {"I", I},
          {"II", II},       {"beta", {beta.x(), beta.y()}}, {"beta_norm", beta.norm()},
          {"residual", residual}, {"tolerance", tolerance}, {"omega_ratio", omega_ratio},
          {"sigma", sigma}, {"pass", pass}};
}

IbpReport ibp_identity_check(const DirichletProblem& adjoint, const FieldSample& green_top, const BoundaryMeasure& omega,
                             const Normalization& norm, const Regions& regions, int cube, double eps, double support) {
  if (!(support > 0.0) || support > 1.0) throw InputError("Φ support leaks outside B(z_Q, r_Q/4)");
  const DyadicGrid& grid = regions.grid();
  const Domain& domain = adjoint.domain();
  const DyadicCube& Q = grid.cube(cube);
  const Point2 z = Q.center.position;
  const double rho = support * Q.radius / 4.0;
  if ((omega.pole - z).norm() < rho) throw InputError("pole inside the support of Φ");
  const double fac = norm.factor();
  const CoefficientField& AT = adjoint.coefficients();

  IbpReport rep;
  rep.cube = cube;
  rep.sigma = Q.sigma;
  for (const auto& a : omega.atoms) rep.phi_omega += fac * a.mass * bump_phi(z, rho, a.point.position);
  double wq = 0.0;
  for (const auto& a : omega.atoms) {
    if (grid.contains(cube, a.point)) wq += a.mass;
  }
  rep.omega_ratio = fac * wq / Q.sigma;

  // β over U_{Q,ε}
  const SawtoothRegion U = regions.u_q_eps(cube, eps);
  Point2 bsum = Point2::Zero();
  double area = 0.0;
  std::vector<char> seen(green_top.values.size(), 0);
  for (const Box2& b : regions.boxes_of(U.region)) {
    for_nodes_in(green_top, b, [&](int i, int j, double) {
      const std::size_t k = green_top.index(i, j);
      if (seen[k]) return;
      seen[k] = 1;
      const auto g = green_top.gradient(i, j);
      if (!g) return;
      const double a = green_top.cell_area(i, j);
      bsum += a * fac * (AT(green_top.node(i, j)) * *g);
      area += a;
    });
  }
  if (!(area > 0.0)) throw ResolutionError("no grid node inside U_{Q,ε}");
  rep.beta = bsum / area;

  Box2 ball;
  ball.lo = z - Point2(rho, rho);
  ball.hi = z + Point2(rho, rho);
  for_nodes_in(green_top, ball, [&](int i, int j, double) {
    const Point2 p = green_top.node(i, j);
    if ((p - z).norm() >= rho) return;
    const auto g = green_top.gradient(i, j);
    if (!g) return;
    const Point2 v = fac * (AT(p) * *g) - rep.beta;
    rep.I += green_top.cell_area(i, j) * v.dot(bump_grad(z, rho, p));
  });

  const int m = 256;
  const double hh = 2.0 * rho / m;
  Point2 ext = Point2::Zero();
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Point2 p = z + Point2(-rho + (i + 0.5) * hh, -rho + (j + 0.5) * hh);
      if ((p - z).norm() >= rho || domain.inside(p) || domain.delta(p) == 0.0) continue;
      ext += bump_grad(z, rho, p);
    }
  }
  rep.II = rep.beta.dot(ext) * hh * hh;
  rep.residual = std::abs(rep.phi_omega - (-rep.I + rep.II));
  rep.tolerance = 5.0 * adjoint.h_max() * Q.sigma;
  rep.pass = rep.residual <= rep.tolerance;
  return rep;
}

nlohmann::json KpReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back({{"ell", r.ell}, {"value", r.value}, {"mu", r.mu}});
  return {{"rows", rs}, {"sup", sup}, {"mu_norm", mu_norm}, {"nu_norm", nu_norm},
          {"bound", bound}, {"fit", fit}, {"pass", pass}};
}

KpReport kenig_pipher_carleson(const CoefficientField& a, const FieldSample& u, std::span<const double> ladder,
                               double xc) {
  double umax = 0.0;
  for (int j = 0; j < u.ny(); ++j) {
    for (int i = 0; i < u.nx(); ++i) {
      if (!u.active(i, j)) continue;
      umax = std::max(umax, std::abs(u.at(i, j)));
      if (std::abs(a(u.node(i, j))(1, 1) - 1.0) > 1e-12) throw ParameterError("appendix coefficients need a_dd = 1");
    }
  }
  if (umax > 1.0 + 1e-9) throw PreconditionError("appendix estimate needs |u| ≤ 1");
  KpReport rep;
  for (double ell : ladder) {
    if (!(ell > 0.0)) throw RangeError("ladder lengths must be positive");
    Box2 R;
    R.lo = Point2(xc - ell / 2, 0.0);
    R.hi = Point2(xc + ell / 2, ell);
    KpRow row;
    row.ell = ell;
    for_nodes_in(u, R, [&](int i, int j, double area) {
      const auto g = u.gradient(i, j);
      if (!g) return;
      row.value += g->squaredNorm() * u.ys[j] * area;
    });
    row.value /= ell;
    const int m = 256;
    const double hx = ell / m;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const Point2 p(R.lo.x() + (i + 0.5) * hx, (j + 0.5) * hx);
        const double gn = gradient_norm(a, p);
        row.mu += gn * gn * p.y() * hx * hx;
      }
    }
    row.mu /= ell;
    rep.sup = std::max(rep.sup, row.value);
    rep.mu_norm = std::max(rep.mu_norm, row.mu);
    rep.rows.push_back(row);
  }
  rep.nu_norm = 0.0;
  rep.bound = 3.0 * (1.0 + rep.mu_norm + rep.nu_norm);
  rep.fit = rep.sup / (1.0 + rep.mu_norm + rep.nu_norm);
  rep.pass = rep.sup <= rep.bound;
  return rep;
}

double kp_half_line_exact(double ell, double xc) {
  auto F = [ell](double x) {
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    const double v = ell * std::atan(ax / ell) + 0.5 * ax * std::log((ell * ell + ax * ax) / (ax * ax));
    return x > 0 ? v : -v;
  };
  return (F(xc + ell / 2) - F(xc - ell / 2)) / (kPi * kPi * ell);
}

}  // namespace cadkit
