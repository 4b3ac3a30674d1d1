#include "cadkit/coefficients.hpp"

#include "cadkit/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace cadkit {

CoefficientField::CoefficientField(std::string name, Eval a, Grad grad, bool symmetric, bool constant)
    : name_(std::move(name)), a_(std::move(a)), grad_(std::move(grad)), symmetric_(symmetric), constant_(constant) {}

std::array<Matrix2, 2> CoefficientField::gradient(const Point2& x) const {
  if (grad_) return grad_(x);
  if (constant_) return {Matrix2::Zero(), Matrix2::Zero()};
  const double h = 1e-6 * (1.0 + x.norm());
  std::array<Matrix2, 2> g;
  for (int d = 0; d < 2; ++d) {
    Point2 e = Point2::Zero();
    e[d] = h;
    g[d] = (a_(x + e) - a_(x - e)) / (2.0 * h);
  }
  return g;
}

CoefficientField CoefficientField::transposed() const {
  if (symmetric_) return *this;
  Eval a = [f = a_](const Point2& x) -> Matrix2 { return f(x).transpose(); };
  Grad g;
  if (grad_) {
    g = [f = grad_](const Point2& x) {
      auto d = f(x);
      return std::array<Matrix2, 2>{d[0].transpose(), d[1].transpose()};
    };
  }
  return CoefficientField(name_ + "^T", std::move(a), std::move(g), false, constant_);
}

CoefficientField CoefficientField::identity() { return constant_matrix(Matrix2::Identity(), "identity"); }

CoefficientField CoefficientField::constant_matrix(const Matrix2& m, std::string name) {
  const bool sym = m(0, 1) == m(1, 0);
  return CoefficientField(std::move(name), [m](const Point2&) -> Matrix2 { return m; },
                          [](const Point2&) { return std::array<Matrix2, 2>{Matrix2::Zero(), Matrix2::Zero()}; }, sym,
                          true);
}

CoefficientField CoefficientField::diag(double a11, double a22) {
  if (!(a11 > 0.0 && a22 > 0.0)) throw ParameterError("diag coefficients must be positive");
  Matrix2 m;
  m << a11, 0.0, 0.0, a22;
  return constant_matrix(m, "diag");
}

CoefficientField CoefficientField::skew(double b) {
  Matrix2 m;
  m << 1.0, b, -b, 1.0;
  return constant_matrix(m, "skew");
}

CoefficientField CoefficientField::rotating(double l1, double l2, double freq) {
  if (!(l1 > 0.0 && l2 > 0.0)) throw ParameterError("rotating eigenvalues must be positive");
  auto eval = [=](const Point2& x) -> Matrix2 {
    const double th = freq * x.x();
    const double c = std::cos(th), s = std::sin(th);
    Matrix2 m;
    m << l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c;
    return m;
  };
  auto grad = [=](const Point2& x) {
    const double th = freq * x.x();
    const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
    Matrix2 dx;
    // entries written with double angles: a11 = (l1+l2)/2 + (l1-l2)/2·cos 2θ, a12 = (l1-l2)/2·sin 2θ
    dx << -(l1 - l2) * freq * s2, (l1 - l2) * freq * c2, (l1 - l2) * freq * c2, (l1 - l2) * freq * s2;
    return std::array<Matrix2, 2>{dx, Matrix2::Zero()};
  };
  return CoefficientField("rotating", eval, grad, true, freq == 0.0);
}

CoefficientField CoefficientField::kp_t_profile(double amp) {
  if (!(std::abs(amp) < 1.0)) throw ParameterError("kp_t_profile amplitude must lie in (-1, 1)");
  auto eval = [amp](const Point2& x) -> Matrix2 {
    const double t = x.y();
    Matrix2 m = Matrix2::Identity();
    if (t > 0.0) m(0, 0) += amp * std::sin(std::log(t)) * 2.0 * t / (1.0 + t * t);
    return m;
  };
  auto grad = [amp](const Point2& x) {
    const double t = x.y();
    Matrix2 dy = Matrix2::Zero();
    if (t > 0.0) {
      const double q = 1.0 + t * t;
      dy(0, 0) = amp * (2.0 * std::cos(std::log(t)) / q + std::sin(std::log(t)) * 2.0 * (1.0 - t * t) / (q * q));
    }
    return std::array<Matrix2, 2>{Matrix2::Zero(), dy};
  };
  return CoefficientField("kp_t_profile", eval, grad, true, false);
}

CoefficientField CoefficientField::named(const std::string& name, const nlohmann::json& p) {
  if (name == "identity") return identity();
  if (name == "diag") return diag(p.value("a11", 2.0), p.value("a22", 1.0));
  if (name == "skew") return skew(p.value("b", 0.5));
  if (name == "rotating") return rotating(p.value("l1", 2.0), p.value("l2", 1.0), p.value("freq", 1.0));
  if (name == "kp_t_profile") return kp_t_profile(p.value("amp", 0.5));
  throw InputError("unknown coefficient preset '" + name + "'");
}

double gradient_norm(const CoefficientField& a, const Point2& x) {
  const auto g = a.gradient(x);
  return std::sqrt(g[0].squaredNorm() + g[1].squaredNorm());
}

EllipticityReport ellipticity(const CoefficientField& a, std::span<const Point2> probes) {
  EllipticityReport r;
  r.min_coercive = kInf;
  for (const Point2& x : probes) {
    const Matrix2 m = a(x);
    const Matrix2 sym = 0.5 * (m + m.transpose());
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix2>(sym).eigenvalues().minCoeff();
    const double op = Eigen::JacobiSVD<Matrix2>(m).singularValues()(0);
    r.min_coercive = std::min(r.min_coercive, lo);
    r.max_norm = std::max(r.max_norm, op);
  }
  r.elliptic = r.min_coercive > 0.0;
  r.lambda = r.elliptic ? std::max({1.0, 1.0 / r.min_coercive, r.max_norm}) : kInf;
  return r;
}

double gradient_delta_sup(const CoefficientField& a, const Domain& domain, std::span<const Point2> probes) {
  double sup = 0.0;
  for (const Point2& x : probes) {
    if (!domain.inside(x)) continue;
    sup = std::max(sup, gradient_norm(a, x) * domain.delta(x));
  }
  return sup;
}

double carleson_functional(const CoefficientField& a, const Domain& domain, const Point2& x, double r, int cells) {
  if (!(r > 0.0)) throw RangeError("Carleson functional needs r > 0");
  if (cells < 2) throw ParameterError("Carleson functional needs at least 2 cells");
  const double h = 2.0 * r / cells;
  double sum = 0.0;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const Point2 p = x + Point2(-r + (i + 0.5) * h, -r + (j + 0.5) * h);
      if ((p - x).norm() >= r || !domain.inside(p)) continue;
      sum += gradient_norm(a, p);
    }
  }
  const double sigma = domain.boundary().ball_intersection(x, r).measure;
  if (!(sigma > 0.0)) throw InputError("Carleson functional needs a ball centred on the boundary");
  return sum * h * h / sigma;
}

}  // namespace cadkit
