#pragma once

#include "cadkit/domain.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <string>

namespace cadkit {

using Matrix2 = Eigen::Matrix2d;

// X ↦ A(X), a real 2×2 matrix field, with its partial derivatives (∂_x A, ∂_y A).
class CoefficientField {
 public:
  using Eval = std::function<Matrix2(const Point2&)>;
  using Grad = std::function<std::array<Matrix2, 2>(const Point2&)>;

  CoefficientField(std::string name, Eval a, Grad grad = {}, bool symmetric = false, bool constant = false);

  const std::string& name() const { return name_; }
  Matrix2 operator()(const Point2& x) const { return a_(x); }
  // Analytic when available, otherwise centred differences with step 1e-6·(1 + |x|).
  std::array<Matrix2, 2> gradient(const Point2& x) const;
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  bool symmetric() const { return symmetric_; }
  bool constant() const { return constant_; }
  CoefficientField transposed() const;

  static CoefficientField identity();
  static CoefficientField constant_matrix(const Matrix2& m, std::string name = "constant");
  static CoefficientField diag(double a11, double a22);
  // [[1, b], [-b, 1]] plus the identity part; not symmetric for b ≠ 0.
  static CoefficientField skew(double b);
  // R(θ) diag(l1, l2) R(θ)^T with θ(X) = freq·X_x.
  static CoefficientField rotating(double l1, double l2, double freq);
  // a11(t) = 1 + amp·sin(log t)·2t/(1 + t²), a12 = a21 = 0, a22 = 1 on {t > 0}.
  static CoefficientField kp_t_profile(double amp = 0.5);
  // Preset by name with optional parameters: identity, diag {a11, a22}, skew {b},
  // rotating {l1, l2, freq}, kp_t_profile {amp}.
  static CoefficientField named(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

 private:
  std::string name_;
  Eval a_;
  Grad grad_;
  bool symmetric_ = false;
  bool constant_ = false;
};

// Frobenius size of ∇A: sqrt(|∂_x A|² + |∂_y A|²).
double gradient_norm(const CoefficientField& a, const Point2& x);

struct EllipticityReport {
  double lambda = 1.0;     // smallest Λ with Λ^{-1}|ξ|² ≤ Aξ·ξ and |Aξ·η| ≤ Λ|ξ||η|
  double min_coercive = 0.0;
  double max_norm = 0.0;
  bool elliptic = false;
};
EllipticityReport ellipticity(const CoefficientField& a, std::span<const Point2> probes);

// sup over probes of |∇A(X)|·δ(X).
double gradient_delta_sup(const CoefficientField& a, const Domain& domain, std::span<const Point2> probes);

// σ(Δ(x,r))^{-1} ∬_{B(x,r)∩Ω} |∇A| dX by midpoint quadrature on a cells × cells lattice.
double carleson_functional(const CoefficientField& a, const Domain& domain, const Point2& x, double r, int cells = 128);

}  // namespace cadkit
