// Single ReLU² node g(x; w) = σ(wᵀx)² trained with the H² loss
// 𝓘 = 𝓘₁ + 𝓘₂ + 𝓘₃ (value, input-gradient and input-Hessian mismatch).
#pragma once

#include "sobolev_lab/core.hpp"

#include <array>

namespace sobolev_lab::relusq {

struct H2GradientBundle {
  Vector grad_i1;
  Vector grad_i2;
  Vector grad_i3;
  Vector total() const { return grad_i1 + grad_i2 + grad_i3; }
};

inline H2GradientBundle h2_gradients(const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  if (g.norm_w == 0.0) throw LabError(ErrorKind::singular, "h2_gradients: w = 0");
  const double t = g.theta;
  const double s = std::sin(t);
  const double c = std::cos(t);
  const double nw = g.norm_w;
  const double ns = g.norm_wstar;
  H2GradientBundle b;
  // G(θ) = (π−θ) + sinθ cosθ, H(θ) = 2 sinθ + 2(π−θ) cosθ
  b.grad_i1 = 3.0 * nw * nw * w - (ns * ns / kPi) * ((kPi - t) + s * c) * w -
              (nw * ns / kPi) * (2.0 * s + 2.0 * (kPi - t) * c) * wstar;
  b.grad_i2 = 4.0 * (nw * nw * w - (c * s / (2.0 * kPi)) * ns * ns * w -
                     (nw * ns / (2.0 * kPi)) * (s + 2.0 * (kPi - t) * c) * wstar);
  b.grad_i3 = 4.0 * nw * nw * w - (4.0 * (kPi - t) / kPi) * w.dot(wstar) * wstar;
  return b;
}

struct DescentReport {
  std::array<double, 3> inner{};        // −(w−w*)ᵀ∇𝓘ⱼ
  std::array<bool, 3> descending{};     // inner[j] < 0 (vacuously true when degenerate)
  bool degenerate = false;              // w = w*, all gradients vanish
  bool guarantee_void = false;          // outside ‖w−w*‖ < ‖w*‖
  bool all() const { return descending[0] && descending[1] && descending[2]; }
};

inline DescentReport descent_check(const Vector& w, const Vector& wstar) {
  require_same_dim(w, wstar, "descent_check");
  DescentReport r;
  const Vector e = w - wstar;
  r.guarantee_void = !(e.norm() < wstar.norm());
  if (e.squaredNorm() == 0.0) {
    r.degenerate = true;
    r.descending = {true, true, true};
    return r;
  }
  const H2GradientBundle b = h2_gradients(w, wstar);
  r.inner = {-e.dot(b.grad_i1), -e.dot(b.grad_i2), -e.dot(b.grad_i3)};
  for (int j = 0; j < 3; ++j) r.descending[j] = r.inner[j] < 0.0;
  return r;
}

/// Certificate for 𝓘₂ with G₁ = sinθ + 2(π−θ)cosθ:
///   −eᵀ∇𝓘₂ = −(2/π)(2π(‖w‖² − ‖w‖‖w*‖cosθ)² + ½‖w‖‖w*‖ ξᵀM₂ξ).
inline Matrix certificate_i2(double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double g1 = s + 2.0 * (kPi - theta) * c;
  const double off = -c * (g1 + s + 2.0 * kPi * c);
  Matrix m(2, 2);
  m << 2.0 * g1 + 2.0 * c * c * s, off, off, 4.0 * kPi * c;
  return m;
}

/// Certificate for 𝓘₃:
///   −eᵀ∇𝓘₃ = −(4/π)(π(‖w‖² − wᵀw*)² + ½(wᵀw*) ξᵀM₃ξ).
inline Matrix certificate_i3(double theta) {
  const double c = std::cos(theta);
  const double off = (theta - 2.0 * kPi) * c;
  Matrix m(2, 2);
  m << 2.0 * (kPi - theta), off, off, 2.0 * kPi;
  return m;
}

enum class H2Field { i1_only, full };

inline Vector flow_rhs(H2Field field, const Vector& w, const Vector& wstar) {
  const H2GradientBundle b = h2_gradients(w, wstar);
  return field == H2Field::i1_only ? Vector(-b.grad_i1) : Vector(-b.total());
}

}  // namespace sobolev_lab::relusq
