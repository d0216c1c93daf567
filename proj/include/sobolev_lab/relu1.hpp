// Closed forms for a single ReLU node g(x; w) = σ(wᵀx) under x ~ N(0, I):
// population gradients of the L² loss 𝓛, the H¹ seminorm 𝓙 and 𝓗 = 𝓛 + 𝓙,
// their Hessians and condition numbers, the quadratic forms that bound the
// gradient-flow decay, the one-step GD comparison and basin labels.
#pragma once

#include "sobolev_lab/core.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <optional>

namespace sobolev_lab::relu1 {

struct GradientBundle {
  Vector grad_l2;    // ∇𝓛
  Vector grad_semi;  // ∇𝓙
  Vector grad_h1;    // ∇𝓗 = ∇𝓛 + ∇𝓙
};

struct Losses {
  double l2 = 0.0;
  double semi = 0.0;
  double h1() const { return l2 + semi; }
};

/// ∇𝓛 = ½(w−w*) + (θw* − (‖w*‖/‖w‖) sin θ · w)/(2π) and
/// ∇𝓙 = ((π−θ)/2π)(w−w*) + (θ/2π)w.
/// ∇𝓙 is the expectation of the per-sample subgradient with the indicator
/// 𝟙{wᵀx > 0} held fixed (value 0 at the kink).
inline GradientBundle population_gradients(const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  if (g.norm_w == 0.0) {
    throw LabError(ErrorKind::singular, "population_gradients: w = 0 (use the Monte-Carlo oracle)");
  }
  const double theta = g.theta;
  GradientBundle b;
  b.grad_l2 = 0.5 * (w - wstar) + (theta * wstar - (g.norm_wstar / g.norm_w) * std::sin(theta) * w) / (2.0 * kPi);
  b.grad_semi = ((kPi - theta) / (2.0 * kPi)) * (w - wstar) + (theta / (2.0 * kPi)) * w;
  b.grad_h1 = b.grad_l2 + b.grad_semi;
  return b;
}

/// Population values of 𝓛 and 𝓙 (Gaussian arc-cosine kernel identities).
inline Losses population_losses(const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  const double base = 0.25 * (g.norm_w * g.norm_w + g.norm_wstar * g.norm_wstar);
  Losses out;
  if (g.norm_w == 0.0) {
    out.l2 = base;
    out.semi = base;
    return out;
  }
  const double t = g.theta;
  out.l2 = base - g.norm_w * g.norm_wstar * (std::sin(t) + (kPi - t) * std::cos(t)) / (2.0 * kPi);
  out.semi = base - ((kPi - t) / (2.0 * kPi)) * w.dot(wstar);
  return out;
}

inline Vector flow_rhs(FlowKind kind, const Vector& w, const Vector& wstar) {
  const GradientBundle b = population_gradients(w, wstar);
  return kind == FlowKind::l2 ? Vector(-b.grad_l2) : Vector(-b.grad_h1);
}

// ---------------------------------------------------------------------------
// Hessians

struct HessianReport {
  Matrix hess_l2;
  Matrix hess_h1;
  SpectrumReport spectrum_l2;  // Jacobi, symmetric input
  Vector eigenvalues_h1;       // descending; hess_h1 is not symmetric
  std::optional<double> kappa_l2;  // 1/(1 − 4α sin²θ)
  std::optional<double> kappa_h1;  // 1/(1 − 3α sin²θ)
  std::optional<double> kappa_l2_numeric;
  std::optional<double> kappa_h1_numeric;
  PairGeometry geometry;
};

/// Closed-form spectra: ∇²𝓛 has {½, ½−α sin²θ (×(d−2)), ½−2α sin²θ} and
/// ∇²𝓗 has {1, 1−α sin²θ (×(d−2)), 1−3α sin²θ}. Returned descending.
inline Vector closed_form_spectrum(FlowKind kind, const PairGeometry& g, Eigen::Index dim) {
  const double as2 = g.alpha_sin2();
  const double top = kind == FlowKind::l2 ? 0.5 : 1.0;
  const double low = kind == FlowKind::l2 ? 0.5 - 2.0 * as2 : 1.0 - 3.0 * as2;
  Vector out(dim);
  out[0] = top;
  for (Eigen::Index i = 1; i + 1 < dim; ++i) out[i] = top - as2;
  out[dim - 1] = low;
  std::sort(out.data(), out.data() + dim, std::greater<>());
  return out;
}

inline std::optional<double> kappa_formula(FlowKind kind, double alpha_sin2) {
  const double den = 1.0 - (kind == FlowKind::l2 ? 4.0 : 3.0) * alpha_sin2;
  if (!(den > 0.0)) return std::nullopt;
  return 1.0 / den;
}

inline HessianReport hessians(const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  const Eigen::Index d = w.size();
  if (d < 2) throw LabError(ErrorKind::unsupported, "hessians: dimension must be >= 2");
  if (g.norm_w == 0.0 || !g.alpha) {
    throw LabError(ErrorKind::singular, "hessians: requires w != 0 and sin(theta) > 0");
  }
  const double alpha = *g.alpha;
  const double c = g.cos_theta();
  const double s2 = std::pow(g.sin_theta(), 2);
  const Vector u = wstar / g.norm_wstar;
  const Vector v = w / g.norm_w;
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix proj = eye - v * v.transpose();
  const Matrix uu = u * u.transpose();
  const Matrix vu = v * u.transpose();

  HessianReport r;
  r.geometry = g;
  r.hess_l2 = 0.5 * eye - alpha * (uu - c * vu + s2 * eye) * proj;
  r.hess_h1 = eye - alpha * (2.0 * uu - c * vu + s2 * eye) * proj;

  // exact symmetry, but the α-term carries rounding of order α·ε (α ~ 1/sin θ)
  const double scale = std::max({1.0, alpha, r.hess_l2.cwiseAbs().maxCoeff()});
  if (symmetry_defect(r.hess_l2) > 1e-12 * scale) {
    throw LabError(ErrorKind::non_symmetric, "hessians: assembled L2 Hessian is not symmetric");
  }
  r.hess_l2 = 0.5 * (r.hess_l2 + r.hess_l2.transpose()).eval();
  r.spectrum_l2 = symmetric_eigs(r.hess_l2);
  r.eigenvalues_h1 = real_eigenvalues(r.hess_h1);

  const double as2 = g.alpha_sin2();
  r.kappa_l2 = kappa_formula(FlowKind::l2, as2);
  r.kappa_h1 = kappa_formula(FlowKind::h1, as2);
  r.kappa_l2_numeric = condition_number(r.spectrum_l2.eigenvalues);
  r.kappa_h1_numeric = condition_number(r.eigenvalues_h1);
  return r;
}

// ---------------------------------------------------------------------------
// Quadratic forms in ξ = (‖w*‖, ‖w‖)

struct FlowForms {
  Matrix m1;  // eᵀ∇𝓛 = ξᵀM₁ξ / (4π)
  Matrix m2;  // eᵀ∇𝓙 = ξᵀM₂ξ / (4π)
  double lambda_theta = 0.0;  // λ_min(M₂)
};

/// λ(θ) = (2π−θ) − √(θ² + (2π−θ)² cos²θ).
inline double flow_rate(double theta) {
  const double a = 2.0 * kPi - theta;
  return a - std::sqrt(theta * theta + a * a * std::pow(std::cos(theta), 2));
}

inline FlowForms flow_quadratic_forms(double theta) {
  if (!(theta >= 0.0 && theta < kPi / 2)) {
    throw LabError(ErrorKind::domain, "flow_quadratic_forms: theta must lie in [0, pi/2)");
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  FlowForms f;
  f.m1.resize(2, 2);
  f.m2.resize(2, 2);
  const double off1 = -(2.0 * kPi - theta) * c - s;
  f.m1 << std::sin(2.0 * theta) + 2.0 * kPi - 2.0 * theta, off1, off1, 2.0 * kPi;
  const double off2 = -(2.0 * kPi - theta) * c;
  f.m2 << 2.0 * kPi - 2.0 * theta, off2, off2, 2.0 * kPi;
  f.lambda_theta = flow_rate(theta);
  return f;
}

/// N₁…N₅ for the one-step comparison, with ξ = (‖w*‖, ‖w‖):
/// ‖∇𝓛‖² = ξᵀN₁ξ/(4π²), ∇𝓛ᵀe = ξᵀN₂ξ/(4π), ‖∇𝓗‖² = ξᵀN₃ξ/(4π²),
/// ∇𝓗ᵀe = ξᵀN₄ξ/(4π), N₅ = N₁ − N₃.
inline std::array<Matrix, 5> gd_matrices(double theta) {
  const double t = theta;
  const double s = std::sin(t);
  const double c = std::cos(t);
  const double s2t = std::sin(2.0 * t);
  const double tp = t - kPi;
  std::array<Matrix, 5> n;
  for (auto& m : n) m.resize(2, 2);
  const double n1o = kPi * tp * c - kPi * s;
  n[0] << tp * tp + s * s - tp * s2t, n1o, n1o, kPi * kPi;
  const double n2o = (t - 2.0 * kPi) * c - s;
  n[1] << s2t + 2.0 * kPi - 2.0 * t, n2o, n2o, 2.0 * kPi;
  const double n3o = 4.0 * kPi * tp * c - 2.0 * kPi * s;
  n[2] << 4.0 * tp * tp + s * s - 2.0 * tp * s2t, n3o, n3o, 4.0 * kPi * kPi;
  const double n4o = (2.0 * t - 4.0 * kPi) * c - s;
  n[3] << s2t - 4.0 * tp, n4o, n4o, 4.0 * kPi;
  const double n5o = -3.0 * kPi * tp * c + kPi * s;
  n[4] << -3.0 * tp * tp + tp * s2t, n5o, n5o, -3.0 * kPi * kPi;
  return n;
}

// ---------------------------------------------------------------------------
// One GD step

struct GdCompareReport {
  Vector w_new_l2;
  Vector w_new_h1;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  double gain_f = 0.0;       // err_l2 − err_h1
  double max_step_c = 0.0;   // +inf when both gradient norms coincide (e.g. w = w*)
  bool in_basin = true;      // ‖w − w*‖ < ‖w*‖; outside it the guarantee is void
};

/// C = −2∇𝓙ᵀ(w−w*) / (‖∇𝓛‖² − ‖∇𝓗‖²).
inline double max_step(const GradientBundle& b, const Vector& err) {
  const double num = -2.0 * b.grad_semi.dot(err);
  const double den = b.grad_l2.squaredNorm() - b.grad_h1.squaredNorm();
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

inline GdCompareReport gd_compare(const Vector& w, const Vector& wstar, double eta) {
  if (!(eta > 0.0)) throw LabError(ErrorKind::domain, "gd_compare: eta must be positive");
  const GradientBundle b = population_gradients(w, wstar);
  const Vector e = w - wstar;
  GdCompareReport r;
  r.in_basin = e.norm() < wstar.norm();
  r.w_new_l2 = w - eta * b.grad_l2;
  r.w_new_h1 = w - eta * b.grad_h1;
  r.err_l2 = (r.w_new_l2 - wstar).norm();
  r.err_h1 = (r.w_new_h1 - wstar).norm();
  r.gain_f = r.err_l2 - r.err_h1;
  r.max_step_c = max_step(b, e);
  return r;
}

// ---------------------------------------------------------------------------
// Convexity regions

enum class RegionLabel { inside_S, in_Sprime_minus_S, outside_Sprime };

inline const char* to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::inside_S: return "inside_S";
    case RegionLabel::in_Sprime_minus_S: return "in_Sprime_minus_S";
    case RegionLabel::outside_Sprime: return "outside_Sprime";
  }
  return "?";
}

/// S: sin θ < π‖w‖/(2‖w*‖) (𝓛 strictly convex); S′: sin θ < 2π‖w‖/(3‖w*‖) (𝓗).
inline RegionLabel basin_classify(const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  if (g.norm_w == 0.0) return RegionLabel::outside_Sprime;
  const double s = g.sin_theta();
  if (s < kPi * g.norm_w / (2.0 * g.norm_wstar)) return RegionLabel::inside_S;
  if (s < 2.0 * kPi * g.norm_w / (3.0 * g.norm_wstar)) return RegionLabel::in_Sprime_minus_S;
  return RegionLabel::outside_Sprime;
}

}  // namespace sobolev_lab::relu1
