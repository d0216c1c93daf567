// K-node teacher/student ReLU network f(x) = Σⱼ σ(wⱼᵀx) with orthonormal
// teachers. Full per-node population fields, the planar (x, y) reduction
// under the cyclic parametrization, its linearization, the diagonal saddle
// and the Toeplitz generalization.
#pragma once

#include "sobolev_lab/core.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace sobolev_lab::multinode {

using NodeSet = std::vector<Vector>;

inline double field_factor(FlowKind kind) { return kind == FlowKind::l2 ? 1.0 : 2.0; }

/// −E∇_{wⱼ}𝓛 (or 𝓗) for every node j:
/// (1/2π) Σ_{j'} [ f(π−θ_{j,j'*}) w*_{j'} + ‖w*_{j'}‖ sin θ_{j,j'*} ŵⱼ
///                − f(π−θ_{j,j'}) w_{j'} − ‖w_{j'}‖ sin θ_{j,j'} ŵⱼ ],
/// with f = 1 for L² and f = 2 for H¹ (θ_{j,j} = 0).
inline NodeSet multinode_gradients(const NodeSet& w, const NodeSet& wstar, FlowKind kind) {
  if (w.empty() || w.size() != wstar.size()) {
    throw LabError(ErrorKind::dimension_mismatch, "multinode_gradients: node counts differ or are zero");
  }
  const double f = field_factor(kind);
  const std::size_t k = w.size();
  std::vector<double> norms(k);
  std::vector<double> star_norms(k);
  for (std::size_t j = 0; j < k; ++j) {
    require_same_dim(w[j], w[0], "multinode_gradients");
    require_same_dim(wstar[j], w[0], "multinode_gradients");
    norms[j] = w[j].norm();
    star_norms[j] = wstar[j].norm();
    if (norms[j] == 0.0 || star_norms[j] == 0.0) {
      throw LabError(ErrorKind::singular, "multinode_gradients: zero node");
    }
  }
  NodeSet out(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Vector unit = w[j] / norms[j];
    Vector acc = Vector::Zero(w[j].size());
    for (std::size_t jp = 0; jp < k; ++jp) {
      const double ts = angle_between(w[j], wstar[jp]);
      const double t = jp == j ? 0.0 : angle_between(w[j], w[jp]);
      acc += f * (kPi - ts) * wstar[jp] + star_norms[jp] * std::sin(ts) * unit;
      acc -= f * (kPi - t) * w[jp] + norms[jp] * std::sin(t) * unit;
    }
    out[j] = acc / (2.0 * kPi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planar reduction: w₁ = x e₁ + y Σ_{i≠1} eᵢ and cyclic shifts.

struct ReducedState {
  double x = 1.0;
  double y = 0.0;
  int k = 2;
};

struct AngleSet {
  double theta = 0.0;     // ∠(w₁, w₁*)
  double phi_star = 0.0;  // ∠(w₁, w*_{j'}), j' ≠ 1
  double phi = 0.0;       // ∠(w₁, w_{j'}), j' ≠ 1
  double alpha_red = 0.0; // 1/‖w₁‖
};

/// Angles through sine/cosine pairs so the diagonal x = y gives φ = 0 exactly.
inline AngleSet reduced_angles(const ReducedState& s) {
  if (s.k < 2) throw LabError(ErrorKind::unsupported, "reduced_angles: K must be >= 2");
  const double km1 = s.k - 1.0;
  const double norm2 = s.x * s.x + km1 * s.y * s.y;
  if (!(norm2 > 0.0)) throw LabError(ErrorKind::singular, "reduced_angles: (x, y) = (0, 0)");
  AngleSet a;
  a.alpha_red = 1.0 / std::sqrt(norm2);
  const double al = a.alpha_red;
  a.theta = std::atan2(al * std::sqrt(km1) * std::abs(s.y), al * s.x);
  a.phi_star = std::atan2(al * std::sqrt(s.x * s.x + (s.k - 2.0) * s.y * s.y), al * s.y);
  const double gap = al * std::abs(s.x - s.y);
  const double cos_phi = 1.0 - gap * gap;
  const double sin_phi = gap * std::sqrt(std::max(0.0, 2.0 - gap * gap));
  a.phi = std::atan2(sin_phi, cos_phi);
  return a;
}

struct PlanarVelocity {
  double xdot = 0.0;
  double ydot = 0.0;
};

inline PlanarVelocity reduced_field(FlowKind kind, const ReducedState& s) {
  const AngleSet a = reduced_angles(s);
  const double km1 = s.k - 1.0;
  const double f = field_factor(kind);
  const double c = km1 * (a.alpha_red * std::sin(a.phi_star) - std::sin(a.phi)) +
                   a.alpha_red * std::sin(a.theta);
  const double gx = -(kPi - a.theta) + kPi * s.x + (kPi - a.phi) * km1 * s.y;
  const double gy = -(kPi - a.phi_star) + kPi * s.y + (kPi - a.phi) * (s.x + (s.k - 2.0) * s.y);
  return {(c * s.x - f * gx) / (2.0 * kPi), (c * s.y - f * gy) / (2.0 * kPi)};
}

inline VectorField reduced_vector_field(FlowKind kind, int k) {
  return [kind, k](const Vector& p) {
    const PlanarVelocity v = reduced_field(kind, {p[0], p[1], k});
    Vector out(2);
    out << v.xdot, v.ydot;
    return out;
  };
}

/// Cyclic student for a reduced state (teachers are the standard basis of ℝᴷ).
inline NodeSet cyclic_students(const Vector& first_row) {
  const Eigen::Index k = first_row.size();
  NodeSet w(static_cast<std::size_t>(k), Vector(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) w[static_cast<std::size_t>(j)][i] = first_row[(i + j) % k];
  }
  return w;
}

inline NodeSet standard_teachers(int k) {
  NodeSet out;
  for (int j = 0; j < k; ++j) out.push_back(Vector::Unit(k, j));
  return out;
}

// ---------------------------------------------------------------------------
// Linearization at (1, 0) as printed in the analysis

struct Linearization {
  Matrix m3;
  std::array<double, 2> eigs_l2{};  // ascending
  std::array<double, 2> eigs_h1{};
};

/// Real roots of λ² − tr λ + det, ascending.
inline std::array<double, 2> eigs_2x2(const Matrix& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) throw LabError(ErrorKind::domain, "eigs_2x2: complex eigenvalues");
  const double r = std::sqrt(disc);
  return {(tr - r) / 2.0, (tr + r) / 2.0};
}

inline Linearization linearization(int k) {
  if (k < 2) throw LabError(ErrorKind::unsupported, "linearization: K must be >= 2");
  Linearization out;
  out.m3.resize(2, 2);
  out.m3 << 0.5, 0.25 * (k - 1), 0.25, 0.25 * k;
  out.eigs_l2 = eigs_2x2(out.m3);
  out.eigs_h1 = {2.0 * out.eigs_l2[0], 2.0 * out.eigs_l2[1]};
  return out;
}

/// Central-difference Jacobian of a vector field.
inline Matrix numeric_jacobian(const VectorField& field, const Vector& at, double h = 1e-6) {
  const Eigen::Index n = at.size();
  Matrix jac(field(at).size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector up = at;
    Vector dn = at;
    up[i] += h;
    dn[i] -= h;
    jac.col(i) = (field(up) - field(dn)) / (2.0 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Diagonal x = y

struct SaddlePoints {
  double x_l2 = 0.0;
  double x_h1 = 0.0;
};

inline SaddlePoints saddle_points(int k) {
  if (k < 2) throw LabError(ErrorKind::unsupported, "saddle_points: K must be >= 2");
  const double root = std::sqrt(k - 1.0);
  const double ac = std::acos(1.0 / std::sqrt(static_cast<double>(k)));
  return {(root - ac + kPi) / (kPi * k), (root + 2.0 * kPi - 2.0 * ac) / (2.0 * kPi * k)};
}

struct DiagonalDecay {
  double exponent = 0.0;          // least-squares slope of log|x(t) − x*|
  double x_star = 0.0;
  double max_transverse = 0.0;    // max |ẋ − ẏ| along the path; 0 if the diagonal is invariant
  std::size_t fit_points = 0;
};

/// The diagonal is invariant but transversally unstable near x*, so the 2-D
/// flow drifts off it through rounding. Integrate the restricted 1-D field.
inline DiagonalDecay diagonal_decay(FlowKind kind, int k, double x0, double t_end, double step = 1e-3) {
  const SaddlePoints sp = saddle_points(k);
  DiagonalDecay out;
  out.x_star = kind == FlowKind::l2 ? sp.x_l2 : sp.x_h1;
  if (!(x0 > out.x_star && x0 <= 1.0)) {
    throw LabError(ErrorKind::domain, "diagonal_decay: x0 must lie in (x*, 1]");
  }
  const VectorField restricted = [kind, k](const Vector& p) {
    return Vector::Constant(1, reduced_field(kind, {p[0], p[0], k}).xdot);
  };
  const FlowTrace tr =
      rk4_integrate(restricted, Vector::Constant(1, x0), step, t_end, Vector::Constant(1, out.x_star));
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double x = tr.states[i][0];
    const PlanarVelocity v = reduced_field(kind, {x, x, k});
    out.max_transverse = std::max(out.max_transverse, std::abs(v.xdot - v.ydot));
    const double gap = std::abs(x - out.x_star);
    if (gap < 1e-10) break;  // rounding floor
    const double t = tr.times[i];
    const double l = std::log(gap);
    st += t;
    sy += l;
    stt += t * t;
    sty += t * l;
    ++n;
  }
  if (n < 2) throw LabError(ErrorKind::domain, "diagonal_decay: not enough points above the rounding floor");
  out.fit_points = n;
  out.exponent = (n * sty - st * sy) / (n * stt - st * st);
  return out;
}

/// Flow time until ‖(x, y) − (1, 0)‖ < tol, or empty if t_max is reached first.
inline std::optional<double> time_to_reach(FlowKind kind, ReducedState s, double tol, double step, double t_max) {
  const VectorField field = reduced_vector_field(kind, s.k);
  Vector p(2);
  p << s.x, s.y;
  const auto steps = static_cast<long long>(std::llround(t_max / step));
  for (long long i = 0; i <= steps; ++i) {
    if (std::hypot(p[0] - 1.0, p[1]) < tol) return static_cast<double>(i) * step;
    p = rk4_step(field, p, step);
    if (!p.allFinite()) throw LabError(ErrorKind::non_finite, "time_to_reach: state blew up");
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Toeplitz parametrization: wⱼ has coordinates tᵢ₊ⱼ₋₁ (indices mod K).

/// ṫ = field of the first node; the remaining nodes are cyclic shifts of it.
inline Vector toeplitz_field(FlowKind kind, const Vector& t) {
  if (t.size() < 2) throw LabError(ErrorKind::unsupported, "toeplitz_field: K must be >= 2");
  if (t.squaredNorm() == 0.0) throw LabError(ErrorKind::singular, "toeplitz_field: t = 0");
  const int k = static_cast<int>(t.size());
  return multinode_gradients(cyclic_students(t), standard_teachers(k), kind)[0];
}

}  // namespace sobolev_lab::multinode
