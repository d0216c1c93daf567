// Shared numerical kernel: vector/matrix aliases, pair geometry, a cyclic
// Jacobi eigensolver for symmetric matrices, a general real eigenvalue
// routine, and a fixed-step RK4 integrator.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobolev_lab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  dimension_mismatch,
  zero_vector,
  singular,
  non_symmetric,
  no_convergence,
  non_finite,
  domain,
  unsupported,
};

/// Every library failure is reported through this type. `kind` lets callers
/// (the CLI in particular) tell validation problems from numerical ones.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require_same_dim(const Vector& a, const Vector& b, const char* where) {
  if (a.size() != b.size()) {
    throw LabError(ErrorKind::dimension_mismatch,
                   std::string(where) + ": dimension mismatch (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 1) throw LabError(ErrorKind::dimension_mismatch, std::string(where) + ": empty vector");
}

/// Which population loss drives a gradient or flow: plain L² or L² plus the
/// H¹ seminorm.
enum class FlowKind { l2, h1 };

inline const char* to_string(FlowKind k) { return k == FlowKind::l2 ? "l2" : "h1"; }

/// Angle between two nonzero vectors using 2·atan2(‖â−b̂‖, ‖â+b̂‖), which keeps
/// full relative accuracy near 0 and π where arccos of the inner product does not.
inline double angle_between(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw LabError(ErrorKind::zero_vector, "angle_between: zero vector");
  const Vector ua = a / na;
  const Vector ub = b / nb;
  const double theta = 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
  return std::clamp(theta, 0.0, kPi);
}

/// Angle from a cosine, with the argument clamped to [-1, 1].
inline double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

/// Norms and angle of a student/teacher pair plus the scale
/// α = ‖w*‖ / (2π‖w‖ sin θ) that appears in every single-node Hessian.
/// α itself is absent when sin θ = 0 or w = 0; the products α·sin²θ and
/// α·sin θ stay finite and are exposed through the cancelled forms.
struct PairGeometry {
  double norm_w = 0.0;
  double norm_wstar = 0.0;
  double theta = 0.0;
  std::optional<double> alpha;

  double sin_theta() const { return std::sin(theta); }
  double cos_theta() const { return std::cos(theta); }
  bool alpha_infinite() const { return !alpha.has_value(); }

  /// α·sin²θ = ‖w*‖ sin θ / (2π‖w‖); requires w ≠ 0.
  double alpha_sin2() const {
    if (norm_w == 0.0) throw LabError(ErrorKind::singular, "alpha_sin2: w = 0");
    return norm_wstar * sin_theta() / (2.0 * kPi * norm_w);
  }
  /// α·sin θ = ‖w*‖ / (2π‖w‖); requires w ≠ 0.
  double alpha_sin() const {
    if (norm_w == 0.0) throw LabError(ErrorKind::singular, "alpha_sin: w = 0");
    return norm_wstar / (2.0 * kPi * norm_w);
  }
};

inline PairGeometry pair_geometry(const Vector& w, const Vector& wstar) {
  require_same_dim(w, wstar, "pair_geometry");
  PairGeometry g;
  g.norm_w = w.norm();
  g.norm_wstar = wstar.norm();
  if (g.norm_wstar == 0.0) throw LabError(ErrorKind::zero_vector, "pair_geometry: w* = 0");
  if (g.norm_w == 0.0) {
    // Angle is undefined at w = 0; report θ = 0 with α flagged infinite.
    return g;
  }
  g.theta = angle_between(w, wstar);
  const double s = std::sin(g.theta);
  if (s > 0.0) g.alpha = g.norm_wstar / (2.0 * kPi * g.norm_w * s);
  return g;
}

// ---------------------------------------------------------------------------
// Spectra

struct SpectrumReport {
  Vector eigenvalues;  // descending
  Matrix eigenvectors; // column i pairs with eigenvalues[i]
};

inline double symmetry_defect(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

/// Cyclic Jacobi rotations. Deterministic sweep order (p < q, row-major), so
/// results are bit-reproducible for a given input.
inline SpectrumReport symmetric_eigs(const Matrix& input, double symmetry_tol = 1e-12,
                                     int max_sweeps = 100) {
  if (input.rows() != input.cols() || input.rows() == 0) {
    throw LabError(ErrorKind::dimension_mismatch, "symmetric_eigs: matrix must be square");
  }
  if (!input.allFinite()) throw LabError(ErrorKind::non_finite, "symmetric_eigs: non-finite entry");
  const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
  if (symmetry_defect(input) > symmetry_tol * scale) {
    throw LabError(ErrorKind::non_symmetric, "symmetric_eigs: matrix is not symmetric");
  }
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };
  const double frob = a.norm();
  bool converged = n == 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    if (off_norm() <= 1e-14 * frob) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() > 1e-12 * frob) {
    throw LabError(ErrorKind::no_convergence, "symmetric_eigs: Jacobi sweeps did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SpectrumReport out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.eigenvalues[i] = a(src, src);
    out.eigenvectors.col(i) = v.col(src);
  }
  return out;
}

/// Eigenvalues of a general real square matrix whose spectrum is known to be
/// real (imaginary parts below `imag_tol`·scale are discarded). Descending.
inline Vector real_eigenvalues(const Matrix& a, double imag_tol = 1e-8) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw LabError(ErrorKind::dimension_mismatch, "real_eigenvalues: matrix must be square");
  }
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw LabError(ErrorKind::no_convergence, "real_eigenvalues: QR iteration failed");
  }
  const auto& ev = solver.eigenvalues();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > imag_tol * scale) {
      throw LabError(ErrorKind::domain, "real_eigenvalues: complex eigenvalue encountered");
    }
    vals.push_back(ev[i].real());
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

/// Ratio of largest to smallest eigenvalue modulus; empty when the smallest
/// eigenvalue is not strictly positive.
inline std::optional<double> condition_number(const Vector& descending_eigs) {
  const double lo = descending_eigs.minCoeff();
  const double hi = descending_eigs.cwiseAbs().maxCoeff();
  if (!(lo > 0.0)) return std::nullopt;
  return hi / lo;
}

// ---------------------------------------------------------------------------
// ODE integration

struct FlowTrace {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> v_values;  // ‖state − target‖²
};

using VectorField = std::function<Vector(const Vector&)>;

/// One classic fourth-order Runge-Kutta step.
inline Vector rk4_step(const VectorField& field, const Vector& x, double h) {
  const Vector k1 = field(x);
  const Vector k2 = field(x + 0.5 * h * k1);
  const Vector k3 = field(x + 0.5 * h * k2);
  const Vector k4 = field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from t = 0 to t_end. The step count is round(t_end / step);
/// every `record_every`-th state (and the last) is kept in the trace.
inline FlowTrace rk4_integrate(const VectorField& field, const Vector& x0, double step, double t_end,
                               const Vector& target, int record_every = 1) {
  if (!(step > 0.0) || !(t_end > 0.0) || step > t_end) {
    throw LabError(ErrorKind::domain, "rk4_integrate: need 0 < step <= t_end");
  }
  require_same_dim(x0, target, "rk4_integrate");
  if (record_every < 1) throw LabError(ErrorKind::domain, "rk4_integrate: record_every must be >= 1");
  const auto n_steps = static_cast<long long>(std::llround(t_end / step));
  FlowTrace trace;
  auto record = [&](double t, const Vector& x) {
    trace.times.push_back(t);
    trace.states.push_back(x);
    trace.v_values.push_back((x - target).squaredNorm());
  };
  Vector x = x0;
  record(0.0, x);
  for (long long i = 1; i <= n_steps; ++i) {
    x = rk4_step(field, x, step);
    const double t = static_cast<double>(i) * step;
    if (!x.allFinite()) {
      throw LabError(ErrorKind::non_finite, "rk4_integrate: non-finite state at t = " + std::to_string(t));
    }
    if (i % record_every == 0 || i == n_steps) record(t, x);
  }
  return trace;
}

}  // namespace sobolev_lab
