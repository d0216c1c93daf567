// Linear model y = Xw* + ε, ε ~ N(0, σ²I): least squares against the
// w*-anchored ridge estimator (XᵀX + λI)⁻¹(Xᵀy + λw*).
#pragma once

#include "sobolev_lab/core.hpp"
#include "sobolev_lab/rng.hpp"

#include <cstdint>
#include <vector>

namespace sobolev_lab::linear {

struct LinearProblem {
  Matrix x_matrix;  // N × d
  Vector wstar;
  double noise_sigma = 1.0;
  double ridge_lambda = 1.0;
};

inline constexpr double kMinGramEigenvalue = 1e-10;

inline Matrix gram(const LinearProblem& p) {
  if (p.x_matrix.cols() != p.wstar.size()) {
    throw LabError(ErrorKind::dimension_mismatch, "linear: X columns must match w* length");
  }
  return p.x_matrix.transpose() * p.x_matrix;
}

inline void validate(const LinearProblem& p, const Vector& gram_eigs) {
  if (!(p.noise_sigma >= 0.0) || !(p.ridge_lambda >= 0.0)) {
    throw LabError(ErrorKind::domain, "linear: sigma and lambda must be >= 0");
  }
  if (gram_eigs[gram_eigs.size() - 1] <= kMinGramEigenvalue) {
    throw LabError(ErrorKind::singular, "linear: XᵀX is singular");
  }
}

struct Estimators {
  Vector w_l2;
  Vector w_h1;
};

/// Both estimators share precomputed Cholesky factors.
class Fitter {
 public:
  explicit Fitter(const LinearProblem& p) : p_(p) {
    const Matrix g = gram(p);
    validate(p, symmetric_eigs(g).eigenvalues);
    llt_l2_.compute(g);
    llt_h1_.compute(g + p.ridge_lambda * Matrix::Identity(g.rows(), g.cols()));
    if (llt_l2_.info() != Eigen::Success || llt_h1_.info() != Eigen::Success) {
      throw LabError(ErrorKind::singular, "linear: Cholesky factorization failed");
    }
  }

  Estimators fit(const Vector& y) const {
    if (y.size() != p_.x_matrix.rows()) throw LabError(ErrorKind::dimension_mismatch, "linear: y length must be N");
    const Vector xty = p_.x_matrix.transpose() * y;
    return {llt_l2_.solve(xty), llt_h1_.solve(xty + p_.ridge_lambda * p_.wstar)};
  }

 private:
  LinearProblem p_;
  Eigen::LLT<Matrix> llt_l2_;
  Eigen::LLT<Matrix> llt_h1_;
};

inline Estimators fit_estimators(const LinearProblem& p, const Vector& y) { return Fitter(p).fit(y); }

struct Conditioning {
  double kappa_l2 = 0.0;
  double kappa_h1 = 0.0;
};

inline Conditioning conditioning(const LinearProblem& p) {
  const Vector eigs = symmetric_eigs(gram(p)).eigenvalues;
  validate(p, eigs);
  const double hi = eigs[0];
  const double lo = eigs[eigs.size() - 1];
  return {hi / lo, (hi + p.ridge_lambda) / (lo + p.ridge_lambda)};
}

struct VarianceReport {
  double var_l2 = 0.0;      // empirical mean of ‖X(ŵ − w*)‖²
  double var_h1 = 0.0;
  double formula_l2 = 0.0;  // σ² d
  double formula_h1 = 0.0;  // σ² Σ sᵢ²/(sᵢ + λ)², sᵢ eigenvalues of XᵀX
  Vector mean_l2;           // empirical mean of the estimators
  Vector mean_h1;
  Vector mean_se_l2;        // standard error of those means
  Vector mean_se_h1;
  int trials = 0;
};

/// In-sample prediction variance over fresh noise draws; draw i uses stream i.
inline VarianceReport variance_study(const LinearProblem& p, int trials, std::uint64_t seed, unsigned threads = 0) {
  if (trials < 1) throw LabError(ErrorKind::domain, "variance_study: trials must be >= 1");
  const Fitter fitter(p);
  const Vector eigs = symmetric_eigs(gram(p)).eigenvalues;
  const Eigen::Index n = p.x_matrix.rows();
  const Eigen::Index d = p.wstar.size();
  const Vector clean = p.x_matrix * p.wstar;

  std::vector<Estimators> fits(static_cast<std::size_t>(trials));
  parallel_for(fits.size(), threads, [&](std::size_t t) {
    GaussianSource src = gaussian_stream(seed, t);
    fits[t] = fitter.fit(clean + p.noise_sigma * src.vector(n));
  });

  VarianceReport r;
  r.trials = trials;
  r.mean_l2 = Vector::Zero(d);
  r.mean_h1 = Vector::Zero(d);
  for (const auto& f : fits) {
    r.var_l2 += (p.x_matrix * (f.w_l2 - p.wstar)).squaredNorm();
    r.var_h1 += (p.x_matrix * (f.w_h1 - p.wstar)).squaredNorm();
    r.mean_l2 += f.w_l2;
    r.mean_h1 += f.w_h1;
  }
  r.var_l2 /= trials;
  r.var_h1 /= trials;
  r.mean_l2 /= trials;
  r.mean_h1 /= trials;
  Vector ss_l2 = Vector::Zero(d);
  Vector ss_h1 = Vector::Zero(d);
  for (const auto& f : fits) {
    ss_l2 += (f.w_l2 - r.mean_l2).cwiseAbs2();
    ss_h1 += (f.w_h1 - r.mean_h1).cwiseAbs2();
  }
  const double denom = trials > 1 ? static_cast<double>(trials) * (trials - 1) : 1.0;
  r.mean_se_l2 = (ss_l2 / denom).cwiseSqrt();
  r.mean_se_h1 = (ss_h1 / denom).cwiseSqrt();

  const double s2 = p.noise_sigma * p.noise_sigma;
  r.formula_l2 = s2 * static_cast<double>(d);
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    r.formula_h1 += s2 * eigs[i] * eigs[i] / std::pow(eigs[i] + p.ridge_lambda, 2);
  }
  return r;
}

/// Gaussian N × d design with a random Gaussian w*.
inline LinearProblem random_problem(std::uint64_t seed, std::uint64_t stream, Eigen::Index n, Eigen::Index d,
                                    double sigma, double lambda) {
  GaussianSource src = gaussian_stream(seed, stream);
  LinearProblem p;
  p.x_matrix.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.x_matrix(i, j) = src.next();
  }
  p.wstar = src.vector(d);
  p.noise_sigma = sigma;
  p.ridge_lambda = lambda;
  return p;
}

}  // namespace sobolev_lab::linear
