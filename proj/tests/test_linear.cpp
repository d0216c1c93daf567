#include "sobolev_lab/linear.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

using namespace sobolev_lab;
using namespace sobolev_lab::linear;

namespace {

LinearProblem diag_problem(double lambda, double sigma) {
  LinearProblem p;
  p.x_matrix = Matrix::Zero(2, 2);
  p.x_matrix(0, 0) = 2.0;
  p.x_matrix(1, 1) = 1.0;
  p.wstar = Vector::Ones(2);
  p.noise_sigma = sigma;
  p.ridge_lambda = lambda;
  return p;
}

}  // namespace

TEST(Estimators, MatchQrAndNormalEquations) {
  const LinearProblem p = random_problem(1, 2, 40, 4, 0.5, 0.7);
  GaussianSource src = gaussian_stream(3, 0);
  const Vector y = p.x_matrix * p.wstar + 0.5 * src.vector(40);
  const Estimators e = fit_estimators(p, y);
  const Vector ls = p.x_matrix.colPivHouseholderQr().solve(y);
  EXPECT_LE((e.w_l2 - ls).norm(), 1e-12);
  const Matrix a = p.x_matrix.transpose() * p.x_matrix + p.ridge_lambda * Matrix::Identity(4, 4);
  const Vector ridge = a.fullPivLu().solve(p.x_matrix.transpose() * y + p.ridge_lambda * p.wstar);
  EXPECT_LE((e.w_h1 - ridge).norm(), 1e-12);
}

TEST(Estimators, NoiselessAndZeroLambda) {
  LinearProblem p = random_problem(4, 0, 20, 3, 1.0, 2.0);
  const Vector y = p.x_matrix * p.wstar;
  const Estimators e = fit_estimators(p, y);
  EXPECT_LE((e.w_l2 - p.wstar).norm(), 1e-10);
  EXPECT_LE((e.w_h1 - p.wstar).norm(), 1e-10);
  p.ridge_lambda = 0.0;
  GaussianSource src = gaussian_stream(5, 0);
  const Vector noisy = y + src.vector(20);
  const Estimators z = fit_estimators(p, noisy);
  EXPECT_EQ(z.w_l2, z.w_h1);
}

TEST(Estimators, Errors) {
  LinearProblem p = random_problem(6, 0, 5, 3, 1.0, 1.0);
  p.x_matrix.col(2) = p.x_matrix.col(1);
  try {
    Fitter f(p);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular);
  }
  LinearProblem q = random_problem(6, 0, 5, 3, 1.0, -1.0);
  EXPECT_THROW(Fitter{q}, LabError);
  q.ridge_lambda = 1.0;
  q.wstar = Vector::Ones(2);
  EXPECT_THROW(Fitter{q}, LabError);
  EXPECT_THROW(fit_estimators(random_problem(6, 0, 5, 3, 1.0, 1.0), Vector::Ones(4)), LabError);
}

TEST(Conditioning, Examples) {
  const Conditioning c = conditioning(diag_problem(1.0, 1.0));
  EXPECT_DOUBLE_EQ(c.kappa_l2, 4.0);
  EXPECT_DOUBLE_EQ(c.kappa_h1, 2.5);
  const Conditioning z = conditioning(diag_problem(0.0, 1.0));
  EXPECT_DOUBLE_EQ(z.kappa_l2, z.kappa_h1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const LinearProblem p = random_problem(7, s, 30, 5, 1.0, 0.01 + s * 0.5);
    const Conditioning k = conditioning(p);
    EXPECT_LT(k.kappa_h1, k.kappa_l2);
  }
}

TEST(VarianceStudy, MatchesFormulas) {
  const VarianceReport r = variance_study(diag_problem(1.0, 1.0), 20000, 8, 1);
  EXPECT_DOUBLE_EQ(r.formula_l2, 2.0);
  EXPECT_NEAR(r.formula_h1, 16.0 / 25.0 + 1.0 / 4.0, 1e-15);
  EXPECT_NEAR(r.var_l2 / r.formula_l2, 1.0, 0.03);
  EXPECT_NEAR(r.var_h1 / r.formula_h1, 1.0, 0.03);
  EXPECT_LT(r.var_h1, r.var_l2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(r.mean_l2[i] - 1.0), 4.0 * r.mean_se_l2[i]);
    EXPECT_LE(std::abs(r.mean_h1[i] - 1.0), 4.0 * r.mean_se_h1[i]);
  }
}

TEST(VarianceStudy, ZeroNoiseAndThreadIndependence) {
  const VarianceReport z = variance_study(diag_problem(1.0, 0.0), 10, 9, 1);
  EXPECT_LE(z.var_l2, 1e-30);
  EXPECT_LE(z.var_h1, 1e-30);
  const LinearProblem p = random_problem(10, 0, 25, 4, 1.0, 1.0);
  const VarianceReport a = variance_study(p, 500, 11, 1);
  const VarianceReport b = variance_study(p, 500, 11, 4);
  EXPECT_EQ(a.var_l2, b.var_l2);
  EXPECT_EQ(a.var_h1, b.var_h1);
  EXPECT_THROW(variance_study(p, 0, 11), LabError);
}
