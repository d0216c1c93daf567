#include "sobolev_lab/spectral.hpp"

#include <gtest/gtest.h>

using namespace sobolev_lab;
using namespace sobolev_lab::spectral;

TEST(ChebPoints, Examples) {
  Vector one = cheb_points(1);
  EXPECT_EQ(one[0], 1.0);
  EXPECT_EQ(one[1], -1.0);
  const Vector two = cheb_points(2);
  EXPECT_EQ(two[1], 0.0);
  const Vector four = cheb_points(4);
  EXPECT_NEAR(four[1], std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_EQ(four[2], 0.0);
  EXPECT_EQ(four[3], -four[1]);
  EXPECT_THROW(cheb_points(0), LabError);
}

TEST(ChebDiff, SmallMatricesExact) {
  const Matrix d1 = cheb_diff_matrix(1);
  Matrix e1(2, 2);
  e1 << 0.5, -0.5, 0.5, -0.5;
  EXPECT_EQ(d1, e1);
  // n = 2, Trefethen's table: [[3/2, −2, 1/2], [1/2, 0, −1/2], [−1/2, 2, −3/2]]
  const Matrix d2 = cheb_diff_matrix(2);
  Matrix e2(3, 3);
  e2 << 1.5, -2.0, 0.5, 0.5, 0.0, -0.5, -0.5, 2.0, -1.5;
  EXPECT_LE((d2 - e2).cwiseAbs().maxCoeff(), 1e-15);
  Vector sq(3);
  sq << 1.0, 0.0, 1.0;
  const Vector dsq = d2 * sq;
  EXPECT_NEAR(dsq[0], 2.0, 1e-15);
  EXPECT_NEAR(dsq[1], 0.0, 1e-15);
  EXPECT_NEAR(dsq[2], -2.0, 1e-15);
}

TEST(ChebDiff, ExactOnMonomials) {
  for (int n = 1; n <= 20; ++n) {
    const Vector x = cheb_points(n);
    const Matrix d = cheb_diff_matrix(n);
    EXPECT_LE((d * Vector::Ones(n + 1)).cwiseAbs().maxCoeff(), 1e-12 * n * n);
    for (int k = 1; k <= n; ++k) {
      const Vector f = x.array().pow(k);
      const Vector df = k * x.array().pow(k - 1);
      EXPECT_LE((d * f - df).cwiseAbs().maxCoeff(), 1e-10 * n * n) << n << " " << k;
    }
  }
}

TEST(FdmDiff, ExactOnQuadraticsAndNonUniform) {
  Vector grid = Vector::LinSpaced(11, 0.0, 1.0);
  const Matrix d = fdm_diff_matrix(grid);
  EXPECT_LE((d * Vector::Constant(11, 3.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((d * grid - Vector::Ones(11)).cwiseAbs().maxCoeff(), 1e-12);
  Vector uneven(6);
  uneven << -1.0, -0.7, 0.0, 0.1, 0.5, 2.0;
  const Matrix du = fdm_diff_matrix(uneven);
  const Vector q = uneven.array().square() - 3.0 * uneven.array();
  const Vector dq = 2.0 * uneven.array() - 3.0;
  EXPECT_LE((du * q - dq).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FdmDiff, SecondOrderOnCubic) {
  double prev = 0.0;
  for (int m : {21, 41, 81}) {
    const Vector g = Vector::LinSpaced(m, 0.0, 1.0);
    const Vector err = fdm_diff_matrix(g) * g.array().cube().matrix() - (3.0 * g.array().square()).matrix();
    const double e = err.segment(1, m - 2).cwiseAbs().maxCoeff();
    if (prev > 0) EXPECT_NEAR(prev / e, 4.0, 0.2);
    prev = e;
  }
}

TEST(FdmDiff, Errors) {
  EXPECT_THROW(fdm_diff_matrix(Vector::LinSpaced(2, 0.0, 1.0)), LabError);
  Vector bad(3);
  bad << 0.0, 1.0, 1.0;
  EXPECT_THROW(fdm_diff_matrix(bad), LabError);
}

TEST(H1GridLoss, ZeroForExactDerivatives) {
  const Vector x = cheb_points(8);
  const Matrix d = cheb_diff_matrix(8);
  EXPECT_NEAR(h1_grid_loss(x, Vector::Ones(9), x, d), 0.0, 1e-24);
  const Vector t = x.array().square();
  EXPECT_EQ(h1_grid_loss(t, d * t, t, d), 0.0);
  // value mismatch of 1 everywhere and exact slopes gives mean 1
  EXPECT_NEAR(h1_grid_loss(x + Vector::Ones(9), Vector::Ones(9), x, d), 1.0, 1e-12);
  EXPECT_THROW(h1_grid_loss(x, Vector::Ones(8), x, d), LabError);
}
