#include "sobolev_lab/mc.hpp"
#include "sobolev_lab/multinode.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace sobolev_lab;
using namespace sobolev_lab::multinode;

namespace {

Vector first_row(double x, double y, int k) {
  Vector t = Vector::Constant(k, y);
  t[0] = x;
  return t;
}

}  // namespace

TEST(MultinodeGradients, ZeroAtTeacher) {
  const NodeSet ws = standard_teachers(3);
  for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
    for (const Vector& g : multinode_gradients(ws, ws, kind)) EXPECT_LE(g.norm(), 1e-15);
  }
}

TEST(MultinodeGradients, Errors) {
  const NodeSet ws = standard_teachers(2);
  EXPECT_THROW(multinode_gradients({}, {}, FlowKind::l2), LabError);
  EXPECT_THROW(multinode_gradients({ws[0]}, ws, FlowKind::l2), LabError);
  NodeSet zero = ws;
  zero[1].setZero();
  try {
    multinode_gradients(zero, ws, FlowKind::l2);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular);
  }
}

TEST(MultinodeGradients, MatchMonteCarlo) {
  // K = 2 with random orthonormal teachers in d = 4 and a perturbed cyclic student
  GaussianSource src = gaussian_stream(31, 0);
  const int k = 2;
  const Eigen::Index d = 2 * k;
  Eigen::HouseholderQR<Matrix> qr(Matrix::NullaryExpr(d, d, [&](Eigen::Index, Eigen::Index) { return src.next(); }));
  const Matrix q = qr.householderQ();
  NodeSet ws, w;
  for (int j = 0; j < k; ++j) ws.push_back(q.col(j));
  const NodeSet cyc = cyclic_students(Eigen::Vector2d(0.8, 0.3));
  for (int j = 0; j < k; ++j) w.push_back(q.leftCols(k) * cyc[static_cast<std::size_t>(j)] + 0.1 * src.vector(d));
  mc::McConfig cfg;
  cfg.n_samples = 1'000'000;
  cfg.seed = 32;
  for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
    const Vector exact = mc::closed_form_multinode(kind, w, ws);
    const mc::McLossGrad est = mc::mc_multinode(kind, w, ws, cfg);
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      EXPECT_LE(std::abs(est.grad.mean[i] - exact[i]), 4.0 * est.grad.std_error[i]) << to_string(kind) << " " << i;
    }
  }
}

TEST(ReducedField, AgreesWithFullNetwork) {
  GaussianSource src = gaussian_stream(33, 0);
  for (int k : {2, 3, 5}) {
    for (int i = 0; i < 20; ++i) {
      const double x = 0.05 + src.uniform();
      const double y = src.uniform() * x;
      for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
        const PlanarVelocity v = reduced_field(kind, {x, y, k});
        const Vector full = toeplitz_field(kind, first_row(x, y, k));
        EXPECT_NEAR(v.xdot, full[0], 1e-12) << k << " " << x << " " << y;
        for (int j = 1; j < k; ++j) EXPECT_NEAR(v.ydot, full[j], 1e-12);
      }
    }
  }
}

TEST(ReducedField, FixedPointAndDiagonalExamples) {
  for (int k : {2, 3, 8}) {
    for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
      const PlanarVelocity v = reduced_field(kind, {1.0, 0.0, k});
      EXPECT_NEAR(v.xdot, 0.0, 1e-15);
      EXPECT_NEAR(v.ydot, 0.0, 1e-15);
    }
  }
  const double xl = (1.0 + 3.0 * kPi / 4.0) / (2.0 * kPi);
  const double xh = (1.0 + 3.0 * kPi / 2.0) / (4.0 * kPi);
  const PlanarVelocity l2 = reduced_field(FlowKind::l2, {1.0, 1.0, 2});
  const PlanarVelocity h1 = reduced_field(FlowKind::h1, {1.0, 1.0, 2});
  EXPECT_NEAR(l2.xdot, -(1.0 - xl), 1e-12);
  EXPECT_NEAR(l2.xdot, -0.4658, 1e-4);
  EXPECT_NEAR(h1.xdot, -2.0 * (1.0 - xh), 1e-12);
  EXPECT_NEAR(h1.xdot, -1.0908, 1e-4);
  EXPECT_DOUBLE_EQ(l2.xdot, l2.ydot);
}

TEST(ReducedField, Errors) {
  EXPECT_THROW(reduced_field(FlowKind::l2, {0.0, 0.0, 3}), LabError);
  EXPECT_THROW(reduced_field(FlowKind::l2, {1.0, 0.0, 1}), LabError);
}

TEST(Saddle, ClosedFormsAndMonotonicity) {
  const SaddlePoints two = saddle_points(2);
  EXPECT_NEAR(two.x_l2, (1.0 + 3.0 * kPi / 4.0) / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(two.x_h1, (1.0 + 3.0 * kPi / 2.0) / (4.0 * kPi), 1e-15);
  EXPECT_NEAR(two.x_h1, 0.454577, 5e-7);
  double prev_l2 = 1.0, prev_h1 = 1.0;
  for (int k = 2; k <= 64; ++k) {
    const SaddlePoints s = saddle_points(k);
    EXPECT_LT(s.x_l2, prev_l2);
    EXPECT_LT(s.x_h1, prev_h1);
    prev_l2 = s.x_l2;
    prev_h1 = s.x_h1;
    const PlanarVelocity fl = reduced_field(FlowKind::l2, {s.x_l2, s.x_l2, k});
    const PlanarVelocity fh = reduced_field(FlowKind::h1, {s.x_h1, s.x_h1, k});
    EXPECT_LE(std::max(std::abs(fl.xdot), std::abs(fl.ydot)), 1e-10) << k;
    EXPECT_LE(std::max(std::abs(fh.xdot), std::abs(fh.ydot)), 1e-10) << k;
  }
  EXPECT_THROW(saddle_points(1), LabError);
}

TEST(Diagonal, DecayRates) {
  for (int k : {2, 4, 8}) {
    const DiagonalDecay l2 = diagonal_decay(FlowKind::l2, k, 1.0, 10.0);
    const DiagonalDecay h1 = diagonal_decay(FlowKind::h1, k, 1.0, 10.0);
    EXPECT_NEAR(l2.exponent / (-k / 2.0), 1.0, 0.02) << k;
    EXPECT_NEAR(h1.exponent / (-static_cast<double>(k)), 1.0, 0.02) << k;
    EXPECT_LE(l2.max_transverse, 1e-12);
    EXPECT_LE(h1.max_transverse, 1e-12);
  }
  EXPECT_THROW(diagonal_decay(FlowKind::l2, 2, 0.1, 1.0), LabError);
}

TEST(Linearization, PrintedMatrixEigenvalues) {
  const Linearization two = linearization(2);
  EXPECT_NEAR(two.eigs_l2[0], 0.25, 1e-12);
  EXPECT_NEAR(two.eigs_l2[1], 0.75, 1e-12);
  for (int k = 2; k <= 10; ++k) {
    const Linearization lin = linearization(k);
    Eigen::EigenSolver<Matrix> oracle(lin.m3, false);
    std::array<double, 2> ev{oracle.eigenvalues()[0].real(), oracle.eigenvalues()[1].real()};
    std::sort(ev.begin(), ev.end());
    EXPECT_NEAR(lin.eigs_l2[0], 0.25, 1e-10);
    EXPECT_NEAR(lin.eigs_l2[1], (k + 1) / 4.0, 1e-10);
    EXPECT_NEAR(ev[0], lin.eigs_l2[0], 1e-10);
    EXPECT_NEAR(ev[1], lin.eigs_l2[1], 1e-10);
  }
}

TEST(Linearization, MeasuredJacobianAtFixedPoint) {
  // −J of the reduced L² field at (1, 0), one-sided in y since the flow lives in y ≥ 0
  for (int k : {2, 3, 6}) {
    const double h = 1e-7;
    auto f = [k](double x, double y) { return reduced_field(FlowKind::l2, {x, y, k}); };
    const PlanarVelocity xp = f(1.0 + h, 0.0), xm = f(1.0 - h, 0.0), yp = f(1.0, h), base = f(1.0, 0.0);
    Matrix m(2, 2);
    m << -(xp.xdot - xm.xdot) / (2 * h), -(yp.xdot - base.xdot) / h, -(xp.ydot - xm.ydot) / (2 * h),
        -(yp.ydot - base.ydot) / h;
    Matrix expected(2, 2);
    expected << 0.5 + (k - 1) / (2.0 * kPi), (k - 1) / 4.0, 0.25, k / 4.0 + 1.0 / (2.0 * kPi);
    EXPECT_LE((m - expected).cwiseAbs().maxCoeff(), 1e-6) << "K=" << k << "\n" << m;
  }
}

TEST(Flow, ReachesFixedPointFromOmega) {
  for (int k : {2, 4}) {
    const auto t = time_to_reach(FlowKind::h1, {0.6, 0.3, k}, 1e-6, 1e-2, 500.0);
    ASSERT_TRUE(t.has_value()) << k;
    EXPECT_GT(*t, 0.0);
  }
  EXPECT_FALSE(time_to_reach(FlowKind::h1, {0.6, 0.3, 2}, 1e-6, 1e-2, 0.5));
}

TEST(Toeplitz, FixedPointAndErrors) {
  for (int k : {3, 5}) {
    EXPECT_LE(toeplitz_field(FlowKind::l2, Vector::Unit(k, 0)).norm(), 1e-15);
    EXPECT_LE(toeplitz_field(FlowKind::h1, Vector::Unit(k, 0)).norm(), 1e-15);
  }
  EXPECT_THROW(toeplitz_field(FlowKind::l2, Vector::Zero(3)), LabError);
  EXPECT_THROW(toeplitz_field(FlowKind::l2, Vector::Ones(1)), LabError);
}

TEST(Toeplitz, CyclicIndexing) {
  Vector t(3);
  t << 1.0, 2.0, 3.0;
  const NodeSet w = cyclic_students(t);
  EXPECT_EQ(w[0], t);
  EXPECT_DOUBLE_EQ(w[1][0], 2.0);
  EXPECT_DOUBLE_EQ(w[1][2], 1.0);
  EXPECT_DOUBLE_EQ(w[2][0], 3.0);
}

TEST(NumericJacobian, LinearFieldIsExact) {
  Matrix a(2, 2);
  a << 1.0, -2.0, 0.5, 3.0;
  const VectorField f = [&a](const Vector& x) { return Vector(a * x); };
  EXPECT_LE((numeric_jacobian(f, Vector::Ones(2)) - a).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(MultinodeGradients, CyclicClosure) {
  GaussianSource src = gaussian_stream(34, 0);
  for (int k : {3, 4}) {
    const NodeSet ws = standard_teachers(k);
    Vector t = src.vector(k).cwiseAbs();
    t[0] += 1.0;
    const NodeSet w = cyclic_students(t);
    for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
      const auto g = multinode_gradients(w, ws, kind);
      const NodeSet shifted = cyclic_students(g[0]);
      for (int j = 0; j < k; ++j) {
        EXPECT_LE((g[static_cast<std::size_t>(j)] - shifted[static_cast<std::size_t>(j)]).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ReducedField, OmegaIsInvariant) {
  const double eps = 1e-3;
  for (int k : {2, 4, 8}) {
    for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
      for (int i = 1; i < 50; ++i) {
        const double s = i / 50.0;
        EXPECT_GE(reduced_field(kind, {s, 0.0, k}).ydot, 0.0) << "y = 0 edge";
        EXPECT_LT(reduced_field(kind, {1.0, s, k}).xdot, 0.0) << "x = 1 edge";
        const double y = s * (1.0 - eps);
        const PlanarVelocity d = reduced_field(kind, {y + eps, y, k});
        EXPECT_GE(d.xdot - d.ydot, 0.0) << "diagonal edge, K=" << k << " y=" << y;
      }
    }
  }
  GaussianSource src = gaussian_stream(35, 0);
  for (int i = 0; i < 20; ++i) {
    const double x = eps + (1.0 - eps) * src.uniform();
    const double y = (x - eps) * src.uniform();
    const VectorField f = [](const Vector& s) {
      const PlanarVelocity v = reduced_field(FlowKind::h1, {s[0], s[1], 4});
      return Vector(Eigen::Vector2d(v.xdot, v.ydot));
    };
    const FlowTrace tr = rk4_integrate(f, Eigen::Vector2d(x, y), 1e-2, 20.0, Eigen::Vector2d(1.0, 0.0), 1);
    for (const Vector& s : tr.states) {
      EXPECT_GE(s[1], -1e-12);
      EXPECT_GE(s[0] - s[1], eps - 1e-12);
    }
  }
}
