#include "sobolev_lab/mc.hpp"

#include <gtest/gtest.h>

using namespace sobolev_lab;
using namespace sobolev_lab::mc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Estimate, BitIdenticalAcrossThreadsAndChunks) {
  const Vector w = vec({0.3, -0.8, 0.5, 1.1});
  const Vector ws = vec({1.0, 0.2, -0.4, 0.3});
  McConfig base;
  base.n_samples = 50'000;  // not a multiple of the block size
  base.seed = 77;
  base.threads = 1;
  const McLossGrad ref = mc_loss_and_grad(Model::relu, Kind::h1, w, ws, base);
  for (unsigned threads : {2u, 4u}) {
    for (std::size_t chunk : {std::size_t{1}, kBlock, 5 * kBlock, 64 * kBlock}) {
      McConfig cfg = base;
      cfg.threads = threads;
      cfg.chunk_size = chunk;
      const McLossGrad r = mc_loss_and_grad(Model::relu, Kind::h1, w, ws, cfg);
      EXPECT_EQ(r.grad.mean, ref.grad.mean) << threads << " " << chunk;
      EXPECT_EQ(r.grad.std_error, ref.grad.std_error);
      EXPECT_EQ(r.loss.mean, ref.loss.mean);
    }
  }
}

TEST(Estimate, MatchesTwoPassMoments) {
  McConfig cfg;
  cfg.n_samples = 3 * kBlock + 17;
  cfg.seed = 5;
  cfg.dim = 2;
  const McEstimate est = estimate(cfg, 2, [](const Vector& x, Vector& out) {
    out[0] = x[0];
    out[1] = x[0] * x[0] + x[1];
  });
  // replay the same draws
  std::vector<Vector> vals;
  const std::size_t blocks = (cfg.n_samples + kBlock - 1) / kBlock;
  for (std::size_t b = 0; b < blocks; ++b) {
    GaussianSource src = gaussian_stream(cfg.seed, cfg.stream, b);
    const std::size_t count = std::min(kBlock, cfg.n_samples - b * kBlock);
    for (std::size_t i = 0; i < count; ++i) {
      const Vector x = src.vector(2);
      vals.push_back(vec({x[0], x[0] * x[0] + x[1]}));
    }
  }
  Vector mean = Vector::Zero(2);
  for (const Vector& v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  Vector ss = Vector::Zero(2);
  for (const Vector& v : vals) ss += (v - mean).cwiseAbs2();
  const double n = static_cast<double>(vals.size());
  const Vector se = (ss / (n - 1)).cwiseSqrt() / std::sqrt(n);
  EXPECT_EQ(est.n, cfg.n_samples);
  EXPECT_LE((est.mean - mean).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((est.std_error - se).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Estimate, Errors) {
  McConfig cfg;
  cfg.dim = 2;
  cfg.n_samples = 0;
  auto sampler = [](const Vector&, Vector& out) { out[0] = 0; };
  EXPECT_THROW(estimate(cfg, 1, sampler), LabError);
  cfg.n_samples = 10;
  cfg.chunk_size = 0;
  EXPECT_THROW(estimate(cfg, 1, sampler), LabError);
  cfg.chunk_size = kBlock;
  cfg.dim = 0;
  EXPECT_THROW(estimate(cfg, 1, sampler), LabError);
}

TEST(McLossAndGrad, ExactZeroAtTeacher) {
  const Vector ws = vec({0.4, 0.9});
  McConfig cfg;
  cfg.n_samples = 10'000;
  for (Model m : {Model::relu, Model::relu_sq}) {
    for (Kind k : {Kind::l2, Kind::h1_semi, Kind::h1}) {
      const McLossGrad r = mc_loss_and_grad(m, k, ws, ws, cfg);
      EXPECT_EQ(r.loss.mean[0], 0.0);
      EXPECT_EQ(r.grad.mean, Vector::Zero(2));
      EXPECT_EQ(r.grad.std_error, Vector::Zero(2));
    }
  }
}

TEST(McLossAndGrad, SemiGradientExample) {
  McConfig cfg;
  cfg.n_samples = 1'000'000;
  cfg.seed = 41;
  const McLossGrad r = mc_loss_and_grad(Model::relu, Kind::h1_semi, vec({0, 1}), vec({1, 0}), cfg);
  EXPECT_LE(std::abs(r.grad.mean[0] + 0.25), 4.0 * r.grad.std_error[0]);
  EXPECT_LE(std::abs(r.grad.mean[1] - 0.5), 4.0 * r.grad.std_error[1]);
}

TEST(McLossAndGrad, UnsupportedCombinations) {
  McConfig cfg;
  cfg.n_samples = 100;
  try {
    mc_loss_and_grad(Model::relu, Kind::h2, vec({1, 0}), vec({0, 1}), cfg);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported);
  }
  EXPECT_THROW(mc_loss_and_grad(Model::relu, Kind::l2, vec({1, 0}), vec({0, 1, 0}), cfg), LabError);
}

TEST(CompareGradient, AllTargetsWithinFourSigma) {
  GaussianSource geom = gaussian_stream(42, 0);
  for (const TargetInfo& t : kTargets) {
    McConfig cfg;
    cfg.n_samples = 200'000;
    cfg.seed = 43;
    cfg.stream = static_cast<std::uint64_t>(t.target);
    const GradientPair g = compare_gradient(t.target, geom, 3, cfg);
    ASSERT_EQ(g.closed.size(), g.mc.mean.size());
    for (Eigen::Index i = 0; i < g.closed.size(); ++i) {
      EXPECT_LE(std::abs(g.mc.mean[i] - g.closed[i]), 4.0 * g.mc.std_error[i] + 1e-12) << t.model << ":" << t.kind;
    }
  }
}

TEST(ConvergenceStudy, SlopeNearMinusOne) {
  const auto rows = convergence_study(Target::relu_l2, {4}, {8, 10, 12, 14}, 8, 44, 1);
  ASSERT_EQ(rows.size(), 4u);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.log2_n);
    y.push_back(std::log2(r.mse));
  }
  EXPECT_NEAR(ls_slope(x, y), -1.0, 0.25);
}

TEST(LsSlope, ExactLine) {
  EXPECT_NEAR(ls_slope({1, 2, 3, 4}, {3, 1, -1, -3}), -2.0, 1e-15);
}

TEST(RandomBasinPoint, RadiusRange) {
  GaussianSource src = gaussian_stream(45, 0);
  for (int i = 0; i < 200; ++i) {
    const BasinPoint p = random_basin_point(src, 6, 0.2, 0.4);
    EXPECT_NEAR(p.wstar.norm(), 1.0, 1e-14);
    const double r = (p.w - p.wstar).norm();
    EXPECT_GE(r, 0.2 - 1e-14);
    EXPECT_LE(r, 0.4 + 1e-14);
  }
}

TEST(Sgd, ZeroLearningRateIsConstant) {
  SgdConfig cfg;
  cfg.dim = 4;
  cfg.n_steps = 50;
  cfg.learning_rate = 0.0;
  cfg.n_train = 200;
  const SgdTrace tr = sgd_run(cfg);
  ASSERT_EQ(tr.err_sq.size(), 51u);
  for (double e : tr.err_sq) EXPECT_EQ(e, tr.err_sq.front());
}

TEST(Sgd, DeterministicAndH1Faster) {
  SgdConfig cfg;
  cfg.dim = 8;
  cfg.n_steps = 600;
  cfg.n_train = 2000;
  cfg.seed = 46;
  cfg.log_every = 50;
  const SgdTrace a = sgd_run(cfg);
  const SgdTrace b = sgd_run(cfg);
  EXPECT_EQ(a.err_sq, b.err_sq);
  EXPECT_EQ(a.steps.back(), 600u);
  cfg.loss_kind = FlowKind::h1;
  const SgdTrace h = sgd_run(cfg);
  EXPECT_LT(h.err_sq.back(), a.err_sq.back());
  EXPECT_EQ(h.err_sq.front(), a.err_sq.front());  // same initialization
  EXPECT_LE(a.spot_check_max_rel_err, 1e-8);
  EXPECT_LE(h.spot_check_max_rel_err, 1e-8);
}

TEST(Sgd, PartialFinalBatchAndErrors) {
  SgdConfig cfg;
  cfg.dim = 3;
  cfg.n_train = 10;
  cfg.batch_size = 4;  // batches of 4, 4, 2
  cfg.n_steps = 7;
  EXPECT_NO_THROW(sgd_run(cfg));
  cfg.batch_size = 0;
  EXPECT_THROW(sgd_run(cfg), LabError);
  cfg.batch_size = 4;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(sgd_run(cfg), LabError);
}

TEST(Sgd, DivergenceIsRecorded) {
  SgdConfig cfg;
  cfg.dim = 4;
  cfg.n_train = 256;
  cfg.learning_rate = 1e6;
  cfg.n_steps = 200;
  const SgdTrace tr = sgd_run(cfg);
  ASSERT_TRUE(tr.diverged_at.has_value());
  EXPECT_LE(*tr.diverged_at, 200u);
}
