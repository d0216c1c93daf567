// Monte-Carlo ground truth under x ~ N(0, I_d).
//
// Samples are generated in fixed leaf blocks of kBlock draws. Each block has
// its own stream (see rng.hpp), its own Welford accumulator, and blocks are
// merged by a fixed pairwise tree. Chunk size and worker count only change
// who computes which block, never the numbers.
#pragma once

#include "sobolev_lab/core.hpp"
#include "sobolev_lab/multinode.hpp"
#include "sobolev_lab/relu1.hpp"
#include "sobolev_lab/relusq.hpp"
#include "sobolev_lab/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace sobolev_lab::mc {

inline constexpr std::size_t kBlock = 1024;

struct McConfig {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  Eigen::Index dim = 0;
  std::size_t chunk_size = 16 * kBlock;  // scheduling granularity only
  unsigned threads = 0;                  // 0: SOBOLEV_LAB_THREADS or hardware
  std::uint64_t stream = 0;              // distinguishes estimates sharing a seed
};

struct McEstimate {
  Vector mean;
  Vector std_error;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct Moments {
  std::size_t n = 0;
  Vector mean;
  Vector m2;
};

inline Moments merge(const Moments& a, const Moments& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  Moments out;
  out.n = a.n + b.n;
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double n = static_cast<double>(out.n);
  const Vector delta = b.mean - a.mean;
  out.mean = a.mean + delta * (nb / n);
  out.m2 = a.m2 + b.m2 + delta.cwiseProduct(delta) * (na * nb / n);
  return out;
}

}  // namespace detail

/// Generic estimator: sampler(x, out) writes the per-sample value for one
/// Gaussian draw x into out (length out_dim). The sampler must be pure.
template <class Sampler>
McEstimate estimate(const McConfig& cfg, Eigen::Index out_dim, Sampler&& sampler) {
  if (cfg.n_samples == 0) throw LabError(ErrorKind::domain, "mc: n_samples must be >= 1");
  if (cfg.dim < 1) throw LabError(ErrorKind::domain, "mc: dim must be >= 1");
  if (cfg.chunk_size == 0) throw LabError(ErrorKind::domain, "mc: chunk_size must be >= 1");
  const std::size_t n_blocks = (cfg.n_samples + kBlock - 1) / kBlock;
  const std::size_t blocks_per_chunk = std::max<std::size_t>(1, cfg.chunk_size / kBlock);
  const std::size_t n_chunks = (n_blocks + blocks_per_chunk - 1) / blocks_per_chunk;
  std::vector<detail::Moments> blocks(n_blocks);

  parallel_for(n_chunks, cfg.threads, [&](std::size_t chunk) {
    Vector x(cfg.dim);
    Vector val(out_dim);
    Vector delta(out_dim);
    const std::size_t first = chunk * blocks_per_chunk;
    const std::size_t last = std::min(n_blocks, first + blocks_per_chunk);
    for (std::size_t b = first; b < last; ++b) {
      GaussianSource src = gaussian_stream(cfg.seed, cfg.stream, b);
      const std::size_t count = std::min(kBlock, cfg.n_samples - b * kBlock);
      detail::Moments m;
      m.mean = Vector::Zero(out_dim);
      m.m2 = Vector::Zero(out_dim);
      for (std::size_t i = 0; i < count; ++i) {
        src.fill(x);
        sampler(x, val);
        ++m.n;
        delta = val - m.mean;
        m.mean += delta / static_cast<double>(m.n);
        m.m2 += delta.cwiseProduct(val - m.mean);
      }
      blocks[b] = std::move(m);
    }
  });

  while (blocks.size() > 1) {
    std::vector<detail::Moments> next((blocks.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = 2 * i + 1 < blocks.size() ? detail::merge(blocks[2 * i], blocks[2 * i + 1]) : blocks[2 * i];
    }
    blocks = std::move(next);
  }
  const detail::Moments& total = blocks.front();
  McEstimate est;
  est.n = total.n;
  est.seed = cfg.seed;
  est.mean = total.mean;
  if (total.n > 1) {
    const double n = static_cast<double>(total.n);
    est.std_error = (total.m2 / (n - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(n);
  } else {
    est.std_error = Vector::Zero(out_dim);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Single-node losses

enum class Model { relu, relu_sq };

/// For relu_sq, l2 = 𝓘₁, h1_semi = 𝓘₂, h2_hess = 𝓘₃ and h2 = 𝓘₁+𝓘₂+𝓘₃.
enum class Kind { l2, h1_semi, h1, h2_hess, h2 };

inline const char* to_string(Model m) { return m == Model::relu ? "relu" : "relu_sq"; }

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::l2: return "l2";
    case Kind::h1_semi: return "h1_semi";
    case Kind::h1: return "h1";
    case Kind::h2_hess: return "h2_hess";
    case Kind::h2: return "h2";
  }
  return "?";
}

inline bool supported(Model m, Kind k) { return m == Model::relu_sq || k == Kind::l2 || k == Kind::h1_semi || k == Kind::h1; }

struct LossTerms {
  bool value = false;
  bool gradient = false;
  bool hessian = false;
};

inline LossTerms terms_of(Kind k) {
  switch (k) {
    case Kind::l2: return {true, false, false};
    case Kind::h1_semi: return {false, true, false};
    case Kind::h1: return {true, true, false};
    case Kind::h2_hess: return {false, false, true};
    case Kind::h2: return {true, true, true};
  }
  return {};
}

/// Per-sample loss and w-gradient; out = (loss, grad₁, …, grad_d).
/// Indicators are held fixed when differentiating (𝟙{t > 0}, value 0 at 0).
inline void sample_loss_grad(Model model, Kind kind, const Vector& w, const Vector& wstar, const Vector& x,
                             Vector& out) {
  const Eigen::Index d = w.size();
  const LossTerms terms = terms_of(kind);
  const double a = w.dot(x);
  const double b = wstar.dot(x);
  const double ia = a > 0.0 ? 1.0 : 0.0;
  const double ib = b > 0.0 ? 1.0 : 0.0;
  const double sa = ia * a;
  const double sb = ib * b;
  double loss = 0.0;
  auto grad = out.segment(1, d);
  grad.setZero();
  if (model == Model::relu) {
    if (terms.value) {
      const double r = sa - sb;
      loss += 0.5 * r * r;
      grad += (r * ia) * x;
    }
    if (terms.gradient) {
      loss += 0.5 * (ia * w - ib * wstar).squaredNorm();
      grad += ia * w - (ia * ib) * wstar;
    }
  } else {
    if (terms.value) {
      const double r = sa * sa - sb * sb;
      loss += 0.5 * r * r;
      grad += (2.0 * r * sa) * x;
    }
    if (terms.gradient) {
      const Vector diff = 2.0 * sa * w - 2.0 * sb * wstar;
      loss += 0.5 * diff.squaredNorm();
      grad += (2.0 * ia * w.dot(diff)) * x + (2.0 * sa) * diff;
    }
    if (terms.hessian) {
      const double nw2 = w.squaredNorm();
      const double ns2 = wstar.squaredNorm();
      const double cross = w.dot(wstar);
      loss += 2.0 * ia * nw2 * nw2 + 2.0 * ib * ns2 * ns2 - 4.0 * ia * ib * cross * cross;
      grad += 8.0 * (ia * nw2 * w - ia * ib * cross * wstar);
    }
  }
  out[0] = loss;
}

struct McLossGrad {
  McEstimate loss;  // length-1 vectors
  McEstimate grad;
};

inline McLossGrad split_loss_grad(const McEstimate& all) {
  const Eigen::Index d = all.mean.size() - 1;
  McLossGrad out;
  out.loss = {all.mean.head(1), all.std_error.head(1), all.n, all.seed};
  out.grad = {all.mean.tail(d), all.std_error.tail(d), all.n, all.seed};
  return out;
}

inline McLossGrad mc_loss_and_grad(Model model, Kind kind, const Vector& w, const Vector& wstar, McConfig cfg) {
  require_same_dim(w, wstar, "mc_loss_and_grad");
  if (wstar.squaredNorm() == 0.0) throw LabError(ErrorKind::zero_vector, "mc_loss_and_grad: w* = 0");
  if (!supported(model, kind)) throw LabError(ErrorKind::unsupported, "mc_loss_and_grad: kind needs relu_sq");
  cfg.dim = w.size();
  return split_loss_grad(estimate(cfg, w.size() + 1, [&](const Vector& x, Vector& out) {
    sample_loss_grad(model, kind, w, wstar, x, out);
  }));
}

/// (𝓚(w + h v) − 𝓚(w − h v)) / (2h) per sample, i.e. the central difference
/// of the Monte-Carlo loss with common random numbers.
inline McEstimate mc_directional_fd(Model model, Kind kind, const Vector& w, const Vector& wstar, const Vector& v,
                                    double h, McConfig cfg) {
  require_same_dim(w, v, "mc_directional_fd");
  cfg.dim = w.size();
  const Vector up = w + h * v;
  const Vector dn = w - h * v;
  return estimate(cfg, 1, [&](const Vector& x, Vector& out) {
    Vector tmp(w.size() + 1);
    sample_loss_grad(model, kind, up, wstar, x, tmp);
    const double lu = tmp[0];
    sample_loss_grad(model, kind, dn, wstar, x, tmp);
    out[0] = (lu - tmp[0]) / (2.0 * h);
  });
}

/// Closed-form population gradient matching (model, kind).
inline Vector closed_form_gradient(Model model, Kind kind, const Vector& w, const Vector& wstar) {
  if (model == Model::relu) {
    const relu1::GradientBundle b = relu1::population_gradients(w, wstar);
    switch (kind) {
      case Kind::l2: return b.grad_l2;
      case Kind::h1_semi: return b.grad_semi;
      case Kind::h1: return b.grad_h1;
      default: throw LabError(ErrorKind::unsupported, "closed_form_gradient: kind needs relu_sq");
    }
  }
  const relusq::H2GradientBundle b = relusq::h2_gradients(w, wstar);
  switch (kind) {
    case Kind::l2: return b.grad_i1;
    case Kind::h1_semi: return b.grad_i2;
    case Kind::h1: return b.grad_i1 + b.grad_i2;
    case Kind::h2_hess: return b.grad_i3;
    case Kind::h2: return b.total();
  }
  return {};
}

// ---------------------------------------------------------------------------
// K-node network f(x) = Σⱼ σ(wⱼᵀx)

inline Vector stack(const multinode::NodeSet& nodes) {
  const Eigen::Index d = nodes.front().size();
  Vector out(static_cast<Eigen::Index>(nodes.size()) * d);
  for (std::size_t j = 0; j < nodes.size(); ++j) out.segment(static_cast<Eigen::Index>(j) * d, d) = nodes[j];
  return out;
}

/// Gradient (positive sign) of the K-node loss, stacked node by node.
inline Vector closed_form_multinode(FlowKind kind, const multinode::NodeSet& w, const multinode::NodeSet& wstar) {
  return -stack(multinode::multinode_gradients(w, wstar, kind));
}

inline McLossGrad mc_multinode(FlowKind kind, const multinode::NodeSet& w, const multinode::NodeSet& wstar,
                               McConfig cfg) {
  if (w.empty() || w.size() != wstar.size()) {
    throw LabError(ErrorKind::dimension_mismatch, "mc_multinode: node counts differ or are zero");
  }
  const Eigen::Index d = w.front().size();
  const std::size_t k = w.size();
  cfg.dim = d;
  return split_loss_grad(estimate(cfg, 1 + static_cast<Eigen::Index>(k) * d, [&](const Vector& x, Vector& out) {
    double r = 0.0;
    Vector field = Vector::Zero(d);
    std::vector<double> ia(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double a = w[j].dot(x);
      const double b = wstar[j].dot(x);
      ia[j] = a > 0.0 ? 1.0 : 0.0;
      const double ib = b > 0.0 ? 1.0 : 0.0;
      r += ia[j] * a - ib * b;
      field += ia[j] * w[j] - ib * wstar[j];
    }
    out[0] = 0.5 * r * r + (kind == FlowKind::h1 ? 0.5 * field.squaredNorm() : 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      auto g = out.segment(1 + static_cast<Eigen::Index>(j) * d, d);
      g = (r * ia[j]) * x;
      if (kind == FlowKind::h1) g += ia[j] * field;
    }
  }));
}

// ---------------------------------------------------------------------------
// Random geometry

/// w* uniform on the unit sphere, w = w* + e with ‖e‖ = r‖w*‖.
struct BasinPoint {
  Vector w;
  Vector wstar;
};

inline BasinPoint random_basin_point(GaussianSource& src, Eigen::Index d, double r_min = 0.05, double r_max = 0.95) {
  BasinPoint p;
  p.wstar = src.vector(d).normalized();
  const Vector dir = src.vector(d).normalized();
  const double r = r_min + (r_max - r_min) * src.uniform();
  p.w = p.wstar + r * dir;
  return p;
}

// ---------------------------------------------------------------------------
// Convergence of the estimators

enum class Target { relu_l2, relu_h1_semi, relusq_i1, relusq_i2, relusq_i3, multinode_l2, multinode_h1 };

struct TargetInfo {
  Target target;
  const char* model;
  const char* kind;
};

inline constexpr TargetInfo kTargets[] = {
    {Target::relu_l2, "relu", "l2"},          {Target::relu_h1_semi, "relu", "h1_semi"},
    {Target::relusq_i1, "relu_sq", "i1"},     {Target::relusq_i2, "relu_sq", "i2"},
    {Target::relusq_i3, "relu_sq", "i3"},     {Target::multinode_l2, "multinode", "l2"},
    {Target::multinode_h1, "multinode", "h1"},
};

inline const TargetInfo& info(Target t) {
  for (const auto& i : kTargets) {
    if (i.target == t) return i;
  }
  throw LabError(ErrorKind::unsupported, "unknown target");
}

inline constexpr int kMultinodeK = 2;

struct GradientPair {
  Vector closed;
  McEstimate mc;
};

/// Random valid geometry for `target` drawn from `src`, compared against an
/// MC estimate using `cfg`.
inline GradientPair compare_gradient(Target target, GaussianSource& src, Eigen::Index d, const McConfig& cfg) {
  GradientPair out;
  if (target == Target::multinode_l2 || target == Target::multinode_h1) {
    multinode::NodeSet w;
    multinode::NodeSet ws;
    for (int j = 0; j < kMultinodeK; ++j) {
      BasinPoint p = random_basin_point(src, d);
      w.push_back(p.w);
      ws.push_back(p.wstar);
    }
    const FlowKind kind = target == Target::multinode_l2 ? FlowKind::l2 : FlowKind::h1;
    out.closed = closed_form_multinode(kind, w, ws);
    out.mc = mc_multinode(kind, w, ws, cfg).grad;
    return out;
  }
  const BasinPoint p = random_basin_point(src, d);
  Model model = Model::relu;
  Kind kind = Kind::l2;
  switch (target) {
    case Target::relu_l2: break;
    case Target::relu_h1_semi: kind = Kind::h1_semi; break;
    case Target::relusq_i1: model = Model::relu_sq; break;
    case Target::relusq_i2: model = Model::relu_sq; kind = Kind::h1_semi; break;
    case Target::relusq_i3: model = Model::relu_sq; kind = Kind::h2_hess; break;
    default: break;
  }
  out.closed = closed_form_gradient(model, kind, p.w, p.wstar);
  out.mc = mc_loss_and_grad(model, kind, p.w, p.wstar, cfg).grad;
  return out;
}

struct ConvergenceRow {
  Target target;
  Eigen::Index dim;
  int log2_n;
  double mse;
};

/// Mean over trials of ‖ĝ − g‖²/len at every (dim, N = 2^log2_n).
inline std::vector<ConvergenceRow> convergence_study(Target target, const std::vector<Eigen::Index>& dims,
                                                     const std::vector<int>& log2_n, int trials,
                                                     std::uint64_t seed, unsigned threads = 0) {
  std::vector<ConvergenceRow> rows;
  const auto tid = static_cast<std::uint64_t>(target);
  for (const Eigen::Index d : dims) {
    for (const int ln : log2_n) {
      double acc = 0.0;
      for (int t = 0; t < trials; ++t) {
        GaussianSource geom = gaussian_stream(seed, (tid << 40) | (static_cast<std::uint64_t>(d) << 20) |
                                                        static_cast<std::uint64_t>(t));
        McConfig cfg;
        cfg.n_samples = std::size_t{1} << ln;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.stream = (std::uint64_t{1} << 62) | (tid << 40) | (static_cast<std::uint64_t>(d) << 24) |
                     (static_cast<std::uint64_t>(t) << 8) | static_cast<std::uint64_t>(ln);
        const GradientPair g = compare_gradient(target, geom, d, cfg);
        acc += (g.mc.mean - g.closed).squaredNorm() / static_cast<double>(g.closed.size());
      }
      rows.push_back({target, d, ln, acc / trials});
    }
  }
  return rows;
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Empirical SGD on a fixed dataset

struct SgdConfig {
  Eigen::Index dim = 16;
  std::size_t batch_size = 64;
  std::size_t n_train = 10'000;
  double learning_rate = 1e-2;
  std::size_t n_steps = 2000;
  std::uint64_t seed = 0;
  FlowKind loss_kind = FlowKind::l2;
  std::size_t log_every = 1;
  std::size_t spot_check_every = 100;  // logged points between numeric κ checks
};

struct SgdTrace {
  std::vector<std::size_t> steps;
  std::vector<double> err_sq;
  std::vector<std::optional<double>> kappa;
  double spot_check_max_rel_err = 0.0;
  std::optional<std::size_t> diverged_at;
};

inline std::optional<double> analytic_kappa(FlowKind kind, const Vector& w, const Vector& wstar) {
  const PairGeometry g = pair_geometry(w, wstar);
  if (g.norm_w == 0.0) return std::nullopt;
  return relu1::kappa_formula(kind, g.alpha_sin2());
}

/// Plain minibatch SGD on the empirical L² loss or L² + ½·(input-gradient
/// mismatch)². The dataset, initialization and batch order depend only on the
/// seed, so both loss kinds see the same data for the same seed.
inline SgdTrace sgd_run(const SgdConfig& cfg) {
  if (cfg.dim < 2 || cfg.batch_size == 0 || cfg.n_train == 0) {
    throw LabError(ErrorKind::domain, "sgd_run: dim >= 2, batch_size >= 1 and n_train >= 1 required");
  }
  if (!(cfg.learning_rate >= 0.0)) throw LabError(ErrorKind::domain, "sgd_run: learning_rate must be >= 0");
  const Eigen::Index d = cfg.dim;
  GaussianSource init = gaussian_stream(cfg.seed, 1);
  const BasinPoint start = random_basin_point(init, d, 0.5, 0.95);
  const Vector& wstar = start.wstar;
  Vector w = start.w;

  GaussianSource data_src = gaussian_stream(cfg.seed, 2);
  Matrix data(d, static_cast<Eigen::Index>(cfg.n_train));
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    for (Eigen::Index r = 0; r < d; ++r) data(r, i) = data_src.next();
  }
  std::mt19937_64 order_eng = block_engine(cfg.seed, 3, 0);
  std::vector<std::size_t> order(cfg.n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const Kind kind = cfg.loss_kind == FlowKind::l2 ? Kind::l2 : Kind::h1;
  SgdTrace tr;
  std::size_t logged = 0;
  auto log_point = [&](std::size_t step) {
    tr.steps.push_back(step);
    tr.err_sq.push_back((w - wstar).squaredNorm());
    const auto kappa = analytic_kappa(cfg.loss_kind, w, wstar);
    tr.kappa.push_back(kappa);
    if (cfg.spot_check_every > 0 && logged % cfg.spot_check_every == 0 && kappa) {
      // below sin θ ~ 1e-5 the nonsymmetric H¹ eigenproblem loses its real spectrum to rounding
      const PairGeometry g = pair_geometry(w, wstar);
      if (g.alpha && g.sin_theta() >= 1e-4) {
        const relu1::HessianReport h = relu1::hessians(w, wstar);
        const auto numeric = cfg.loss_kind == FlowKind::l2 ? h.kappa_l2_numeric : h.kappa_h1_numeric;
        if (numeric) {
          tr.spot_check_max_rel_err = std::max(tr.spot_check_max_rel_err, std::abs(*numeric - *kappa) / *kappa);
        }
      }
    }
    ++logged;
  };

  log_point(0);
  Vector grad(d);
  Vector tmp(d + 1);
  std::size_t cursor = cfg.n_train;  // forces a shuffle on the first step
  for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
    if (cursor >= cfg.n_train) {
      portable_shuffle(order, order_eng);
      cursor = 0;
    }
    const std::size_t end = std::min(cfg.n_train, cursor + cfg.batch_size);
    grad.setZero();
    for (std::size_t i = cursor; i < end; ++i) {
      sample_loss_grad(Model::relu, kind, w, wstar, data.col(static_cast<Eigen::Index>(order[i])), tmp);
      grad += tmp.tail(d);
    }
    w -= cfg.learning_rate * grad / static_cast<double>(end - cursor);
    cursor = end;
    if (!w.allFinite()) {
      tr.diverged_at = step;
      break;
    }
    if (step % cfg.log_every == 0 || step == cfg.n_steps) log_point(step);
  }
  return tr;
}

}  // namespace sobolev_lab::mc
