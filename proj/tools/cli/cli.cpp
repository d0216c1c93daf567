#include "cli.hpp"

#include "csv.hpp"

#include "sobolev_lab/core.hpp"
#include "sobolev_lab/criteria.hpp"
#include "sobolev_lab/linear.hpp"
#include "sobolev_lab/mc.hpp"
#include "sobolev_lab/multinode.hpp"
#include "sobolev_lab/relu1.hpp"
#include "sobolev_lab/relusq.hpp"
#include "sobolev_lab/rng.hpp"
#include "sobolev_lab/spectral.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <memory>

#ifndef SOBOLEV_LAB_VERSION
#define SOBOLEV_LAB_VERSION "unknown"
#endif

namespace sobolev_cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sobolev_lab;

namespace {

// ---------------------------------------------------------------------------
// Parameters: CLI flags bound to fields, overridable from a JSON file.

class ParamSet {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& ref, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + name, ref, help);
    if constexpr (requires { ref.push_back(ref.front()); }) opt->delimiter(',');
    entries_.push_back({name, opt, [&ref](const json& j) { ref = j.get<T>(); }, [&ref] { return json(ref); }});
    return opt;
  }

  void apply_config(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ValidationError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == key; });
      if (it == entries_.end()) throw ValidationError("unknown config key '" + key + "'");
      if (key == "config") continue;
      if (it->option->count() > 0) continue;  // command line wins
      try {
        it->set(value);
      } catch (const json::exception& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
      }
    }
  }

  json to_json() const {
    json out = json::object();
    for (const auto& e : entries_) {
      if (e.name != "config") out[e.name] = e.get();
    }
    return out;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  std::vector<Entry> entries_;
};

struct Common {
  std::string out_dir = "out";
  std::uint64_t seed = 7;
  unsigned threads = 0;
  std::string config;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

/// Stream ids: an 8-bit tag and two counters.
std::uint64_t sid(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0) { return (tag << 56) | (a << 28) | b; }

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir);
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream p(probe);
    if (!p) throw ValidationError("output directory is not writable: " + dir);
  }
  fs::remove(probe, ec);
  return dir;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& sub, const json& config, const std::vector<std::string>& files,
                    double elapsed) {
  const fs::path path = dir / "manifest.json";
  json doc = json::object();
  if (std::ifstream in(path); in) {
    try {
      doc = json::parse(in);
    } catch (const json::exception&) {
      doc = json::object();
    }
    if (!doc.is_object()) doc = json::object();
  }
  doc["tool"] = "sobolev_lab";
  doc["version"] = SOBOLEV_LAB_VERSION;
  doc["runs"][sub] = {{"config", config}, {"files", files}, {"finished_utc", utc_now()}, {"elapsed_s", elapsed}};
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the list of files it wrote.

using Files = std::vector<std::string>;

struct LandscapeOpts {
  int dim = 2;
  int theta_grid = 64;
  std::vector<int> dims{2, 8, 32};
  int points = 1000;
};

/// Random (w, w*) with sin θ > 0 and ‖w*‖ sin θ/‖w‖ < π/2 (strict convexity of 𝓛).
mc::BasinPoint convex_region_point(GaussianSource& src, Eigen::Index d) {
  const Vector u = src.vector(d).normalized();
  Vector v = src.vector(d);
  v -= v.dot(u) * u;
  v.normalize();
  const double ns = 0.5 + 1.5 * src.uniform();
  const double theta = kPi * src.uniform();
  const double ratio = (kPi / 2.0) / (1.0 + 3.0 * src.uniform());  // ‖w*‖ sin θ / ‖w‖
  const double nw = std::max(ns * std::sin(theta) / ratio, 1e-3 * ns);
  return {nw * (std::cos(theta) * u + std::sin(theta) * v), ns * u};
}

Files cmd_landscape(const Common& c, const LandscapeOpts& o) {
  require(o.dim >= 2, "--dim must be >= 2");
  require(o.theta_grid >= 1, "--theta-grid must be >= 1");
  require(o.points >= 0, "--points must be >= 0");
  for (int d : o.dims) require(d >= 2, "--dims entries must be >= 2");
  const fs::path dir = prepare_dir(c.out_dir);

  {
    CsvWriter csv(dir / "landscape.csv", "theta,alpha,kappa_l2,kappa_h1,lam_min_l2,lam_min_h1");
    for (int i = 1; i <= o.theta_grid; ++i) {
      const double theta = kPi * i / (o.theta_grid + 1);
      Vector ws = Vector::Unit(o.dim, 0);
      Vector w = std::cos(theta) * Vector::Unit(o.dim, 0) + std::sin(theta) * Vector::Unit(o.dim, 1);
      const relu1::HessianReport h = relu1::hessians(w, ws);
      csv.row(theta, *h.geometry.alpha, h.kappa_l2, h.kappa_h1,
              h.spectrum_l2.eigenvalues[h.spectrum_l2.eigenvalues.size() - 1],
              h.eigenvalues_h1[h.eigenvalues_h1.size() - 1]);
    }
  }

  struct Row {
    int dim;
    double theta, as2;
    std::optional<double> kl, kh, kln, khn;
    double top_l2, top_h1, bulk_l2, bulk_h1, low_l2, low_h1;
  };
  std::vector<Row> rows(o.dims.size() * static_cast<std::size_t>(o.points));
  parallel_for(rows.size(), c.threads, [&](std::size_t idx) {
    const std::size_t di = idx / static_cast<std::size_t>(o.points);
    const std::size_t i = idx % static_cast<std::size_t>(o.points);
    const int d = o.dims[di];
    GaussianSource src = gaussian_stream(c.seed, sid(0x11, static_cast<std::uint64_t>(d), i));
    const mc::BasinPoint p = convex_region_point(src, d);
    const relu1::HessianReport h = relu1::hessians(p.w, p.wstar);
    const Vector cl = relu1::closed_form_spectrum(FlowKind::l2, h.geometry, d);
    const Vector ch = relu1::closed_form_spectrum(FlowKind::h1, h.geometry, d);
    const Vector& nl = h.spectrum_l2.eigenvalues;
    const Vector& nh = h.eigenvalues_h1;
    Row r{d, h.geometry.theta, h.geometry.alpha_sin2(), h.kappa_l2, h.kappa_h1, h.kappa_l2_numeric, h.kappa_h1_numeric,
          std::abs(nl[0] - cl[0]), std::abs(nh[0] - ch[0]), 0.0, 0.0,
          std::abs(nl[d - 1] - cl[d - 1]), std::abs(nh[d - 1] - ch[d - 1])};
    for (int k = 1; k + 1 < d; ++k) {
      r.bulk_l2 = std::max(r.bulk_l2, std::abs(nl[k] - cl[k]));
      r.bulk_h1 = std::max(r.bulk_h1, std::abs(nh[k] - ch[k]));
    }
    rows[idx] = r;
  });
  CsvWriter csv(dir / "spectra.csv",
                "point_id,dim,theta,alpha_sin2,kappa_l2,kappa_h1,kappa_l2_numeric,kappa_h1_numeric,"
                "lam_max_err_l2,lam_max_err_h1,bulk_err_l2,bulk_err_h1,low_err_l2,low_err_h1");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv.row(i, r.dim, r.theta, r.as2, r.kl, r.kh, r.kln, r.khn, r.top_l2, r.top_h1, r.bulk_l2, r.bulk_h1, r.low_l2,
            r.low_h1);
  }
  return {"landscape.csv", "spectra.csv"};
}

struct GdOpts {
  int points = 500;
  int dim = 4;
  double eta_factor = 0.9;
};

Files cmd_gd_compare(const Common& c, const GdOpts& o) {
  require(o.points >= 1 && o.dim >= 2, "--points >= 1 and --dim >= 2 required");
  require(o.eta_factor > 0.0, "--eta-factor must be positive");
  const fs::path dir = prepare_dir(c.out_dir);
  {
    CsvWriter csv(dir / "gd_compare.csv",
                  "point_id,theta,norm_w,norm_wstar,eta,max_step_c,err_l2,err_h1,gain_f,in_basin");
    for (int i = 0; i < o.points; ++i) {
      GaussianSource src = gaussian_stream(c.seed, sid(0x21, static_cast<std::uint64_t>(i)));
      const mc::BasinPoint p = mc::random_basin_point(src, o.dim);
      const relu1::GradientBundle b = relu1::population_gradients(p.w, p.wstar);
      const double cmax = relu1::max_step(b, p.w - p.wstar);
      const double eta = o.eta_factor * cmax;
      const relu1::GdCompareReport r = relu1::gd_compare(p.w, p.wstar, eta);
      const PairGeometry g = pair_geometry(p.w, p.wstar);
      csv.row(i, g.theta, g.norm_w, g.norm_wstar, eta, r.max_step_c, r.err_l2, r.err_h1, r.gain_f, r.in_basin);
    }
  }
  CsvWriter csv(dir / "gd_theta0.csv", "scale,eta,max_step_c,err_l2,err_h1,gain_f");
  for (double scale : {0.5, 1.5, 2.0}) {
    const Vector ws = Vector::Unit(2, 0);
    const relu1::GdCompareReport r = relu1::gd_compare(scale * ws, ws, 0.5);
    csv.row(scale, 0.5, r.max_step_c, r.err_l2, r.err_h1, r.gain_f);
  }
  return {"gd_compare.csv", "gd_theta0.csv"};
}

struct FlowOpts {
  std::string kind = "both";
  int dim = 8;
  int inits = 100;
  double step = 1e-3;
  double t_end = 10.0;
  int record_every = 10;
  int form_grid = 1000;
};

Files cmd_flow(const Common& c, const FlowOpts& o) {
  require(o.dim >= 2 && o.inits >= 1, "--dim >= 2 and --inits >= 1 required");
  require(o.step > 0 && o.t_end >= o.step && o.record_every >= 1, "need 0 < --step <= --t-end, --record-every >= 1");
  require(o.form_grid >= 1, "--form-grid must be >= 1");
  const fs::path dir = prepare_dir(c.out_dir);
  std::vector<FlowKind> kinds;
  if (o.kind != "h1") kinds.push_back(FlowKind::l2);
  if (o.kind != "l2") kinds.push_back(FlowKind::h1);

  std::vector<std::vector<FlowTrace>> traces(static_cast<std::size_t>(o.inits));
  parallel_for(traces.size(), c.threads, [&](std::size_t i) {
    GaussianSource src = gaussian_stream(c.seed, sid(0x31, i));
    const mc::BasinPoint p = mc::random_basin_point(src, o.dim);
    for (FlowKind k : kinds) {
      const VectorField field = [k, ws = p.wstar](const Vector& w) { return relu1::flow_rhs(k, w, ws); };
      traces[i].push_back(rk4_integrate(field, p.w, o.step, o.t_end, p.wstar, o.record_every));
    }
  });
  {
    CsvWriter csv(dir / "flow.csv", "init_id,kind,t,v");
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        const FlowTrace& tr = traces[i][k];
        for (std::size_t j = 0; j < tr.times.size(); ++j) csv.row(i, to_string(kinds[k]), tr.times[j], tr.v_values[j]);
      }
    }
  }

  CsvWriter csv(dir / "quadratic_forms.csv",
                "theta,lambda_closed,lambda_numeric,m1_min,m2_min,n1_min,n2_min,n3_min,n4_min,n5_max");
  for (int i = 0; i < o.form_grid; ++i) {
    const double theta = (kPi / 2.0) * i / o.form_grid;
    const relu1::FlowForms f = relu1::flow_quadratic_forms(theta);
    const auto n = relu1::gd_matrices(theta);
    auto lo = [](const Matrix& m) { return symmetric_eigs(m).eigenvalues[1]; };
    csv.row(theta, f.lambda_theta, lo(f.m2), lo(f.m1), lo(f.m2), lo(n[0]), lo(n[1]), lo(n[2]), lo(n[3]),
            symmetric_eigs(n[4]).eigenvalues[0]);
  }
  return {"flow.csv", "quadratic_forms.csv"};
}

struct RelusqOpts {
  int points = 1000;
  int dim = 4;
  int inits = 100;
  double step = 1e-3;
  double t_end = 3.0;
  int record_every = 10;
};

Files cmd_relusq(const Common& c, const RelusqOpts& o) {
  require(o.dim >= 2 && o.points >= 1 && o.inits >= 0, "--dim >= 2, --points >= 1, --inits >= 0 required");
  require(o.step > 0 && o.t_end >= o.step && o.record_every >= 1, "need 0 < --step <= --t-end, --record-every >= 1");
  const fs::path dir = prepare_dir(c.out_dir);
  {
    CsvWriter csv(dir / "relusq.csv", "point_id,theta,inner_i1,inner_i2,inner_i3,guarantee_void");
    for (int i = 0; i < o.points; ++i) {
      GaussianSource src = gaussian_stream(c.seed, sid(0x41, static_cast<std::uint64_t>(i)));
      const mc::BasinPoint p = mc::random_basin_point(src, o.dim, 0.01, 0.999);
      const relusq::DescentReport r = relusq::descent_check(p.w, p.wstar);
      csv.row(i, angle_between(p.w, p.wstar), r.inner[0], r.inner[1], r.inner[2], r.guarantee_void);
    }
  }
  std::vector<std::array<FlowTrace, 2>> traces(static_cast<std::size_t>(o.inits));
  parallel_for(traces.size(), c.threads, [&](std::size_t i) {
    GaussianSource src = gaussian_stream(c.seed, sid(0x42, i));
    const mc::BasinPoint p = mc::random_basin_point(src, o.dim);
    const relusq::H2Field fields[2] = {relusq::H2Field::i1_only, relusq::H2Field::full};
    for (int k = 0; k < 2; ++k) {
      const VectorField f = [fk = fields[k], ws = p.wstar](const Vector& w) { return relusq::flow_rhs(fk, w, ws); };
      traces[i][k] = rk4_integrate(f, p.w, o.step, o.t_end, p.wstar, o.record_every);
    }
  });
  CsvWriter csv(dir / "relusq_flow.csv", "init_id,field,t,v");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      const FlowTrace& tr = traces[i][k];
      for (std::size_t j = 0; j < tr.times.size(); ++j) {
        csv.row(i, k == 0 ? "i1_only" : "full", tr.times[j], tr.v_values[j]);
      }
    }
  }
  return {"relusq.csv", "relusq_flow.csv"};
}

struct MultinodeOpts {
  std::vector<int> ks{2, 4, 8};
  int inits = 100;
  double step = 1e-2;
  double t_max = 500.0;
  int ratio_starts = 8;
  double ratio_radius = 1e-2;
  double ratio_step = 1e-3;
  double diag_t_end = 10.0;
  double diag_step = 1e-3;
};

Files cmd_multinode(const Common& c, const MultinodeOpts& o) {
  for (int k : o.ks) require(k >= 2, "--ks entries must be >= 2");
  require(o.inits >= 0 && o.ratio_starts >= 0, "--inits and --ratio-starts must be >= 0");
  require(o.step > 0 && o.t_max > o.step && o.ratio_step > 0 && o.diag_step > 0 && o.diag_t_end > o.diag_step,
          "step sizes must be positive and below their horizons");
  require(o.ratio_radius > criteria::kRatioTol && o.ratio_radius < 0.5, "--ratio-radius must lie in (1e-4, 0.5)");
  const fs::path dir = prepare_dir(c.out_dir);

  {
    struct Row {
      double x0, y0;
      std::optional<double> t;
      double final_dist;
    };
    CsvWriter csv(dir / "multinode_omega.csv", "k,init_id,x0,y0,reached,t_reach,final_dist");
    for (int k : o.ks) {
      std::vector<Row> rows(static_cast<std::size_t>(o.inits));
      parallel_for(rows.size(), c.threads, [&](std::size_t i) {
        GaussianSource src = gaussian_stream(c.seed, sid(0x51, static_cast<std::uint64_t>(k), i));
        double a = src.uniform();
        double b = src.uniform();
        if (b > a) std::swap(a, b);
        if (a == b) b *= 0.5;
        Row r{a, b, multinode::time_to_reach(FlowKind::h1, {a, b, k}, criteria::kReachTol, o.step, o.t_max), 0.0};
        if (!r.t) {
          Vector p0(2);
          p0 << a, b;
          const Vector target = Vector::Unit(2, 0);
          const FlowTrace tr = rk4_integrate(multinode::reduced_vector_field(FlowKind::h1, k), p0, o.step, o.t_max,
                                             target, 1 << 30);
          r.final_dist = std::sqrt(tr.v_values.back());
        }
        rows[i] = r;
      });
      for (std::size_t i = 0; i < rows.size(); ++i) {
        csv.row(k, i, rows[i].x0, rows[i].y0, rows[i].t.has_value(), rows[i].t, rows[i].final_dist);
      }
    }
  }
  {
    CsvWriter csv(dir / "multinode_ratio.csv", "k,start_id,x0,y0,t_l2,t_h1,ratio");
    for (int k : o.ks) {
      for (int j = 0; j < o.ratio_starts; ++j) {
        const double phi = (kPi / 2.0) * (j + 0.5) / o.ratio_starts;
        const multinode::ReducedState s{1.0 - o.ratio_radius * std::cos(phi), o.ratio_radius * std::sin(phi), k};
        const auto tl = multinode::time_to_reach(FlowKind::l2, s, criteria::kRatioTol, o.ratio_step, 1e3);
        const auto th = multinode::time_to_reach(FlowKind::h1, s, criteria::kRatioTol, o.ratio_step, 1e3);
        std::optional<double> ratio;
        if (tl && th && *th > 0) ratio = *tl / *th;
        csv.row(k, j, s.x, s.y, tl, th, ratio);
      }
    }
  }
  {
    CsvWriter csv(dir / "multinode_diagonal.csv", "k,kind,x_star,exponent,expected,rel_err,max_transverse");
    for (int k : o.ks) {
      for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
        const auto dd = multinode::diagonal_decay(kind, k, 1.0, o.diag_t_end, o.diag_step);
        const double expected = kind == FlowKind::l2 ? -k / 2.0 : -static_cast<double>(k);
        csv.row(k, to_string(kind), dd.x_star, dd.exponent, expected, std::abs(dd.exponent / expected - 1.0),
                dd.max_transverse);
      }
    }
  }
  {
    // closed forms next to a bisection root of the diagonal field
    auto diagonal_root = [](FlowKind kind, int k) {
      double lo = 1e-3, hi = 1.0;
      const double sign_lo = multinode::reduced_field(kind, {lo, lo, k}).xdot > 0 ? 1.0 : -1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (multinode::reduced_field(kind, {mid, mid, k}).xdot * sign_lo > 0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    CsvWriter csv(dir / "multinode_saddle.csv", "k,x_l2,x_h1,root_l2,root_h1,field_l2,field_h1");
    for (int k : o.ks) {
      const auto sp = multinode::saddle_points(k);
      const auto fl = multinode::reduced_field(FlowKind::l2, {sp.x_l2, sp.x_l2, k});
      const auto fh = multinode::reduced_field(FlowKind::h1, {sp.x_h1, sp.x_h1, k});
      csv.row(k, sp.x_l2, sp.x_h1, diagonal_root(FlowKind::l2, k), diagonal_root(FlowKind::h1, k),
              std::max(std::abs(fl.xdot), std::abs(fl.ydot)), std::max(std::abs(fh.xdot), std::abs(fh.ydot)));
    }
  }
  {
    // Jacobian of the reduced field at (1, 0), one-sided in y (the flow lives in y >= 0).
    CsvWriter csv(dir / "multinode_linear.csv", "k,kind,paper_lambda_1,paper_lambda_2,measured_lambda_1,measured_lambda_2");
    for (int k : o.ks) {
      const auto lin = multinode::linearization(k);
      for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
        const double h = 1e-7;
        auto f = [&](double x, double y) { return multinode::reduced_field(kind, {x, y, k}); };
        const auto xp = f(1.0 + h, 0.0);
        const auto xm = f(1.0 - h, 0.0);
        const auto yp = f(1.0, h);
        const auto base = f(1.0, 0.0);
        Matrix jac(2, 2);
        jac << -(xp.xdot - xm.xdot) / (2 * h), -(yp.xdot - base.xdot) / h, -(xp.ydot - xm.ydot) / (2 * h),
            -(yp.ydot - base.ydot) / h;
        const auto measured = multinode::eigs_2x2(jac);
        const auto& paper = kind == FlowKind::l2 ? lin.eigs_l2 : lin.eigs_h1;
        csv.row(k, to_string(kind), paper[0], paper[1], measured[0], measured[1]);
      }
    }
  }
  return {"multinode_omega.csv", "multinode_ratio.csv", "multinode_diagonal.csv", "multinode_saddle.csv",
          "multinode_linear.csv"};
}

struct ToeplitzOpts {
  std::vector<int> ks{3, 5, 8};
  double h = 1e-6;
};

Files cmd_toeplitz(const Common& c, const ToeplitzOpts& o) {
  for (int k : o.ks) require(k >= 2, "--ks entries must be >= 2");
  require(o.h > 0 && o.h < 0.1, "--fd-step must lie in (0, 0.1)");
  const fs::path dir = prepare_dir(c.out_dir);
  CsvWriter eig_csv(dir / "toeplitz.csv", "k,kind,index,eigenvalue_re,eigenvalue_im,expected");
  CsvWriter jac_csv(dir / "toeplitz_jacobian.csv", "k,max_abs_h1_minus_2l2");
  for (int k : o.ks) {
    const Vector e1 = Vector::Unit(k, 0);
    Matrix jac[2];
    for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
      const VectorField f = [kind](const Vector& t) { return multinode::toeplitz_field(kind, t); };
      // ṫ ≈ −M (t − e₁): report the spectrum of M = −J
      Matrix m = -multinode::numeric_jacobian(f, e1, o.h);
      const Eigen::EigenSolver<Matrix> es(m, false);
      std::vector<std::pair<double, double>> ev;
      for (Eigen::Index i = 0; i < k; ++i) ev.emplace_back(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
      std::sort(ev.begin(), ev.end());
      const double scale = kind == FlowKind::l2 ? 1.0 : 2.0;
      for (int i = 0; i < k; ++i) {
        const double expected = scale * (i + 1 < k ? 0.25 : (k + 1) / 4.0);
        eig_csv.row(k, to_string(kind), i, ev[static_cast<std::size_t>(i)].first,
                    ev[static_cast<std::size_t>(i)].second, expected);
      }
      jac[kind == FlowKind::l2 ? 0 : 1] = m;
    }
    jac_csv.row(k, (jac[1] - 2.0 * jac[0]).cwiseAbs().maxCoeff());
  }
  (void)c;
  return {"toeplitz.csv", "toeplitz_jacobian.csv"};
}

struct SgdOpts {
  int dim = 16;
  double lr = 1e-2;
  int batch = 64;
  int n_train = 10000;
  int seeds = 12;
  int steps = 2000;
  int log_every = 10;
};

Files cmd_sgd(const Common& c, const SgdOpts& o) {
  require(o.dim >= 2 && o.batch >= 1 && o.n_train >= 1 && o.seeds >= 1 && o.steps >= 0 && o.log_every >= 1,
          "--dim >= 2, --batch/--n-train/--seeds/--log-every >= 1, --steps >= 0 required");
  require(o.lr >= 0.0, "--lr must be >= 0");
  const fs::path dir = prepare_dir(c.out_dir);
  std::vector<mc::SgdTrace> traces(2 * static_cast<std::size_t>(o.seeds));
  parallel_for(traces.size(), c.threads, [&](std::size_t i) {
    mc::SgdConfig cfg;
    cfg.dim = o.dim;
    cfg.batch_size = static_cast<std::size_t>(o.batch);
    cfg.n_train = static_cast<std::size_t>(o.n_train);
    cfg.learning_rate = o.lr;
    cfg.n_steps = static_cast<std::size_t>(o.steps);
    cfg.seed = c.seed * 1000003ULL + i / 2;
    cfg.loss_kind = i % 2 == 0 ? FlowKind::l2 : FlowKind::h1;
    cfg.log_every = static_cast<std::size_t>(o.log_every);
    traces[i] = mc::sgd_run(cfg);
  });
  CsvWriter csv(dir / "sgd.csv", "seed,kind,step,err_sq,kappa");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const mc::SgdTrace& tr = traces[i];
    if (tr.diverged_at) throw LabError(ErrorKind::non_finite, "sgd diverged at step " + std::to_string(*tr.diverged_at));
    for (std::size_t j = 0; j < tr.steps.size(); ++j) {
      csv.row(i / 2, i % 2 == 0 ? "l2" : "h1", tr.steps[j], tr.err_sq[j], tr.kappa[j]);
    }
  }
  return {"sgd.csv"};
}

struct VerifyOpts {
  std::vector<int> dims{4, 16, 64};
  int n_min = 10;
  int n_max = 17;
  int trials = 8;
  int pointwise_points = 5;
  long pointwise_n = 1'000'000;
  std::vector<std::string> targets{"all"};
};

std::vector<mc::Target> parse_targets(const std::vector<std::string>& names) {
  std::vector<mc::Target> out;
  for (const std::string& n : names) {
    if (n == "all") {
      for (const auto& t : mc::kTargets) out.push_back(t.target);
      continue;
    }
    bool found = false;
    for (const auto& t : mc::kTargets) {
      if (n == std::string(t.model) + ":" + t.kind) {
        out.push_back(t.target);
        found = true;
      }
    }
    require(found, "unknown target '" + n + "' (use all or model:kind, e.g. relu:l2)");
  }
  return out;
}

Files cmd_verify(const Common& c, const VerifyOpts& o) {
  for (int d : o.dims) require(d >= 2, "--dims entries must be >= 2");
  require(o.n_min >= 1 && o.n_max >= o.n_min && o.n_max <= 30, "need 1 <= --n-min <= --n-max <= 30");
  require(o.trials >= 1 && o.pointwise_points >= 0 && o.pointwise_n >= 2, "bad trial/point counts");
  const auto targets = parse_targets(o.targets);
  const fs::path dir = prepare_dir(c.out_dir);
  std::vector<Eigen::Index> dims(o.dims.begin(), o.dims.end());
  std::vector<int> grid;
  for (int n = o.n_min; n <= o.n_max; ++n) grid.push_back(n);
  {
    CsvWriter csv(dir / "convergence.csv", "model,kind,dim,log2_n,mse");
    for (mc::Target t : targets) {
      const auto& info = mc::info(t);
      for (const auto& r : mc::convergence_study(t, dims, grid, o.trials, c.seed, c.threads)) {
        csv.row(info.model, info.kind, r.dim, r.log2_n, r.mse);
      }
    }
  }
  CsvWriter csv(dir / "pointwise.csv", "model,kind,dim,point_id,component,closed,mc_mean,std_error,z");
  for (mc::Target t : targets) {
    const auto& info = mc::info(t);
    for (Eigen::Index d : dims) {
      for (int p = 0; p < o.pointwise_points; ++p) {
        GaussianSource geom = gaussian_stream(c.seed, sid(0x71, static_cast<std::uint64_t>(t) * 4096 + d, p));
        mc::McConfig cfg;
        cfg.n_samples = static_cast<std::size_t>(o.pointwise_n);
        cfg.seed = c.seed;
        cfg.threads = c.threads;
        cfg.stream = sid(0x72, static_cast<std::uint64_t>(t) * 4096 + d, p);
        const auto g = mc::compare_gradient(t, geom, d, cfg);
        for (Eigen::Index i = 0; i < g.closed.size(); ++i) {
          const double diff = g.mc.mean[i] - g.closed[i];
          const double se = g.mc.std_error[i];
          const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : std::numeric_limits<double>::infinity());
          csv.row(info.model, info.kind, d, p, i, g.closed[i], g.mc.mean[i], se, z);
        }
      }
    }
  }
  return {"convergence.csv", "pointwise.csv"};
}

struct LinearOpts {
  int n = 50;
  int dim = 5;
  double sigma = 1.0;
  std::vector<double> lambdas{0.1, 1.0, 10.0};
  int trials = 10000;
  int designs = 5;
};

Files cmd_linear(const Common& c, const LinearOpts& o) {
  require(o.dim >= 1 && o.n >= o.dim, "need --n >= --dim >= 1");
  require(o.sigma >= 0 && o.trials >= 2 && o.designs >= 0, "need --sigma >= 0, --trials >= 2, --designs >= 0");
  for (double l : o.lambdas) require(l >= 0, "--lambdas entries must be >= 0");
  const fs::path dir = prepare_dir(c.out_dir);
  CsvWriter csv(dir / "linear.csv",
                "design,lambda,kappa_l2,kappa_h1,var_l2,var_h1,formula_l2,formula_h1,bias_z_max");
  auto emit = [&](const std::string& name, linear::LinearProblem p, std::uint64_t stream) {
    for (double lambda : o.lambdas) {
      p.ridge_lambda = lambda;
      const auto cond = linear::conditioning(p);
      const auto v = linear::variance_study(p, o.trials, c.seed ^ (stream << 32), c.threads);
      double z = 0.0;
      for (Eigen::Index i = 0; i < p.wstar.size(); ++i) {
        if (v.mean_se_l2[i] > 0) z = std::max(z, std::abs(v.mean_l2[i] - p.wstar[i]) / v.mean_se_l2[i]);
        if (v.mean_se_h1[i] > 0) z = std::max(z, std::abs(v.mean_h1[i] - p.wstar[i]) / v.mean_se_h1[i]);
      }
      csv.row(name, lambda, cond.kappa_l2, cond.kappa_h1, v.var_l2, v.var_h1, v.formula_l2, v.formula_h1, z);
    }
  };
  // orthogonal design with XᵀX eigenvalues {4, 1}
  linear::LinearProblem orth;
  orth.x_matrix = Matrix::Zero(2, 2);
  orth.x_matrix(0, 0) = 2.0;
  orth.x_matrix(1, 1) = 1.0;
  orth.wstar = Vector::Ones(2);
  orth.noise_sigma = o.sigma;
  emit("orth", orth, 1000);
  for (int d = 0; d < o.designs; ++d) {
    emit("g" + std::to_string(d), linear::random_problem(c.seed, 0x81 + d, o.n, o.dim, o.sigma, 0.0),
         static_cast<std::uint64_t>(d));
  }
  return {"linear.csv"};
}

struct ChebOpts {
  int n_max = 20;
};

Files cmd_chebyshev(const Common& c, const ChebOpts& o) {
  require(o.n_max >= 1 && o.n_max <= 200, "--n-max must lie in [1, 200]");
  const fs::path dir = prepare_dir(c.out_dir);
  {
    CsvWriter csv(dir / "chebyshev.csv", "n,k,max_err,tol");
    for (int n = 1; n <= o.n_max; ++n) {
      const Vector x = spectral::cheb_points(n);
      const Matrix d = spectral::cheb_diff_matrix(n);
      for (int k = 0; k <= n; ++k) {
        const Vector f = x.array().pow(k).matrix();
        const Vector df = k == 0 ? Vector::Zero(n + 1) : Vector((k * x.array().pow(k - 1)).matrix());
        csv.row(n, k, (d * f - df).cwiseAbs().maxCoeff(), criteria::kChebTolPerN2 * n * n);
      }
    }
  }
  {
    CsvWriter csv(dir / "chebyshev_n1.csv", "row,col,value");
    const Matrix d = spectral::cheb_diff_matrix(1);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) csv.row(i, j, d(i, j));
    }
  }
  CsvWriter csv(dir / "fdm.csv", "h,max_interior_err");
  for (int level = 0; level < 6; ++level) {
    const int m = 10 * (1 << level) + 1;
    const Vector grid = Vector::LinSpaced(m, 0.0, 1.0);
    const Matrix d = spectral::fdm_diff_matrix(grid);
    const Vector err = d * grid.array().cube().matrix() - (3.0 * grid.array().square()).matrix();
    csv.row(1.0 / (m - 1), err.segment(1, m - 2).cwiseAbs().maxCoeff());
  }
  (void)c;
  return {"chebyshev.csv", "chebyshev_n1.csv", "fdm.csv"};
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sobolev-training numerical laboratory", "sobolev_lab"};
  app.require_subcommand(1, 1);

  Common common;
  LandscapeOpts landscape;
  GdOpts gd;
  FlowOpts flow;
  RelusqOpts relusq;
  MultinodeOpts multinode;
  ToeplitzOpts toeplitz;
  SgdOpts sgd;
  VerifyOpts verify;
  LinearOpts lin;
  ChebOpts cheb;

  std::map<CLI::App*, std::unique_ptr<ParamSet>> params;
  std::map<CLI::App*, std::function<Files()>> actions;

  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->option_defaults()->always_capture_default();
    auto ps = std::make_unique<ParamSet>();
    ps->add(s, "out-dir", common.out_dir, "output directory (created if absent)");
    ps->add(s, "seed", common.seed, "base random seed");
    ps->add(s, "threads", common.threads, "worker cap; 0 uses SOBOLEV_LAB_THREADS or all cores");
    ps->add(s, "config", common.config, "JSON file with option values; flags override it");
    ParamSet* raw = ps.get();
    params[s] = std::move(ps);
    return std::pair{s, raw};
  };

  {
    auto [s, p] = sub("landscape", "Hessian spectra and condition numbers of a single ReLU node");
    p->add(s, "dim", landscape.dim, "dimension of the theta sweep");
    p->add(s, "theta-grid", landscape.theta_grid, "number of interior theta values in (0, pi)");
    p->add(s, "dims", landscape.dims, "dimensions for the random-point check");
    p->add(s, "points", landscape.points, "random points per dimension");
    actions[s] = [&] { return cmd_landscape(common, landscape); };
  }
  {
    auto [s, p] = sub("gd-compare", "one gradient step under L2 and H1");
    p->add(s, "points", gd.points, "random basin points");
    p->add(s, "dim", gd.dim, "dimension");
    p->add(s, "eta-factor", gd.eta_factor, "step size as a fraction of the bound C");
    actions[s] = [&] { return cmd_gd_compare(common, gd); };
  }
  {
    auto [s, p] = sub("flow", "population gradient flows of a single ReLU node");
    p->add(s, "kind", flow.kind, "l2, h1 or both")->check(CLI::IsMember({"l2", "h1", "both"}));
    p->add(s, "dim", flow.dim, "dimension");
    p->add(s, "inits", flow.inits, "random basin initializations");
    p->add(s, "step", flow.step, "RK4 step");
    p->add(s, "t-end", flow.t_end, "final time");
    p->add(s, "record-every", flow.record_every, "write every n-th step");
    p->add(s, "form-grid", flow.form_grid, "theta grid size on [0, pi/2) for the quadratic forms");
    actions[s] = [&] { return cmd_flow(common, flow); };
  }
  {
    auto [s, p] = sub("relusq", "ReLU^2 node under the H2 loss");
    p->add(s, "points", relusq.points, "random basin points for the descent check");
    p->add(s, "dim", relusq.dim, "dimension");
    p->add(s, "inits", relusq.inits, "flow initializations");
    p->add(s, "step", relusq.step, "RK4 step");
    p->add(s, "t-end", relusq.t_end, "final time");
    p->add(s, "record-every", relusq.record_every, "write every n-th step");
    actions[s] = [&] { return cmd_relusq(common, relusq); };
  }
  {
    auto [s, p] = sub("multinode", "reduced (x, y) dynamics of the K-node network");
    p->add(s, "ks", multinode.ks, "node counts");
    p->add(s, "inits", multinode.inits, "random starts in the region x > y per K");
    p->add(s, "step", multinode.step, "RK4 step for the random starts");
    p->add(s, "t-max", multinode.t_max, "time limit for the random starts");
    p->add(s, "ratio-starts", multinode.ratio_starts, "starts near (1, 0) for the L2/H1 time ratio");
    p->add(s, "ratio-radius", multinode.ratio_radius, "distance of those starts from (1, 0)");
    p->add(s, "ratio-step", multinode.ratio_step, "RK4 step for the ratio runs");
    p->add(s, "diag-t-end", multinode.diag_t_end, "horizon of the diagonal decay fit");
    p->add(s, "diag-step", multinode.diag_step, "RK4 step on the diagonal");
    actions[s] = [&] { return cmd_multinode(common, multinode); };
  }
  {
    auto [s, p] = sub("toeplitz", "Jacobian of the Toeplitz-parametrized field at e1");
    p->add(s, "ks", toeplitz.ks, "node counts");
    p->add(s, "fd-step", toeplitz.h, "central-difference step");
    actions[s] = [&] { return cmd_toeplitz(common, toeplitz); };
  }
  {
    auto [s, p] = sub("sgd", "minibatch SGD on a fixed Gaussian dataset");
    p->add(s, "dim", sgd.dim, "dimension");
    p->add(s, "lr", sgd.lr, "learning rate");
    p->add(s, "batch", sgd.batch, "batch size");
    p->add(s, "n-train", sgd.n_train, "training set size");
    p->add(s, "seeds", sgd.seeds, "number of seeds");
    p->add(s, "steps", sgd.steps, "SGD steps");
    p->add(s, "log-every", sgd.log_every, "write every n-th step");
    actions[s] = [&] { return cmd_sgd(common, sgd); };
  }
  {
    auto [s, p] = sub("verify-gradients", "Monte-Carlo check of every closed-form gradient");
    p->add(s, "dims", verify.dims, "dimensions");
    p->add(s, "n-min", verify.n_min, "smallest log2 sample count");
    p->add(s, "n-max", verify.n_max, "largest log2 sample count");
    p->add(s, "trials", verify.trials, "random geometries per cell");
    p->add(s, "pointwise-points", verify.pointwise_points, "points per (target, dim) for the z-score check");
    p->add(s, "pointwise-n", verify.pointwise_n, "samples per pointwise estimate");
    p->add(s, "targets", verify.targets, "all, or model:kind among relu:l2 relu:h1_semi relu_sq:i1 relu_sq:i2 "
                                         "relu_sq:i3 multinode:l2 multinode:h1");
    actions[s] = [&] { return cmd_verify(common, verify); };
  }
  {
    auto [s, p] = sub("linear", "least squares against the anchored ridge estimator");
    p->add(s, "n", lin.n, "rows of the random designs");
    p->add(s, "dim", lin.dim, "columns of the random designs");
    p->add(s, "sigma", lin.sigma, "noise standard deviation");
    p->add(s, "lambdas", lin.lambdas, "ridge strengths");
    p->add(s, "trials", lin.trials, "noise draws per (design, lambda)");
    p->add(s, "designs", lin.designs, "random Gaussian designs");
    actions[s] = [&] { return cmd_linear(common, lin); };
  }
  {
    auto [s, p] = sub("chebyshev", "Chebyshev and finite-difference differentiation matrices");
    p->add(s, "n-max", cheb.n_max, "largest polynomial order");
    actions[s] = [&] { return cmd_chebyshev(common, cheb); };
  }
  {
    auto [s, p] = sub("summarize", "evaluate acceptance criteria from the CSVs in --out-dir");
    (void)p;
    actions[s] = [&]() -> Files {
      const json report = summarize(common.out_dir);
      out << report.dump(2) << "\n";
      return {"report.json"};
    };
  }

  std::vector<std::string> argv_store{"sobolev_lab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
    CLI::App* chosen = app.get_subcommands().front();
    ParamSet& ps = *params.at(chosen);
    ps.apply_config(common.config);
    const auto t0 = std::chrono::steady_clock::now();
    const Files files = actions.at(chosen)();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (chosen->get_name() != "summarize") {
      write_manifest(common.out_dir, chosen->get_name(), ps.to_json(), files, elapsed);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const LabError& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::dimension_mismatch:
      case ErrorKind::domain:
      case ErrorKind::unsupported:
      case ErrorKind::zero_vector: return kExitValidation;
      default: return kExitInternal;
    }
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace sobolev_cli
