// Reads the CSVs of a results directory and grades each acceptance criterion.
#include "cli.hpp"

#include "csv.hpp"

#include "sobolev_lab/criteria.hpp"
#include "sobolev_lab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace sobolev_cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
namespace crit = sobolev_lab::criteria;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grade {
  bool pass = true;
  json measured = json::object();
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
  json to_json() const {
    return {{"status", pass ? "pass" : "fail"}, {"measured", measured}, {"failures", failures}};
  }
};

json missing(const std::string& file) { return {{"status", "missing"}, {"missing", file}}; }

double max_abs(const CsvTable& t, const std::string& col) {
  double m = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double v = t.num(r, col);
    m = std::isnan(v) ? kInf : std::max(m, std::abs(v));
  }
  return m;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Elapsed seconds recorded in the manifest for a subcommand.
std::optional<double> elapsed(const json& manifest, const std::string& sub) {
  if (!manifest.contains("runs") || !manifest["runs"].contains(sub)) return std::nullopt;
  return manifest["runs"][sub].value("elapsed_s", kInf);
}

void check_runtime(Grade& g, const json& manifest, const std::string& sub, double limit) {
  const auto e = elapsed(manifest, sub);
  g.measured["elapsed_s"] = e ? json(*e) : json(nullptr);
  g.check(e && *e < limit, sub + " runtime " + (e ? std::to_string(*e) : std::string("unknown")) + " s >= " +
                               std::to_string(limit) + " s");
}

json grade_c1(const fs::path& dir, const json& manifest) {
  const auto sweep = read_csv(dir / "landscape.csv");
  const auto t = read_csv(dir / "spectra.csv");
  if (!sweep && !t) return missing("spectra.csv");
  Grade g;
  if (sweep) {
    std::size_t sweep_violations = 0;
    for (std::size_t r = 0; r < sweep->rows.size(); ++r) {
      if (sweep->num(r, "theta") > crit::kThetaStrict && !(sweep->num(r, "kappa_h1") < sweep->num(r, "kappa_l2"))) {
        ++sweep_violations;
      }
    }
    g.measured["sweep_order_violations"] = sweep_violations;
    g.check(sweep_violations == 0, "kappa_h1 < kappa_l2 violated on the theta sweep");
  }
  if (!t) {
    g.check(false, "spectra.csv missing");
    return g.to_json();
  }
  double rel_l2 = 0.0, rel_h1 = 0.0;
  std::size_t order_violations = 0;
  std::map<int, std::size_t> per_dim;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    const double kl = t->num(r, "kappa_l2"), kh = t->num(r, "kappa_h1");
    const double kln = t->num(r, "kappa_l2_numeric"), khn = t->num(r, "kappa_h1_numeric");
    auto rel = [](double num, double form) { return std::isnan(num) || std::isnan(form) ? kInf : std::abs(num - form) / form; };
    rel_l2 = std::max(rel_l2, rel(kln, kl));
    rel_h1 = std::max(rel_h1, rel(khn, kh));
    if (t->num(r, "theta") > crit::kThetaStrict && !(kh < kl)) ++order_violations;
    ++per_dim[static_cast<int>(t->num(r, "dim"))];
  }
  g.measured["max_rel_err_kappa_l2"] = rel_l2;
  g.measured["max_rel_err_kappa_h1"] = rel_h1;
  g.measured["strict_order_violations"] = order_violations;
  g.measured["points_per_dim"] = per_dim;
  g.check(rel_l2 <= crit::kKappaRelTol, "kappa_l2 relative error above tolerance");
  g.check(rel_h1 <= crit::kKappaRelTol, "kappa_h1 relative error above tolerance");
  g.check(order_violations == 0, "kappa_h1 < kappa_l2 violated");
  for (int d : {2, 8, 32}) {
    g.check(per_dim[d] >= static_cast<std::size_t>(crit::kLandscapePoints), "fewer than 1000 points at d=" + std::to_string(d));
  }
  check_runtime(g, manifest, "landscape", crit::kLandscapeSeconds);
  return g.to_json();
}

json grade_c2(const fs::path& dir) {
  const auto t = read_csv(dir / "spectra.csv");
  if (!t) return missing("spectra.csv");
  Grade g;
  for (const char* col : {"lam_max_err_l2", "lam_max_err_h1", "bulk_err_l2", "bulk_err_h1"}) {
    const double m = max_abs(*t, col);
    g.measured[col] = m;
    g.check(m <= crit::kSpectrumTol, std::string(col) + " above tolerance");
  }
  g.measured["low_err_l2"] = max_abs(*t, "low_err_l2");
  g.measured["low_err_h1"] = max_abs(*t, "low_err_h1");
  g.check(!t->rows.empty(), "no spectra rows");
  return g.to_json();
}

json grade_c3(const fs::path& dir) {
  const auto t = read_csv(dir / "gd_compare.csv");
  const auto z = read_csv(dir / "gd_theta0.csv");
  if (!t) return missing("gd_compare.csv");
  if (!z) return missing("gd_theta0.csv");
  Grade g;
  double min_f = kInf;
  std::size_t bound_violations = 0;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    const double el = t->num(r, "err_l2"), eh = t->num(r, "err_h1"), f = t->num(r, "gain_f");
    min_f = std::min(min_f, std::isnan(f) ? -kInf : f);
    // one rounding unit of err_l2 separates err_h1 from err_l2 − F
    if (!(eh <= el - f + 4.0 * std::numeric_limits<double>::epsilon() * el)) ++bound_violations;
  }
  double c_err = 0.0;
  for (std::size_t r = 0; r < z->rows.size(); ++r) c_err = std::max(c_err, std::abs(z->num(r, "max_step_c") - 4.0 / 3.0));
  g.measured["points"] = t->rows.size();
  g.measured["min_gain_f"] = min_f;
  g.measured["bound_violations"] = bound_violations;
  g.measured["theta0_c_max_err"] = c_err;
  g.check(t->rows.size() >= static_cast<std::size_t>(crit::kGdPoints), "fewer than 500 points");
  g.check(min_f > 0.0, "F > 0 violated");
  g.check(bound_violations == 0, "err_h1 <= err_l2 - F violated");
  g.check(!z->rows.empty() && c_err <= crit::kGdTheta0Tol, "theta=0 bound C differs from 4/3");
  return g.to_json();
}

json grade_c4(const fs::path& dir, const json& manifest) {
  const auto t = read_csv(dir / "flow.csv");
  if (!t) return missing("flow.csv");
  Grade g;
  // (init, t) -> V per kind
  std::map<std::pair<long, std::string>, std::pair<double, double>> v;
  std::map<std::pair<long, std::string>, double> last;  // (init, kind) -> final V
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    const long id = std::stol(t->str(r, "init_id"));
    const std::string& kind = t->str(r, "kind");
    auto& cell = v[{id, t->str(r, "t")}];
    (kind == "l2" ? cell.first : cell.second) = t->num(r, "v");
    last[{id, kind}] = t->num(r, "v");
  }
  std::size_t order_violations = 0;
  for (const auto& [key, p] : v) {
    if (!(p.second <= p.first)) ++order_violations;
  }
  double max_final_l2 = 0.0, max_final_h1 = 0.0;
  std::set<long> inits;
  for (const auto& [key, val] : last) {
    inits.insert(key.first);
    double& m = key.second == "l2" ? max_final_l2 : max_final_h1;
    m = std::max(m, std::isnan(val) ? kInf : val);
  }
  g.measured["inits"] = inits.size();
  g.measured["order_violations"] = order_violations;
  g.measured["max_final_v_l2"] = max_final_l2;
  g.measured["max_final_v_h1"] = max_final_h1;
  g.check(inits.size() >= static_cast<std::size_t>(crit::kFlowInits), "fewer than 100 inits");
  g.check(order_violations == 0, "V_H1(t) <= V_L2(t) violated");
  g.check(max_final_l2 < crit::kFlowTarget, "L2 flow does not reach V < 1e-8");
  g.check(max_final_h1 < crit::kFlowTarget, "H1 flow does not reach V < 1e-8");
  check_runtime(g, manifest, "flow", crit::kFlowSeconds);
  return g.to_json();
}

json grade_c5(const fs::path& dir) {
  const auto t = read_csv(dir / "quadratic_forms.csv");
  if (!t) return missing("quadratic_forms.csv");
  Grade g;
  double lam_err = 0.0, psd_min = kInf, n5_max = -kInf;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    lam_err = std::max(lam_err, std::abs(t->num(r, "lambda_closed") - t->num(r, "lambda_numeric")));
    for (const char* c : {"m1_min", "m2_min", "n1_min", "n2_min", "n3_min", "n4_min"}) psd_min = std::min(psd_min, t->num(r, c));
    n5_max = std::max(n5_max, t->num(r, "n5_max"));
  }
  g.measured["grid"] = t->rows.size();
  g.measured["max_lambda_err"] = lam_err;
  g.measured["min_psd_eigenvalue"] = psd_min;
  g.measured["max_n5_eigenvalue"] = n5_max;
  g.check(t->rows.size() >= static_cast<std::size_t>(crit::kFormGrid), "theta grid smaller than 1000");
  g.check(lam_err <= crit::kLambdaTol, "lambda(theta) differs from numeric lambda_min(M2)");
  g.check(psd_min >= -crit::kPsdTol, "a PSD form has a negative eigenvalue");
  g.check(n5_max <= crit::kPsdTol, "N5 is not NSD");
  return g.to_json();
}

json grade_c6(const fs::path& dir) {
  const auto t = read_csv(dir / "relusq.csv");
  const auto f = read_csv(dir / "relusq_flow.csv");
  if (!t) return missing("relusq.csv");
  if (!f) return missing("relusq_flow.csv");
  Grade g;
  std::size_t violations = 0;
  double worst = -kInf;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    for (const char* c : {"inner_i1", "inner_i2", "inner_i3"}) {
      const double v = t->num(r, c);
      worst = std::max(worst, std::isnan(v) ? kInf : v);
      if (!(v < 0.0)) ++violations;
    }
  }
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> v;  // (init, t) -> (i1_only, full)
  for (std::size_t r = 0; r < f->rows.size(); ++r) {
    auto& cell = v[{f->str(r, "init_id"), f->str(r, "t")}];
    (f->str(r, "field") == "i1_only" ? cell.first : cell.second) = f->num(r, "v");
  }
  std::size_t flow_violations = 0;
  std::set<std::string> inits;
  for (const auto& [key, p] : v) {
    inits.insert(key.first);
    if (std::stod(key.second) > 0.0 && !(p.second < p.first)) ++flow_violations;
  }
  g.measured["points"] = t->rows.size();
  g.measured["max_inner_product"] = worst;
  g.measured["inner_product_violations"] = violations;
  g.measured["flow_inits"] = inits.size();
  g.measured["flow_violations"] = flow_violations;
  g.check(t->rows.size() >= static_cast<std::size_t>(crit::kRelusqPoints), "fewer than 1000 points");
  g.check(violations == 0, "an inner product is not negative");
  g.check(inits.size() >= static_cast<std::size_t>(crit::kRelusqInits), "fewer than 100 flow inits");
  g.check(flow_violations == 0, "H2 flow V(t) not below the I1-only V(t)");
  return g.to_json();
}

json grade_c7(const fs::path& dir) {
  const auto om = read_csv(dir / "multinode_omega.csv");
  const auto ra = read_csv(dir / "multinode_ratio.csv");
  const auto di = read_csv(dir / "multinode_diagonal.csv");
  const auto sa = read_csv(dir / "multinode_saddle.csv");
  for (const auto& [tab, name] : {std::pair{&om, "multinode_omega.csv"}, {&ra, "multinode_ratio.csv"},
                                  {&di, "multinode_diagonal.csv"}, {&sa, "multinode_saddle.csv"}}) {
    if (!*tab) return missing(name);
  }
  Grade g;
  std::size_t unreached = 0;
  for (std::size_t r = 0; r < om->rows.size(); ++r) unreached += om->str(r, "reached") != "1";
  g.measured["omega_starts"] = om->rows.size();
  g.measured["omega_unreached"] = unreached;
  g.check(!om->rows.empty() && unreached == 0, "an H1 flow from Omega does not reach (1, 0)");

  double rmin = kInf, rmax = -kInf;
  for (std::size_t r = 0; r < ra->rows.size(); ++r) {
    const double v = ra->num(r, "ratio");
    rmin = std::min(rmin, std::isnan(v) ? -kInf : v);
    rmax = std::max(rmax, std::isnan(v) ? kInf : v);
  }
  g.measured["ratio_min"] = rmin;
  g.measured["ratio_max"] = rmax;
  g.check(!ra->rows.empty() && rmin >= crit::kRatioLo && rmax <= crit::kRatioHi, "L2/H1 time ratio outside [1.8, 2.2]");

  double decay_err = 0.0;
  double transverse = 0.0;
  std::set<int> ks;
  for (std::size_t r = 0; r < di->rows.size(); ++r) {
    const double e = di->num(r, "rel_err");
    decay_err = std::max(decay_err, std::isnan(e) ? kInf : e);
    transverse = std::max(transverse, di->num(r, "max_transverse"));
    ks.insert(static_cast<int>(di->num(r, "k")));
  }
  g.measured["diagonal_max_rel_err"] = decay_err;
  g.measured["diagonal_max_transverse_field"] = transverse;
  g.check(decay_err <= crit::kDecayRelTol, "diagonal decay exponent off by more than 2%");
  g.check(transverse <= crit::kSaddleFieldTol, "diagonal is not invariant under the field");
  for (int k : {2, 4, 8}) g.check(ks.count(k) == 1, "K=" + std::to_string(k) + " not run");

  double root_err = 0.0, field = 0.0, printed = kInf;
  for (std::size_t r = 0; r < sa->rows.size(); ++r) {
    root_err = std::max({root_err, std::abs(sa->num(r, "x_l2") - sa->num(r, "root_l2")),
                         std::abs(sa->num(r, "x_h1") - sa->num(r, "root_h1"))});
    field = std::max({field, sa->num(r, "field_l2"), sa->num(r, "field_h1")});
    if (sa->num(r, "k") == 2) {
      printed = std::max(std::abs(sa->num(r, "x_l2") - crit::kSaddlePrintedL2),
                         std::abs(sa->num(r, "x_h1") - crit::kSaddlePrintedH1));
    }
  }
  g.measured["saddle_root_max_err"] = root_err;
  g.measured["saddle_field_max"] = field;
  g.measured["saddle_k2_printed_value_err"] = printed;
  g.check(root_err <= crit::kSaddleTol, "saddle closed form differs from the diagonal root");
  g.check(field <= crit::kSaddleFieldTol, "field at the saddle not zero");
  // the spec's printed K=2 L2 value carries an arithmetic slip, so it is reported, not graded
  return g.to_json();
}

json grade_c8(const fs::path& dir) {
  const auto t = read_csv(dir / "toeplitz.csv");
  const auto j = read_csv(dir / "toeplitz_jacobian.csv");
  if (!t) return missing("toeplitz.csv");
  if (!j) return missing("toeplitz_jacobian.csv");
  Grade g;
  double eig_err = 0.0, imag = 0.0;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    eig_err = std::max(eig_err, std::abs(t->num(r, "eigenvalue_re") - t->num(r, "expected")));
    imag = std::max(imag, std::abs(t->num(r, "eigenvalue_im")));
  }
  const double jac = max_abs(*j, "max_abs_h1_minus_2l2");
  g.measured["max_eigenvalue_err"] = eig_err;
  g.measured["max_imag"] = imag;
  g.measured["max_h1_minus_2l2"] = jac;
  g.check(!t->rows.empty() && eig_err <= crit::kToeplitzTol && imag <= crit::kToeplitzTol,
          "Jacobian eigenvalues differ from {(K+1)/4, 1/4}");
  g.check(!j->rows.empty() && jac <= crit::kToeplitzTol, "H1 Jacobian is not 2x the L2 Jacobian");
  return g.to_json();
}

json grade_c9(const fs::path& dir, const json& manifest) {
  const auto c = read_csv(dir / "convergence.csv");
  const auto p = read_csv(dir / "pointwise.csv");
  if (!c) return missing("convergence.csv");
  if (!p) return missing("pointwise.csv");
  Grade g;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (std::size_t r = 0; r < c->rows.size(); ++r) {
    auto& s = series[c->str(r, "model") + ":" + c->str(r, "kind") + ":d" + c->str(r, "dim")];
    s.first.push_back(c->num(r, "log2_n"));
    s.second.push_back(std::log2(c->num(r, "mse")));
  }
  json slopes = json::object();
  double smin = kInf, smax = -kInf;
  for (const auto& [key, s] : series) {
    const double slope = sobolev_lab::mc::ls_slope(s.first, s.second);
    slopes[key] = slope;
    smin = std::min(smin, std::isnan(slope) ? -kInf : slope);
    smax = std::max(smax, std::isnan(slope) ? kInf : slope);
    g.check(slope >= crit::kSlopeLo && slope <= crit::kSlopeHi, "slope of " + key + " outside [-1.2, -0.8]");
  }
  std::set<std::string> covered;
  for (const auto& info : sobolev_lab::mc::kTargets) {
    for (int d : {4, 16, 64}) {
      const std::string key = std::string(info.model) + ":" + info.kind + ":d" + std::to_string(d);
      g.check(series.count(key) == 1, key + " not run");
    }
  }
  const double zmax = max_abs(*p, "z");
  g.measured["slopes"] = slopes;
  g.measured["slope_min"] = smin;
  g.measured["slope_max"] = smax;
  g.measured["pointwise_components"] = p->rows.size();
  g.measured["pointwise_max_abs_z"] = zmax;
  g.check(!p->rows.empty() && zmax <= crit::kZMax, "pointwise |z| above 4");
  check_runtime(g, manifest, "verify-gradients", crit::kMcSeconds);
  return g.to_json();
}

json grade_c10(const fs::path& dir, const json& manifest) {
  const auto t = read_csv(dir / "sgd.csv");
  if (!t) return missing("sgd.csv");
  Grade g;
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> last;  // (kind, seed) -> (step, err)
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> kappa;  // (seed, step) -> (l2, h1)
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    const std::string& kind = t->str(r, "kind");
    const std::string& seed = t->str(r, "seed");
    const double step = t->num(r, "step");
    auto& l = last[{kind, seed}];
    if (step >= l.first) l = {step, t->num(r, "err_sq")};
    auto& k = kappa.try_emplace({seed, t->str(r, "step")}, std::nan(""), std::nan("")).first->second;
    (kind == "l2" ? k.first : k.second) = t->num(r, "kappa");
  }
  std::vector<double> fin_l2, fin_h1;
  for (const auto& [key, v] : last) (key.first == "l2" ? fin_l2 : fin_h1).push_back(v.second);
  std::size_t compared = 0, violations = 0;
  for (const auto& [key, k] : kappa) {
    if (std::isnan(k.first) || std::isnan(k.second)) continue;  // outside the convexity region
    ++compared;
    if (!(k.second <= k.first)) ++violations;
  }
  const double ml = median(fin_l2), mh = median(fin_h1);
  g.measured["seeds"] = fin_l2.size();
  g.measured["median_final_err_l2"] = ml;
  g.measured["median_final_err_h1"] = mh;
  g.measured["kappa_pairs_compared"] = compared;
  g.measured["kappa_violations"] = violations;
  g.check(fin_l2.size() >= 12 && fin_h1.size() == fin_l2.size(), "fewer than 12 seeds per kind");
  g.check(mh < ml, "median final error not smaller under H1");
  g.check(compared > 0 && violations == 0, "kappa_H trace exceeds kappa_L trace");
  check_runtime(g, manifest, "sgd", crit::kSgdSeconds);
  return g.to_json();
}

json grade_c11(const fs::path& dir) {
  const auto t = read_csv(dir / "linear.csv");
  if (!t) return missing("linear.csv");
  Grade g;
  double var_err = 0.0;
  std::size_t kappa_violations = 0, var_violations = 0;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    var_err = std::max({var_err, std::abs(t->num(r, "var_l2") / t->num(r, "formula_l2") - 1.0),
                        std::abs(t->num(r, "var_h1") / t->num(r, "formula_h1") - 1.0)});
    if (t->num(r, "lambda") > 0.0) {
      kappa_violations += !(t->num(r, "kappa_h1") < t->num(r, "kappa_l2"));
      var_violations += !(t->num(r, "var_h1") < t->num(r, "var_l2"));
    }
  }
  g.measured["rows"] = t->rows.size();
  g.measured["max_variance_rel_err"] = var_err;
  g.measured["kappa_violations"] = kappa_violations;
  g.measured["variance_order_violations"] = var_violations;
  g.check(!t->rows.empty(), "no designs");
  g.check(var_err <= crit::kVarianceRelTol, "empirical variance off by more than 3%");
  g.check(kappa_violations == 0, "ridge does not reduce the condition number");
  g.check(var_violations == 0, "Var_H1 < Var_L2 violated");
  return g.to_json();
}

json grade_c12(const fs::path& dir) {
  const auto t = read_csv(dir / "chebyshev.csv");
  const auto n1 = read_csv(dir / "chebyshev_n1.csv");
  if (!t) return missing("chebyshev.csv");
  if (!n1) return missing("chebyshev_n1.csv");
  Grade g;
  double worst_ratio = 0.0;
  int n_max = 0;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    worst_ratio = std::max(worst_ratio, t->num(r, "max_err") / t->num(r, "tol"));
    n_max = std::max(n_max, static_cast<int>(t->num(r, "n")));
  }
  bool exact = n1->rows.size() == 4;
  for (std::size_t r = 0; r < n1->rows.size(); ++r) {
    const double expected = n1->num(r, "col") == 0 ? 0.5 : -0.5;
    exact = exact && n1->num(r, "value") == expected;
  }
  g.measured["n_max"] = n_max;
  g.measured["max_err_over_tol"] = worst_ratio;
  g.measured["n1_exact"] = exact;
  g.check(n_max >= 20, "n does not reach 20");
  g.check(worst_ratio <= 1.0, "monomial derivative error above 1e-10 n^2");
  g.check(exact, "n=1 matrix is not [[1/2, -1/2], [1/2, -1/2]]");
  return g.to_json();
}

json grade_c13(const fs::path& dir) {
  const auto t = read_csv(dir / "determinism.csv");
  if (!t) return missing("determinism.csv");
  Grade g;
  std::set<std::string> subs;
  std::size_t differing = 0;
  for (std::size_t r = 0; r < t->rows.size(); ++r) {
    subs.insert(t->str(r, "subcommand"));
    if (t->str(r, "identical") != "1") {
      ++differing;
      g.failures.push_back(t->str(r, "subcommand") + "/" + t->str(r, "file") + " differs");
    }
  }
  g.measured["files_compared"] = t->rows.size();
  g.measured["subcommands"] = subs;
  g.measured["differing"] = differing;
  g.check(!t->rows.empty(), "no determinism comparisons");
  g.pass = g.pass && differing == 0;
  return g.to_json();
}

}  // namespace

json summarize(const fs::path& out_dir) {
  if (!fs::is_directory(out_dir)) throw ValidationError("results directory not found: " + out_dir.string());
  json manifest = json::object();
  if (std::ifstream in(out_dir / "manifest.json"); in) {
    try {
      manifest = json::parse(in);
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  json crits = json::object();
  crits["C1"] = grade_c1(out_dir, manifest);
  crits["C2"] = grade_c2(out_dir);
  crits["C3"] = grade_c3(out_dir);
  crits["C4"] = grade_c4(out_dir, manifest);
  crits["C5"] = grade_c5(out_dir);
  crits["C6"] = grade_c6(out_dir);
  crits["C7"] = grade_c7(out_dir);
  crits["C8"] = grade_c8(out_dir);
  crits["C9"] = grade_c9(out_dir, manifest);
  crits["C10"] = grade_c10(out_dir, manifest);
  crits["C11"] = grade_c11(out_dir);
  crits["C12"] = grade_c12(out_dir);
  crits["C13"] = grade_c13(out_dir);
  std::size_t passed = 0;
  for (const auto& [k, v] : crits.items()) passed += v["status"] == "pass";
  json report = {{"criteria", crits}, {"passed", passed}, {"total", crits.size()}};
  std::ofstream out(out_dir / "report.json");
  if (!out) throw ValidationError("cannot write report.json in " + out_dir.string());
  out << report.dump(2) << "\n";
  return report;
}

}  // namespace sobolev_cli
