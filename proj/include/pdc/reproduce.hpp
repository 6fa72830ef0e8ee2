#pragma once

// End-to-end runs of the six worked examples with pinned seeds, and the
// Exact p-value curve for the shifted exponential model.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdc/conflict.hpp"
#include "pdc/models.hpp"

namespace pdc {

// ---------------------------------------------------------------------------
// Curve

struct CurvePoint {
  double t = 0.0;
  double discrepancy = 0.0;
  double p_value = 0.0;
};

/// Exact p-value of the shifted exponential check over a sweep of t. The
/// minimizer t0 is always included.
inline std::vector<CurvePoint> shifted_exp_curve(double nu, const DivergenceOrder& order, std::vector<double> ts) {
  const double tmin = shifted_exp::t0(nu, order);
  ts.push_back(tmin);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<CurvePoint> out;
  out.reserve(ts.size());
  for (double t : ts)
    out.push_back({t, shifted_exp::discrepancy(nu, t, order), shifted_exp::exact_p_value(t, nu, order)});
  return out;
}

/// Log-spaced sweep from t0 / 100 to `upper` times t0.
inline std::vector<double> default_sweep(double nu, const DivergenceOrder& order, int points = 200,
                                         double upper = 20.0) {
  const double tmin = shifted_exp::t0(nu, order);
  std::vector<double> ts;
  const double lo = std::log(tmin / 100.0), hi = std::log(upper * tmin);
  for (int i = 0; i < points; ++i) ts.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
  return ts;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "t,discrepancy,p_value\n";
  for (const auto& c : curve) out << c.t << ',' << c.discrepancy << ',' << c.p_value << '\n';
  return out.str();
}

/// Monte Carlo version of the same p-value from M predictive draws of t.
inline LimitEstimate shifted_exp_mc_p_value(double nu, double t_obs, const DivergenceOrder& order, long M,
                                            std::uint64_t seed) {
  const double r_obs = shifted_exp::discrepancy(nu, t_obs, order);
  Rng rng(seed, 0);
  long hits = 0;
  for (long i = 0; i < M; ++i)
    if (detail::at_least(shifted_exp::discrepancy(nu, shifted_exp::sample_t(nu, rng), order), r_obs)) ++hits;
  LimitEstimate e;
  e.draws = M;
  e.p_value = static_cast<double>(hits) / static_cast<double>(M);
  e.mc_std_error = std::sqrt(e.p_value * (1.0 - e.p_value) / static_cast<double>(M));
  return e;
}

// ---------------------------------------------------------------------------
// Reproduction manifests

struct ManifestEntry {
  std::string quantity;
  double produced = 0.0;
  std::optional<double> expected;
  double tolerance = 0.0;
  std::string source;  // "published", "derived" or "" for informational rows
  bool pass = true;
};

struct Reproduction {
  int example = 0;
  std::vector<ManifestEntry> entries;
  std::vector<std::pair<std::string, CheckReport>> reports;  // file stem, report
  std::vector<std::pair<std::string, std::string>> files;    // file name, contents

  void compare(std::string quantity, double produced, double expected, double tolerance, std::string source) {
    const bool ok = std::fabs(produced - expected) <= tolerance;
    entries.push_back({std::move(quantity), produced, expected, tolerance, std::move(source), ok});
  }
  void record(std::string quantity, double produced) {
    entries.push_back({std::move(quantity), produced, std::nullopt, 0.0, "", true});
  }
  void require(std::string quantity, bool ok, std::string source = "derived") {
    entries.push_back({std::move(quantity), ok ? 1.0 : 0.0, 1.0, 0.0, std::move(source), ok});
  }
  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
  }
};

struct ReproduceOptions {
  int M = 1000;
  int inner_draws = 200;
  std::uint64_t seed = 20240601;
  unsigned workers = 0;
  std::string data_dir;
};

namespace detail {

inline CheckOptions check_options_for(const ReproduceOptions& o, int M, std::uint64_t salt) {
  CheckOptions c;
  c.M = M;
  c.inner_draws = o.inner_draws;
  c.seed = o.seed + salt;
  c.workers = o.workers;
  return c;
}

inline Dataset load_fixture(const ReproduceOptions& o, const std::string& name) {
  const std::filesystem::path path = std::filesystem::path(o.data_dir) / name;
  if (!std::filesystem::exists(path)) throw ValidationError("missing fixture " + path.string());
  return read_csv(path.string());
}

}  // namespace detail

/// Normal location, mu0 = 0, sigma0^2 = sigma^2 = 1, y = 2, at M = 10^4.
inline Reproduction reproduce_normal_location(const ReproduceOptions& o) {
  Reproduction rep{1, {}, {}, {}};
  const NormalLocation model(0.0, 1.0, 1.0);
  const Dataset y = Dataset::scalars({2.0});
  const double want = 2.0 * normal_sf(std::sqrt(2.0));
  const int M = std::max(o.M, 10000);
  for (const auto& order : {DivergenceOrder::finite(0.5), DivergenceOrder::kl(), DivergenceOrder::finite(2.0),
                            DivergenceOrder::mr()}) {
    const CheckReport r = conflict_p_value(model, y, order, detail::check_options_for(o, M, 1));
    rep.compare("p_" + order.to_string(), r.p_value, want, 0.015, "published");
    rep.reports.push_back({"check_" + order.to_string(), r});
  }
  const CheckReport em = em_p_value(model, y, detail::check_options_for(o, M, 1));
  rep.compare("p_em", em.p_value, want, 0.015, "published");
  rep.reports.push_back({"check_em", em});
  return rep;
}

/// Binomial with a uniform prior, n = 10, MR order, every y by enumeration.
inline Reproduction reproduce_uniform_binomial(const ReproduceOptions& o) {
  Reproduction rep{2, {}, {}, {}};
  const int n = 10;
  const BinomialModel model(1.0, 1.0, n);
  std::ostringstream csv;
  csv.precision(17);
  csv << "y,mr,p_value,p_em\n";
  std::vector<double> mr(n + 1), p(n + 1);
  bool em_all_one = true;
  for (int y = 0; y <= n; ++y) {
    const Dataset data({{"", static_cast<double>(y), n}});
    const CheckReport r = conflict_p_value(model, data, DivergenceOrder::mr(), detail::check_options_for(o, o.M, 2));
    const CheckReport em = em_p_value(model, data, detail::check_options_for(o, o.M, 2));
    mr[y] = r.discrepancy_obs;
    p[y] = r.p_value;
    em_all_one = em_all_one && em.p_value == 1.0;
    csv << y << ',' << mr[y] << ',' << p[y] << ',' << em.p_value << '\n';
    if (y == n / 2) rep.reports.push_back({"check_mr_y5", r});
  }
  rep.files.push_back({"enumeration.csv", csv.str()});
  bool symmetric = true, antimode = true;
  for (int y = 0; y <= n; ++y) {
    symmetric = symmetric && std::fabs(mr[y] - mr[n - y]) <= 1e-12 * std::max(1.0, mr[y]);
    if (y != n / 2) antimode = antimode && mr[y] > mr[n / 2];
  }
  rep.require("mr_symmetric_about_n/2", symmetric);
  rep.require("mr_antimode_at_n/2", antimode, "published");
  rep.compare("p_at_y5", p[n / 2], 1.0, 0.0, "derived");
  rep.compare("mr_at_y10", mr[n], std::log(11.0), 1e-12, "derived");
  rep.require("p_em_equals_1_for_all_y", em_all_one);
  return rep;
}

/// Normal model with a normal-inverse-gamma prior: conditional check of mu
/// given sigma^2 against its t closed form and the marginal check of sigma^2.
inline Reproduction reproduce_nig_hierarchy(const ReproduceOptions& o) {
  Reproduction rep{3, {}, {}, {}};
  const NormalInverseGamma prior(0.0, 1.0, 3.0, 2.0);
  const NormalNIG model(prior);
  Rng rng(o.seed, 3);
  std::vector<double> ys;
  for (int i = 0; i < 20; ++i) ys.push_back(rng.normal(1.6, 1.1));
  const Dataset y = Dataset::scalars(ys);
  const CheckReport p1 = hierarchical_p1(model, y, DivergenceOrder::kl(), HierarchicalSplit{},
                                         detail::check_options_for(o, std::max(o.M, 4000), 3));
  const double t = model.hier1_t_p_value(y);
  rep.compare("p1_vs_t_closed_form", p1.p_value, t, 3.0 * std::sqrt(t * (1 - t) / p1.M), "published");
  rep.reports.push_back({"hier1", p1});
  const CheckReport p2 = hierarchical_p2(model, y, DivergenceOrder::kl(), detail::check_options_for(o, o.M, 3));
  const NormalInverseGamma post = model.posterior(y);
  const double a1 = post.a(), b1 = post.b(), a = prior.a(), b = prior.b();
  const double closed = (a1 - a) * digamma(a1) - log_gamma(a1) + log_gamma(a) + a * std::log(b1 / b) +
                        a1 * (b - b1) / b1;
  rep.compare("p2_discrepancy_vs_inverse_gamma_closed_form", p2.discrepancy_obs, closed, 1e-10, "published");
  rep.record("p2", p2.p_value);
  rep.reports.push_back({"hier2", p2});
  return rep;
}

/// Curves for nu = 2, 8, 50 (KL), with the exact tail integral.
inline Reproduction reproduce_shifted_exponential(const ReproduceOptions& o) {
  Reproduction rep{4, {}, {}, {}};
  for (double nu : {2.0, 8.0, 50.0}) {
    const auto order = DivergenceOrder::kl();
    const auto curve = shifted_exp_curve(nu, order, default_sweep(nu, order));
    const double tmin = shifted_exp::t0(nu, order);
    const std::string tag = "nu" + std::to_string(static_cast<int>(nu));
    rep.files.push_back({"curve_" + tag + ".csv", curve_csv(curve)});
    rep.record(tag + "_t0", tmin);
    rep.compare(tag + "_p_at_t0", shifted_exp::exact_p_value(tmin, nu, order), 1.0, 0.0, "published");
    const double p10 = shifted_exp::exact_p_value(10.0 * tmin, nu, order);
    rep.entries.push_back({tag + "_p_at_10t0_below_0.01", p10, std::nullopt, 0.01, "derived", p10 < 0.01});
    const double t_test = 3.0 * tmin;
    const LimitEstimate mc = shifted_exp_mc_p_value(nu, t_test, order, 100000, o.seed + 4);
    rep.compare(tag + "_exact_vs_mc_at_3t0", shifted_exp::exact_p_value(t_test, nu, order), mc.p_value,
                3.0 * mc.mc_std_error, "derived");
  }
  return rep;
}

inline constexpr std::array<double, 3> kCancerPriorMeans{-7.1, -7.4, -7.7};
inline constexpr std::array<double, 3> kCancerPublished{0.58, 0.25, 0.03};

/// Beta-binomial cancer mortality data under three priors: mixture fit,
/// closed-form mixture KL, M replicates.
inline Reproduction reproduce_cancer_mortality(const ReproduceOptions& o) {
  Reproduction rep{5, {}, {}, {}};
  const Dataset data = detail::load_fixture(o, "cancer_mortality.csv");
  for (std::size_t k = 0; k < kCancerPriorMeans.size(); ++k) {
    const auto model = BetaBinomialModel::from_params({{"mu1", kCancerPriorMeans[k]}});
    const CheckReport r =
        conflict_p_value(model, data, DivergenceOrder::kl(), detail::check_options_for(o, o.M, 5 + k));
    std::ostringstream tag;
    tag << "prior_mu1_" << kCancerPriorMeans[k];
    rep.compare("p_" + tag.str(), r.p_value, kCancerPublished[k], 0.07, "published");
    rep.reports.push_back({"check_" + tag.str(), r});
  }
  const double p0 = rep.entries[0].produced, p1 = rep.entries[1].produced, p2 = rep.entries[2].produced;
  rep.require("p_strictly_decreasing", p0 > p1 && p1 > p2, "published");
  return rep;
}

struct HospitalRow {
  const char* hospital;
  double p_kl, p_kl_cv;
};

inline constexpr std::array<HospitalRow, 12> kHospitalPublished{{{"Bristol", 0.010, 0.002},
                                                    {"Leicester", 0.527, 0.516},
                                                    {"Leeds", 0.912, 0.947},
                                                    {"Oxford", 0.173, 0.123},
                                                    {"Guys", 0.398, 0.383},
                                                    {"Liverpool", 0.690, 0.745},
                                                    {"Southampton", 0.680, 0.715},
                                                    {"Great Ormond St", 0.595, 0.628},
                                                    {"Newcastle", 0.455, 0.430},
                                                    {"Harefield", 0.474, 0.452},
                                                    {"Birmingham", 0.761, 0.787},
                                                    {"Brompton", 0.591, 0.631}}};

/// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Bristol data: one-sided per-hospital checks, with and without
/// cross-validation, against the published table.
inline Reproduction reproduce_hospitals(const ReproduceOptions& o) {
  Reproduction rep{6, {}, {}, {}};
  const Dataset data = detail::load_fixture(o, "bristol.csv");
  detail::require(data.size() == kHospitalPublished.size(), "bristol.csv: expected 12 hospitals");
  const LogisticRandomEffects model;
  const auto plain = hierarchical_p1_all_units(model, data, DivergenceOrder::kl(), false, true,
                                               detail::check_options_for(o, o.M, 6));
  const auto cv = hierarchical_p1_all_units(model, data, DivergenceOrder::kl(), true, true,
                                            detail::check_options_for(o, o.M, 6));
  std::vector<double> ours, theirs, ours_cv, theirs_cv;
  std::ostringstream csv;
  csv.precision(6);
  csv << "hospital,p_kl,p_kl_table,p_kl_cv,p_kl_cv_table\n";
  for (std::size_t i = 0; i < kHospitalPublished.size(); ++i) {
    const auto& row = kHospitalPublished[i];
    rep.compare(std::string("p_kl_") + row.hospital, plain[i].p_value, row.p_kl, 0.10, "published");
    rep.compare(std::string("p_kl_cv_") + row.hospital, cv[i].p_value, row.p_kl_cv, 0.10, "published");
    ours.push_back(plain[i].p_value);
    theirs.push_back(row.p_kl);
    ours_cv.push_back(cv[i].p_value);
    theirs_cv.push_back(row.p_kl_cv);
    csv << row.hospital << ',' << plain[i].p_value << ',' << row.p_kl << ',' << cv[i].p_value << ','
        << row.p_kl_cv << '\n';
    std::string stem = row.hospital;
    std::replace(stem.begin(), stem.end(), ' ', '_');
    rep.reports.push_back({"hier1_one_sided_" + stem, plain[i]});
    rep.reports.push_back({"hier1_cv_one_sided_" + stem, cv[i]});
  }
  rep.files.push_back({"hospitals.csv", csv.str()});
  const double rho = spearman(ours, theirs), rho_cv = spearman(ours_cv, theirs_cv);
  rep.entries.push_back({"spearman_p_kl", rho, std::nullopt, 0.9, "published", rho >= 0.9});
  rep.entries.push_back({"spearman_p_kl_cv", rho_cv, std::nullopt, 0.9, "published", rho_cv >= 0.9});
  rep.entries.push_back({"bristol_p_kl_at_most_0.05", plain[0].p_value, std::nullopt, 0.05, "published",
                         plain[0].p_value <= 0.05});
  rep.entries.push_back({"bristol_p_kl_cv_at_most_0.02", cv[0].p_value, std::nullopt, 0.02, "published",
                         cv[0].p_value <= 0.02});
  return rep;
}

inline Reproduction reproduce(int example, const ReproduceOptions& o) {
  switch (example) {
    case 1: return reproduce_normal_location(o);
    case 2: return reproduce_uniform_binomial(o);
    case 3: return reproduce_nig_hierarchy(o);
    case 4: return reproduce_shifted_exponential(o);
    case 5: return reproduce_cancer_mortality(o);
    case 6: return reproduce_hospitals(o);
    default: throw ValidationError("reproduce: example must be 1 to 6, got " + std::to_string(example));
  }
}

}  // namespace pdc
