#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pdc/conflict.hpp"

using namespace pdc;

namespace {

const double kEx1 = 2.0 * (1.0 - normal_cdf(std::sqrt(2.0)));

CheckOptions opts(int M, std::uint64_t seed = 1, unsigned workers = 0) {
  CheckOptions o;
  o.M = M;
  o.seed = seed;
  o.workers = workers;
  return o;
}

Dataset with_moments(int n, double ybar, double s2) {
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = i;
  const double m = (n - 1) / 2.0;
  double ss = 0.0;
  for (double y : ys) ss += (y - m) * (y - m);
  const double scale = std::sqrt(s2 * (n - 1) / ss);
  for (double& y : ys) y = ybar + scale * (y - m);
  return Dataset::scalars(ys);
}

double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  return d;
}

// MR for a binomial count under a uniform prior: the log of the posterior
// Beta(1 + y, 1 + n - y) density at its mode.
double uniform_binomial_mr(int y, int n) {
  const double a = 1.0 + y, b = 1.0 + n - y;
  const double mode = (a - 1.0) / (a + b - 2.0);
  return xlogy(a - 1.0, mode) + xlogy(b - 1.0, 1.0 - mode) - log_beta(a, b);
}

// KL(IG(a1, b1) || IG(a0, b0)) written out for Gamma-distributed precisions.
double kl_inverse_gamma(double a1, double b1, double a0, double b0) {
  return (a1 - a0) * digamma(a1) - std::lgamma(a1) + std::lgamma(a0) + a0 * (std::log(b1) - std::log(b0)) +
         a1 * (b0 - b1) / b1;
}

// A model whose discrepancy is NaN on a fixed share of replicates.
struct FlakyModel {
  double nan_share;
  std::string_view name() const { return "flaky"; }
  ParamMap params() const { return {}; }
  void validate_data(const Dataset&) const {}
  Dataset simulate(const Dataset& shape, Rng& rng) const {
    Dataset out = shape;
    out[0].y = rng.uniform();
    return out;
  }
  double discrepancy(const Dataset& data, const DivergenceOrder&, Rng&) const {
    if (data[0].y < nan_share) return kNaN;
    if (data[0].y > 0.999) return kInf;
    return data[0].y;
  }
};

}  // namespace

TEST(Discrepancy, ZeroWhenPosteriorIsPrior) {
  const auto model = make_model("normal-location");
  EXPECT_NEAR(discrepancy(model, Dataset(), DivergenceOrder::kl()), 0.0, 1e-14);
}

TEST(Discrepancy, NormalLocationMatchesGaussianClosedForm) {
  const auto model = make_model("normal-location", {{"mu0", 0.0}, {"sigma0sq", 1.0}, {"sigmasq", 1.0}});
  const double want =
      renyi_gaussian(GaussianMV::univariate(1.0, 0.5), GaussianMV::univariate(0.0, 1.0), DivergenceOrder::kl());
  EXPECT_NEAR(discrepancy(model, Dataset::scalars({2.0}), DivergenceOrder::kl()), want, 1e-14);
}

TEST(Discrepancy, BinomialMaximumRatioAtAllSuccesses) {
  const auto model = make_model("binomial", {{"a", 1.0}, {"b", 1.0}, {"n", 10.0}});
  const Dataset data = prepare_data(model, Dataset({{"", 10.0, 0}}));
  EXPECT_NEAR(discrepancy(model, data, DivergenceOrder::mr()), std::log(11.0), 1e-12);
}

TEST(ConflictPValue, NormalLocationMatchesClosedFormForEveryOrder) {
  const NormalLocation model(0.0, 1.0, 1.0);
  const Dataset y = Dataset::scalars({2.0});
  for (const auto& order : {DivergenceOrder::finite(0.5), DivergenceOrder::kl(), DivergenceOrder::finite(2.0),
                            DivergenceOrder::mr()}) {
    const CheckReport r = conflict_p_value(model, y, order, opts(10000));
    EXPECT_NEAR(r.p_value, kEx1, 0.015) << order.to_string();
    EXPECT_NEAR(r.mc_std_error, std::sqrt(r.p_value * (1 - r.p_value) / 1e4), 1e-12);
    EXPECT_EQ(r.method, "monte_carlo");
    EXPECT_EQ(r.replicate_discrepancies.size(), 10000u);
  }
  const CheckReport em = em_p_value(model, y, opts(10000));
  EXPECT_NEAR(em.p_value, kEx1, 0.015);
}

TEST(ConflictPValue, OrdersAgreeOnSharedReplicates) {
  // Every order is a monotone function of |ybar - mu0| here, so with the
  // same replicates all p-values coincide exactly.
  const NormalLocation model(0.5, 2.0, 1.5);
  const Dataset y = Dataset::scalars({1.0, 3.5, 2.0});
  const CheckReport base = conflict_p_value(model, y, DivergenceOrder::kl(), opts(2000, 9));
  std::vector<std::size_t> rank(base.replicate_discrepancies.size());
  std::iota(rank.begin(), rank.end(), 0);
  auto ranking = [&](const std::vector<double>& v) {
    std::vector<std::size_t> idx = rank;
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    return idx;
  };
  const auto want = ranking(base.replicate_discrepancies);
  for (const auto& order : {DivergenceOrder::finite(0.5), DivergenceOrder::finite(2.0), DivergenceOrder::mr()}) {
    const CheckReport r = conflict_p_value(model, y, order, opts(2000, 9));
    EXPECT_EQ(r.p_value, base.p_value) << order.to_string();
    EXPECT_EQ(ranking(r.replicate_discrepancies), want) << order.to_string();
  }
  const CheckReport em = em_p_value(model, y, opts(2000, 9));
  EXPECT_NEAR(em.p_value, base.p_value, 3.0 * base.mc_std_error);
}

TEST(ConflictPValue, UniformUnderNoConflict) {
  const NormalLocation model(0.0, 1.0, 1.0);
  const Dataset shape = Dataset::scalars({0.0});
  std::vector<double> ps;
  Rng rng(2024, 0);
  for (int rep = 0; rep < 500; ++rep) {
    const Dataset y = model.simulate(shape, rng);
    ps.push_back(conflict_p_value(model, y, DivergenceOrder::kl(), opts(1000, 100 + rep, 1)).p_value);
  }
  EXPECT_LT(ks_uniform(ps), 1.628 / std::sqrt(500.0));
}

TEST(ConflictPValue, SufficiencyAndPermutation) {
  const NormalLocation model(0.0, 1.0, 2.0);
  const Dataset a = Dataset::scalars({0.3, 2.9, 1.1, -0.4});
  const Dataset b = Dataset::scalars({1.1, -0.4, 0.3, 2.9});
  EXPECT_EQ(conflict_p_value(model, a, DivergenceOrder::kl(), opts(500)),
            conflict_p_value(model, b, DivergenceOrder::kl(), opts(500)));
  const auto nig = make_model("normal-nig");
  EXPECT_EQ(conflict_p_value(nig, a, DivergenceOrder::finite(2.0), opts(500)),
            conflict_p_value(nig, b, DivergenceOrder::finite(2.0), opts(500)));
}

TEST(ConflictPValue, IdenticalAcrossWorkerCounts) {
  const NormalNIG model(NormalInverseGamma(0.0, 1.0, 3.0, 2.0));
  const Dataset y = with_moments(6, 1.4, 0.7);
  const CheckReport one = conflict_p_value(model, y, DivergenceOrder::kl(), opts(3000, 5, 1));
  const CheckReport four = conflict_p_value(model, y, DivergenceOrder::kl(), opts(3000, 5, 4));
  EXPECT_EQ(one, four);
  const CheckReport other = conflict_p_value(model, y, DivergenceOrder::kl(), opts(3000, 6, 1));
  EXPECT_NE(one.replicate_discrepancies, other.replicate_discrepancies);
}

TEST(ConflictPValue, UniformBinomialEnumeration) {
  const int n = 10;
  const auto model = make_model("binomial", {{"a", 1.0}, {"b", 1.0}, {"n", n}});
  std::vector<double> mr(n + 1);
  for (int k = 0; k <= n; ++k) mr[k] = uniform_binomial_mr(k, n);
  for (int y = 0; y <= n; ++y) {
    const Dataset data = prepare_data(model, Dataset({{"", static_cast<double>(y), 0}}));
    const CheckReport r = conflict_p_value(model, data, DivergenceOrder::mr(), opts(17));
    double want = 0.0;
    for (int k = 0; k <= n; ++k)
      if (mr[k] >= mr[y] - 1e-12) want += 1.0 / (n + 1);
    EXPECT_NEAR(r.p_value, want, 1e-12) << "y=" << y;
    EXPECT_EQ(r.method, "enumeration");
    EXPECT_EQ(r.M, n + 1);
    EXPECT_EQ(r.mc_std_error, 0.0);
    EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "enumeration"), r.flags.end());
    EXPECT_NEAR(r.discrepancy_obs, r.replicate_discrepancies[n - y], 1e-12);
    const CheckReport em = em_p_value(model, data, opts(17));
    EXPECT_NEAR(em.p_value, 1.0, 1e-12) << "y=" << y;
  }
  const Dataset mid = prepare_data(model, Dataset({{"", 5.0, 0}}));
  EXPECT_EQ(conflict_p_value(model, mid, DivergenceOrder::mr(), opts(1)).p_value, 1.0);
  for (int k = 0; k < n / 2; ++k) EXPECT_GT(mr[k], mr[k + 1]);
}

TEST(ConflictPValue, EnumerationMatchesSimulation) {
  const BinomialModel model(2.0, 3.0);
  const Dataset data({{"", 9.0, 12}, {"", 4.0, 8}});
  const CheckReport exact = conflict_p_value(model, data, DivergenceOrder::kl(), opts(1));
  ASSERT_EQ(exact.method, "enumeration");
  // Simulate the same check by hand; the statistic depends on the total.
  Rng rng(77, 0);
  int hits = 0;
  const int M = 20000;
  for (int i = 0; i < M; ++i) {
    const Dataset y = model.simulate(data, rng);
    if (model.discrepancy(y, DivergenceOrder::kl(), rng) >= exact.discrepancy_obs - 1e-12) ++hits;
  }
  const double p = static_cast<double>(hits) / M;
  EXPECT_NEAR(exact.p_value, p, 3.0 * std::sqrt(p * (1 - p) / M));
}

TEST(ConflictPValue, ShiftedExponentialAtMinimizerIsOne) {
  const ShiftedExponential model(1.0, 2.0);
  const Dataset shape = Dataset::scalars(std::vector<double>(4, 1.0));
  const double nu = model.nu(shape);
  const double tmin = shifted_exp::t0(nu, DivergenceOrder::kl());
  const double ymin = tmin / (4 * 2.0 - 1.0);
  const Dataset y = Dataset::scalars({ymin, ymin + 0.3, ymin + 1.0, ymin + 2.0});
  const CheckReport r = conflict_p_value(model, y, DivergenceOrder::kl(), opts(4000));
  EXPECT_GT(r.p_value, 0.995);
  EXPECT_NEAR(model.exact_p_value(y, DivergenceOrder::kl()), 1.0, 1e-12);
}

TEST(ConflictPValue, NonFiniteReplicatesAreExcludedThenAbort) {
  const Dataset shape = Dataset::scalars({0.0});
  const CheckReport r = conflict_p_value(FlakyModel{0.005}, Dataset::scalars({0.5}), DivergenceOrder::kl(),
                                         opts(4000));
  EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "non_finite_replicates"), r.flags.end());
  EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "infinite_replicates"), r.flags.end());
  const double excluded = r.diagnostics.at("excluded_replicates");
  EXPECT_GT(excluded, 0.0);
  EXPECT_NEAR(r.p_value, 0.5 / 0.995, 0.03);
  EXPECT_THROW(conflict_p_value(FlakyModel{0.05}, shape, DivergenceOrder::kl(), opts(4000)), NumericalAbort);
}

TEST(ConflictPValue, RejectsBadOptions) {
  const NormalLocation model(0.0, 1.0, 1.0);
  EXPECT_THROW(conflict_p_value(model, Dataset::scalars({1.0}), DivergenceOrder::kl(), opts(0)), ValidationError);
}

TEST(EmPValue, UnsupportedWithoutPredictiveDensity) {
  const auto bb = make_model("beta-binomial");
  const auto lr = make_model("logistic-re");
  const Dataset data({{"1", 1.0, 10}});
  EXPECT_THROW(em_p_value(bb, data, opts(10)), UnsupportedOperation);
  EXPECT_THROW(em_p_value(lr, data, opts(10)), UnsupportedOperation);
}

TEST(EmPValue, AtPredictiveModeIsOne) {
  const NormalLocation model(1.0, 2.0, 1.0);
  const CheckReport r = em_p_value(model, Dataset::scalars({1.0}), opts(500));
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Hierarchical, ConditionalCheckMatchesStudentT) {
  Rng cfg(31, 0);
  for (int k = 0; k < 4; ++k) {
    const double mu0 = cfg.normal(0.0, 1.0), lambda0 = 0.5 + 2.0 * cfg.uniform();
    const double a = 1.5 + 3.0 * cfg.uniform(), b = 0.5 + 2.0 * cfg.uniform();
    const int n = 3 + static_cast<int>(10 * cfg.uniform());
    const NormalNIG model(NormalInverseGamma(mu0, lambda0, a, b));
    const Dataset y = with_moments(n, mu0 + cfg.normal(0.0, 1.5), 0.3 + 2.0 * cfg.uniform());
    CheckOptions o = opts(3000, 40 + k);
    o.inner_draws = 50;
    const CheckReport r = hierarchical_p1(model, y, DivergenceOrder::kl(), HierarchicalSplit{}, o);
    const double want = model.hier1_t_p_value(y);
    EXPECT_NEAR(r.p_value, want, 3.0 * std::sqrt(want * (1 - want) / 3000) + 1e-3) << "config " << k;
    EXPECT_EQ(r.variant, CheckVariant::hier1);
    EXPECT_EQ(r.inner_draws, 50);
  }
}

TEST(Hierarchical, ConditionalCheckAtPriorMeanIsOne) {
  const NormalNIG model(NormalInverseGamma(2.0, 1.0, 3.0, 2.0));
  const CheckReport r =
      hierarchical_p1(model, with_moments(8, 2.0, 1.0), DivergenceOrder::kl(), HierarchicalSplit{}, opts(500));
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Hierarchical, OneSidedSplitsTheSymmetricTail) {
  const NormalNIG model(NormalInverseGamma(0.0, 1.0, 3.0, 2.0));
  CheckOptions o = opts(20000, 3);
  o.inner_draws = 20;
  const HierarchicalSplit two{0, false, false}, one{0, false, true};
  const Dataset up = with_moments(5, 1.2, 1.0);
  const CheckReport r2 = hierarchical_p1(model, up, DivergenceOrder::kl(), two, o);
  const CheckReport r1 = hierarchical_p1(model, up, DivergenceOrder::kl(), one, o);
  EXPECT_LE(r1.p_value, r2.p_value);
  EXPECT_NEAR(r1.p_value, r2.p_value / 2.0, 4.0 * r1.mc_std_error);
  EXPECT_EQ(r1.replicate_directions.size(), 20000u);
  EXPECT_EQ(r1.variant, CheckVariant::hier1_one_sided);

  // Below the prior mean the p-value adds the whole lower part.
  const Dataset down = with_moments(5, -1.2, 1.0);
  const CheckReport d2 = hierarchical_p1(model, down, DivergenceOrder::kl(), two, o);
  const CheckReport d1 = hierarchical_p1(model, down, DivergenceOrder::kl(), one, o);
  EXPECT_NEAR(d1.p_value, 1.0 - d2.p_value / 2.0, 4.0 * d1.mc_std_error);

  const CheckReport flat = hierarchical_p1(model, Dataset::scalars({-2.0, -1.0, 0.0, 1.0, 2.0}), DivergenceOrder::kl(), one, o);
  EXPECT_NE(std::find(flat.flags.begin(), flat.flags.end(), "sign_boundary"), flat.flags.end());
}

TEST(Hierarchical, RejectsCrossValidationWithoutUnits) {
  const NormalNIG model(NormalInverseGamma(0.0, 1.0, 3.0, 2.0));
  EXPECT_THROW(hierarchical_p1(model, with_moments(5, 0.0, 1.0), DivergenceOrder::kl(),
                               HierarchicalSplit{0, true, false}, opts(10)),
               ValidationError);
  EXPECT_THROW(hierarchical_p1(model, with_moments(5, 0.0, 1.0), DivergenceOrder::kl(),
                               HierarchicalSplit{7, false, false}, opts(10)),
               ValidationError);
  EXPECT_THROW(hierarchical_p1(make_model("binomial"), Dataset({{"", 1.0, 3}}), DivergenceOrder::kl(),
                               HierarchicalSplit{}, opts(10)),
               UnsupportedOperation);
}

TEST(Hierarchical, MarginalDiscrepancyIsInverseGammaClosedForm) {
  const double mu0 = 0.5, lambda0 = 2.0, a = 3.0, b = 4.0;
  const NormalNIG model(NormalInverseGamma(mu0, lambda0, a, b));
  const Dataset y = with_moments(12, 1.1, 3.0);
  const CheckReport r = hierarchical_p2(model, y, DivergenceOrder::kl(), opts(200));
  const double n = 12;
  const double b1 = b + 0.5 * (n - 1) * 3.0 + 0.5 * lambda0 * n / (lambda0 + n) * (1.1 - mu0) * (1.1 - mu0);
  EXPECT_NEAR(r.discrepancy_obs, kl_inverse_gamma(a + n / 2, b1, a, b), 1e-10);
  EXPECT_EQ(r.variant, CheckVariant::hier2);
}

TEST(Hierarchical, MarginalCheckDetectsInflatedScale) {
  const double a = 3.0, b = 4.0;
  const NormalNIG model(NormalInverseGamma(0.0, 1.0, a, b));
  const CheckReport matched =
      hierarchical_p2(model, with_moments(50, 0.0, b / a), DivergenceOrder::kl(), opts(4000));
  const CheckReport inflated =
      hierarchical_p2(model, with_moments(50, 0.0, 100.0 * b / a), DivergenceOrder::kl(), opts(4000));
  EXPECT_GT(matched.p_value, 0.8);
  EXPECT_LT(inflated.p_value, 0.05);
}

TEST(Hierarchical, LargeSampleMarginalDiscrepancyTracksScaleForm) {
  const double a = 3.0, b = 4.0;
  const NormalNIG model(NormalInverseGamma(0.0, 1.0, a, b));
  const Dataset shape = with_moments(500, 0.0, 1.0);
  Rng rng(8, 0);
  std::vector<double> exact, approx;
  for (int i = 0; i < 400; ++i) {
    const Dataset y = model.simulate(shape, rng);
    const double s2 = detail::sample_variance(y.ys());
    exact.push_back(model.hier_marginal_discrepancy(y, DivergenceOrder::kl(), rng));
    approx.push_back(std::log(s2 / (b / a)) + (b / a) / s2);
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double mx = mean(exact), my = mean(approx);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    sxy += (exact[i] - mx) * (approx[i] - my);
    sxx += (exact[i] - mx) * (exact[i] - mx);
    syy += (approx[i] - my) * (approx[i] - my);
  }
  EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.999);
}

TEST(Hierarchical, SingleUnitCrossValidationUsesThePrior) {
  const LogisticRandomEffects model;
  CheckOptions o = opts(20, 4);
  o.inner_draws = 20;
  const CheckReport r = hierarchical_p1(model, Dataset({{"A", 3.0, 40}}), DivergenceOrder::kl(),
                                        HierarchicalSplit{0, true, false}, o);
  EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "held_out_prior_reference"), r.flags.end());
  EXPECT_EQ(r.variant, CheckVariant::hier1_cv);
  EXPECT_EQ(*r.unit, "A");
  EXPECT_GE(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(Hierarchical, BristolOneSidedBelowTwoSided) {
  const LogisticRandomEffects model;
  const Dataset data = read_csv(std::string(PDC_DATA_DIR) + "/bristol.csv");
  CheckOptions o = opts(150, 11);
  o.inner_draws = 100;
  const auto two = hierarchical_p1_all_units(model, data, DivergenceOrder::kl(), false, false, o);
  const auto one = hierarchical_p1_all_units(model, data, DivergenceOrder::kl(), false, true, o);
  ASSERT_EQ(two.size(), 12u);
  ASSERT_EQ(one.size(), 12u);
  EXPECT_EQ(*one[0].unit, "Bristol");
  EXPECT_GT(one[0].diagnostics.at("observed_direction"), 0.0);
  EXPECT_LE(one[0].p_value, two[0].p_value);
  for (std::size_t u = 0; u < 12; ++u) {
    EXPECT_EQ(one[u].replicate_discrepancies, two[u].replicate_discrepancies);
    if (one[u].diagnostics.at("observed_direction") > 0.0) {
      EXPECT_LE(one[u].p_value, two[u].p_value);
    }
  }
  // Bristol stands out.
  for (std::size_t u = 1; u < 12; ++u) EXPECT_GT(one[u].discrepancy_obs, 0.0);
  EXPECT_LT(one[0].p_value, 0.1);
}

TEST(Asymptotic, JeffreysPriorGivesOne) {
  const BinomialModel jeffreys(0.5, 0.5);
  for (double t : {0.1, 0.5, 0.93}) {
    const CheckReport r = asymptotic_check(jeffreys, Vector::Constant(1, t), 100000, 3);
    EXPECT_EQ(r.p_value, 1.0) << t;
  }
}

TEST(Asymptotic, NormalLocationReducesToPriorTail) {
  const NormalLocation model(1.0, 4.0, 0.5);
  for (double z : {0.0, 1.0, 2.0, 2.7}) {
    const CheckReport r = asymptotic_check(model, Vector::Constant(1, 1.0 + 2.0 * z), 200000, 5);
    EXPECT_NEAR(r.p_value, 2.0 * normal_sf(z), 0.005) << z;
  }
}

TEST(Asymptotic, MaximizerGivesOne) {
  // Beta(2, 2): g |I|^{-1/2} is proportional to (theta (1 - theta))^{3/2}.
  const BinomialModel model(2.0, 2.0);
  EXPECT_EQ(asymptotic_check(model, Vector::Constant(1, 0.5), 50000, 1).p_value, 1.0);
}

TEST(Asymptotic, FiniteSampleChecksApproachTheLimit) {
  const BinomialModel model(2.0, 3.0);
  const double theta = 0.25;
  const double limit = asymptotic_check(model, Vector::Constant(1, theta), 400000, 2).p_value;
  double previous = kInf;
  for (long n : {50L, 200L, 800L}) {
    const Dataset y({{"", std::round(theta * n), n}});
    const double p = conflict_p_value(model, y, DivergenceOrder::kl(), opts(1)).p_value;
    const double gap = std::fabs(p - limit);
    EXPECT_LT(gap, previous) << n;
    previous = gap;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(Asymptotic, NonRegularModelIsUnsupported) {
  EXPECT_THROW(asymptotic_check(make_model("shifted-exponential"), Vector::Constant(1, 1.0), 10, 0),
               UnsupportedOperation);
  EXPECT_THROW(asymptotic_check(make_model("logistic-re"), Vector::Constant(1, 1.0), 10, 0), UnsupportedOperation);
}

TEST(Asymptotic, HierarchicalLimitForConditionalPrior) {
  const NormalNIG model(NormalInverseGamma(0.0, 2.0, 3.0, 2.0));
  const double s2 = 1.5;
  Vector t2 = Vector::Constant(1, s2);
  auto log_cond = [&](const Vector& t1, const Vector& t) { return model.conditional_prior_log_density(t1(0), t(0)); };
  auto sample_cond = [&](const Vector& t, Rng& rng) {
    return Vector::Constant(1, model.conditional_prior_sample(t(0), rng));
  };
  auto log_det_i11 = [&](const Vector& t1, const Vector& t) { return std::log(model.fisher_info((Vector(2) << t1(0), t(0)).finished())(0, 0)); };
  Rng rng(6, 0);
  const double sd = std::sqrt(s2 / 2.0);
  const LimitEstimate est = asymptotic_limit_p_hierarchical(log_cond, sample_cond, log_det_i11,
                                                            Vector::Constant(1, 1.5 * sd), t2, 200000, rng);
  EXPECT_NEAR(est.p_value, 2.0 * normal_sf(1.5), 0.005);

  // A conditional prior proportional to |I_11|^{1/2} (flat here) gives 1.
  Rng rng2(6, 1);
  const LimitEstimate flat = asymptotic_limit_p_hierarchical(
      [](const Vector&, const Vector&) { return 0.0; }, sample_cond, log_det_i11, Vector::Constant(1, 3.0), t2,
      1000, rng2);
  EXPECT_EQ(flat.p_value, 1.0);
}
