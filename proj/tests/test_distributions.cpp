#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pdc/distributions.hpp"
#include "pdc/mixture.hpp"

using namespace pdc;

namespace {

double integrate_finite(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, a, b, 1e-13);
}

double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> rule;
  return rule.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

// Kolmogorov-Smirnov distance between the empirical CDF of xs and cdf.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, std::fabs(F - i / n), std::fabs((i + 1) / n - F)});
  }
  return d;
}

// 1.63 / sqrt(n) is the 1% critical value; 1.8 / sqrt(n) leaves a little room.
constexpr double kKsThreshold = 1.8 / 100.0;

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  const auto zero = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero, (Philox4x32::counter_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  const auto ones = Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones, (Philox4x32::counter_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  const auto pi = Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi, (Philox4x32::counter_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs |= x != c.next_u32();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIsOpenInterval) {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(LogDensity, StandardNormalAtMode) {
  const ParametricDistribution d = GaussianMV::univariate(0.0, 1.0);
  EXPECT_NEAR(log_density(d, Vector::Zero(1)), -0.9189385332046727, 1e-14);
}

TEST(LogDensity, BetaBinomialNormalizesAndMatchesAtCentre) {
  const BetaBinomialDist d(2, 0.5, 2.0);
  double total = 0.0;
  for (long y = 0; y <= 2; ++y) total += std::exp(d.log_pmf(y));
  EXPECT_NEAR(total, 1.0, 1e-14);
  // a = b = 1 makes the predictive uniform on {0, 1, 2}
  EXPECT_NEAR(d.log_pmf(1), std::log(1.0 / 3.0), 1e-13);
  // direct pmf: C(2,1) B(2,2) / B(1,1) = 2 / 6
  EXPECT_NEAR(std::exp(d.log_pmf(1)), 2.0 * (1.0 / 6.0), 1e-14);
}

TEST(LogDensity, TruncatedExponentialRateZeroIsUniform) {
  const ParametricDistribution d = TruncatedExponential(0.0, 2.0);
  EXPECT_NEAR(log_density(d, Vector::Constant(1, 1.0)), std::log(0.5), 1e-14);
}

TEST(LogDensity, OutsideSupportIsNegativeInfinity) {
  EXPECT_EQ(BetaDist(2, 3).log_density(1.5), -kInf);
  EXPECT_EQ(InverseGamma(2, 3).log_density(-1.0), -kInf);
  EXPECT_EQ(TruncatedExponential(1.0, 2.0).log_density(2.5), -kInf);
  EXPECT_EQ(ExponentialDist(1.0).log_density(-0.1), -kInf);
  EXPECT_EQ(BinomialDist(5, 0.3).log_pmf(6), -kInf);
  EXPECT_EQ(log_density(ParametricDistribution(BinomialDist(5, 0.3)), Vector::Constant(1, 1.5)),
            -kInf);
}

TEST(Validation, BadParametersThrow) {
  EXPECT_THROW(BetaDist(0.0, 1.0), ValidationError);
  EXPECT_THROW(InverseGamma(1.0, -1.0), ValidationError);
  EXPECT_THROW(NormalInverseGamma(0.0, 0.0, 1.0, 1.0), ValidationError);
  EXPECT_THROW(TruncatedExponential(1.0, 0.0), ValidationError);
  EXPECT_THROW(ExponentialDist(0.0), ValidationError);
  EXPECT_THROW(BinomialDist(0, 0.5), ValidationError);
  EXPECT_THROW(BinomialDist(3, 1.5), ValidationError);
  EXPECT_THROW(BetaBinomialDist(3, 1.0, 2.0), ValidationError);
  Matrix not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianMV(Vector::Zero(2), not_pd), ValidationError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(GaussianMV(Vector::Zero(2), asym), ValidationError);
}

TEST(Sample, DegenerateBinomial) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(BinomialDist(5, 0.0).sample(rng), 0);
    EXPECT_EQ(BinomialDist(5, 1.0).sample(rng), 5);
  }
}

TEST(Sample, GaussianMeanLawOfLargeNumbers) {
  const ParametricDistribution d = GaussianMV::univariate(3.0, 4.0);
  Rng rng(11);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += sample(d, rng)(0);
  EXPECT_NEAR(sum / 100000, 3.0, 0.05);
}

TEST(Sample, SameSeedSameDraws) {
  const ParametricDistribution d = NormalInverseGamma(1.0, 2.0, 3.0, 4.0);
  Rng a(99, 5), b(99, 5);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample(d, a), sample(d, b));
}

TEST(Normalization, ContinuousFamiliesIntegrateToOne) {
  for (auto [a, b] : {std::pair{0.5, 0.5}, {2.0, 3.0}, {8.0, 4.0}, {1.0, 1.0}, {30.0, 0.7}}) {
    const BetaDist d(a, b);
    EXPECT_NEAR(integrate_finite([&](double x) { return std::exp(d.log_density(x)); }, 0.0, 1.0),
                1.0, 1e-6)
        << a << "," << b;
  }
  for (auto [a, b] : {std::pair{2.0, 2.0}, {0.8, 3.0}, {5.0, 4.0}, {12.0, 0.5}}) {
    const InverseGamma d(a, b);
    EXPECT_NEAR(integrate_half_line([&](double x) { return std::exp(d.log_density(x)); }), 1.0,
                1e-6);
  }
  for (double rate : {-30.0, -2.0, 0.0, 1e-12, 3.0, 40.0}) {
    const TruncatedExponential d(rate, 1.7);
    EXPECT_NEAR(integrate_finite([&](double x) { return std::exp(d.log_density(x)); }, 0.0, 1.7),
                1.0, 1e-10)
        << rate;
  }
  const ExponentialDist e(0.3);
  EXPECT_NEAR(integrate_half_line([&](double x) { return std::exp(e.log_density(x)); }), 1.0, 1e-6);
  const NormalInverseGamma nig(0.5, 2.0, 3.0, 1.5);
  const double nig_mass = integrate_half_line([&](double s2) {
    return integrate_finite([&](double m) { return std::exp(nig.log_density(m, s2)); }, -60.0,
                            60.0);
  });
  EXPECT_NEAR(nig_mass, 1.0, 1e-6);
}

TEST(Normalization, MultivariateGaussianByMonteCarlo) {
  Matrix cov(2, 2);
  cov << 2.0, 0.6, 0.6, 0.5;
  const GaussianMV d(Vector::Zero(2), cov);
  // importance sampling from a wide isotropic proposal
  const GaussianMV proposal(Vector::Zero(2), 9.0 * Matrix::Identity(2, 2));
  Rng rng(17);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Vector x = proposal.sample(rng);
    acc += std::exp(d.log_density(x) - proposal.log_density(x));
  }
  EXPECT_NEAR(acc / n, 1.0, 1e-2);
}

TEST(Normalization, DiscreteFamiliesSumToOne) {
  for (long n : {1L, 7L, 50L, 1083L}) {
    for (double theta : {0.0, 0.013, 0.5, 0.97, 1.0}) {
      const BinomialDist d(n, theta);
      double total = 0.0;
      for (long y = 0; y <= n; ++y) total += std::exp(d.log_pmf(y));
      EXPECT_NEAR(total, 1.0, 1e-12) << n << " " << theta;
    }
    for (auto [eta, K] : {std::pair{0.001, 2000.0}, {0.5, 2.0}, {0.3, 0.4}}) {
      const BetaBinomialDist d(n, eta, K);
      double total = 0.0;
      for (long y = 0; y <= n; ++y) total += std::exp(d.log_pmf(y));
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(SamplerAgreement, ContinuousFamiliesKolmogorovSmirnov) {
  const int n = 10000;
  Rng rng(2024);
  std::vector<double> xs(n);

  const BetaDist beta(0.5, 2.5);
  for (auto& x : xs) x = beta.sample(rng);
  EXPECT_LT(ks_distance(xs, [&](double x) { return beta.cdf(x); }), kKsThreshold);

  const InverseGamma ig(3.0, 2.0);
  for (auto& x : xs) x = ig.sample(rng);
  EXPECT_LT(ks_distance(xs, [&](double x) { return ig.cdf(x); }), kKsThreshold);

  const TruncatedExponential te(-3.0, 2.0);
  for (auto& x : xs) x = te.sample(rng);
  EXPECT_LT(ks_distance(xs, [&](double x) { return std::expm1(-3.0 * x) / std::expm1(-6.0); }),
            kKsThreshold);

  const ExponentialDist ex(2.0);
  for (auto& x : xs) x = ex.sample(rng);
  EXPECT_LT(ks_distance(xs, [&](double x) { return -std::expm1(-2.0 * x); }), kKsThreshold);

  const GaussianMV g = GaussianMV::univariate(-1.0, 0.25);
  for (auto& x : xs) x = g.sample(rng)(0);
  EXPECT_LT(ks_distance(xs, [&](double x) { return normal_cdf((x + 1.0) / 0.5); }), kKsThreshold);

  // gamma with shape below one exercises the boost step
  for (auto& x : xs) x = rng.gamma(0.3);
  EXPECT_LT(ks_distance(xs, [&](double x) { return boost::math::gamma_p(0.3, x); }), kKsThreshold);
}

TEST(SamplerAgreement, DiscreteFamiliesPmfFrequencies) {
  const int n = 10000;
  Rng rng(77);
  auto max_freq_error = [&](auto&& dist, long support) {
    std::vector<int> counts(support + 1, 0);
    for (int i = 0; i < n; ++i) ++counts[dist.sample(rng)];
    double worst = 0.0;
    for (long y = 0; y <= support; ++y)
      worst = std::max(worst, std::fabs(counts[y] / double(n) - std::exp(dist.log_pmf(y))));
    return worst;
  };
  EXPECT_LT(max_freq_error(BinomialDist(20, 0.3), 20), 0.02);
  EXPECT_LT(max_freq_error(BinomialDist(400, 0.01), 400), 0.02);
  EXPECT_LT(max_freq_error(BetaBinomialDist(10, 0.5, 2.0), 10), 0.02);
}

TEST(Mixture, ValidatesWeights) {
  const auto c = GaussianMV::univariate(0.0, 1.0);
  EXPECT_THROW(GaussianMixtureApprox(Vector::Constant(2, 0.6), {c, c}), ValidationError);
  Vector w(2);
  w << 1.2, -0.2;
  EXPECT_THROW(GaussianMixtureApprox(w, {c, c}), ValidationError);
  w << 0.25, 0.75;
  const GaussianMixtureApprox q(w, {c, GaussianMV::univariate(3.0, 1.0)});
  EXPECT_NEAR(q.mean()(0), 2.25, 1e-14);
  EXPECT_NEAR(integrate_finite([&](double x) { return std::exp(q.log_density(Vector::Constant(1, x))); },
                               -30.0, 30.0),
              1.0, 1e-10);
}
