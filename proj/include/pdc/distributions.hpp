#pragma once

// Parametric families used by the shipped models. Each family validates its
// parameters on construction (ValidationError) and is immutable afterwards.
// Log-densities return -infinity outside the support rather than throwing.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "pdc/error.hpp"
#include "pdc/linalg.hpp"
#include "pdc/rng.hpp"
#include "pdc/special.hpp"

namespace pdc {

/// Multivariate normal N(mean, cov); the Cholesky factor is kept alongside.
class GaussianMV {
 public:
  GaussianMV(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    detail::require(cov_.rows() == mean_.size() && cov_.cols() == mean_.size(),
                    "GaussianMV: covariance shape does not match mean");
    detail::require(mean_.size() > 0, "GaussianMV: empty mean");
    detail::require(mean_.allFinite() && cov_.allFinite(), "GaussianMV: non-finite parameters");
    detail::require(detail::is_symmetric(cov_), "GaussianMV: covariance is not symmetric");
    const auto llt = detail::checked_cholesky(cov_, "GaussianMV covariance");
    chol_ = llt.matrixL();
    log_det_ = detail::log_det_from_cholesky(llt);
  }

  static GaussianMV univariate(double mean, double variance) {
    return GaussianMV(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
  }

  /// From a lower-triangular factor with positive diagonal.
  static GaussianMV from_cholesky(Vector mean, const Matrix& lower) {
    Matrix cov = lower * lower.transpose();
    return GaussianMV(std::move(mean), 0.5 * (cov + cov.transpose()));
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const Matrix& chol() const { return chol_; }
  double log_det_cov() const { return log_det_; }

  double log_density(const Vector& x) const {
    if (x.size() != mean_.size()) throw ValidationError("GaussianMV: point has wrong dimension");
    const Vector w = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    return -0.5 * (dim() * kLogTwoPi + log_det_ + w.squaredNorm());
  }

  Vector sample(Rng& rng) const {
    Vector z(dim());
    for (int i = 0; i < dim(); ++i) z(i) = rng.normal();
    return mean_ + chol_.triangularView<Eigen::Lower>() * z;
  }

  /// Marginal over the listed coordinates.
  GaussianMV marginal(const std::vector<int>& idx) const {
    Vector m(idx.size());
    Matrix c(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m(i) = mean_(idx[i]);
      for (std::size_t j = 0; j < idx.size(); ++j) c(i, j) = cov_(idx[i], idx[j]);
    }
    return GaussianMV(std::move(m), std::move(c));
  }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix chol_;
  double log_det_ = 0.0;
};

class BetaDist {
 public:
  BetaDist(double a, double b) : a_(a), b_(b) {
    detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                    "BetaDist: shapes must be positive");
  }
  double a() const { return a_; }
  double b() const { return b_; }
  double mean() const { return a_ / (a_ + b_); }

  double log_density(double x) const {
    if (!(x > 0.0 && x < 1.0)) return -kInf;
    return (a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x) - log_beta(a_, b_);
  }
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return incomplete_beta(a_, b_, x);
  }
  double sample(Rng& rng) const { return rng.beta(a_, b_); }

 private:
  double a_, b_;
};

/// Inverse gamma with density b^a / Gamma(a) x^{-a-1} exp(-b / x).
///
/// `b` is a rate-type parameter: it enters the normal-inverse-gamma kernel as
/// exp(-(2b + ...) / (2 sigma^2)), so IG(a, b) has mean b / (a - 1). Some
/// references use the reciprocal "scale" convention instead.
class InverseGamma {
 public:
  InverseGamma(double a, double b) : a_(a), b_(b) {
    detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                    "InverseGamma: a and b must be positive");
  }
  double a() const { return a_; }
  double b() const { return b_; }

  double log_density(double x) const {
    if (!(x > 0.0)) return -kInf;
    return a_ * std::log(b_) - log_gamma(a_) - (a_ + 1.0) * std::log(x) - b_ / x;
  }
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_q(a_, b_ / x, detail::math_policy{});
  }
  double sample(Rng& rng) const { return b_ / rng.gamma(a_); }

 private:
  double a_, b_;
};

/// Normal-inverse-gamma on (mu, sigma^2): sigma^2 ~ IG(a, b) and
/// mu | sigma^2 ~ N(mu0, sigma^2 / lambda0).
class NormalInverseGamma {
 public:
  NormalInverseGamma(double mu0, double lambda0, double a, double b)
      : mu0_(mu0), lambda0_(lambda0), a_(a), b_(b) {
    detail::require(std::isfinite(mu0), "NormalInverseGamma: mu0 must be finite");
    detail::require(lambda0 > 0.0 && a > 0.0 && b > 0.0,
                    "NormalInverseGamma: lambda0, a and b must be positive");
  }
  double mu0() const { return mu0_; }
  double lambda0() const { return lambda0_; }
  double a() const { return a_; }
  double b() const { return b_; }

  InverseGamma marginal_variance() const { return {a_, b_}; }
  GaussianMV conditional_mean(double sigma2) const {
    return GaussianMV::univariate(mu0_, sigma2 / lambda0_);
  }

  double log_density(double mu, double sigma2) const {
    if (!(sigma2 > 0.0)) return -kInf;
    const double d = mu - mu0_;
    return 0.5 * std::log(lambda0_) - 0.5 * kLogTwoPi - 0.5 * std::log(sigma2) +
           a_ * std::log(b_) - log_gamma(a_) - (a_ + 1.0) * std::log(sigma2) -
           (2.0 * b_ + lambda0_ * d * d) / (2.0 * sigma2);
  }
  /// Draw as (mu, sigma^2).
  Vector sample(Rng& rng) const {
    const double sigma2 = b_ / rng.gamma(a_);
    Vector out(2);
    out << rng.normal(mu0_, std::sqrt(sigma2 / lambda0_)), sigma2;
    return out;
  }

 private:
  double mu0_, lambda0_, a_, b_;
};

/// Density proportional to exp(rate * x) on (0, upper). The rate may be
/// negative or zero (uniform).
class TruncatedExponential {
 public:
  TruncatedExponential(double rate, double upper) : rate_(rate), upper_(upper) {
    detail::require(std::isfinite(rate), "TruncatedExponential: rate must be finite");
    detail::require(upper > 0.0 && std::isfinite(upper),
                    "TruncatedExponential: upper bound must be positive");
  }
  double rate() const { return rate_; }
  double upper() const { return upper_; }
  /// rate * upper, the quantity t in the shifted-exponential model.
  double t() const { return rate_ * upper_; }

  /// log of the normalizing factor rate / (exp(rate * upper) - 1).
  double log_norm() const { return -std::log(upper_) - log_expm1_ratio(t()); }

  double log_density(double x) const {
    if (!(x > 0.0 && x < upper_)) return -kInf;
    return log_norm() + rate_ * x;
  }
  double mean() const { return upper_ * truncated_exp_mean_unit(t()); }
  double sample(Rng& rng) const {
    const double u = rng.uniform();
    if (std::fabs(t()) < 1e-10) return u * upper_;
    return std::log1p(u * std::expm1(t())) / rate_;
  }

 private:
  double rate_, upper_;
};

class ExponentialDist {
 public:
  explicit ExponentialDist(double kappa) : kappa_(kappa) {
    detail::require(kappa > 0.0 && std::isfinite(kappa), "ExponentialDist: rate must be positive");
  }
  double kappa() const { return kappa_; }
  double log_density(double x) const {
    if (!(x > 0.0)) return -kInf;
    return std::log(kappa_) - kappa_ * x;
  }
  double sample(Rng& rng) const { return rng.exponential(kappa_); }

 private:
  double kappa_;
};

class BinomialDist {
 public:
  BinomialDist(long n, double theta) : n_(n), theta_(theta) {
    detail::require(n >= 1, "BinomialDist: n must be at least 1");
    detail::require(theta >= 0.0 && theta <= 1.0, "BinomialDist: theta must lie in [0, 1]");
  }
  long n() const { return n_; }
  double theta() const { return theta_; }

  double log_pmf(long y) const {
    if (y < 0 || y > n_) return -kInf;
    return log_choose(n_, y) + xlogy(static_cast<double>(y), theta_) +
           xlogy(static_cast<double>(n_ - y), 1.0 - theta_);
  }
  long sample(Rng& rng) const { return rng.binomial(n_, theta_); }

 private:
  long n_;
  double theta_;
};

/// Beta-binomial with mean eta and precision K, i.e. Beta(K eta, K (1 - eta))
/// mixing a Binomial(n, p).
class BetaBinomialDist {
 public:
  BetaBinomialDist(long n, double eta, double K) : n_(n), eta_(eta), K_(K) {
    detail::require(n >= 0, "BetaBinomialDist: n must be non-negative");
    detail::require(eta > 0.0 && eta < 1.0, "BetaBinomialDist: eta must lie in (0, 1)");
    detail::require(K > 0.0 && std::isfinite(K), "BetaBinomialDist: K must be positive");
  }
  /// From Beta(a, b) shapes.
  static BetaBinomialDist from_shapes(long n, double a, double b) {
    return BetaBinomialDist(n, a / (a + b), a + b);
  }
  long n() const { return n_; }
  double eta() const { return eta_; }
  double K() const { return K_; }
  double a() const { return K_ * eta_; }
  double b() const { return K_ * (1.0 - eta_); }

  double log_pmf(long y) const {
    if (y < 0 || y > n_) return -kInf;
    return log_choose(n_, y) + log_beta(a() + y, b() + n_ - y) - log_beta(a(), b());
  }
  long sample(Rng& rng) const { return rng.binomial(n_, rng.beta(a(), b())); }

 private:
  long n_;
  double eta_, K_;
};

using ParametricDistribution =
    std::variant<GaussianMV, BetaDist, InverseGamma, NormalInverseGamma, TruncatedExponential,
                 ExponentialDist, BinomialDist, BetaBinomialDist>;

/// Log density (or log mass) at x. Scalar families read x(0); the
/// normal-inverse-gamma reads (mu, sigma^2); discrete families need an
/// integral x(0).
inline double log_density(const ParametricDistribution& dist, const Vector& x) {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, GaussianMV>) {
          return d.log_density(x);
        } else if constexpr (std::is_same_v<D, NormalInverseGamma>) {
          detail::require(x.size() == 2, "NormalInverseGamma point must be (mu, sigma^2)");
          return d.log_density(x(0), x(1));
        } else {
          detail::require(x.size() == 1, "scalar family expects a 1-vector");
          if constexpr (std::is_same_v<D, BinomialDist> || std::is_same_v<D, BetaBinomialDist>) {
            const double v = x(0);
            if (v != std::floor(v)) return -kInf;
            return d.log_pmf(static_cast<long>(v));
          } else {
            return d.log_density(x(0));
          }
        }
      },
      dist);
}

inline Vector sample(const ParametricDistribution& dist, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> Vector {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, GaussianMV> || std::is_same_v<D, NormalInverseGamma>) {
          return d.sample(rng);
        } else {
          return Vector::Constant(1, static_cast<double>(d.sample(rng)));
        }
      },
      dist);
}

}  // namespace pdc
