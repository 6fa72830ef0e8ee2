#pragma once

// Normal observations with known variance and a normal prior on the mean.

#include <cmath>
#include <string_view>

#include "pdc/models/common.hpp"

namespace pdc {

/// Posterior N(tau2 * gamma, tau2) of a normal mean after one observation y,
/// with tau2 = (1/sigma0^2 + 1/sigma^2)^-1 and gamma = mu0/sigma0^2 + y/sigma^2.
inline GaussianMV posterior_normal_known_var(const GaussianMV& prior, double sigma2, double y) {
  detail::require(prior.dim() == 1, "posterior_normal_known_var: prior must be univariate");
  detail::require(sigma2 > 0.0, "posterior_normal_known_var: sigma2 must be positive");
  const double s0 = prior.cov()(0, 0);
  const double tau2 = 1.0 / (1.0 / s0 + 1.0 / sigma2);
  const double gamma = prior.mean()(0) / s0 + y / sigma2;
  return GaussianMV::univariate(tau2 * gamma, tau2);
}

class NormalLocation {
 public:
  static constexpr std::string_view kName = "normal-location";

  NormalLocation(double mu0, double sigma0sq, double sigmasq)
      : mu0_(mu0), sigma0sq_(sigma0sq), sigmasq_(sigmasq) {
    detail::require(std::isfinite(mu0), "normal-location: mu0 must be finite");
    detail::require(sigma0sq > 0.0 && sigmasq > 0.0,
                    "normal-location: sigma0sq and sigmasq must be positive");
  }
  static NormalLocation from_params(ParamMap params) {
    double mu0 = 0.0, s0 = 1.0, s = 1.0;
    detail::take(params, "mu0", mu0);
    detail::take(params, "sigma0sq", s0);
    detail::take(params, "sigmasq", s);
    detail::reject_leftovers(params, std::string(kName));
    return {mu0, s0, s};
  }
  ParamMap params() const { return {{"mu0", mu0_}, {"sigma0sq", sigma0sq_}, {"sigmasq", sigmasq_}}; }

  std::string_view name() const { return kName; }
  double mu0() const { return mu0_; }
  double sigma0sq() const { return sigma0sq_; }
  double sigmasq() const { return sigmasq_; }

  GaussianMV prior() const { return GaussianMV::univariate(mu0_, sigma0sq_); }

  void validate_data(const Dataset&) const {}

  /// Conjugate update with all rows; an empty dataset returns the prior.
  GaussianMV posterior(const Dataset& data) const {
    const double n = static_cast<double>(data.size());
    if (data.empty()) return prior();
    return posterior_normal_known_var(prior(), sigmasq_ / n, data.sum_y() / n);
  }

  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const double mu = rng.normal(mu0_, std::sqrt(sigma0sq_));
    Dataset out = shape;
    for (auto& row : out.rows()) row.y = rng.normal(mu, std::sqrt(sigmasq_));
    return out;
  }

  double discrepancy(const Dataset& data, const DivergenceOrder& order, Rng&) const {
    const GaussianMV post = posterior(data);
    return renyi_normal(post.mean()(0), post.cov()(0, 0), mu0_, sigma0sq_, order);
  }

  /// Log prior-predictive density of the sample mean, N(mu0, sigma0^2 + sigma^2 / n).
  double predictive_log_density_T(const Dataset& data) const {
    detail::require(!data.empty(), "normal-location: predictive of the mean needs n >= 1");
    const double n = static_cast<double>(data.size());
    const double v = sigma0sq_ + sigmasq_ / n;
    const double d = data.sum_y() / n - mu0_;
    return -0.5 * (kLogTwoPi + std::log(v) + d * d / v);
  }

  // Asymptotic pieces: theta = mu.
  double prior_log_density(const Vector& theta) const { return prior().log_density(theta); }
  Vector prior_sample(Rng& rng) const { return Vector::Constant(1, rng.normal(mu0_, std::sqrt(sigma0sq_))); }
  Matrix fisher_info(const Vector&) const { return Matrix::Constant(1, 1, 1.0 / sigmasq_); }

  /// Variational target for a dataset: log p(y, mu) and its gradient.
  struct Target {
    const NormalLocation* model;
    double n, sum_y;
    int dim() const { return 1; }
    Vector init_mean() const { return Vector::Constant(1, model->mu0_); }
    Matrix init_cov() const { return Matrix::Constant(1, 1, model->sigma0sq_); }
    double log_joint(const Vector& theta, Vector* grad) const {
      const double mu = theta(0);
      const double dp = mu - model->mu0_;
      // sum_i (y_i - mu)^2 = const - 2 mu sum_y + n mu^2
      const double lp = -0.5 * dp * dp / model->sigma0sq_ -
                        0.5 * (n * mu * mu - 2.0 * mu * sum_y) / model->sigmasq_;
      if (grad) {
        grad->resize(1);
        (*grad)(0) = -dp / model->sigma0sq_ - (n * mu - sum_y) / model->sigmasq_;
      }
      return lp;
    }
  };
  Target target(const Dataset& data) const {
    return {this, static_cast<double>(data.size()), data.sum_y()};
  }

 private:
  double mu0_, sigma0sq_, sigmasq_;
};

}  // namespace pdc
