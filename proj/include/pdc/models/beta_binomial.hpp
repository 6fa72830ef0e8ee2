#pragma once

// Beta-binomial counts with mean eta and precision K, parameterized as
// theta = (logit eta, log K) under a bivariate Gaussian prior. The posterior
// is computed either on a grid or by a two-component Gaussian mixture
// variational fit; with the mixture fit the KL discrepancy uses the
// Hershey-Olsen approximation.

#include <cmath>
#include <string_view>

#include "pdc/models/common.hpp"

namespace pdc {

namespace detail {

/// lgamma(x + m) - lgamma(x) for an integer m >= 0.
inline double log_rising(double x, long m) {
  if (m <= 16) {
    double s = 0.0;
    for (long j = 0; j < m; ++j) s += std::log(x + static_cast<double>(j));
    return s;
  }
  return log_gamma(x + static_cast<double>(m)) - log_gamma(x);
}

/// digamma(x + m) - digamma(x) for an integer m >= 0.
inline double digamma_rising(double x, long m) {
  if (m <= 16) {
    double s = 0.0;
    for (long j = 0; j < m; ++j) s += 1.0 / (x + static_cast<double>(j));
    return s;
  }
  return digamma(x + static_cast<double>(m)) - digamma(x);
}

/// log p(y | theta) for one beta-binomial row without the binomial
/// coefficient, and optionally its theta-gradient.
inline double beta_binomial_loglik(double logit_eta, double log_K, long n, long y, double* g1,
                                   double* g2) {
  const double eta = logistic(logit_eta);
  const double K = std::exp(log_K);
  const double a = K * eta, b = K * (1.0 - eta);
  const double value = log_rising(a, y) + log_rising(b, n - y) - log_rising(K, n);
  if (g1 && g2) {
    const double ga = digamma_rising(a, y);
    const double gb = digamma_rising(b, n - y);
    const double gK = -digamma_rising(K, n);
    *g1 = (ga - gb) * a * (1.0 - eta);
    *g2 = ga * a + gb * b + gK * K;
  }
  return value;
}

}  // namespace detail

class BetaBinomialModel {
 public:
  static constexpr std::string_view kName = "beta-binomial";

  enum class Strategy { variational, grid };

  BetaBinomialModel(GaussianMV prior, Strategy strategy = Strategy::variational)
      : prior_(std::move(prior)), strategy_(strategy) {
    detail::require(prior_.dim() == 2, "beta-binomial: prior must be bivariate");
    settings_.observed.max_iterations = 10000;
    settings_.observed.convergence_window = 1000;
    settings_.observed.convergence_tol = 1e-5;
    settings_.replicate.max_iterations = 1500;
    settings_.replicate.convergence_window = 250;
    settings_.replicate.convergence_tol = 1e-4;
  }

  static BetaBinomialModel from_params(ParamMap params) {
    double m1 = -7.1, m2 = 7.9, v1 = 0.25, v2 = 0.25, c12 = 0.0;
    double grid = 0.0, points = 200.0, width = 6.0, components = 2.0, n_fisher = 1000.0;
    detail::take(params, "mu1", m1);
    detail::take(params, "mu2", m2);
    detail::take(params, "var1", v1);
    detail::take(params, "var2", v2);
    detail::take(params, "cov12", c12);
    detail::take(params, "grid", grid);
    detail::take(params, "grid_points", points);
    detail::take(params, "grid_sd", width);
    detail::take(params, "components", components);
    detail::take(params, "n_fisher", n_fisher);
    detail::reject_leftovers(params, std::string(kName));
    detail::require(grid == 0.0 || grid == 1.0, "beta-binomial: grid must be 0 or 1");
    detail::require(points >= 2.0 && points == std::floor(points),
                    "beta-binomial: grid_points must be an integer >= 2");
    detail::require(width > 0.0, "beta-binomial: grid_sd must be positive");
    detail::require(components >= 1.0 && components == std::floor(components),
                    "beta-binomial: components must be a positive integer");
    detail::require(n_fisher >= 1.0 && n_fisher == std::floor(n_fisher),
                    "beta-binomial: n_fisher must be a positive integer");
    Vector mean(2);
    mean << m1, m2;
    Matrix cov(2, 2);
    cov << v1, c12, c12, v2;
    BetaBinomialModel model(GaussianMV(mean, cov), grid == 1.0 ? Strategy::grid : Strategy::variational);
    model.grid_points_ = static_cast<int>(points);
    model.grid_sd_ = width;
    model.components_ = static_cast<int>(components);
    model.n_fisher_ = static_cast<long>(n_fisher);
    return model;
  }
  ParamMap params() const {
    return {{"mu1", prior_.mean()(0)},
            {"mu2", prior_.mean()(1)},
            {"var1", prior_.cov()(0, 0)},
            {"var2", prior_.cov()(1, 1)},
            {"cov12", prior_.cov()(0, 1)},
            {"grid", strategy_ == Strategy::grid ? 1.0 : 0.0},
            {"grid_points", static_cast<double>(grid_points_)},
            {"grid_sd", grid_sd_},
            {"components", static_cast<double>(components_)},
            {"n_fisher", static_cast<double>(n_fisher_)}};
  }

  std::string_view name() const { return kName; }
  const GaussianMV& prior() const { return prior_; }
  Strategy strategy() const { return strategy_; }
  int grid_points() const { return grid_points_; }
  void set_grid_points(int points) {
    detail::require(points >= 2, "beta-binomial: grid_points must be >= 2");
    grid_points_ = points;
  }
  int components() const { return components_; }
  VariationalSettings& settings() { return settings_; }
  const VariationalSettings& settings() const { return settings_; }

  void validate_data(const Dataset& data) const { data.require_counts("beta-binomial"); }

  /// log p(y, theta) on the (logit eta, log K) scale, with gradient.
  struct Target {
    const BetaBinomialModel* model;
    std::vector<long> n, y;
    double log_binom = 0.0;

    int dim() const { return 2; }
    Vector init_mean() const { return model->prior_.mean(); }
    Matrix init_cov() const { return model->prior_.cov(); }

    double log_likelihood(const Vector& theta, Vector* grad) const {
      double value = log_binom;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < n.size(); ++i) {
        double g1 = 0.0, g2 = 0.0;
        value += detail::beta_binomial_loglik(theta(0), theta(1), n[i], y[i], grad ? &g1 : nullptr,
                                              grad ? &g2 : nullptr);
        s1 += g1;
        s2 += g2;
      }
      if (grad) {
        grad->resize(2);
        (*grad) << s1, s2;
      }
      return value;
    }

    double log_joint(const Vector& theta, Vector* grad) const {
      const auto& g = model->prior_;
      const Vector w = g.chol().triangularView<Eigen::Lower>().solve(theta - g.mean());
      const double lp = -0.5 * (2.0 * kLogTwoPi + g.log_det_cov() + w.squaredNorm());
      const double ll = log_likelihood(theta, grad);
      if (grad) *grad -= g.chol().transpose().triangularView<Eigen::Upper>().solve(w);
      return lp + ll;
    }
  };

  Target target(const Dataset& data) const {
    Target t{this, {}, {}, 0.0};
    for (const auto& row : data.rows()) {
      t.n.push_back(row.n);
      t.y.push_back(static_cast<long>(row.y));
      t.log_binom += log_choose(static_cast<double>(row.n), row.y);
    }
    return t;
  }

  /// Box of grid_sd prior standard deviations around the prior mean.
  GridPosterior grid_posterior(const Dataset& data) const {
    const Target t = target(data);
    const Vector& m = prior_.mean();
    const double s1 = grid_sd_ * std::sqrt(prior_.cov()(0, 0));
    const double s2 = grid_sd_ * std::sqrt(prior_.cov()(1, 1));
    return GridPosterior::tabulate([&](const Vector& p) { return t.log_joint(p, nullptr); },
                                   m(0) - s1, m(0) + s1, m(1) - s2, m(1) + s2, grid_points_,
                                   grid_points_);
  }

  MixtureFit variational_posterior(const Dataset& data, const FitConfig& config) const {
    return fit_gmm_vb(target(data), components_, config);
  }

  /// Grid strategy: R_order of the tabulated posterior. Variational
  /// strategy: Hershey-Olsen KL of the mixture fit, seeded from rng.
  double discrepancy(const Dataset& data, const DivergenceOrder& order, Rng& rng) const {
    return discrepancy_with(data, order, rng, settings_.replicate);
  }
  double observed_discrepancy(const Dataset& data, const DivergenceOrder& order, Rng& rng) const {
    return discrepancy_with(data, order, rng, settings_.observed);
  }

  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const Vector theta = prior_.sample(rng);
    const BetaBinomialDist dist(1, logistic(theta(0)), std::exp(theta(1)));
    Dataset out = shape;
    for (auto& row : out.rows())
      row.y = static_cast<double>(rng.binomial(row.n, rng.beta(dist.a(), dist.b())));
    return out;
  }

  double prior_log_density(const Vector& theta) const { return prior_.log_density(theta); }
  Vector prior_sample(Rng& rng) const { return prior_.sample(rng); }

  /// Expected information of one row with n_fisher trials: the exact
  /// expectation over y of central differences of the analytic score.
  Matrix fisher_info(const Vector& theta) const {
    const BetaBinomialDist dist(n_fisher_, logistic(theta(0)), std::exp(theta(1)));
    const double h = 1e-5;
    Matrix info = Matrix::Zero(2, 2);
    for (long y = 0; y <= n_fisher_; ++y) {
      const double w = std::exp(dist.log_pmf(y));
      if (w < 1e-300) continue;
      for (int c = 0; c < 2; ++c) {
        Vector up = theta, down = theta;
        up(c) += h;
        down(c) -= h;
        double u1 = 0.0, u2 = 0.0, d1 = 0.0, d2 = 0.0;
        detail::beta_binomial_loglik(up(0), up(1), n_fisher_, y, &u1, &u2);
        detail::beta_binomial_loglik(down(0), down(1), n_fisher_, y, &d1, &d2);
        info(0, c) -= w * (u1 - d1) / (2.0 * h);
        info(1, c) -= w * (u2 - d2) / (2.0 * h);
      }
    }
    return 0.5 * (info + info.transpose());
  }
  long n_fisher() const { return n_fisher_; }

 private:
  double discrepancy_with(const Dataset& data, const DivergenceOrder& order, Rng& rng,
                          const FitConfig& config) const {
    if (strategy_ == Strategy::grid)
      return grid_posterior(data).renyi([&](const Vector& p) { return prior_.log_density(p); }, order);
    if (!order.is_kl())
      throw UnsupportedOperation(
          "beta-binomial: the mixture-variational discrepancy is the Hershey-Olsen KL "
          "approximation; use --order kl or set grid=1 for other orders");
    const MixtureFit fit = variational_posterior(data, detail::seeded(config, rng));
    return gmm_kl_upper_bound(fit.q, prior_);
  }

  GaussianMV prior_;
  Strategy strategy_;
  int grid_points_ = 200;
  double grid_sd_ = 6.0;
  int components_ = 2;
  long n_fisher_ = 1000;
  VariationalSettings settings_;
};

}  // namespace pdc
