#pragma once

// Normal observations with unknown mean and variance under a
// normal-inverse-gamma prior, theta = (mu, sigma^2) with theta_1 = mu and
// theta_2 = sigma^2 for hierarchical checks.

#include <cmath>
#include <optional>
#include <string_view>

#include "pdc/models/common.hpp"

namespace pdc {

inline NormalInverseGamma posterior_nig(const NormalInverseGamma& prior, const Dataset& data) {
  const auto ys = data.ys();
  detail::require(ys.size() >= 2, "posterior_nig: need at least two observations");
  const double n = static_cast<double>(ys.size());
  const double ybar = detail::sample_mean(ys);
  const double s2 = detail::sample_variance(ys);
  const double lambda = prior.lambda0() + n;
  const double mu = (prior.lambda0() * prior.mu0() + n * ybar) / lambda;
  const double d = ybar - prior.mu0();
  const double b = prior.b() + 0.5 * (n - 1.0) * s2 + n * prior.lambda0() * d * d / (2.0 * lambda);
  return NormalInverseGamma(mu, lambda, prior.a() + 0.5 * n, b);
}

class NormalNIG {
 public:
  static constexpr std::string_view kName = "normal-nig";

  explicit NormalNIG(NormalInverseGamma prior) : prior_(prior) {}
  static NormalNIG from_params(ParamMap params) {
    double mu0 = 0.0, lambda0 = 1.0, a = 2.0, b = 2.0;
    detail::take(params, "mu0", mu0);
    detail::take(params, "lambda0", lambda0);
    detail::take(params, "a", a);
    detail::take(params, "b", b);
    detail::reject_leftovers(params, std::string(kName));
    return NormalNIG(NormalInverseGamma(mu0, lambda0, a, b));
  }
  ParamMap params() const {
    return {{"mu0", prior_.mu0()}, {"lambda0", prior_.lambda0()}, {"a", prior_.a()}, {"b", prior_.b()}};
  }

  std::string_view name() const { return kName; }
  const NormalInverseGamma& prior() const { return prior_; }

  void validate_data(const Dataset& data) const {
    detail::require(data.size() >= 2, "normal-nig: need at least two observations");
  }

  NormalInverseGamma posterior(const Dataset& data) const { return posterior_nig(prior_, data); }

  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const Vector draw = prior_.sample(rng);
    return fill(shape, draw(0), draw(1), rng);
  }

  double discrepancy(const Dataset& data, const DivergenceOrder& order, Rng&) const {
    return renyi_nig(posterior(data), prior_, order);
  }

  /// Log prior-predictive density of T = (ybar, s^2) with respect to
  /// Lebesgue measure on (ybar, s^2).
  double predictive_log_density_T(const Dataset& data) const {
    validate_data(data);
    const auto ys = data.ys();
    const double n = static_cast<double>(ys.size());
    const double s2 = detail::sample_variance(ys);
    const double k = n - 1.0;
    const double c = 1.0 / prior_.lambda0() + 1.0 / n;
    const NormalInverseGamma post = posterior(data);
    return -0.5 * std::log(2.0 * M_PI * c) + 0.5 * k * std::log(0.5 * k) - log_gamma(0.5 * k) +
           (0.5 * k - 1.0) * std::log(s2) + prior_.a() * std::log(prior_.b()) -
           log_gamma(prior_.a()) + log_gamma(post.a()) - post.a() * std::log(post.b());
  }

  // -------------------------------------------------------------------------
  // Hierarchical checks

  struct HierContext {
    InverseGamma sigma2_posterior;
    std::vector<double> sigma2_draws;
  };

  HierContext hier_context(const Dataset& observed, std::optional<std::size_t> held_out,
                           int inner_draws, Rng& rng) const {
    detail::require(!held_out, "normal-nig: cross-validated checks need per-unit random effects");
    detail::require(inner_draws >= 1, "normal-nig: inner_draws must be positive");
    const NormalInverseGamma post = posterior(observed);
    HierContext ctx{post.marginal_variance(), {}};
    ctx.sigma2_draws.reserve(static_cast<std::size_t>(inner_draws));
    for (int i = 0; i < inner_draws; ++i) ctx.sigma2_draws.push_back(ctx.sigma2_posterior.sample(rng));
    return ctx;
  }

  /// Conditional prior-to-posterior divergence for mu given sigma^2, averaged
  /// over the context's sigma^2 draws. Direction is the posterior shift of mu.
  std::vector<UnitDiscrepancy> hier_discrepancy(const HierContext& ctx, const Dataset& data,
                                                const DivergenceOrder& order, Rng&) const {
    const NormalInverseGamma post = posterior(data);
    double acc = 0.0;
    for (double s2 : ctx.sigma2_draws)
      acc += renyi_normal(post.mu0(), s2 / post.lambda0(), prior_.mu0(), s2 / prior_.lambda0(), order);
    return {{acc / static_cast<double>(ctx.sigma2_draws.size()), post.mu0() - prior_.mu0(), false}};
  }

  /// Reference draw: sigma^2 from its posterior given the observed data,
  /// mu from its conditional prior, then the data.
  Dataset hier_reference_sample(const HierContext& ctx, const Dataset& shape, Rng& rng) const {
    const double s2 = ctx.sigma2_posterior.sample(rng);
    const double mu = rng.normal(prior_.mu0(), std::sqrt(s2 / prior_.lambda0()));
    return fill(shape, mu, s2, rng);
  }

  /// Marginal divergence for sigma^2: IG(a', b'(y)) against IG(a, b).
  double hier_marginal_discrepancy(const Dataset& data, const DivergenceOrder& order, Rng&) const {
    return renyi_inverse_gamma(posterior(data).marginal_variance(), prior_.marginal_variance(), order);
  }

  /// Closed form of the mu | sigma^2 check: the reference law of ybar is a
  /// scaled t with 2a' degrees of freedom, and the divergence is monotone
  /// in |ybar - mu0|.
  double hier1_t_p_value(const Dataset& observed) const {
    const NormalInverseGamma post = posterior(observed);
    const double n = static_cast<double>(observed.size());
    const double scale = std::sqrt(post.b() / post.a() * (1.0 / prior_.lambda0() + 1.0 / n));
    const double ybar = observed.sum_y() / n;
    return student_t_two_sided((ybar - prior_.mu0()) / scale, 2.0 * post.a());
  }

  // -------------------------------------------------------------------------
  // Asymptotic pieces: theta = (mu, sigma^2)

  double prior_log_density(const Vector& theta) const { return prior_.log_density(theta(0), theta(1)); }
  Vector prior_sample(Rng& rng) const { return prior_.sample(rng); }
  Matrix fisher_info(const Vector& theta) const {
    const double s2 = theta(1);
    detail::require(s2 > 0.0, "normal-nig: Fisher information needs sigma^2 > 0");
    Matrix I = Matrix::Zero(2, 2);
    I(0, 0) = 1.0 / s2;
    I(1, 1) = 0.5 / (s2 * s2);
    return I;
  }
  /// log g(mu | sigma^2) and a draw from it, for the hierarchical limit.
  double conditional_prior_log_density(double mu, double sigma2) const {
    return GaussianMV::univariate(prior_.mu0(), sigma2 / prior_.lambda0()).log_density(Vector::Constant(1, mu));
  }
  double conditional_prior_sample(double sigma2, Rng& rng) const {
    return rng.normal(prior_.mu0(), std::sqrt(sigma2 / prior_.lambda0()));
  }

  /// Variational target on (mu, log sigma^2); the log-Jacobian sigma^2 is
  /// included so the target is the posterior density on that scale.
  struct Target {
    const NormalNIG* model;
    double n, ybar, ss;
    int dim() const { return 2; }
    Vector init_mean() const {
      Vector m(2);
      m << model->prior_.mu0(), std::log(model->prior_.b() / (model->prior_.a() + 1.0));
      return m;
    }
    Matrix init_cov() const { return Matrix::Identity(2, 2); }
    double log_joint(const Vector& theta, Vector* grad) const {
      const auto& p = model->prior_;
      const double mu = theta(0), s = theta(1);
      const double inv = std::exp(-s);
      const double shape = p.a() + 0.5 + 0.5 * n;
      const double dm = mu - p.mu0(), dy = ybar - mu;
      const double Q = 2.0 * p.b() + p.lambda0() * dm * dm + ss + n * dy * dy;
      if (grad) {
        grad->resize(2);
        (*grad)(0) = -(p.lambda0() * dm - n * dy) * inv;
        (*grad)(1) = -shape + 0.5 * Q * inv;
      }
      return -shape * s - 0.5 * Q * inv;
    }
  };
  Target target(const Dataset& data) const {
    const auto ys = data.ys();
    if (ys.empty()) return {this, 0.0, 0.0, 0.0};
    const double ybar = detail::sample_mean(ys);
    double ss = 0.0;
    for (double y : ys) ss += (y - ybar) * (y - ybar);
    return {this, static_cast<double>(ys.size()), ybar, ss};
  }

 private:
  static Dataset fill(const Dataset& shape, double mu, double s2, Rng& rng) {
    Dataset out = shape;
    const double sd = std::sqrt(s2);
    for (auto& row : out.rows()) row.y = rng.normal(mu, sd);
    return out;
  }

  NormalInverseGamma prior_;
};

}  // namespace pdc
