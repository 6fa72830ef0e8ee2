#pragma once

// Logistic random effects for grouped binomial data:
//   y_i ~ Binomial(n_i, logistic(beta + u_i)), u_i | D ~ N(0, D),
//   beta ~ N(0, beta_var), log D ~ N(logD_mean, logD_var).
// theta = (u_1, ..., u_m, beta, log D); theta_1 = u (one unit at a time in
// the per-unit checks) and theta_2 = (beta, log D). Posteriors are full-rank
// Gaussian variational fits on this scale.

#include <cmath>
#include <optional>
#include <string_view>

#include "pdc/models/common.hpp"

namespace pdc {

/// Conditional divergence of u_i | theta_2 under a joint Gaussian q on
/// (u_1, ..., u_m, beta, log D) against the conditional prior N(0, D),
/// averaged over draws of theta_2 = (beta, log D). Direction is E_q(u_i).
inline UnitDiscrepancy kl1_star(const GaussianMV& q, int unit, const std::vector<Vector>& theta2_draws,
                                const DivergenceOrder& order) {
  const int d = q.dim();
  const int m = d - 2;
  detail::require(unit >= 0 && unit < m, "kl1_star: unit index out of range");
  detail::require(!theta2_draws.empty(), "kl1_star: need at least one theta_2 draw");
  const Matrix& S = q.cov();
  const Matrix S22 = S.bottomRightCorner(2, 2);
  const Eigen::RowVector2d s_i2 = S.block(unit, m, 1, 2);
  const Eigen::RowVector2d gain = s_i2 * S22.inverse();
  double cond_var = S(unit, unit) - gain.dot(s_i2);
  UnitDiscrepancy out{0.0, q.mean()(unit), false};
  if (!(cond_var > 1e-12)) {
    cond_var = 1e-12;
    out.clipped = true;
  }
  const Eigen::Vector2d m2 = q.mean().tail(2);
  for (const Vector& t2 : theta2_draws) {
    const double cond_mean = q.mean()(unit) + gain.dot(t2 - m2);
    out.value += renyi_normal(cond_mean, cond_var, 0.0, std::exp(t2(1)), order);
  }
  out.value /= static_cast<double>(theta2_draws.size());
  return out;
}

class LogisticRandomEffects {
 public:
  static constexpr std::string_view kName = "logistic-re";

  LogisticRandomEffects(double beta_var = 1000.0, double logD_mean = -3.5, double logD_var = 1.0)
      : beta_var_(beta_var), logD_mean_(logD_mean), logD_var_(logD_var) {
    detail::require(beta_var > 0.0 && logD_var > 0.0,
                    "logistic-re: prior variances must be positive");
    detail::require(std::isfinite(logD_mean), "logistic-re: logD_mean must be finite");
    settings_.observed.max_iterations = 20000;
    settings_.observed.step_size = 0.05;
    settings_.observed.decay_iterations = 1000.0;
    settings_.observed.convergence_window = 1000;
    settings_.observed.convergence_tol = 1e-5;
    settings_.replicate.max_iterations = 800;
    settings_.replicate.step_size = 0.01;
    settings_.replicate.decay_iterations = 200.0;
    settings_.replicate.convergence_window = 400;
    settings_.replicate.convergence_tol = 1e-6;
  }
  static LogisticRandomEffects from_params(ParamMap params) {
    double beta_var = 1000.0, logD_mean = -3.5, logD_var = 1.0;
    detail::take(params, "beta_var", beta_var);
    detail::take(params, "logD_mean", logD_mean);
    detail::take(params, "logD_var", logD_var);
    detail::reject_leftovers(params, std::string(kName));
    return LogisticRandomEffects(beta_var, logD_mean, logD_var);
  }
  ParamMap params() const {
    return {{"beta_var", beta_var_}, {"logD_mean", logD_mean_}, {"logD_var", logD_var_}};
  }

  std::string_view name() const { return kName; }
  VariationalSettings& settings() { return settings_; }
  const VariationalSettings& settings() const { return settings_; }

  void validate_data(const Dataset& data) const {
    data.require_counts("logistic-re");
    detail::require(!data.empty(), "logistic-re: need at least one unit");
  }

  /// Prior of theta_2 = (beta, log D).
  GaussianMV theta2_prior() const {
    Vector m(2);
    m << 0.0, logD_mean_;
    Matrix c = Matrix::Zero(2, 2);
    c(0, 0) = beta_var_;
    c(1, 1) = logD_var_;
    return GaussianMV(m, c);
  }

  struct Target {
    const LogisticRandomEffects* model;
    std::vector<double> n, y;
    double log_binom = 0.0;

    int dim() const { return static_cast<int>(n.size()) + 2; }
    Vector init_mean() const {
      Vector m = Vector::Zero(dim());
      m(dim() - 1) = model->logD_mean_;
      return m;
    }
    Matrix init_cov() const { return Matrix::Identity(dim(), dim()); }

    double log_joint(const Vector& theta, Vector* grad) const {
      const int m = static_cast<int>(n.size());
      const double beta = theta(m), logD = theta(m + 1);
      const double D = std::exp(logD);
      const auto& md = *model;
      double lp = log_binom;
      double g_beta = 0.0, g_logD = 0.0;
      if (grad) grad->resize(dim());
      for (int i = 0; i < m; ++i) {
        const double eta = beta + theta(i);
        const double resid = y[i] - n[i] * logistic(eta);
        lp += y[i] * eta - n[i] * log1p_exp(eta);
        lp += -0.5 * (kLogTwoPi + logD) - 0.5 * theta(i) * theta(i) / D;
        if (grad) {
          (*grad)(i) = resid - theta(i) / D;
          g_beta += resid;
          g_logD += -0.5 + 0.5 * theta(i) * theta(i) / D;
        }
      }
      const double dl = logD - md.logD_mean_;
      lp += -0.5 * (kLogTwoPi + std::log(md.beta_var_)) - 0.5 * beta * beta / md.beta_var_;
      lp += -0.5 * (kLogTwoPi + std::log(md.logD_var_)) - 0.5 * dl * dl / md.logD_var_;
      if (grad) {
        (*grad)(m) = g_beta - beta / md.beta_var_;
        (*grad)(m + 1) = g_logD - dl / md.logD_var_;
      }
      return lp;
    }
  };

  Target target(const Dataset& data) const {
    Target t{this, {}, {}, 0.0};
    for (const auto& row : data.rows()) {
      t.n.push_back(static_cast<double>(row.n));
      t.y.push_back(row.y);
      t.log_binom += log_choose(static_cast<double>(row.n), row.y);
    }
    return t;
  }

  GaussianFit fit(const Dataset& data, const FitConfig& config, const GaussianMV* warm_start = nullptr) const {
    return fit_gaussian_vb(target(data), config, warm_start);
  }

  /// Full prior predictive: beta, log D, then the unit effects and counts.
  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const double beta = rng.normal(0.0, std::sqrt(beta_var_));
    const double D = std::exp(rng.normal(logD_mean_, std::sqrt(logD_var_)));
    return fill(shape, beta, D, rng);
  }

  [[noreturn]] double discrepancy(const Dataset&, const DivergenceOrder&, Rng&) const {
    throw UnsupportedOperation(
        "logistic-re: only hierarchical checks are available; use hier-check with --level 1 or 2");
  }

  // -------------------------------------------------------------------------
  // Hierarchical checks

  struct HierContext {
    GaussianFit observed_fit;           // full observed data; replicate warm start
    GaussianMV theta2_reference;        // g(theta_2 | y_obs) or g(theta_2 | y_obs,-i)
    std::vector<Vector> theta2_draws;   // shared draws for the inner expectation
    std::optional<std::size_t> held_out;
    std::optional<FitDiagnostics> held_out_diagnostics;
  };

  HierContext hier_context(const Dataset& observed, std::optional<std::size_t> held_out,
                           int inner_draws, Rng& rng) const {
    validate_data(observed);
    detail::require(inner_draws >= 1, "logistic-re: inner_draws must be positive");
    detail::require(!held_out || *held_out < observed.size(), "logistic-re: unit index out of range");
    GaussianFit full = fit(observed, detail::seeded(settings_.observed, rng));
    const int m = static_cast<int>(observed.size());
    std::optional<GaussianMV> reference;
    std::optional<FitDiagnostics> held_diag;
    if (!held_out) {
      reference = full.q.marginal({m, m + 1});
    } else {
      const Dataset rest = observed.without(*held_out);
      if (rest.empty()) {
        reference = theta2_prior();
      } else {
        const GaussianFit part = fit(rest, detail::seeded(settings_.observed, rng));
        reference = part.q.marginal({m - 1, m});
        held_diag = part.diagnostics;
      }
    }
    HierContext ctx{std::move(full), *reference, {}, held_out, held_diag};
    ctx.theta2_draws.reserve(static_cast<std::size_t>(inner_draws));
    for (int s = 0; s < inner_draws; ++s) ctx.theta2_draws.push_back(ctx.theta2_reference.sample(rng));
    return ctx;
  }

  /// KL1* for every unit of a replicate, from a fit warm-started at the
  /// observed fit.
  std::vector<UnitDiscrepancy> hier_discrepancy(const HierContext& ctx, const Dataset& data,
                                                const DivergenceOrder& order, Rng& rng) const {
    const GaussianFit f = fit(data, detail::seeded(settings_.replicate, rng), &ctx.observed_fit.q);
    return unit_discrepancies(f.q, ctx, order);
  }

  /// KL1* for the observed data, reusing the context's fit.
  std::vector<UnitDiscrepancy> hier_observed_discrepancy(const HierContext& ctx, const Dataset&,
                                                         const DivergenceOrder& order, Rng&) const {
    return unit_discrepancies(ctx.observed_fit.q, ctx, order);
  }

  Dataset hier_reference_sample(const HierContext& ctx, const Dataset& shape, Rng& rng) const {
    const Vector t2 = ctx.theta2_reference.sample(rng);
    return fill(shape, t2(0), std::exp(t2(1)), rng);
  }

  /// Divergence of the variational (beta, log D) marginal from its prior.
  double hier_marginal_discrepancy(const Dataset& data, const DivergenceOrder& order, Rng& rng) const {
    const int m = static_cast<int>(data.size());
    const GaussianFit f = fit(data, detail::seeded(settings_.observed, rng));
    return renyi_gaussian(f.q.marginal({m, m + 1}), theta2_prior(), order);
  }

  // Asymptotic pieces are not offered: the dimension of u grows with the data.

 private:
  std::vector<UnitDiscrepancy> unit_discrepancies(const GaussianMV& q, const HierContext& ctx,
                                                  const DivergenceOrder& order) const {
    const int m = q.dim() - 2;
    std::vector<UnitDiscrepancy> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out.push_back(kl1_star(q, i, ctx.theta2_draws, order));
    return out;
  }

  static Dataset fill(const Dataset& shape, double beta, double D, Rng& rng) {
    Dataset out = shape;
    const double sd = std::sqrt(D);
    for (auto& row : out.rows()) {
      const double u = rng.normal(0.0, sd);
      row.y = static_cast<double>(rng.binomial(row.n, logistic(beta + u)));
    }
    return out;
  }

  double beta_var_, logD_mean_, logD_var_;
  VariationalSettings settings_;
};

}  // namespace pdc
