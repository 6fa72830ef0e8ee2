#pragma once

// Rényi divergences R_alpha(p || q) between supported family pairs.
//
// Direction: p is the sampling measure, i.e. for a conflict check p is the
// posterior and q the prior,
//
//   R_alpha(p || q) = 1 / (alpha - 1) log E_p[(p / q)^(alpha - 1)].
//
// The KL (alpha -> 1) and MR (alpha -> infinity, the supremum of log p / q)
// orders have their own analytic branches per family. An unbounded MR is
// reported as +infinity.

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "pdc/distributions.hpp"
#include "pdc/mixture.hpp"
#include "pdc/numerics.hpp"

namespace pdc {

class DivergenceOrder {
 public:
  enum class Kind { finite, kl, mr };

  static DivergenceOrder kl() { return DivergenceOrder(Kind::kl, 1.0); }
  static DivergenceOrder mr() { return DivergenceOrder(Kind::mr, kInf); }
  static DivergenceOrder finite(double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
      throw ValidationError("Renyi order must be positive, finite and different from 1 (got " +
                            std::to_string(alpha) + ")");
    return DivergenceOrder(Kind::finite, alpha);
  }

  /// "kl", "mr" or "alpha:<x>".
  static DivergenceOrder parse(std::string_view text) {
    if (text == "kl" || text == "KL") return kl();
    if (text == "mr" || text == "MR") return mr();
    constexpr std::string_view prefix = "alpha:";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string body(text.substr(prefix.size()));
      std::size_t used = 0;
      double alpha = 0.0;
      try {
        alpha = std::stod(body, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != body.size())
        throw ValidationError("malformed order '" + std::string(text) + "'");
      return finite(alpha);
    }
    throw ValidationError("unknown order '" + std::string(text) + "' (expected kl, mr or alpha:<x>)");
  }

  Kind kind() const { return kind_; }
  /// 1 for KL, +infinity for MR.
  double alpha() const { return alpha_; }
  bool is_kl() const { return kind_ == Kind::kl; }
  bool is_mr() const { return kind_ == Kind::mr; }

  std::string to_string() const {
    switch (kind_) {
      case Kind::kl:
        return "kl";
      case Kind::mr:
        return "mr";
      default: {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), alpha_);
        return "alpha:" + std::string(buf, end);
      }
    }
  }

  friend bool operator==(const DivergenceOrder&, const DivergenceOrder&) = default;

 private:
  DivergenceOrder(Kind kind, double alpha) : kind_(kind), alpha_(alpha) {}
  Kind kind_;
  double alpha_;
};

namespace detail {

inline void order_check(bool ok, const char* family, const DivergenceOrder& order) {
  if (!ok)
    throw OrderOutOfRange(std::string(family) + ": order " + order.to_string() +
                          " leaves the parameter space for this pair");
}

/// sup_{x > 0} [-A log x - B / x], +infinity when unbounded.
inline double sup_log_ratio_inverse_gamma(double A, double B) {
  if (A < 0.0 || B < 0.0) return kInf;
  if (A == 0.0) return 0.0;  // B >= 0: supremum approached as x -> infinity
  if (B == 0.0) return kInf;
  return -A * std::log(B / A) - A;
}

/// sup_{0 < x < 1} [A log x + B log(1 - x)], +infinity when unbounded.
inline double sup_log_ratio_beta(double A, double B) {
  if (A < 0.0 || B < 0.0) return kInf;
  if (A == 0.0 || B == 0.0) return 0.0;
  const double s = A + B;
  return A * std::log(A / s) + B * std::log(B / s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaussian

inline double kl_gaussian(const GaussianMV& p, const GaussianMV& q) {
  detail::require(p.dim() == q.dim(), "kl_gaussian: dimension mismatch");
  const auto Lq = q.chol().triangularView<Eigen::Lower>();
  const Matrix A = Lq.solve(p.chol());
  const Vector w = Lq.solve(p.mean() - q.mean());
  const double value =
      0.5 * (A.squaredNorm() + w.squaredNorm() - p.dim() + q.log_det_cov() - p.log_det_cov());
  return std::max(value, 0.0);
}

/// sup of log p / q over R^d. Finite iff cov_q - cov_p is positive
/// semidefinite and the mean shift lies in its range.
inline double renyi_gaussian_mr(const GaussianMV& p, const GaussianMV& q) {
  detail::require(p.dim() == q.dim(), "renyi_gaussian_mr: dimension mismatch");
  const Matrix diff = q.cov() - p.cov();
  const Vector delta = p.mean() - q.mean();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(diff);
  const double scale = std::max(q.cov().cwiseAbs().maxCoeff(), p.cov().cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  const Vector proj = eig.eigenvectors().transpose() * delta;
  double quad = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -tol) return kInf;
    if (lambda <= tol) {
      if (std::fabs(proj(i)) > 1e-12 * std::max(1.0, delta.norm())) return kInf;
      continue;
    }
    quad += proj(i) * proj(i) / lambda;
  }
  return std::max(0.5 * (q.log_det_cov() - p.log_det_cov()) + 0.5 * quad, 0.0);
}

/// Closed form for multivariate normals:
///   alpha/2 d' S_a^{-1} d - 1/(2(alpha-1)) log(|S_a| / (|S_p|^{1-alpha} |S_q|^alpha))
/// with S_a = alpha S_q + (1 - alpha) S_p, which must be positive definite.
inline double renyi_gaussian(const GaussianMV& p, const GaussianMV& q, const DivergenceOrder& order) {
  detail::require(p.dim() == q.dim(), "renyi_gaussian: dimension mismatch");
  if (order.is_kl()) return kl_gaussian(p, q);
  if (order.is_mr()) return renyi_gaussian_mr(p, q);
  const double alpha = order.alpha();
  const Matrix blended = alpha * q.cov() + (1.0 - alpha) * p.cov();
  Eigen::LLT<Matrix> llt(blended);
  detail::order_check(llt.info() == Eigen::Success, "renyi_gaussian", order);
  const Vector delta = p.mean() - q.mean();
  const double quad = delta.dot(llt.solve(delta));
  const double log_det_blend = detail::log_det_from_cholesky(llt);
  const double value =
      0.5 * alpha * quad -
      (log_det_blend - (1.0 - alpha) * p.log_det_cov() - alpha * q.log_det_cov()) /
          (2.0 * (alpha - 1.0));
  return std::max(value, 0.0);
}

/// Scalar normals N(m_p, v_p) against N(m_q, v_q), without the matrix
/// machinery; used in inner loops over many conditionals.
inline double renyi_normal(double m_p, double v_p, double m_q, double v_q,
                           const DivergenceOrder& order) {
  detail::require(v_p > 0.0 && v_q > 0.0, "renyi_normal: variances must be positive");
  const double delta = m_p - m_q;
  if (order.is_kl())
    return std::max(0.5 * (v_p / v_q + delta * delta / v_q - 1.0 + std::log(v_q / v_p)), 0.0);
  if (order.is_mr()) {
    if (v_q > v_p) return 0.5 * std::log(v_q / v_p) + 0.5 * delta * delta / (v_q - v_p);
    return v_q == v_p && delta == 0.0 ? 0.0 : kInf;
  }
  const double alpha = order.alpha();
  const double v_blend = alpha * v_q + (1.0 - alpha) * v_p;
  detail::order_check(v_blend > 0.0, "renyi_normal", order);
  const double value = 0.5 * alpha * delta * delta / v_blend -
                       (std::log(v_blend) - (1.0 - alpha) * std::log(v_p) - alpha * std::log(v_q)) /
                           (2.0 * (alpha - 1.0));
  return std::max(value, 0.0);
}

// ---------------------------------------------------------------------------
// Beta

inline double renyi_beta(const BetaDist& p, const BetaDist& q, const DivergenceOrder& order) {
  const double lb_p = log_beta(p.a(), p.b());
  const double lb_q = log_beta(q.a(), q.b());
  if (order.is_kl()) {
    const double value = lb_q - lb_p + (p.a() - q.a()) * digamma(p.a()) +
                         (p.b() - q.b()) * digamma(p.b()) +
                         (q.a() - p.a() + q.b() - p.b()) * digamma(p.a() + p.b());
    return std::max(value, 0.0);
  }
  if (order.is_mr()) {
    const double sup = detail::sup_log_ratio_beta(p.a() - q.a(), p.b() - q.b());
    return std::isinf(sup) ? kInf : std::max(lb_q - lb_p + sup, 0.0);
  }
  const double alpha = order.alpha();
  const double a_blend = alpha * p.a() + (1.0 - alpha) * q.a();
  const double b_blend = alpha * p.b() + (1.0 - alpha) * q.b();
  detail::order_check(a_blend > 0.0 && b_blend > 0.0, "renyi_beta", order);
  const double value = lb_q - lb_p + (log_beta(a_blend, b_blend) - lb_p) / (alpha - 1.0);
  return std::max(value, 0.0);
}

// ---------------------------------------------------------------------------
// Inverse gamma (rate-type b, see InverseGamma)

inline double renyi_inverse_gamma(const InverseGamma& p, const InverseGamma& q,
                                  const DivergenceOrder& order) {
  const double norm_p = p.a() * std::log(p.b()) - log_gamma(p.a());
  const double norm_q = q.a() * std::log(q.b()) - log_gamma(q.a());
  if (order.is_kl()) {
    const double value = (p.a() - q.a()) * digamma(p.a()) - log_gamma(p.a()) + log_gamma(q.a()) +
                         q.a() * (std::log(p.b()) - std::log(q.b())) +
                         p.a() * (q.b() - p.b()) / p.b();
    return std::max(value, 0.0);
  }
  if (order.is_mr()) {
    const double sup = detail::sup_log_ratio_inverse_gamma(p.a() - q.a(), p.b() - q.b());
    return std::isinf(sup) ? kInf : std::max(norm_p - norm_q + sup, 0.0);
  }
  const double alpha = order.alpha();
  const double a_blend = alpha * p.a() + (1.0 - alpha) * q.a();
  const double b_blend = alpha * p.b() + (1.0 - alpha) * q.b();
  detail::order_check(a_blend > 0.0 && b_blend > 0.0, "renyi_inverse_gamma", order);
  const double value =
      norm_p - norm_q +
      (log_gamma(a_blend) - a_blend * std::log(b_blend) + norm_p) / (alpha - 1.0);
  return std::max(value, 0.0);
}

// ---------------------------------------------------------------------------
// Normal-inverse-gamma

/// Divergence between two normal-inverse-gamma laws on (mu, sigma^2). The
/// normal part integrates out in closed form for every sigma^2, leaving an
/// inverse-gamma integral with a shifted rate.
inline double renyi_nig(const NormalInverseGamma& p, const NormalInverseGamma& q,
                        const DivergenceOrder& order) {
  const double norm_p = p.a() * std::log(p.b()) - log_gamma(p.a());
  const double norm_q = q.a() * std::log(q.b()) - log_gamma(q.a());
  const double wp = 1.0 / p.lambda0();
  const double wq = 1.0 / q.lambda0();
  const double delta = p.mu0() - q.mu0();
  if (order.is_kl()) {
    const double kl_ig = renyi_inverse_gamma(p.marginal_variance(), q.marginal_variance(), order);
    const double r = wp / wq;
    const double value =
        kl_ig + 0.5 * (r - 1.0 - std::log(r)) + 0.5 * delta * delta / wq * p.a() / p.b();
    return std::max(value, 0.0);
  }
  if (order.is_mr()) {
    double rate_shift = p.b() - q.b();
    if (p.lambda0() > q.lambda0()) {
      rate_shift -= p.lambda0() * q.lambda0() * delta * delta / (2.0 * (p.lambda0() - q.lambda0()));
    } else if (p.lambda0() < q.lambda0() || delta != 0.0) {
      return kInf;
    }
    const double sup = detail::sup_log_ratio_inverse_gamma(p.a() - q.a(), rate_shift);
    if (std::isinf(sup)) return kInf;
    return std::max(0.5 * std::log(p.lambda0() / q.lambda0()) + norm_p - norm_q + sup, 0.0);
  }
  const double alpha = order.alpha();
  const double a_blend = alpha * p.a() + (1.0 - alpha) * q.a();
  const double b_blend = alpha * p.b() + (1.0 - alpha) * q.b();
  const double w_blend = alpha * wq + (1.0 - alpha) * wp;
  detail::order_check(a_blend > 0.0 && w_blend > 0.0, "renyi_nig", order);
  const double shift = alpha * (1.0 - alpha) * delta * delta / (2.0 * w_blend);
  detail::order_check(b_blend + shift > 0.0, "renyi_nig", order);
  const double log_integral =
      alpha * norm_p + (1.0 - alpha) * norm_q + log_gamma(a_blend) -
      a_blend * std::log(b_blend + shift) -
      0.5 * (std::log(w_blend) - (1.0 - alpha) * std::log(wp) - alpha * std::log(wq));
  return std::max(log_integral / (alpha - 1.0), 0.0);
}

// ---------------------------------------------------------------------------
// Truncated exponential posterior against an exponential prior

/// Posterior TruncatedExponential(n r - kappa, y_min) against the prior
/// Exponential(kappa) of the shifted-exponential model. The model scalar
/// n r is recovered as rate + kappa.
inline double renyi_truncexp_vs_exp(const TruncatedExponential& posterior,
                                    const ExponentialDist& prior, const DivergenceOrder& order) {
  const double kappa = prior.kappa();
  const double nr = posterior.rate() + kappa;
  detail::require(nr > 0.0, "renyi_truncexp_vs_exp: n r = rate + kappa must be positive");
  const double u = posterior.upper();
  const double t = posterior.t();
  // log of the posterior-to-prior density ratio at theta = 0
  const double log_ratio0 = -std::log(kappa * u) - log_expm1_ratio(t);
  if (order.is_kl()) return std::max(log_ratio0 + nr * u * truncated_exp_mean_unit(t), 0.0);
  if (order.is_mr()) return std::max(log_ratio0 + nr * u, 0.0);
  const double alpha = order.alpha();
  // integral of exp((alpha n r - kappa) theta) over (0, u) equals u * expm1(x) / x
  const double x = (alpha * nr - kappa) * u;
  const double value = -std::log(kappa * u) +
                       (-alpha * log_expm1_ratio(t) + log_expm1_ratio(x)) / (alpha - 1.0);
  return std::max(value, 0.0);
}

// ---------------------------------------------------------------------------
// Mixtures

/// Hershey-Olsen variational approximation of KL(q || g) for a Gaussian
/// mixture q and a Gaussian g:
///
///   sum_a w_a log( sum_b w_b exp(-D(q_a || q_b)) / exp(-D(q_a || g)) ).
inline double gmm_kl_upper_bound(const GaussianMixtureApprox& q, const GaussianMV& g) {
  detail::require(q.dim() == g.dim(), "gmm_kl_upper_bound: dimension mismatch");
  double total = 0.0;
  for (int a = 0; a < q.size(); ++a) {
    const double wa = q.weights()(a);
    if (wa == 0.0) continue;
    double inner = 0.0;
    for (int b = 0; b < q.size(); ++b) {
      const double wb = q.weights()(b);
      if (wb == 0.0) continue;
      inner += wb * (a == b ? 1.0 : std::exp(-kl_gaussian(q.components()[a], q.components()[b])));
    }
    total += wa * (std::log(inner) + kl_gaussian(q.components()[a], g));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long draws_used = 0;
  long non_finite = 0;
};

/// Sample mean of log_ratio(x) over x ~ sampler(rng). Non-finite terms are
/// dropped and counted; more than 0.1% of them aborts.
template <class LogRatio, class Sampler>
MonteCarloEstimate kl_monte_carlo(LogRatio&& log_ratio, Sampler&& sampler, long n_draws, Rng& rng) {
  detail::require(n_draws >= 1, "kl_monte_carlo: need at least one draw");
  MonteCarloEstimate out;
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < n_draws; ++i) {
    const double v = log_ratio(sampler(rng));
    if (!std::isfinite(v)) {
      ++out.non_finite;
      continue;
    }
    ++out.draws_used;
    const double d = v - mean;
    mean += d / out.draws_used;
    m2 += d * (v - mean);
  }
  if (out.non_finite > n_draws / 1000)
    throw NumericalAbort("kl_monte_carlo: " + std::to_string(out.non_finite) + " of " +
                         std::to_string(n_draws) + " log-ratio evaluations were not finite");
  out.estimate = mean;
  out.std_error = out.draws_used > 1 ? std::sqrt(m2 / (out.draws_used - 1) / out.draws_used) : 0.0;
  return out;
}

/// Monte Carlo estimate of KL(q || g) for a mixture against a Gaussian.
inline MonteCarloEstimate kl_mixture_monte_carlo(const GaussianMixtureApprox& q, const GaussianMV& g,
                                                 long n_draws, Rng& rng) {
  return kl_monte_carlo([&](const Vector& x) { return q.log_density(x) - g.log_density(x); },
                        [&](Rng& r) { return q.sample(r); }, n_draws, rng);
}

// ---------------------------------------------------------------------------
// Quadrature fallback

/// R_alpha(p || q) for 1-D densities given as log-density callables, by
/// adaptive quadrature over the support (lo, hi) of p.
template <class LogP, class LogQ>
double renyi_quadrature(LogP&& log_p, LogQ&& log_q, double lo, double hi,
                        const DivergenceOrder& order) {
  if (order.is_kl()) {
    return numerics::integrate(
        [&](double x) {
          const double lp = log_p(x);
          return lp == -kInf ? 0.0 : std::exp(lp) * (lp - log_q(x));
        },
        lo, hi);
  }
  detail::require(!order.is_mr(), "renyi_quadrature: MR has no integral form");
  const double alpha = order.alpha();
  const double integral = numerics::integrate(
      [&](double x) {
        const double lp = log_p(x);
        return lp == -kInf ? 0.0 : std::exp(alpha * lp + (1.0 - alpha) * log_q(x));
      },
      lo, hi);
  return std::log(integral) / (alpha - 1.0);
}

}  // namespace pdc
