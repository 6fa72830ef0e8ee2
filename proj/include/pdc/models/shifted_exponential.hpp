#pragma once

// Exponential observations shifted by an unknown location theta > 0,
// p(y_i | theta) = r exp(-r (y_i - theta)) for y_i > theta, with an
// Exponential(kappa) prior on theta. The support depends on theta, so the
// model is non-regular and has no Fisher information.

#include <algorithm>
#include <cmath>
#include <string_view>

#include "pdc/models/common.hpp"
#include "pdc/numerics.hpp"

namespace pdc {

inline TruncatedExponential posterior_shifted_exp(const ExponentialDist& prior, double r,
                                                  const Dataset& data) {
  detail::require(r > 0.0 && std::isfinite(r), "posterior_shifted_exp: r must be positive");
  detail::require(!data.empty(), "posterior_shifted_exp: need at least one observation");
  double y_min = kInf;
  for (const auto& row : data.rows()) {
    detail::require(row.y > 0.0, "posterior_shifted_exp: observations must be positive");
    y_min = std::min(y_min, row.y);
  }
  const double n = static_cast<double>(data.size());
  return TruncatedExponential(n * r - prior.kappa(), y_min);
}

/// The check for this model depends on the data only through
/// nu = n r / kappa and t = (n r - kappa) y_min. These functions work on that
/// scale (kappa = 1 without loss of generality) and need nu > 1.
namespace shifted_exp {

inline void check_nu(double nu) {
  detail::require(nu > 1.0 && std::isfinite(nu), "shifted-exponential curve: nu must exceed 1");
}

inline double discrepancy(double nu, double t, const DivergenceOrder& order) {
  check_nu(nu);
  detail::require(t > 0.0, "shifted-exponential curve: t must be positive");
  return renyi_truncexp_vs_exp(TruncatedExponential(nu - 1.0, t / (nu - 1.0)), ExponentialDist(1.0),
                               order);
}

/// Prior-predictive survival function of t,
/// S(t) = nu/(nu-1) exp(-t/(nu-1)) - 1/(nu-1) exp(-nu t/(nu-1)).
inline double predictive_sf(double nu, double t) {
  check_nu(nu);
  if (t <= 0.0) return 1.0;
  const double s = t / (nu - 1.0);
  // Written as e^{-s} (1 + (1 - e^{-(nu-1)s}) / (nu-1)) to avoid cancellation.
  return std::exp(-s) * (1.0 - std::expm1(-(nu - 1.0) * s) / (nu - 1.0));
}

inline double predictive_cdf(double nu, double t) {
  check_nu(nu);
  if (t <= 0.0) return 0.0;
  const double s = t / (nu - 1.0);
  // 1 - S(t) = [nu (1 - e^{-s}) - (1 - e^{-nu s})] / (nu - 1)
  return (-nu * std::expm1(-s) + std::expm1(-nu * s)) / (nu - 1.0);
}

/// p(t) = nu/(nu-1)^2 [exp(-t/(nu-1)) - exp(-nu t/(nu-1))] for t > 0.
inline double predictive_log_density(double nu, double t) {
  check_nu(nu);
  if (!(t > 0.0)) return -kInf;
  const double s = t / (nu - 1.0);
  return std::log(nu) - 2.0 * std::log(nu - 1.0) - s + std::log(-std::expm1(-(nu - 1.0) * s));
}

/// Draw of t from its prior predictive: theta ~ Exp(1), y_min = theta + Exp(nu).
inline double sample_t(double nu, Rng& rng) {
  check_nu(nu);
  return (nu - 1.0) * (rng.exponential(1.0) + rng.exponential(nu));
}

inline constexpr double kLogTMin = -30.0;

inline double log_t_max(double nu) { return std::log(1e4 * nu); }

/// Location of the single minimum of the divergence as a function of t.
inline double t0(double nu, const DivergenceOrder& order) {
  check_nu(nu);
  auto f = [&](double x) { return discrepancy(nu, std::exp(x), order); };
  return std::exp(numerics::minimize(f, -12.0, log_t_max(nu)).first);
}

struct TailRoots {
  double t1 = 0.0, t0 = 0.0, t2 = 0.0;
};

/// Roots t1 <= t0 <= t2 with R(t1) = R(t2) = R(t_obs), one of them t_obs.
inline TailRoots tail_roots(double t_obs, double nu, const DivergenceOrder& order) {
  const double tmin = t0(nu, order);
  const double r_obs = discrepancy(nu, t_obs, order);
  TailRoots roots{t_obs, tmin, t_obs};
  if (t_obs == tmin || r_obs <= discrepancy(nu, tmin, order)) {
    roots.t1 = roots.t2 = tmin;
    return roots;
  }
  auto g = [&](double x) { return discrepancy(nu, std::exp(x), order) - r_obs; };
  const double x0 = std::log(tmin);
  if (t_obs < tmin) {
    double hi = x0 + 1.0;
    while (g(hi) < 0.0) {
      hi += 1.0;
      if (hi > 200.0) throw NumericalAbort("shifted-exponential: no upper root above t0");
    }
    roots.t2 = std::exp(numerics::bisect_root(g, x0, hi, 1e-13));
  } else {
    double lo = x0 - 1.0;
    while (g(lo) < 0.0) {
      lo -= 1.0;
      if (lo < -200.0) throw NumericalAbort("shifted-exponential: no lower root below t0");
    }
    roots.t1 = std::exp(numerics::bisect_root(g, lo, x0, 1e-13));
  }
  return roots;
}

/// Exact p = P(R(T) >= R(t_obs)) = F(t1) + S(t2); exactly 1 at t0.
inline double exact_p_value(double t_obs, double nu, const DivergenceOrder& order) {
  const TailRoots roots = tail_roots(t_obs, nu, order);
  if (roots.t1 == roots.t2) return 1.0;
  return std::min(1.0, predictive_cdf(nu, roots.t1) + predictive_sf(nu, roots.t2));
}

}  // namespace shifted_exp

class ShiftedExponential {
 public:
  static constexpr std::string_view kName = "shifted-exponential";

  ShiftedExponential(double kappa, double r) : prior_(kappa), r_(r) {
    detail::require(r > 0.0 && std::isfinite(r), "shifted-exponential: r must be positive");
  }
  static ShiftedExponential from_params(ParamMap params) {
    double kappa = 1.0, r = 1.0;
    detail::take(params, "kappa", kappa);
    detail::take(params, "r", r);
    detail::reject_leftovers(params, std::string(kName));
    return {kappa, r};
  }
  ParamMap params() const { return {{"kappa", prior_.kappa()}, {"r", r_}}; }

  std::string_view name() const { return kName; }
  const ExponentialDist& prior() const { return prior_; }
  double kappa() const { return prior_.kappa(); }
  double r() const { return r_; }

  void validate_data(const Dataset& data) const {
    detail::require(!data.empty(), "shifted-exponential: need at least one observation");
    for (const auto& row : data.rows())
      detail::require(row.y > 0.0, "shifted-exponential: observations must be positive");
  }

  TruncatedExponential posterior(const Dataset& data) const { return posterior_shifted_exp(prior_, r_, data); }

  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const double theta = prior_.sample(rng);
    Dataset out = shape;
    for (auto& row : out.rows()) row.y = theta + rng.exponential(r_);
    return out;
  }

  double discrepancy(const Dataset& data, const DivergenceOrder& order, Rng&) const {
    return renyi_truncexp_vs_exp(posterior(data), prior_, order);
  }

  /// nu = n r / kappa for a dataset shape.
  double nu(const Dataset& shape) const { return static_cast<double>(shape.size()) * r_ / kappa(); }
  /// t = (n r - kappa) y_min.
  double t(const Dataset& data) const { return posterior(data).t(); }

  /// Exact p-value from the two-sided tail of the predictive of t.
  double exact_p_value(const Dataset& data, const DivergenceOrder& order) const {
    return shifted_exp::exact_p_value(t(data), nu(data), order);
  }

  /// Log prior-predictive density of y_min,
  /// n r kappa / (n r - kappa) (exp(-kappa y) - exp(-n r y)).
  double predictive_log_density_T(const Dataset& data) const {
    const auto post = posterior(data);
    const double y = post.upper();
    const double nr = post.rate() + kappa();
    const double x = post.rate() * y;
    return std::log(nr * kappa()) - nr * y + std::log(y) + log_expm1_ratio(x);
  }

  double prior_log_density(const Vector& theta) const { return prior_.log_density(theta(0)); }
  Vector prior_sample(Rng& rng) const { return Vector::Constant(1, prior_.sample(rng)); }
  [[noreturn]] Matrix fisher_info(const Vector&) const {
    throw UnsupportedOperation(
        "shifted-exponential: the support of y depends on theta, so the model is non-regular and "
        "has no Fisher information; the limiting p-value does not apply");
  }

 private:
  ExponentialDist prior_;
  double r_;
};

}  // namespace pdc
