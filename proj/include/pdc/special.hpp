#pragma once

// Thin wrappers over Boost.Math special functions with a double-only policy,
// plus the few log-space helpers the closed-form divergences need.

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace pdc {

namespace detail {
using math_policy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>>;
}  // namespace detail

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

inline double log_gamma(double x) {
  return boost::math::lgamma(x, detail::math_policy{});
}

inline double digamma(double x) {
  return boost::math::digamma(x, detail::math_policy{});
}

inline double trigamma(double x) {
  return boost::math::trigamma(x, detail::math_policy{});
}

/// log B(a, b), through log-gamma so that large arguments do not overflow.
inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// log of the binomial coefficient C(n, k).
inline double log_choose(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  return boost::math::ibeta(a, b, x, detail::math_policy{});
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Upper tail P(Z > z) without cancellation for large z.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// P(|T| >= x) for a standard Student-t with `dof` degrees of freedom.
inline double student_t_two_sided(double x, double dof) {
  boost::math::students_t_distribution<double, detail::math_policy> t(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(t, std::fabs(x)));
}

/// x * log(x) with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

/// a * log(x) with 0 * log(0) = 0.
inline double xlogy(double a, double x) { return a == 0.0 ? 0.0 : a * std::log(x); }

/// log(expm1(x) / x), continuous through x = 0 and finite for any real x.
inline double log_expm1_ratio(double x) {
  if (std::fabs(x) < 1e-5) return x / 2.0 + x * x / 24.0;
  if (x > 0.0) {
    // log(e^x - 1) - log x = x + log1p(-e^{-x}) - log x
    return x + std::log1p(-std::exp(-x)) - std::log(x);
  }
  return std::log(-std::expm1(x)) - std::log(-x);
}

/// 1 / (1 - e^{-t}) - 1 / t, the scaled mean of an exponential density with
/// rate t truncated to (0, 1). Tends to 1/2 at t = 0.
inline double truncated_exp_mean_unit(double t) {
  if (std::fabs(t) < 1e-4) return 0.5 + t / 12.0 - t * t * t / 720.0;
  return 1.0 / (-std::expm1(-t)) - 1.0 / t;
}

/// log(1 + e^x) without overflow.
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace pdc
