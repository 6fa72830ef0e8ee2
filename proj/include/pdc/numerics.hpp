#pragma once

// Quadrature, root finding and 1-D minimization used by the divergence
// fallbacks and the exact tail computations. Backed by Boost.Math.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "pdc/error.hpp"
#include "pdc/special.hpp"

namespace pdc::numerics {

/// Adaptive Gauss-Kronrod (61 point) on [a, b]; either bound may be
/// infinite, in which case Boost maps the half line onto a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10, double* error = nullptr) {
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 20, abs_tol, &err, &l1);
  if (error) *error = err;
  return value;
}

/// Tanh-sinh on a finite interval; tolerates integrable endpoint
/// singularities such as Beta densities with a shape below one.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = 1e-12) {
  static const boost::math::quadrature::tanh_sinh<double> rule(15);
  return rule.integrate(f, a, b, rel_tol);
}

/// Root of a continuous f on [lo, hi] with f(lo) and f(hi) of opposite
/// signs, to an absolute tolerance on x.
template <class F>
double bisect_root(F&& f, double lo, double hi, double x_tol = 1e-10) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw NumericalAbort("root not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]: f = " + std::to_string(f_lo) + ", " +
                         std::to_string(f_hi));
  auto tol = [x_tol](double a, double b) { return std::fabs(b - a) <= x_tol; };
  std::uintmax_t max_iter = 400;
  const auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, max_iter);
  return 0.5 * (a + b);
}

/// Minimizer of a unimodal f on [lo, hi] (Brent: golden section with
/// parabolic steps). Returns {x, f(x)}.
template <class F>
std::pair<double, double> minimize(F&& f, double lo, double hi) {
  std::uintmax_t max_iter = 500;
  return boost::math::tools::brent_find_minima(f, lo, hi, 52, max_iter);
}

}  // namespace pdc::numerics
