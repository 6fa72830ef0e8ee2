#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pdc/dataset.hpp"
#include "pdc/distributions.hpp"
#include "pdc/divergence.hpp"
#include "pdc/variational.hpp"

namespace pdc {

/// One point of a finite prior-predictive outcome space, represented by a
/// dataset with the same sufficient statistic.
struct EnumeratedOutcome {
  Dataset data;
  double log_prob = 0.0;
};

/// Hierarchical check statistic for one unit: the averaged conditional
/// divergence and the sign-bearing posterior location used by one-sided
/// p-values.
struct UnitDiscrepancy {
  double value = 0.0;
  double direction = 0.0;
  bool clipped = false;
};

/// Fit settings shared by the models that need variational posteriors.
struct VariationalSettings {
  FitConfig observed;   // fit to the observed data
  FitConfig replicate;  // fits inside Monte Carlo replicates
};

/// Posterior tabulated at the midpoints of a regular 2-D grid. log_prob
/// holds normalized log cell probabilities, row-major over (x, y).
struct GridPosterior {
  std::vector<double> x, y;
  std::vector<double> log_prob;
  double cell_area = 0.0;

  Vector point(std::size_t k) const {
    Vector p(2);
    p << x[k / y.size()], y[k % y.size()];
    return p;
  }
  Vector mean() const {
    Vector m = Vector::Zero(2);
    for (std::size_t k = 0; k < log_prob.size(); ++k) m += std::exp(log_prob[k]) * point(k);
    return m;
  }

  /// R_order(grid posterior || prior) with the posterior density taken as
  /// constant on each cell.
  template <class LogPrior>
  double renyi(LogPrior&& log_prior, const DivergenceOrder& order) const {
    std::vector<double> log_ratio(log_prob.size());
    const double log_cell = std::log(cell_area);
    for (std::size_t k = 0; k < log_prob.size(); ++k)
      log_ratio[k] = log_prob[k] - log_cell - log_prior(point(k));
    if (order.is_mr()) {
      double best = -kInf;
      for (std::size_t k = 0; k < log_prob.size(); ++k)
        if (log_prob[k] > -kInf) best = std::max(best, log_ratio[k]);
      return std::max(best, 0.0);
    }
    if (order.is_kl()) {
      double acc = 0.0;
      for (std::size_t k = 0; k < log_prob.size(); ++k)
        if (log_prob[k] > -kInf) acc += std::exp(log_prob[k]) * log_ratio[k];
      return std::max(acc, 0.0);
    }
    const double am1 = order.alpha() - 1.0;
    double acc = -kInf;
    for (std::size_t k = 0; k < log_prob.size(); ++k)
      if (log_prob[k] > -kInf) acc = log_sum_exp(acc, log_prob[k] + am1 * log_ratio[k]);
    return std::max(acc / am1, 0.0);
  }

  /// Tabulates exp(log_post) on n_x * n_y midpoints of [x_lo, x_hi] x [y_lo, y_hi].
  template <class LogPost>
  static GridPosterior tabulate(LogPost&& log_post, double x_lo, double x_hi, double y_lo,
                                double y_hi, int n_x, int n_y) {
    detail::require(n_x >= 2 && n_y >= 2, "GridPosterior: need at least two points per axis");
    GridPosterior g;
    const double hx = (x_hi - x_lo) / n_x, hy = (y_hi - y_lo) / n_y;
    for (int i = 0; i < n_x; ++i) g.x.push_back(x_lo + (i + 0.5) * hx);
    for (int j = 0; j < n_y; ++j) g.y.push_back(y_lo + (j + 0.5) * hy);
    g.cell_area = hx * hy;
    g.log_prob.resize(static_cast<std::size_t>(n_x) * n_y);
    double max_lp = -kInf;
    for (std::size_t k = 0; k < g.log_prob.size(); ++k) {
      const double lp = log_post(g.point(k));
      g.log_prob[k] = std::isnan(lp) ? -kInf : lp;
      max_lp = std::max(max_lp, g.log_prob[k]);
    }
    if (!std::isfinite(max_lp)) throw NumericalAbort("GridPosterior: no finite log density on the grid");
    double total = 0.0;
    for (double lp : g.log_prob) total += std::exp(lp - max_lp);
    const double log_total = max_lp + std::log(total);
    for (double& lp : g.log_prob) lp -= log_total;
    return g;
  }
};

namespace detail {

/// Seed for a fit driven by a replicate's generator.
inline FitConfig seeded(FitConfig config, Rng& rng) {
  config.seed = (static_cast<std::uint64_t>(rng.next_u32()) << 32) | rng.next_u32();
  config.stream = 0;
  return config;
}

inline double sample_mean(const std::vector<double>& ys) {
  double s = 0.0;
  for (double y : ys) s += y;
  return s / static_cast<double>(ys.size());
}

/// Unbiased sample variance (divisor n - 1).
inline double sample_variance(const std::vector<double>& ys) {
  const double m = sample_mean(ys);
  double s = 0.0;
  for (double y : ys) s += (y - m) * (y - m);
  return s / static_cast<double>(ys.size() - 1);
}

}  // namespace detail
}  // namespace pdc
