#pragma once

// Binomial counts with a beta prior on the success probability.

#include <cmath>
#include <string_view>

#include "pdc/models/common.hpp"

namespace pdc {

inline BetaDist posterior_beta_binomial(const BetaDist& prior, long n, long y) {
  detail::require(n >= 0 && y >= 0 && y <= n, "posterior_beta_binomial: need 0 <= y <= n");
  return BetaDist(prior.a() + static_cast<double>(y), prior.b() + static_cast<double>(n - y));
}

class BinomialModel {
 public:
  static constexpr std::string_view kName = "binomial";

  BinomialModel(double a, double b, long default_n = 0) : prior_(a, b), default_n_(default_n) {
    detail::require(default_n >= 0, "binomial: n must be non-negative");
  }
  static BinomialModel from_params(ParamMap params) {
    double a = 1.0, b = 1.0, n = 0.0;
    detail::take(params, "a", a);
    detail::take(params, "b", b);
    detail::take(params, "n", n);
    detail::reject_leftovers(params, std::string(kName));
    detail::require(n >= 0.0 && n == std::floor(n), "binomial: n must be a non-negative integer");
    return BinomialModel(a, b, static_cast<long>(n));
  }
  ParamMap params() const {
    return {{"a", prior_.a()}, {"b", prior_.b()}, {"n", static_cast<double>(default_n_)}};
  }

  std::string_view name() const { return kName; }
  const BetaDist& prior() const { return prior_; }
  long default_n() const { return default_n_; }

  /// Rows read from a file with only a y column take n from the model.
  Dataset with_default_trials(Dataset data) const {
    for (auto& row : data.rows())
      if (row.n == 0) row.n = default_n_;
    return data;
  }

  void validate_data(const Dataset& data) const { data.require_counts("binomial"); }

  BetaDist posterior(const Dataset& data) const {
    return posterior_beta_binomial(prior_, data.sum_n(), static_cast<long>(data.sum_y()));
  }

  Dataset simulate(const Dataset& shape, Rng& rng) const {
    const double theta = prior_.sample(rng);
    Dataset out = shape;
    for (auto& row : out.rows()) row.y = static_cast<double>(rng.binomial(row.n, theta));
    return out;
  }

  double discrepancy(const Dataset& data, const DivergenceOrder& order, Rng&) const {
    return renyi_beta(posterior(data), prior_, order);
  }

  /// Beta-binomial predictive of the total count.
  double predictive_log_density_T(const Dataset& data) const {
    return BetaBinomialDist::from_shapes(data.sum_n(), prior_.a(), prior_.b())
        .log_pmf(static_cast<long>(data.sum_y()));
  }

  /// All values of the total count with their predictive probabilities.
  std::vector<EnumeratedOutcome> enumerate(const Dataset& shape) const {
    const long N = shape.sum_n();
    const auto pred = BetaBinomialDist::from_shapes(N, prior_.a(), prior_.b());
    std::vector<EnumeratedOutcome> out;
    out.reserve(static_cast<std::size_t>(N + 1));
    for (long k = 0; k <= N; ++k)
      out.push_back({Dataset({{"total", static_cast<double>(k), N}}), pred.log_pmf(k)});
    return out;
  }
  long outcome_count(const Dataset& shape) const { return shape.sum_n() + 1; }

  double prior_log_density(const Vector& theta) const { return prior_.log_density(theta(0)); }
  Vector prior_sample(Rng& rng) const { return Vector::Constant(1, prior_.sample(rng)); }
  /// Per-trial information 1 / (theta (1 - theta)).
  Matrix fisher_info(const Vector& theta) const {
    const double t = theta(0);
    detail::require(t > 0.0 && t < 1.0, "binomial: Fisher information needs 0 < theta < 1");
    return Matrix::Constant(1, 1, 1.0 / (t * (1.0 - t)));
  }

 private:
  BetaDist prior_;
  long default_n_;
};

}  // namespace pdc
