#pragma once

#include <cmath>
#include <vector>

#include "pdc/distributions.hpp"

namespace pdc {

/// Finite mixture of multivariate Gaussians, used as a variational
/// posterior. Weights lie on the simplex (sum to one within 1e-12).
class GaussianMixtureApprox {
 public:
  GaussianMixtureApprox(Vector weights, std::vector<GaussianMV> components)
      : weights_(std::move(weights)), components_(std::move(components)) {
    detail::require(!components_.empty(), "GaussianMixtureApprox: no components");
    detail::require(weights_.size() == static_cast<Eigen::Index>(components_.size()),
                    "GaussianMixtureApprox: one weight per component required");
    for (Eigen::Index k = 0; k < weights_.size(); ++k)
      detail::require(weights_(k) >= 0.0 && weights_(k) <= 1.0,
                      "GaussianMixtureApprox: weight outside [0, 1]");
    detail::require(std::fabs(weights_.sum() - 1.0) <= 1e-12,
                    "GaussianMixtureApprox: weights do not sum to one");
    for (const auto& c : components_)
      detail::require(c.dim() == components_.front().dim(),
                      "GaussianMixtureApprox: components differ in dimension");
  }

  int size() const { return static_cast<int>(components_.size()); }
  int dim() const { return components_.front().dim(); }
  const Vector& weights() const { return weights_; }
  const std::vector<GaussianMV>& components() const { return components_; }

  double log_density(const Vector& x) const {
    double acc = -kInf;
    for (int k = 0; k < size(); ++k) {
      if (weights_(k) == 0.0) continue;
      acc = log_sum_exp(acc, std::log(weights_(k)) + components_[k].log_density(x));
    }
    return acc;
  }

  Vector sample(Rng& rng) const {
    double u = rng.uniform();
    int k = 0;
    for (; k < size() - 1; ++k) {
      if (u < weights_(k)) break;
      u -= weights_(k);
    }
    return components_[k].sample(rng);
  }

  Vector mean() const {
    Vector m = Vector::Zero(dim());
    for (int k = 0; k < size(); ++k) m += weights_(k) * components_[k].mean();
    return m;
  }

 private:
  Vector weights_;
  std::vector<GaussianMV> components_;
};

}  // namespace pdc
