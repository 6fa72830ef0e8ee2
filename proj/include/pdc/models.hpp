#pragma once

// The shipped models and a name-based registry.

#include <string>
#include <string_view>
#include <variant>

#include "pdc/models/beta_binomial.hpp"
#include "pdc/models/binomial.hpp"
#include "pdc/models/common.hpp"
#include "pdc/models/logistic_re.hpp"
#include "pdc/models/normal_location.hpp"
#include "pdc/models/normal_nig.hpp"
#include "pdc/models/shifted_exponential.hpp"

namespace pdc {

using ModelDefinition = std::variant<NormalLocation, BinomialModel, NormalNIG, ShiftedExponential,
                                     BetaBinomialModel, LogisticRandomEffects>;

inline std::vector<std::string> model_names() {
  return {std::string(NormalLocation::kName),     std::string(BinomialModel::kName),
          std::string(NormalNIG::kName),          std::string(ShiftedExponential::kName),
          std::string(BetaBinomialModel::kName),  std::string(LogisticRandomEffects::kName)};
}

/// Builds a model from its name and parameter overrides. Unknown names and
/// unknown parameter keys raise ValidationError.
inline ModelDefinition make_model(std::string_view name, const ParamMap& params = {}) {
  if (name == NormalLocation::kName) return NormalLocation::from_params(params);
  if (name == BinomialModel::kName) return BinomialModel::from_params(params);
  if (name == NormalNIG::kName) return NormalNIG::from_params(params);
  if (name == ShiftedExponential::kName) return ShiftedExponential::from_params(params);
  if (name == BetaBinomialModel::kName) return BetaBinomialModel::from_params(params);
  if (name == LogisticRandomEffects::kName) return LogisticRandomEffects::from_params(params);
  std::string known;
  for (const auto& n : model_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown model '" + std::string(name) + "' (known: " + known + ")");
}

inline std::string_view model_name(const ModelDefinition& model) {
  return std::visit([](const auto& m) { return m.name(); }, model);
}

/// Data as the model sees it (binomial rows without n take the model's n).
inline Dataset prepare_data(const ModelDefinition& model, Dataset data) {
  if (const auto* b = std::get_if<BinomialModel>(&model)) data = b->with_default_trials(std::move(data));
  std::visit([&](const auto& m) { m.validate_data(data); }, model);
  return data;
}

enum class PosteriorStrategy { conjugate, grid, variational };

inline const char* to_string(PosteriorStrategy s) {
  switch (s) {
    case PosteriorStrategy::conjugate: return "conjugate";
    case PosteriorStrategy::grid: return "grid";
    case PosteriorStrategy::variational: return "variational";
  }
  return "";
}

struct PosteriorResult {
  PosteriorStrategy strategy = PosteriorStrategy::conjugate;
  std::variant<ParametricDistribution, GridPosterior, GaussianMV, GaussianMixtureApprox> representation;
  std::optional<FitDiagnostics> diagnostics;
  std::optional<ElboTrace> trace;
};

/// Posterior of a model for a dataset; an empty dataset gives the prior.
inline PosteriorResult fit_posterior(const ModelDefinition& model, const Dataset& data,
                                     const FitConfig& config) {
  return std::visit(
      [&](const auto& m) -> PosteriorResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NormalLocation>) {
          return {PosteriorStrategy::conjugate, ParametricDistribution(m.posterior(data)), {}, {}};
        } else if constexpr (std::is_same_v<M, BinomialModel>) {
          return {PosteriorStrategy::conjugate, ParametricDistribution(m.posterior(data)), {}, {}};
        } else if constexpr (std::is_same_v<M, NormalNIG>) {
          const auto post = data.empty() ? m.prior() : m.posterior(data);
          return {PosteriorStrategy::conjugate, ParametricDistribution(post), {}, {}};
        } else if constexpr (std::is_same_v<M, ShiftedExponential>) {
          if (data.empty()) return {PosteriorStrategy::conjugate, ParametricDistribution(m.prior()), {}, {}};
          return {PosteriorStrategy::conjugate, ParametricDistribution(m.posterior(data)), {}, {}};
        } else if constexpr (std::is_same_v<M, BetaBinomialModel>) {
          if (m.strategy() == BetaBinomialModel::Strategy::grid)
            return {PosteriorStrategy::grid, m.grid_posterior(data), {}, {}};
          MixtureFit f = m.variational_posterior(data, config);
          return {PosteriorStrategy::variational, std::move(f.q), f.diagnostics, std::move(f.trace)};
        } else {
          GaussianFit f = m.fit(data, config);
          return {PosteriorStrategy::variational, std::move(f.q), f.diagnostics, std::move(f.trace)};
        }
      },
      model);
}

}  // namespace pdc
