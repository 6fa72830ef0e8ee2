#pragma once

// Prior-data conflict checks: prior-predictive p-values for the
// prior-to-posterior divergence, the predictive-density comparator,
// hierarchical (conditional and marginal) checks with cross-validated and
// one-sided variants, and the large-sample limiting p-value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdc/models.hpp"
#include "pdc/parallel.hpp"

namespace pdc {

enum class CheckVariant { plain, em, hier1, hier2, hier1_cv, hier1_one_sided, asymptotic };

inline const char* to_string(CheckVariant v) {
  switch (v) {
    case CheckVariant::plain: return "plain";
    case CheckVariant::em: return "em";
    case CheckVariant::hier1: return "hier1";
    case CheckVariant::hier2: return "hier2";
    case CheckVariant::hier1_cv: return "hier1_cv";
    case CheckVariant::hier1_one_sided: return "hier1_one_sided";
    case CheckVariant::asymptotic: return "asymptotic";
  }
  return "";
}

inline CheckVariant parse_variant(const std::string& s) {
  for (auto v : {CheckVariant::plain, CheckVariant::em, CheckVariant::hier1, CheckVariant::hier2,
                 CheckVariant::hier1_cv, CheckVariant::hier1_one_sided, CheckVariant::asymptotic})
    if (s == to_string(v)) return v;
  throw ValidationError("unknown check variant '" + s + "'");
}

struct CheckOptions {
  int M = 1000;
  int inner_draws = 200;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: all available cores
};

struct CheckReport {
  std::string model;
  ParamMap model_params;
  CheckVariant variant = CheckVariant::plain;
  DivergenceOrder order = DivergenceOrder::kl();
  std::uint64_t seed = 0;
  int M = 0;
  int inner_draws = 0;
  std::optional<std::string> unit;
  std::string method = "monte_carlo";  // monte_carlo, enumeration or exact
  double discrepancy_obs = 0.0;
  std::vector<double> replicate_discrepancies;
  std::vector<double> replicate_directions;  // one-sided checks only
  double p_value = 0.0;
  double mc_std_error = 0.0;
  std::vector<std::string> flags;
  std::map<std::string, double> diagnostics;

  void flag(const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
  }
  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

/// Outcome spaces up to this size are enumerated instead of simulated.
inline constexpr long kEnumerationLimit = 10000;

namespace detail {

// Stream ids for the parts of a check; replicate i runs on
// Rng::substream(kReplicateStream, i).
inline constexpr std::uint64_t kObservedStream = 1;
inline constexpr std::uint64_t kReplicateStream = 2;
inline constexpr std::uint64_t kContextStream = 3;

inline Rng stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(seed, Rng::substream(stream, index));
}

/// Tolerance for ">=" between discrepancies that are equal in exact
/// arithmetic but computed along different paths (symmetric outcomes,
/// constant densities).
inline double tie_slack(double x) { return 1e-12 * std::max(1.0, std::fabs(x)); }

inline bool at_least(double value, double threshold) {
  if (std::isinf(threshold)) return value >= threshold;
  return value >= threshold - tie_slack(threshold);
}

inline bool at_most(double value, double threshold) {
  if (std::isinf(threshold)) return value <= threshold;
  return value <= threshold + tie_slack(threshold);
}

template <class M>
concept Enumerable = requires(const M& m, const Dataset& d) {
  { m.enumerate(d) } -> std::convertible_to<std::vector<EnumeratedOutcome>>;
  { m.outcome_count(d) } -> std::convertible_to<long>;
};

template <class M>
concept HasPredictiveT = requires(const M& m, const Dataset& d) {
  { m.predictive_log_density_T(d) } -> std::convertible_to<double>;
};

template <class M>
concept Hierarchical = requires { typename M::HierContext; };

template <class M>
concept HasFisherInfo = requires(const M& m, const Vector& t, Rng& rng) {
  { m.fisher_info(t) } -> std::convertible_to<Matrix>;
  { m.prior_log_density(t) } -> std::convertible_to<double>;
  { m.prior_sample(rng) } -> std::convertible_to<Vector>;
};

template <class M>
double observed_discrepancy(const M& model, const Dataset& data, const DivergenceOrder& order, Rng& rng) {
  if constexpr (requires { model.observed_discrepancy(data, order, rng); })
    return model.observed_discrepancy(data, order, rng);
  else
    return model.discrepancy(data, order, rng);
}

template <class M>
std::vector<UnitDiscrepancy> hier_observed(const M& model, const typename M::HierContext& ctx,
                                           const Dataset& data, const DivergenceOrder& order, Rng& rng) {
  if constexpr (requires { model.hier_observed_discrepancy(ctx, data, order, rng); })
    return model.hier_observed_discrepancy(ctx, data, order, rng);
  else
    return model.hier_discrepancy(ctx, data, order, rng);
}

/// Evaluates `one(i, rng)` for M replicates on per-replicate streams. A
/// NumericalAbort inside a replicate marks it non-finite.
template <class One>
std::vector<double> run_replicates(const CheckOptions& opts, One&& one) {
  std::vector<double> out(static_cast<std::size_t>(opts.M));
  parallel_for(out.size(), opts.workers, [&](std::size_t i) {
    Rng rng = stream_rng(opts.seed, kReplicateStream, i);
    try {
      out[i] = one(i, rng);
    } catch (const NumericalAbort&) {
      out[i] = kNaN;
    }
  });
  return out;
}

/// Tail fraction P(R >= obs) over finite replicates with the exclusion rule.
inline void finish_monte_carlo(CheckReport& r, const std::vector<double>& reps, double obs) {
  long valid = 0, hits = 0, infinite = 0;
  for (double v : reps) {
    if (std::isnan(v)) continue;
    ++valid;
    if (std::isinf(v)) ++infinite;
    if (at_least(v, obs)) ++hits;
  }
  const long excluded = static_cast<long>(reps.size()) - valid;
  if (excluded > 0) {
    r.flag("non_finite_replicates");
    r.diagnostics["excluded_replicates"] = static_cast<double>(excluded);
  }
  if (infinite > 0) r.flag("infinite_replicates");
  if (excluded * 100 > static_cast<long>(reps.size()))
    throw NumericalAbort(std::to_string(excluded) + " of " + std::to_string(reps.size()) +
                         " replicate discrepancies were not finite (more than 1%)");
  r.p_value = static_cast<double>(hits) / static_cast<double>(valid);
  r.mc_std_error = std::sqrt(r.p_value * (1.0 - r.p_value) / static_cast<double>(valid));
}

template <class M>
CheckReport base_report(const M& model, CheckVariant variant, const DivergenceOrder& order,
                        const CheckOptions& opts) {
  CheckReport r;
  r.model = std::string(model.name());
  r.model_params = model.params();
  r.variant = variant;
  r.order = order;
  r.seed = opts.seed;
  r.M = opts.M;
  return r;
}

inline void check_options(const CheckOptions& opts) {
  detail::require(opts.M >= 1, "M must be at least 1");
  detail::require(opts.inner_draws >= 1, "inner_draws must be at least 1");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plain checks

/// R_order(posterior || prior) for a dataset.
inline double discrepancy(const ModelDefinition& model, const Dataset& data, const DivergenceOrder& order,
                          std::uint64_t seed = 0) {
  Rng rng = detail::stream_rng(seed, detail::kObservedStream);
  return std::visit([&](const auto& m) { return detail::observed_discrepancy(m, data, order, rng); }, model);
}

/// p = P(R(Y) >= R(y_obs)) with Y from the prior predictive. Finite outcome
/// spaces of at most kEnumerationLimit points are enumerated exactly.
template <class M>
CheckReport conflict_p_value(const M& model, const Dataset& observed, const DivergenceOrder& order,
                             const CheckOptions& opts) {
  detail::check_options(opts);
  model.validate_data(observed);
  CheckReport r = detail::base_report(model, CheckVariant::plain, order, opts);
  Rng obs_rng = detail::stream_rng(opts.seed, detail::kObservedStream);
  r.discrepancy_obs = detail::observed_discrepancy(model, observed, order, obs_rng);

  if constexpr (detail::Enumerable<M>) {
    if (model.outcome_count(observed) <= kEnumerationLimit) {
      const auto outcomes = model.enumerate(observed);
      r.method = "enumeration";
      r.M = static_cast<int>(outcomes.size());
      r.flag("enumeration");
      double p = 0.0;
      for (const auto& o : outcomes) {
        Rng rng = detail::stream_rng(opts.seed, detail::kObservedStream);
        const double v = model.discrepancy(o.data, order, rng);
        r.replicate_discrepancies.push_back(v);
        if (detail::at_least(v, r.discrepancy_obs)) p += std::exp(o.log_prob);
      }
      r.p_value = std::min(1.0, p);
      r.mc_std_error = 0.0;
      return r;
    }
  }
  r.replicate_discrepancies = detail::run_replicates(opts, [&](std::size_t, Rng& rng) {
    return model.discrepancy(model.simulate(observed, rng), order, rng);
  });
  detail::finish_monte_carlo(r, r.replicate_discrepancies, r.discrepancy_obs);
  return r;
}

inline CheckReport conflict_p_value(const ModelDefinition& model, const Dataset& observed,
                                    const DivergenceOrder& order, const CheckOptions& opts) {
  return std::visit([&](const auto& m) { return conflict_p_value(m, observed, order, opts); }, model);
}

/// p_EM = P(p(T) <= p(t_obs)) for the prior-predictive density of the
/// sufficient statistic. Ties count toward p.
template <class M>
CheckReport em_p_value(const M& model, const Dataset& observed, const CheckOptions& opts) {
  if constexpr (!detail::HasPredictiveT<M>) {
    throw UnsupportedOperation(std::string(model.name()) +
                               ": no closed-form predictive density of the sufficient statistic, so "
                               "the predictive-density check is unavailable");
  } else {
    detail::check_options(opts);
    model.validate_data(observed);
    CheckReport r = detail::base_report(model, CheckVariant::em, DivergenceOrder::kl(), opts);
    r.discrepancy_obs = model.predictive_log_density_T(observed);
    r.diagnostics["statistic_is_log_predictive_density"] = 1.0;
    if constexpr (detail::Enumerable<M>) {
      if (model.outcome_count(observed) <= kEnumerationLimit) {
        const auto outcomes = model.enumerate(observed);
        r.method = "enumeration";
        r.M = static_cast<int>(outcomes.size());
        r.flag("enumeration");
        double p = 0.0;
        for (const auto& o : outcomes) {
          r.replicate_discrepancies.push_back(o.log_prob);
          if (detail::at_most(o.log_prob, r.discrepancy_obs)) p += std::exp(o.log_prob);
        }
        r.p_value = std::min(1.0, p);
        return r;
      }
    }
    r.replicate_discrepancies = detail::run_replicates(opts, [&](std::size_t, Rng& rng) {
      return model.predictive_log_density_T(model.simulate(observed, rng));
    });
    // P(log p(T) <= obs) is the upper tail of -log p(T)
    std::vector<double> negated(r.replicate_discrepancies.size());
    std::transform(r.replicate_discrepancies.begin(), r.replicate_discrepancies.end(), negated.begin(),
                   [](double v) { return -v; });
    detail::finish_monte_carlo(r, negated, -r.discrepancy_obs);
    return r;
  }
}

inline CheckReport em_p_value(const ModelDefinition& model, const Dataset& observed, const CheckOptions& opts) {
  return std::visit([&](const auto& m) { return em_p_value(m, observed, opts); }, model);
}

// ---------------------------------------------------------------------------
// Hierarchical checks

struct HierarchicalSplit {
  std::optional<std::size_t> unit;  // unit whose random effect is checked
  bool cross_validated = false;     // use g(theta_2 | y_obs,-i)
  bool one_sided = false;           // excess in the direction of E_q(u_i) > 0
};

namespace detail {

/// p for the conditional check of one unit from observed and replicate
/// statistics, in the two-sided or the one-sided form.
inline void finish_hierarchical(CheckReport& r, const UnitDiscrepancy& obs, const std::vector<double>& reps,
                                const std::vector<double>& dirs, bool one_sided) {
  if (obs.clipped) r.flag("conditional_variance_clipped");
  if (!one_sided) {
    finish_monte_carlo(r, reps, obs.value);
    return;
  }
  long valid = 0, hits = 0;
  const bool upper = obs.direction > 0.0;
  if (obs.direction == 0.0) r.flag("sign_boundary");
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (std::isnan(reps[i])) continue;
    ++valid;
    const bool excess = at_least(reps[i], obs.value) && dirs[i] > 0.0;
    const bool below = at_most(reps[i], obs.value);
    if (upper ? excess : (below || excess)) ++hits;
  }
  const long excluded = static_cast<long>(reps.size()) - valid;
  if (excluded > 0) {
    r.flag("non_finite_replicates");
    r.diagnostics["excluded_replicates"] = static_cast<double>(excluded);
  }
  if (excluded * 100 > static_cast<long>(reps.size()))
    throw NumericalAbort(std::to_string(excluded) + " of " + std::to_string(reps.size()) +
                         " replicate discrepancies were not finite (more than 1%)");
  r.p_value = static_cast<double>(hits) / static_cast<double>(valid);
  r.mc_std_error = std::sqrt(r.p_value * (1.0 - r.p_value) / static_cast<double>(valid));
}

inline CheckVariant hier_variant(const HierarchicalSplit& split) {
  if (split.one_sided) return CheckVariant::hier1_one_sided;
  if (split.cross_validated) return CheckVariant::hier1_cv;
  return CheckVariant::hier1;
}

template <class M>
void add_context_diagnostics(CheckReport& r, const typename M::HierContext& ctx) {
  if constexpr (requires { ctx.observed_fit.diagnostics; }) {
    const auto& d = ctx.observed_fit.diagnostics;
    r.diagnostics["observed_fit_iterations"] = d.iterations;
    r.diagnostics["observed_fit_final_elbo"] = d.final_elbo;
    if (!d.converged) r.flag("observed_fit_not_converged");
    if (ctx.held_out_diagnostics && !ctx.held_out_diagnostics->converged) r.flag("held_out_fit_not_converged");
    if (ctx.held_out && !ctx.held_out_diagnostics) r.flag("held_out_prior_reference");
  }
}

}  // namespace detail

/// Conditional check of g(theta_1 | theta_2): the statistic
/// E_{theta_2 | y_obs} R(y, theta_2) over inner_draws shared theta_2 draws,
/// calibrated against m(y) with theta_2 drawn from g(theta_2 | y_obs) (or
/// the held-out posterior when cross-validated).
template <class M>
CheckReport hierarchical_p1(const M& model, const Dataset& observed, const DivergenceOrder& order,
                            const HierarchicalSplit& split, const CheckOptions& opts) {
  if constexpr (!detail::Hierarchical<M>) {
    throw UnsupportedOperation(std::string(model.name()) + ": the prior does not factor hierarchically");
  } else {
    detail::check_options(opts);
    model.validate_data(observed);
    const std::size_t unit = split.unit.value_or(0);
    detail::require(unit < observed.size(), "unit index out of range");
    if ((split.cross_validated || split.one_sided) && !split.unit)
      detail::require(false, "cross-validated and one-sided checks need a unit");
    CheckReport r = detail::base_report(model, detail::hier_variant(split), order, opts);
    r.inner_draws = opts.inner_draws;
    if (split.unit) r.unit = observed[unit].unit.empty() ? std::to_string(unit + 1) : observed[unit].unit;
    if (split.cross_validated && split.one_sided) r.flag("cross_validated");

    Rng ctx_rng = detail::stream_rng(opts.seed, detail::kContextStream, split.cross_validated ? unit + 1 : 0);
    const auto ctx = model.hier_context(
        observed, split.cross_validated ? std::optional<std::size_t>(unit) : std::nullopt, opts.inner_draws,
        ctx_rng);
    detail::add_context_diagnostics<M>(r, ctx);
    Rng obs_rng = detail::stream_rng(opts.seed, detail::kObservedStream);
    const auto all_obs = detail::hier_observed(model, ctx, observed, order, obs_rng);
    const std::size_t k = std::min(unit, all_obs.size() - 1);
    const UnitDiscrepancy obs = all_obs[k];
    r.discrepancy_obs = obs.value;
    r.diagnostics["observed_direction"] = obs.direction;

    r.replicate_directions.assign(static_cast<std::size_t>(opts.M), 0.0);
    r.replicate_discrepancies = detail::run_replicates(opts, [&](std::size_t i, Rng& rng) {
      const Dataset y = model.hier_reference_sample(ctx, observed, rng);
      const auto d = model.hier_discrepancy(ctx, y, order, rng);
      r.replicate_directions[i] = d[k].direction;
      return d[k].value;
    });
    detail::finish_hierarchical(r, obs, r.replicate_discrepancies, r.replicate_directions, split.one_sided);
    if (!split.one_sided) r.replicate_directions.clear();
    return r;
  }
}

inline CheckReport hierarchical_p1(const ModelDefinition& model, const Dataset& observed,
                                   const DivergenceOrder& order, const HierarchicalSplit& split,
                                   const CheckOptions& opts) {
  return std::visit([&](const auto& m) { return hierarchical_p1(m, observed, order, split, opts); }, model);
}

/// Conditional checks for every unit. Without cross-validation one set of
/// M replicates serves all units; with it each unit has its own reference
/// distribution and replicate set.
template <class M>
std::vector<CheckReport> hierarchical_p1_all_units(const M& model, const Dataset& observed,
                                                   const DivergenceOrder& order, bool cross_validated,
                                                   bool one_sided, const CheckOptions& opts) {
  if constexpr (!detail::Hierarchical<M>) {
    throw UnsupportedOperation(std::string(model.name()) + ": the prior does not factor hierarchically");
  } else {
    std::vector<CheckReport> out;
    if (cross_validated) {
      for (std::size_t i = 0; i < observed.size(); ++i)
        out.push_back(hierarchical_p1(model, observed, order, HierarchicalSplit{i, true, one_sided}, opts));
      return out;
    }
    detail::check_options(opts);
    model.validate_data(observed);
    Rng ctx_rng = detail::stream_rng(opts.seed, detail::kContextStream, 0);
    const auto ctx = model.hier_context(observed, std::nullopt, opts.inner_draws, ctx_rng);
    Rng obs_rng = detail::stream_rng(opts.seed, detail::kObservedStream);
    const auto obs = detail::hier_observed(model, ctx, observed, order, obs_rng);
    const std::size_t units = obs.size();
    std::vector<std::vector<UnitDiscrepancy>> reps(static_cast<std::size_t>(opts.M));
    detail::run_replicates(opts, [&](std::size_t i, Rng& rng) {
      const Dataset y = model.hier_reference_sample(ctx, observed, rng);
      reps[i] = model.hier_discrepancy(ctx, y, order, rng);
      return 0.0;
    });
    for (std::size_t u = 0; u < units; ++u) {
      CheckReport r = detail::base_report(model, one_sided ? CheckVariant::hier1_one_sided : CheckVariant::hier1,
                                          order, opts);
      r.inner_draws = opts.inner_draws;
      r.unit = observed[u].unit.empty() ? std::to_string(u + 1) : observed[u].unit;
      r.flag("shared_replicates");
      detail::add_context_diagnostics<M>(r, ctx);
      r.discrepancy_obs = obs[u].value;
      r.diagnostics["observed_direction"] = obs[u].direction;
      for (const auto& rep : reps) {
        r.replicate_discrepancies.push_back(rep.empty() ? kNaN : rep[u].value);
        r.replicate_directions.push_back(rep.empty() ? 0.0 : rep[u].direction);
      }
      detail::finish_hierarchical(r, obs[u], r.replicate_discrepancies, r.replicate_directions, one_sided);
      if (!one_sided) r.replicate_directions.clear();
      out.push_back(std::move(r));
    }
    return out;
  }
}

inline std::vector<CheckReport> hierarchical_p1_all_units(const ModelDefinition& model, const Dataset& observed,
                                                          const DivergenceOrder& order, bool cross_validated,
                                                          bool one_sided, const CheckOptions& opts) {
  return std::visit(
      [&](const auto& m) {
        return hierarchical_p1_all_units(m, observed, order, cross_validated, one_sided, opts);
      },
      model);
}

/// Marginal check of g(theta_2): divergence of the theta_2 marginal,
/// calibrated against the full prior predictive.
template <class M>
CheckReport hierarchical_p2(const M& model, const Dataset& observed, const DivergenceOrder& order,
                            const CheckOptions& opts) {
  if constexpr (!detail::Hierarchical<M>) {
    throw UnsupportedOperation(std::string(model.name()) + ": the prior does not factor hierarchically");
  } else {
    detail::check_options(opts);
    model.validate_data(observed);
    CheckReport r = detail::base_report(model, CheckVariant::hier2, order, opts);
    Rng obs_rng = detail::stream_rng(opts.seed, detail::kObservedStream);
    r.discrepancy_obs = model.hier_marginal_discrepancy(observed, order, obs_rng);
    r.replicate_discrepancies = detail::run_replicates(opts, [&](std::size_t, Rng& rng) {
      return model.hier_marginal_discrepancy(model.simulate(observed, rng), order, rng);
    });
    detail::finish_monte_carlo(r, r.replicate_discrepancies, r.discrepancy_obs);
    return r;
  }
}

inline CheckReport hierarchical_p2(const ModelDefinition& model, const Dataset& observed,
                                   const DivergenceOrder& order, const CheckOptions& opts) {
  return std::visit([&](const auto& m) { return hierarchical_p2(m, observed, order, opts); }, model);
}

// ---------------------------------------------------------------------------
// Limiting p-value

struct LimitEstimate {
  double p_value = 0.0;
  double mc_std_error = 0.0;
  long draws = 0;
};

/// P(s(theta*) >= s(theta)) for theta ~ g, with s = log g - 1/2 log|I|.
/// Values of s within 1e-10 (relative) of s(theta*) count as ties, so a
/// prior proportional to |I|^{1/2} gives exactly 1.
template <class LogPrior, class Sampler, class LogDetInfo>
LimitEstimate asymptotic_limit_p(LogPrior&& log_prior, Sampler&& sample, LogDetInfo&& log_det_info,
                                 const Vector& theta_star, long n_draws, Rng& rng) {
  detail::require(n_draws >= 1, "asymptotic_limit_p: need at least one draw");
  const double s_star = log_prior(theta_star) - 0.5 * log_det_info(theta_star);
  detail::require(std::isfinite(s_star), "asymptotic_limit_p: theta* is outside the prior support");
  const double slack = 1e-10 * std::max(1.0, std::fabs(s_star));
  long hits = 0;
  for (long i = 0; i < n_draws; ++i) {
    const Vector theta = sample(rng);
    const double s = log_prior(theta) - 0.5 * log_det_info(theta);
    if (s <= s_star + slack) ++hits;
  }
  LimitEstimate out;
  out.draws = n_draws;
  out.p_value = static_cast<double>(hits) / static_cast<double>(n_draws);
  out.mc_std_error = std::sqrt(out.p_value * (1.0 - out.p_value) / static_cast<double>(n_draws));
  return out;
}

/// Limit of the conditional check: theta_1 ~ g(theta_1 | theta_2*) and the
/// information block I_11 at (theta_1, theta_2*).
template <class LogCondPrior, class CondSampler, class LogDetInfo11>
LimitEstimate asymptotic_limit_p_hierarchical(LogCondPrior&& log_cond_prior, CondSampler&& sample_cond,
                                              LogDetInfo11&& log_det_info11, const Vector& theta1_star,
                                              const Vector& theta2_star, long n_draws, Rng& rng) {
  return asymptotic_limit_p([&](const Vector& t1) { return log_cond_prior(t1, theta2_star); },
                            [&](Rng& r) { return sample_cond(theta2_star, r); },
                            [&](const Vector& t1) { return log_det_info11(t1, theta2_star); }, theta1_star,
                            n_draws, rng);
}

template <class M>
CheckReport asymptotic_check(const M& model, const Vector& theta_star, long n_draws, std::uint64_t seed) {
  if constexpr (!detail::HasFisherInfo<M>) {
    throw UnsupportedOperation(std::string(model.name()) +
                               ": no Fisher information, so the limiting p-value is not defined");
  } else {
    Rng rng = detail::stream_rng(seed, detail::kReplicateStream);
    auto log_det = [&](const Vector& t) {
      const Matrix I = model.fisher_info(t);
      return detail::log_det_from_cholesky(detail::checked_cholesky(I, "Fisher information"));
    };
    const LimitEstimate est = asymptotic_limit_p([&](const Vector& t) { return model.prior_log_density(t); },
                                                 [&](Rng& r) { return model.prior_sample(r); }, log_det,
                                                 theta_star, n_draws, rng);
    CheckReport r;
    r.model = std::string(model.name());
    r.model_params = model.params();
    r.variant = CheckVariant::asymptotic;
    r.seed = seed;
    r.M = static_cast<int>(n_draws);
    r.discrepancy_obs = model.prior_log_density(theta_star) - 0.5 * log_det(theta_star);
    r.p_value = est.p_value;
    r.mc_std_error = est.mc_std_error;
    for (int i = 0; i < theta_star.size(); ++i) r.diagnostics["theta_star_" + std::to_string(i)] = theta_star(i);
    return r;
  }
}

inline CheckReport asymptotic_check(const ModelDefinition& model, const Vector& theta_star, long n_draws,
                                    std::uint64_t seed) {
  return std::visit([&](const auto& m) { return asymptotic_check(m, theta_star, n_draws, seed); }, model);
}

}  // namespace pdc
