#pragma once

// Reparameterization-gradient variational fits on an unconstrained
// parameter space: a full-rank Gaussian and a Gaussian mixture.
//
// A target is any type with
//
//   int dim() const;
//   double log_joint(const Vector& theta, Vector* grad) const;
//   Vector init_mean() const;   // prior mean on the fitting scale
//   Matrix init_cov() const;    // prior covariance, used to place mixture components
//
// log_joint returns log p(y, theta) up to a constant and, when grad is not
// null, writes its gradient.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pdc/distributions.hpp"
#include "pdc/mixture.hpp"

namespace pdc {

enum class StepSchedule { constant, inverse_decay };

struct FitConfig {
  int max_iterations = 20000;
  int mc_gradient_draws = 16;
  StepSchedule schedule = StepSchedule::inverse_decay;
  double step_size = 0.05;
  /// Iteration scale of the inverse decay, lr_t = step_size / (1 + t / decay_iterations).
  double decay_iterations = 1000.0;
  /// Relative change in the windowed mean ELBO that counts as converged.
  double convergence_tol = 1e-5;
  int convergence_window = 500;
  /// Initial Cholesky factor is init_scale times the identity.
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const {
    detail::require(max_iterations > 0 && mc_gradient_draws > 0 && convergence_window > 0,
                    "FitConfig: iteration counts must be positive");
    detail::require(step_size > 0.0 && decay_iterations > 0.0 && init_scale > 0.0,
                    "FitConfig: step size, decay and init scale must be positive");
    detail::require(convergence_tol > 0.0 && convergence_tol < 1.0,
                    "FitConfig: convergence_tol must lie in (0, 1)");
  }
};

struct ElboTrace {
  std::vector<double> elbo;
  std::vector<double> grad_norm;

  void write_csv(std::ostream& out) const {
    out << "iteration,elbo,grad_norm\n";
    out.precision(17);
    for (std::size_t i = 0; i < elbo.size(); ++i)
      out << i + 1 << ',' << elbo[i] << ',' << grad_norm[i] << '\n';
  }
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_elbo = 0.0;
  double final_grad_norm = 0.0;
  long rejected_draws = 0;
  bool collapse_refit = false;
};

// ---------------------------------------------------------------------------
// Parameter packing

/// Mean and lower Cholesky factor of a Gaussian variational family. The
/// packed vector holds the mean, then the lower triangle column by column
/// with diagonal entries on the log scale.
struct GaussianParams {
  Vector mean;
  Matrix chol;

  int dim() const { return static_cast<int>(mean.size()); }
  static int packed_size(int d) { return d + d * (d + 1) / 2; }

  Vector pack() const {
    const int d = dim();
    Vector out(packed_size(d));
    out.head(d) = mean;
    int k = d;
    for (int j = 0; j < d; ++j)
      for (int i = j; i < d; ++i) out(k++) = i == j ? std::log(chol(i, i)) : chol(i, j);
    return out;
  }
  static GaussianParams unpack(const Vector& v, int d) {
    GaussianParams p{v.head(d), Matrix::Zero(d, d)};
    int k = d;
    for (int j = 0; j < d; ++j)
      for (int i = j; i < d; ++i) p.chol(i, j) = i == j ? std::exp(v(k++)) : v(k++);
    return p;
  }
  GaussianMV distribution() const { return GaussianMV::from_cholesky(mean, chol); }
  static GaussianParams from(const GaussianMV& g) { return {g.mean(), g.chol()}; }
};

/// Weights are carried as unnormalized logits.
struct MixtureParams {
  Vector logits;
  std::vector<GaussianParams> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.front().dim(); }

  Vector weights() const {
    Vector w = (logits.array() - logits.maxCoeff()).exp();
    return w / w.sum();
  }
  Vector pack() const {
    const int block = GaussianParams::packed_size(dim());
    Vector out(size() * (block + 1));
    for (int k = 0; k < size(); ++k) {
      out.segment(k * block, block) = components[k].pack();
      out(size() * block + k) = logits(k);
    }
    return out;
  }
  static MixtureParams unpack(const Vector& v, int K, int d) {
    const int block = GaussianParams::packed_size(d);
    MixtureParams p{v.tail(K), {}};
    for (int k = 0; k < K; ++k) p.components.push_back(GaussianParams::unpack(v.segment(k * block, block), d));
    return p;
  }
  GaussianMixtureApprox distribution() const {
    std::vector<GaussianMV> comps;
    for (const auto& c : components) comps.push_back(c.distribution());
    Vector w = weights();
    w /= w.sum();
    return GaussianMixtureApprox(std::move(w), std::move(comps));
  }
};

struct ElboGradient {
  Vector grad;  // packed layout of the parameters it was computed at
  double elbo = 0.0;
  long rejected = 0;
};

enum class GradientEstimator {
  /// Exact derivative of the common-random-numbers ELBO estimate.
  total,
  /// Path derivative only ("sticking the landing"); drops the score term of
  /// log q, whose expectation is zero. Lower variance near the optimum.
  path,
};

namespace detail {

/// Adds the packed (mean, lower triangle with log diagonal) contribution of
/// d f / d theta = g at theta = mean + L z, scaled by `scale`.
inline void accumulate_location_scale(Eigen::Ref<Vector> out, const Vector& g, const Vector& z,
                                      const Matrix& L, double scale) {
  const int d = static_cast<int>(g.size());
  out.head(d) += scale * g;
  int k = d;
  for (int j = 0; j < d; ++j)
    for (int i = j; i < d; ++i) out(k++) += scale * g(i) * z(j) * (i == j ? L(i, i) : 1.0);
}

inline void check_rejections(long rejected, long total, const char* who) {
  if (rejected * 20 > total)
    throw NumericalAbort(std::string(who) + ": " + std::to_string(rejected) + " of " +
                         std::to_string(total) + " draws had a non-finite log joint");
}

inline double gaussian_entropy(const Matrix& L) {
  const int d = static_cast<int>(L.rows());
  return 0.5 * d * (1.0 + kLogTwoPi) + L.diagonal().array().log().sum();
}

}  // namespace detail

/// Reparameterized ELBO and its gradient for a Gaussian q = N(mean, L L'),
/// with the entropy in closed form. The gradient is the exact derivative of
/// the returned estimate for the drawn z, so it agrees with central
/// differences taken at the same random numbers.
template <class Target>
ElboGradient elbo_gradient(const Target& target, const GaussianParams& params, int draws, Rng& rng) {
  const int d = params.dim();
  detail::require(target.dim() == d, "elbo_gradient: dimension mismatch");
  ElboGradient out{Vector::Zero(GaussianParams::packed_size(d)), 0.0, 0};
  Vector z(d), g(d);
  int used = 0;
  double sum = 0.0;
  for (int s = 0; s < draws; ++s) {
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    const Vector theta = params.mean + params.chol.triangularView<Eigen::Lower>() * z;
    const double lp = target.log_joint(theta, &g);
    if (!std::isfinite(lp) || !g.allFinite()) {
      ++out.rejected;
      continue;
    }
    ++used;
    sum += lp;
    detail::accumulate_location_scale(out.grad, g, z, params.chol, 1.0);
  }
  detail::check_rejections(out.rejected, draws, "elbo_gradient");
  out.grad /= used;
  out.elbo = sum / used + detail::gaussian_entropy(params.chol);
  // entropy: d/d log L_ii of sum log L_ii
  int k = d;
  for (int j = 0; j < d; ++j) {
    out.grad(k) += 1.0;
    k += d - j;
  }
  return out;
}

/// ELBO gradient for a Gaussian mixture with the exact mixture log q.
/// Component k is sampled by reparameterization with its own `draws` normals;
/// the weight gradient is w_k (F_k - sum_j w_j F_j) for F_k the component
/// expectation of log p - log q.
template <class Target>
ElboGradient elbo_gradient(const Target& target, const MixtureParams& params, int draws, Rng& rng,
                           GradientEstimator estimator) {
  const int K = params.size();
  const int d = params.dim();
  const int block = GaussianParams::packed_size(d);
  detail::require(target.dim() == d, "elbo_gradient: dimension mismatch");
  const Vector w = params.weights();
  const Vector log_w = w.array().log();

  std::vector<double> log_norm(K);
  for (int j = 0; j < K; ++j) {
    const Matrix& L = params.components[j].chol;
    log_norm[j] = -0.5 * d * kLogTwoPi - L.diagonal().array().log().sum();
  }

  ElboGradient out{Vector::Zero(K * (block + 1)), 0.0, 0};
  Vector F = Vector::Zero(K);
  Vector z(d), g(d), resp(K);
  std::vector<Vector> whitened(K);
  for (int k = 0; k < K; ++k) {
    const auto& comp = params.components[k];
    int used = 0;
    Vector block_grad = Vector::Zero(block);
    Vector direct = Vector::Zero(out.grad.size());
    for (int s = 0; s < draws; ++s) {
      for (int i = 0; i < d; ++i) z(i) = rng.normal();
      const Vector theta = comp.mean + comp.chol.triangularView<Eigen::Lower>() * z;
      const double lp = target.log_joint(theta, &g);
      if (!std::isfinite(lp) || !g.allFinite()) {
        ++out.rejected;
        continue;
      }
      // log q(theta) and its theta-gradient through responsibilities
      for (int j = 0; j < K; ++j) {
        const Matrix& Lj = params.components[j].chol;
        whitened[j] = Lj.triangularView<Eigen::Lower>().solve(theta - params.components[j].mean);
        resp(j) = log_w(j) + log_norm[j] - 0.5 * whitened[j].squaredNorm();
      }
      const double max_r = resp.maxCoeff();
      const double log_q = max_r + std::log((resp.array() - max_r).exp().sum());
      resp = (resp.array() - log_q).exp();
      Vector grad_log_q = Vector::Zero(d);
      for (int j = 0; j < K; ++j) {
        if (resp(j) == 0.0) continue;
        const Matrix& Lj = params.components[j].chol;
        grad_log_q -= resp(j) * Lj.transpose().triangularView<Eigen::Upper>().solve(whitened[j]);
      }
      const double f = lp - log_q;
      ++used;
      F(k) += f;
      detail::accumulate_location_scale(block_grad, g - grad_log_q, z, comp.chol, 1.0);

      if (estimator == GradientEstimator::total) {
        // derivative of -log q_phi(theta) at fixed theta, weighted by w_k
        for (int j = 0; j < K; ++j) {
          if (resp(j) == 0.0) continue;
          const auto& cj = params.components[j];
          const Vector u = cj.chol.transpose().triangularView<Eigen::Upper>().solve(whitened[j]);
          auto seg = direct.segment(j * block, block);
          seg.head(d) -= resp(j) * u;
          int idx = d;
          for (int c = 0; c < d; ++c)
            for (int r = c; r < d; ++r) {
              double v = u(r) * whitened[j](c);
              if (r == c) v = (v - 1.0 / cj.chol(r, r)) * cj.chol(r, r);
              seg(idx++) -= resp(j) * v;
            }
          direct(K * block + j) -= resp(j) - w(j);
        }
      }
    }
    detail::check_rejections(out.rejected, static_cast<long>(draws) * (k + 1), "elbo_gradient");
    F(k) /= used;
    out.grad.segment(k * block, block) += w(k) * block_grad / used;
    out.grad += w(k) * direct / used;
  }
  const double F_bar = w.dot(F);
  for (int k = 0; k < K; ++k) out.grad(K * block + k) += w(k) * (F(k) - F_bar);
  out.elbo = F_bar;
  return out;
}

namespace detail {

/// Adam ascent with optional inverse step decay and tail averaging of the
/// iterates over the final half of the run.
class AdamAscent {
 public:
  AdamAscent(Vector x, const FitConfig& config)
      : x_(std::move(x)), m_(Vector::Zero(x_.size())), v_(Vector::Zero(x_.size())), config_(config) {}

  const Vector& x() const { return x_; }

  void step(const Vector& grad, int t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double lr = config_.schedule == StepSchedule::inverse_decay
                          ? config_.step_size / (1.0 + t / config_.decay_iterations)
                          : config_.step_size;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    x_.array() += lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
    if (t % kSnapshotEvery == 0) snapshots_.push_back(x_);
  }

  /// Average of the snapshots taken during the second half of the run.
  Vector averaged() const {
    if (snapshots_.size() < 2) return x_;
    const std::size_t from = snapshots_.size() / 2;
    Vector acc = Vector::Zero(x_.size());
    for (std::size_t i = from; i < snapshots_.size(); ++i) acc += snapshots_[i];
    return acc / static_cast<double>(snapshots_.size() - from);
  }

 private:
  static constexpr int kSnapshotEvery = 5;
  Vector x_, m_, v_;
  FitConfig config_;
  std::vector<Vector> snapshots_;
};

/// Windowed relative-change convergence test on the ELBO trace.
inline bool elbo_converged(const std::vector<double>& elbo, int window, double tol) {
  const std::size_t w = static_cast<std::size_t>(window);
  if (elbo.size() < 2 * w || elbo.size() % w != 0) return false;
  double recent = 0.0, previous = 0.0;
  for (std::size_t i = elbo.size() - w; i < elbo.size(); ++i) recent += elbo[i];
  for (std::size_t i = elbo.size() - 2 * w; i < elbo.size() - w; ++i) previous += elbo[i];
  recent /= w;
  previous /= w;
  return std::fabs(recent - previous) <= tol * std::max(1.0, std::fabs(recent));
}

template <class GradFn>
FitDiagnostics run_ascent(AdamAscent& opt, ElboTrace& trace, const FitConfig& config, GradFn&& grad_fn) {
  FitDiagnostics diag;
  for (int t = 1; t <= config.max_iterations; ++t) {
    const ElboGradient eg = grad_fn(opt.x());
    if (!std::isfinite(eg.elbo) || !eg.grad.allFinite())
      throw NumericalAbort("variational fit diverged at iteration " + std::to_string(t) +
                           " (non-finite ELBO or gradient)");
    diag.rejected_draws += eg.rejected;
    trace.elbo.push_back(eg.elbo);
    trace.grad_norm.push_back(eg.grad.norm());
    opt.step(eg.grad, t);
    diag.iterations = t;
    if (elbo_converged(trace.elbo, config.convergence_window, config.convergence_tol)) {
      diag.converged = true;
      break;
    }
  }
  diag.final_elbo = trace.elbo.back();
  diag.final_grad_norm = trace.grad_norm.back();
  return diag;
}

}  // namespace detail

struct GaussianFit {
  GaussianMV q;
  ElboTrace trace;
  FitDiagnostics diagnostics;
};

struct MixtureFit {
  GaussianMixtureApprox q;
  ElboTrace trace;
  FitDiagnostics diagnostics;
};

/// Full-rank Gaussian variational fit (ADVI style). Starts from `warm_start`
/// when given, else from the target's prior mean with factor init_scale * I.
template <class Target>
GaussianFit fit_gaussian_vb(const Target& target, const FitConfig& config,
                            const GaussianMV* warm_start = nullptr) {
  config.validate();
  const int d = target.dim();
  GaussianParams init = warm_start ? GaussianParams::from(*warm_start)
                                   : GaussianParams{target.init_mean(),
                                                    config.init_scale * Matrix::Identity(d, d)};
  detail::require(init.dim() == d, "fit_gaussian_vb: warm start has the wrong dimension");
  Rng rng(config.seed, config.stream);
  detail::AdamAscent opt(init.pack(), config);
  ElboTrace trace;
  auto diag = detail::run_ascent(opt, trace, config, [&](const Vector& x) {
    return elbo_gradient(target, GaussianParams::unpack(x, d), config.mc_gradient_draws, rng);
  });
  return {GaussianParams::unpack(opt.averaged(), d).distribution(), std::move(trace), diag};
}

namespace detail {

/// Two components at the prior mean plus and minus one prior standard
/// deviation along the leading principal axis, equal weights.
inline MixtureParams initial_mixture(const Vector& centre, const Matrix& cov, int K,
                                     double init_scale) {
  const int d = static_cast<int>(centre.size());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector axis = eig.eigenvectors().col(d - 1) * std::sqrt(std::max(eig.eigenvalues()(d - 1), 0.0));
  MixtureParams p{Vector::Zero(K), {}};
  for (int k = 0; k < K; ++k) {
    const double offset = K == 1 ? 0.0 : -1.0 + 2.0 * k / (K - 1);
    p.components.push_back({centre + offset * axis, init_scale * Matrix::Identity(d, d)});
  }
  return p;
}

}  // namespace detail

/// K-component Gaussian mixture variational fit. A component whose weight
/// falls below 1e-6 is re-seeded around the surviving component and the fit
/// rerun once; the diagnostics record this.
template <class Target>
MixtureFit fit_gmm_vb(const Target& target, int K, const FitConfig& config) {
  config.validate();
  detail::require(K >= 1, "fit_gmm_vb: need at least one component");
  const int d = target.dim();
  Rng rng(config.seed, config.stream);

  auto run = [&](const MixtureParams& init, ElboTrace& trace) {
    detail::AdamAscent opt(init.pack(), config);
    auto diag = detail::run_ascent(opt, trace, config, [&](const Vector& x) {
      return elbo_gradient(target, MixtureParams::unpack(x, K, d), config.mc_gradient_draws, rng,
                           GradientEstimator::path);
    });
    return std::pair{MixtureParams::unpack(opt.averaged(), K, d), diag};
  };

  ElboTrace trace;
  auto [params, diag] = run(detail::initial_mixture(target.init_mean(), target.init_cov(), K,
                                                    config.init_scale),
                            trace);
  Vector w = params.weights();
  if (K > 1 && w.minCoeff() < 1e-6) {
    Eigen::Index best = 0;
    w.maxCoeff(&best);
    const auto& keep = params.components[best];
    const Matrix cov = keep.chol * keep.chol.transpose();
    ElboTrace retrace;
    auto [refit, rediag] = run(detail::initial_mixture(keep.mean, cov, K, config.init_scale), retrace);
    params = std::move(refit);
    diag = rediag;
    diag.collapse_refit = true;
    trace = std::move(retrace);
  }
  return {params.distribution(), std::move(trace), diag};
}

}  // namespace pdc
