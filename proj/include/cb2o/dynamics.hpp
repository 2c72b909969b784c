#pragma once

// Time stepper for consensus-based bi-level optimization: parameter set,
// per-epoch schedulers, the Euler-Maruyama particle update, stopping logic,
// stuck-consensus re-initialization, and a mini-batch evaluator adapter.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cb2o/consensus.hpp"
#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"
#include "cb2o/problem.hpp"
#include "cb2o/rng.hpp"

namespace cb2o {

enum class DiffusionKind { Isotropic, Anisotropic };

inline const char* to_string(DiffusionKind k) {
  return k == DiffusionKind::Isotropic ? "isotropic" : "anisotropic";
}

// Optional per-epoch parameter schedules.  Values are recomputed from closed
// forms at every epoch boundary (no compounding of rounding error), so after
// e epochs exactly:
//   alpha = alpha0 * factor^e
//   sigma = sigma0 / log2(e + 2)
//   beta  = max(beta0 * kappa^e, max(beta_min, 2/N))
struct ScheduleSpec {
  struct BetaFloor {
    double beta0;
    double kappa;
    double beta_min;
  };
  std::optional<double> alpha_factor;   // geometric growth per epoch
  std::optional<double> sigma0;         // logarithmic cooling start value
  std::optional<BetaFloor> beta_floor;  // geometric decay with a floor
  std::size_t epoch_len = 100;          // iterations per epoch
};

// Regularized selection parameters (ball radius R and threshold bump).
struct RegularizedSelection {
  double radius;
  double delta_q;
};

constexpr std::size_t kDefaultReinitPatience = 30;

struct Cb2oParams {
  double lambda = 1.0;
  double sigma = 1.0;
  double alpha = 30.0;
  double beta = 0.05;
  double dt = 0.01;
  DiffusionKind diffusion = DiffusionKind::Isotropic;
  double eps_stop = 0.0;
  std::size_t max_iters = 30000;
  double lambda_grad = 0.0;  // gradient-drift variant strength (0 = off)
  double sigma_grad = 0.0;   // gradient-diffusion strength
  std::optional<RegularizedSelection> regularized;
  std::optional<std::size_t> reinit_patience;  // disengaged when absent
  std::optional<ScheduleSpec> schedules;
};

// Hard validation (throws ConfigError) plus soft diagnostics returned as
// human-readable warnings.  `dim` is needed for the contraction condition
// 2*lambda > d*sigma^2 (isotropic) / 2*lambda > sigma^2 (anisotropic), which
// is deliberately a warning: the benchmark presets themselves violate it.
inline std::vector<std::string> validate_params(const Cb2oParams& p, std::size_t dim,
                                                bool has_lower_grad) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!std::isfinite(p.lambda) || !(p.lambda > 0.0)) fail("lambda must be finite and > 0");
  if (!std::isfinite(p.sigma) || p.sigma < 0.0) fail("sigma must be finite and >= 0");
  if (!std::isfinite(p.alpha) || !(p.alpha > 0.0)) fail("alpha must be finite and > 0");
  if (!std::isfinite(p.beta) || !(p.beta > 0.0) || !(p.beta <= 1.0))
    fail("beta must lie in (0, 1]");
  if (!std::isfinite(p.dt) || !(p.dt > 0.0)) fail("dt must be finite and > 0");
  if (std::isnan(p.eps_stop) || p.eps_stop < 0.0) fail("eps_stop must be >= 0");
  if (!std::isfinite(p.lambda_grad) || p.lambda_grad < 0.0)
    fail("lambda_grad must be finite and >= 0");
  if (!std::isfinite(p.sigma_grad) || p.sigma_grad < 0.0)
    fail("sigma_grad must be finite and >= 0");
  if ((p.lambda_grad > 0.0 || p.sigma_grad > 0.0) && !has_lower_grad)
    fail("gradient-drift terms require a lower-level gradient");
  if (p.regularized) {
    if (!std::isfinite(p.regularized->radius) || !(p.regularized->radius > 0.0))
      fail("regularized selection radius must be finite and > 0");
    if (!std::isfinite(p.regularized->delta_q) || p.regularized->delta_q < 0.0)
      fail("regularized delta_q must be finite and >= 0");
  }
  if (p.reinit_patience && *p.reinit_patience < 1) fail("reinit patience must be >= 1");
  if (p.schedules) {
    const ScheduleSpec& s = *p.schedules;
    if (s.epoch_len < 1) fail("schedule epoch length must be >= 1");
    if (s.alpha_factor && (!std::isfinite(*s.alpha_factor) || !(*s.alpha_factor > 0.0)))
      fail("alpha schedule factor must be finite and > 0");
    if (s.sigma0 && (!std::isfinite(*s.sigma0) || !(*s.sigma0 > 0.0)))
      fail("sigma schedule start value must be finite and > 0");
    if (s.beta_floor) {
      const auto& bf = *s.beta_floor;
      if (!(bf.beta0 > 0.0) || !(bf.beta0 <= 1.0)) fail("beta schedule start must lie in (0, 1]");
      if (!(bf.kappa > 0.0) || !(bf.kappa <= 1.0)) fail("beta schedule factor must lie in (0, 1]");
      if (!(bf.beta_min > 0.0) || !(bf.beta_min <= 1.0))
        fail("beta schedule floor must lie in (0, 1]");
    }
  }

  std::vector<std::string> warnings;
  const double sig2 = p.sigma * p.sigma;
  const double threshold =
      p.diffusion == DiffusionKind::Isotropic ? static_cast<double>(dim) * sig2 : sig2;
  if (2.0 * p.lambda <= threshold)
    warnings.push_back(
        "contraction condition violated: 2*lambda <= " +
        std::string(p.diffusion == DiffusionKind::Isotropic ? "d*sigma^2" : "sigma^2") +
        " (2*" + std::to_string(p.lambda) + " vs " + std::to_string(threshold) +
        "); collapse toward consensus is not guaranteed in expectation");
  return warnings;
}

// Parameters in effect during epoch e (closed-form schedules, see above).
inline Cb2oParams scheduled_params(const Cb2oParams& base, std::size_t epoch,
                                   std::size_t n_particles) {
  if (!base.schedules) return base;
  Cb2oParams p = base;
  const ScheduleSpec& s = *base.schedules;
  const double e = static_cast<double>(epoch);
  if (s.alpha_factor) p.alpha = base.alpha * std::pow(*s.alpha_factor, e);
  if (s.sigma0) p.sigma = *s.sigma0 / std::log2(e + 2.0);
  if (s.beta_floor) {
    const double floor_n = 2.0 / static_cast<double>(n_particles);
    const double floor_all = std::max(s.beta_floor->beta_min, floor_n);
    p.beta = std::max(s.beta_floor->beta0 * std::pow(s.beta_floor->kappa, e), floor_all);
  }
  return p;
}

namespace detail {

// Scratch buffers reused across steps of one run.
struct StepWorkspace {
  ConsensusScratch consensus;
  std::vector<double> grad;
};

// One Euler-Maruyama step, in place.  The update is computed in deviation
// form,
//   theta_new = m + (1 - lambda*dt) * (theta - m) + sqrt(dt)*sigma*D(theta-m)*B
//             [ - dt*lambda_grad*grad L(theta) + sqrt(dt)*sigma_grad*D(grad)*B' ],
// which is algebraically the Euler step theta - dt*lambda*(theta-m) + ... but
// exact at the drift fixed point (lambda*dt = 1 lands on m bit-for-bit).
// All right-hand-side quantities use the pre-step position.  Noise draw
// order is fixed: per particle, d draws for B, then (only when the gradient
// variant is active) d draws for B'; particles in index order.  Returns
// c_stop = (1/(dN)) sum_i ||theta_i_new - m||^2, accumulated in index order.
inline double cb2o_step_into(Ensemble& e, const BiLevelProblem& problem, const Cb2oParams& p,
                             RngStream& rng, StepWorkspace& ws, std::size_t* fallbacks = nullptr) {
  if (p.regularized) {
    try {
      consensus_regularized_into(e, problem.lower, problem.upper, p.alpha, p.beta,
                                 p.regularized->radius, p.regularized->delta_q, ws.consensus);
    } catch (const DegenerateSelectionError&) {
      // Documented fallback: revert to the empirical quantile rule for this
      // step; the caller counts and reports these events.
      if (fallbacks) ++(*fallbacks);
      consensus_into(e, problem.lower, problem.upper, p.alpha, p.beta, ws.consensus);
    }
  } else {
    consensus_into(e, problem.lower, problem.upper, p.alpha, p.beta, ws.consensus);
  }
  const std::vector<double>& m = ws.consensus.point;

  const std::size_t n = e.size(), d = e.dim();
  const double keep = 1.0 - p.lambda * p.dt;
  const double sqrt_dt = std::sqrt(p.dt);
  const double noise_scale = sqrt_dt * p.sigma;
  const bool grad_active = p.lambda_grad > 0.0 || p.sigma_grad > 0.0;
  const double grad_drift_scale = p.dt * p.lambda_grad;
  const double grad_noise_scale = sqrt_dt * p.sigma_grad;
  const bool iso = p.diffusion == DiffusionKind::Isotropic;

  if (grad_active && ws.grad.size() != d) ws.grad.resize(d);

  double c_stop_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = e.row(i);

    double dev_norm = 0.0;
    if (iso) {
      for (std::size_t j = 0; j < d; ++j) {
        const double v = row[j] - m[j];
        dev_norm += v * v;
      }
      dev_norm = std::sqrt(dev_norm);
    }
    double grad_norm = 0.0;
    if (grad_active) {
      problem.lower_grad(row, std::span<double>(ws.grad));
      if (iso) {
        for (std::size_t j = 0; j < d; ++j) grad_norm += ws.grad[j] * ws.grad[j];
        grad_norm = std::sqrt(grad_norm);
      }
    }

    for (std::size_t j = 0; j < d; ++j) {
      const double v = row[j] - m[j];
      const double b = rng.normal();
      const double drift = keep * v;
      const double noise = noise_scale * (iso ? dev_norm : v) * b;
      double updated = m[j] + drift + noise;
      double gdrift = 0.0;
      if (grad_active) {
        gdrift = -grad_drift_scale * ws.grad[j];
        updated += gdrift;
      }
      if (!std::isfinite(updated)) {
        const char* term = !std::isfinite(m[j])       ? "consensus point"
                           : !std::isfinite(drift)    ? "consensus drift"
                           : !std::isfinite(noise)    ? "diffusion"
                           : !std::isfinite(gdrift)   ? "gradient drift"
                                                      : "combined update";
        throw StepError(i, term);
      }
      row[j] = updated;
    }
    if (grad_active) {
      // B' draws follow the particle's B draws in the fixed order.
      for (std::size_t j = 0; j < d; ++j) {
        const double bg = rng.normal();
        const double gnoise = grad_noise_scale * (iso ? grad_norm : ws.grad[j]) * bg;
        const double updated = row[j] + gnoise;
        if (!std::isfinite(updated))
          throw StepError(i, std::isfinite(gnoise) ? "combined update" : "gradient diffusion");
        row[j] = updated;
      }
    }

    for (std::size_t j = 0; j < d; ++j) {
      const double dv = row[j] - m[j];
      c_stop_sum += dv * dv;
    }
  }
  return c_stop_sum / (static_cast<double>(d) * static_cast<double>(n));
}

}  // namespace detail

struct StepResult {
  ConsensusResult consensus;  // the pre-step consensus point used by the update
  double c_stop;
};

// Single-step convenience entry point (tests and small experiments).
inline StepResult cb2o_step(Ensemble& e, const BiLevelProblem& problem, const Cb2oParams& p,
                            RngStream& rng) {
  validate_params(p, e.dim(), problem.lower_grad != nullptr);
  detail::StepWorkspace ws;
  const double c = detail::cb2o_step_into(e, problem, p, rng, ws);
  return StepResult{detail::package(std::move(ws.consensus)), c};
}

// Stuck-consensus re-initialization.  Counts consecutive steps in which the
// consensus point moved by at most 1e-12; once the streak reaches `patience`
// every particle is perturbed by independent Gaussian noise of componentwise
// standard deviation sigma (draws from `rng` in particle-major, coordinate
// order) and the streak resets.  Returns true when a perturbation fired.
struct ReinitState {
  std::size_t frozen_streak = 0;
};

inline bool reinit_if_stuck(ReinitState& state, std::span<const double> m_prev,
                            std::span<const double> m_new, Ensemble& e, double sigma,
                            RngStream& rng, std::size_t patience) {
  if (patience < 1) throw ConfigError("reinit patience must be >= 1");
  double dsq = 0.0;
  for (std::size_t j = 0; j < m_new.size(); ++j) {
    const double dj = m_new[j] - m_prev[j];
    dsq += dj * dj;
  }
  if (std::sqrt(dsq) > 1e-12) {
    state.frozen_streak = 0;
    return false;
  }
  if (++state.frozen_streak < patience) return false;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (double& x : e.row(i)) x += sigma * rng.normal();
  state.frozen_streak = 0;
  return true;
}

enum class StopReason { Converged, MaxIters, Error };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIters: return "max_iters";
    default: return "error";
  }
}

struct RunSummary {
  std::vector<double> final_consensus;
  double final_precision = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::MaxIters;
  double runtime_s = 0.0;
  std::size_t reinit_count = 0;
  std::size_t regularized_fallbacks = 0;
  std::vector<std::string> warnings;
  double final_c_stop = std::numeric_limits<double>::quiet_NaN();
  std::string error_message;
  std::uint64_t seed = 0;
};

// Struct-of-arrays iteration trace.  Record k holds the pre-step consensus
// m_k together with its objective values and the stopping statistic
// c_stop_k = (1/(dN)) sum_i ||theta_i^{k+1} - m_k||^2 computed after the
// update.  One final record (c_stop = NaN) holds the fresh consensus of the
// terminal ensemble -- the run's declared output.
struct RunTrace {
  std::size_t dim = 0;
  std::vector<std::size_t> iter;
  std::vector<double> t;
  std::vector<double> consensus;  // flattened, dim entries per record
  std::vector<double> c_stop;
  std::vector<double> lower_at_m;
  std::vector<double> upper_at_m;
  std::vector<double> precision;  // NaN when no reference minimizer is known
  RunSummary summary;

  std::size_t records() const { return iter.size(); }
  std::span<const double> consensus_at(std::size_t k) const {
    return {consensus.data() + k * dim, dim};
  }
};

enum class TraceMode { Full, Summary };

// Observer called after every completed iteration with the post-step
// ensemble and the consensus point the step used (mini-batch advancement,
// custom statistics, ...).
using IterationObserver =
    std::function<void(std::size_t iter, const Ensemble& ensemble, std::span<const double> m)>;

namespace detail {

inline void push_record(RunTrace& tr, std::size_t k, double t, std::span<const double> m,
                        double c_stop, const BiLevelProblem& problem) {
  tr.iter.push_back(k);
  tr.t.push_back(t);
  tr.consensus.insert(tr.consensus.end(), m.begin(), m.end());
  tr.c_stop.push_back(c_stop);
  tr.lower_at_m.push_back(problem.lower(m));
  tr.upper_at_m.push_back(problem.upper(m));
  double prec = std::numeric_limits<double>::quiet_NaN();
  if (problem.theta_good) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double dj = m[j] - (*problem.theta_good)[j];
      s += dj * dj;
    }
    prec = std::sqrt(s);
  }
  tr.precision.push_back(prec);
}

}  // namespace detail

// Full solver loop: initialize, iterate cb2o_step with per-epoch schedules,
// stop once c_stop <= eps_stop (converged) or after max_iters steps.  All
// randomness (initialization, noise, re-initialization) is consumed from one
// stream keyed by `seed`, in a fixed order, so a (config, seed) pair yields
// a bit-identical trace on every invocation.  Evaluation or step failures
// mid-run do not discard the trace: the run returns with stop reason `error`
// and the message recorded.
inline RunTrace run(const BiLevelProblem& problem, std::size_t dim, std::size_t n_particles,
                    const Cb2oParams& params, const InitSpec& init, std::uint64_t seed,
                    TraceMode mode = TraceMode::Full, const IterationObserver& observer = {}) {
  RunTrace trace;
  trace.dim = dim;
  trace.summary.seed = seed;
  trace.summary.warnings = validate_params(params, dim, problem.lower_grad != nullptr);
  quantile_count(params.beta, n_particles);  // enforces beta >= beta_min = 2/N up front
  if (problem.theta_good && problem.theta_good->size() != dim)
    throw ConfigError("reference minimizer dimension mismatch");

  const auto t_start = std::chrono::steady_clock::now();
  RngStream rng(seed);
  Ensemble e = init_ensemble(n_particles, dim, init, rng);

  detail::StepWorkspace ws;
  std::vector<double> m_prev;
  ReinitState reinit_state;
  StopReason reason = StopReason::MaxIters;
  std::size_t iterations = 0;

  for (std::size_t k = 0; k < params.max_iters; ++k) {
    const Cb2oParams p =
        params.schedules ? scheduled_params(params, k / params.schedules->epoch_len, e.size())
                         : params;
    double c = std::numeric_limits<double>::quiet_NaN();
    try {
      c = detail::cb2o_step_into(e, problem, p, rng, ws, &trace.summary.regularized_fallbacks);
    } catch (const std::exception& ex) {
      reason = StopReason::Error;
      trace.summary.error_message = ex.what();
      iterations = k;
      break;
    }
    trace.summary.final_c_stop = c;
    const std::vector<double>& m = ws.consensus.point;
    if (mode == TraceMode::Full)
      detail::push_record(trace, k, static_cast<double>(k) * params.dt, m, c, problem);

    if (observer) observer(k, e, m);

    iterations = k + 1;
    if (c <= params.eps_stop) {
      reason = StopReason::Converged;
      break;
    }

    if (params.reinit_patience) {
      // Stuck-consensus rescue with the scheduled (current-epoch) sigma.
      if (!m_prev.empty() &&
          reinit_if_stuck(reinit_state, m_prev, m, e, p.sigma, rng, *params.reinit_patience))
        ++trace.summary.reinit_count;
      m_prev = m;
    }
  }

  trace.summary.iterations = iterations;
  trace.summary.stop_reason = reason;

  // Terminal record: the consensus of the final ensemble, the declared
  // output of the whole run (c_stop has no meaning here).
  try {
    detail::ConsensusScratch final_ws;
    const Cb2oParams p =
        params.schedules
            ? scheduled_params(params, iterations / params.schedules->epoch_len, e.size())
            : params;
    if (p.regularized) {
      try {
        detail::consensus_regularized_into(e, problem.lower, problem.upper, p.alpha, p.beta,
                                           p.regularized->radius, p.regularized->delta_q,
                                           final_ws);
      } catch (const DegenerateSelectionError&) {
        ++trace.summary.regularized_fallbacks;
        detail::consensus_into(e, problem.lower, problem.upper, p.alpha, p.beta, final_ws);
      }
    } else {
      detail::consensus_into(e, problem.lower, problem.upper, p.alpha, p.beta, final_ws);
    }
    detail::push_record(trace, iterations, static_cast<double>(iterations) * params.dt,
                        final_ws.point, std::numeric_limits<double>::quiet_NaN(), problem);
    trace.summary.final_consensus = std::move(final_ws.point);
    trace.summary.final_precision = trace.precision.back();
  } catch (const std::exception& ex) {
    if (reason != StopReason::Error) {
      trace.summary.stop_reason = StopReason::Error;
      trace.summary.error_message = ex.what();
    }
  }

  trace.summary.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

// Mini-batch adapter: wraps an objective over a dataset so each iteration
// sees one batch of a per-epoch random permutation.  Batches partition the
// permutation; epoch length = ceil(dataset / batch).  When the batch covers
// the whole dataset the identity order is used, making the evaluator
// literally identical to the full objective.
class MinibatchObjective {
 public:
  using BatchEvaluator =
      std::function<double(std::span<const double>, std::span<const std::size_t>)>;

  MinibatchObjective(BatchEvaluator eval, std::size_t dataset_size, std::size_t batch_size,
                     RngStream rng)
      : eval_(std::move(eval)),
        dataset_(dataset_size),
        batch_(batch_size),
        rng_(rng),
        perm_(dataset_size) {
    if (dataset_ == 0) throw ConfigError("dataset must be non-empty");
    if (batch_ == 0) throw ConfigError("batch size must be >= 1");
    if (batch_ > dataset_)
      throw ConfigError("batch size " + std::to_string(batch_) + " exceeds dataset size " +
                        std::to_string(dataset_));
    for (std::size_t i = 0; i < dataset_; ++i) perm_[i] = i;
    if (batch_ < dataset_) shuffle();
  }

  std::size_t batches_per_epoch() const { return (dataset_ + batch_ - 1) / batch_; }
  std::size_t epoch() const { return epoch_; }

  std::span<const std::size_t> current_batch() const {
    const std::size_t lo = cursor_ * batch_;
    const std::size_t hi = std::min(lo + batch_, dataset_);
    return {perm_.data() + lo, hi - lo};
  }

  // Evaluator bound to whatever batch is current when it is invoked.
  Objective objective() const {
    return [this](std::span<const double> th) { return eval_(th, current_batch()); };
  }

  void advance() {
    if (++cursor_ >= batches_per_epoch()) {
      cursor_ = 0;
      ++epoch_;
      if (batch_ < dataset_) shuffle();
    }
  }

 private:
  void shuffle() {
    // Fisher-Yates driven by the owned stream: deterministic given the seed.
    for (std::size_t i = dataset_ - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng_.uniform_below(i + 1));
      std::swap(perm_[i], perm_[j]);
    }
  }

  BatchEvaluator eval_;
  std::size_t dataset_;
  std::size_t batch_;
  RngStream rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace cb2o
