#pragma once

// Four comparison methods built on one standard-CBO loop: penalized CBO
// (merged objective chi*L + G), adaptive penalized CBO (chi and zeta adapted
// to the running constraint violation), CBO with an added gradient force,
// and projected CBO on the unit circle/sphere.  The loop mirrors the main
// stepper's arithmetic (deviation-form update, identical draw order), so the
// degenerate cases -- chi = 0, vanishing gradient -- are bit-for-bit
// identical to the corresponding runs of the main solver at beta = 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cb2o/consensus.hpp"
#include "cb2o/dynamics.hpp"
#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"
#include "cb2o/problem.hpp"
#include "cb2o/rng.hpp"

namespace cb2o {

enum class BaselineKind { PenalizedCbo, AdaptivePenalizedCbo, CboGradientForce, ProjectedCbo };

inline const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::PenalizedCbo: return "penalized-cbo";
    case BaselineKind::AdaptivePenalizedCbo: return "adaptive-penalized-cbo";
    case BaselineKind::CboGradientForce: return "cbo-gradient-force";
    default: return "projected-cbo";
  }
}

// Adaptation rule for the penalty weight: after each step, with m_k the
// consensus the step used and v_k = sqrt(L(m_k)) the running violation,
//   v_k <  1/sqrt(zeta_k)  ->  zeta_{k+1} = eta_zeta * zeta_k   (chi held)
//   v_k >= 1/sqrt(zeta_k)  ->  chi_{k+1}  = eta_chi  * chi_k    (zeta held)
// so chi only grows while the violation exceeds the (tightening) tolerance.
struct AdaptivePenalizedParams {
  double chi0 = 1.0;
  double eta_chi = 1.1;
  double zeta0 = 0.1;
  double eta_zeta = 1.4;
  // How often (in iterations) the multiplicative update fires.  At 1 the
  // factors compound every iteration, which overflows double once the run is
  // a few thousand iterations long (1.4^2100 > DBL_MAX); the benchmark
  // presets update every 10 iterations, which keeps the full 30000-iteration
  // budget finite.
  std::size_t update_every = 1;
};

inline void validate_adaptive(const AdaptivePenalizedParams& a) {
  if (!std::isfinite(a.chi0) || !(a.chi0 > 0.0)) throw ConfigError("chi0 must be finite and > 0");
  if (!std::isfinite(a.eta_chi) || !(a.eta_chi > 1.0)) throw ConfigError("eta_chi must be > 1");
  if (!std::isfinite(a.zeta0) || !(a.zeta0 > 0.0))
    throw ConfigError("zeta0 must be finite and > 0");
  if (!std::isfinite(a.eta_zeta) || !(a.eta_zeta > 1.0)) throw ConfigError("eta_zeta must be > 1");
  if (a.update_every < 1) throw ConfigError("adaptive update cadence must be >= 1 iterations");
}

namespace detail {

// Gibbs consensus over ALL particles.  Selection is the identity, then the
// weight/point computation is the same routine the quantile consensus uses,
// so this agrees bit for bit with the main consensus at beta = 1.
inline void gibbs_all_into(const Ensemble& e, const Objective& objective, double alpha,
                           ConsensusScratch& ws) {
  check_alpha(alpha);
  const std::size_t n = e.size();
  ws.selected.resize(n);
  for (std::size_t i = 0; i < n; ++i) ws.selected[i] = i;
  weights_and_point(e, objective, alpha, ws);
  ws.quantile = std::numeric_limits<double>::quiet_NaN();  // no selection threshold here
}

// Customization points of the shared standard-CBO loop.
struct BaselineHooks {
  Objective consensus_objective;  // Gibbs weight objective over all particles
  // Optional additive force, evaluated at the pre-step position; must write
  // the full d-vector (already scaled by dt and any strength factor).
  std::function<void(std::span<const double> row, std::span<double> force)> extra_force;
  bool projected = false;  // constrain the update to the set via `project`
  const std::function<void(std::span<double>)>* project = nullptr;
  std::function<void(std::size_t iter)> on_iteration_start;
  std::function<void(std::size_t iter, std::span<const double> m)> after_step;
};

// One standard-CBO step, in place.  Non-projected path: the deviation-form
// update of the main stepper (exact landing on m at lambda*dt = 1) plus the
// optional extra force.  Projected path: the plain-form update vector
// u = -lambda*dt*(theta - m) + sqrt(dt)*sigma*D(theta-m)*B is projected onto
// the tangent space at theta, applied, and the result re-projected onto the
// set.  Draw order matches the main stepper: per particle, one draw per
// coordinate, particles in index order.
inline double baseline_step_into(Ensemble& e, const BaselineHooks& hooks, const Cb2oParams& p,
                                 RngStream& rng, StepWorkspace& ws) {
  gibbs_all_into(e, hooks.consensus_objective, p.alpha, ws.consensus);
  const std::vector<double>& m = ws.consensus.point;

  const std::size_t n = e.size(), d = e.dim();
  const double keep = 1.0 - p.lambda * p.dt;
  const double lam_dt = p.lambda * p.dt;
  const double noise_scale = std::sqrt(p.dt) * p.sigma;
  const bool iso = p.diffusion == DiffusionKind::Isotropic;
  const bool has_force = static_cast<bool>(hooks.extra_force);
  if ((has_force || hooks.projected) && ws.grad.size() != d) ws.grad.resize(d);

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

    if (hooks.projected) {
      // Update vector in ws.grad, then tangent projection at the pre-step
      // position: u - (u.theta / ||theta||^2) theta.
      std::vector<double>& u = ws.grad;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = row[j] - m[j];
        const double b = rng.normal();
        u[j] = -lam_dt * v + noise_scale * (iso ? dev_norm : v) * b;
      }
      double norm_sq = 0.0, dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        norm_sq += row[j] * row[j];
        dot += u[j] * row[j];
      }
      if (!(norm_sq > 0.0) || !std::isfinite(norm_sq)) throw StepError(i, "tangent projection");
      const double coef = dot / norm_sq;
      for (std::size_t j = 0; j < d; ++j) {
        const double updated = row[j] + (u[j] - coef * row[j]);
        if (!std::isfinite(updated)) throw StepError(i, "projected update");
        row[j] = updated;
      }
      (*hooks.project)(row);
      for (std::size_t j = 0; j < d; ++j)
        if (!std::isfinite(row[j])) throw StepError(i, "re-projection");
    } else {
      if (has_force) hooks.extra_force(row, std::span<double>(ws.grad));
      for (std::size_t j = 0; j < d; ++j) {
        const double v = row[j] - m[j];
        const double b = rng.normal();
        const double drift = keep * v;
        const double noise = noise_scale * (iso ? dev_norm : v) * b;
        double updated = m[j] + drift + noise;
        double force = 0.0;
        if (has_force) {
          force = ws.grad[j];
          updated += force;
        }
        if (!std::isfinite(updated)) {
          const char* term = !std::isfinite(m[j])    ? "consensus point"
                             : !std::isfinite(drift) ? "consensus drift"
                             : !std::isfinite(noise) ? "diffusion"
                             : !std::isfinite(force) ? "gradient drift"
                                                     : "combined update";
          throw StepError(i, term);
        }
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

// Shared driver: same stopping rule, trace layout, re-initialization, and
// error semantics as the main solver loop; only the step kernel differs.
// Trace records always evaluate the ORIGINAL problem's objectives at the
// consensus, so traces stay comparable across methods.
inline RunTrace baseline_run_impl(const BiLevelProblem& problem, std::size_t dim,
                                  std::size_t n_particles, const Cb2oParams& user_params,
                                  const InitSpec& init, std::uint64_t seed, TraceMode mode,
                                  const IterationObserver& observer, const BaselineHooks& hooks) {
  Cb2oParams base = user_params;
  base.beta = 1.0;  // standard CBO: consensus over every particle
  // Force terms come from the hooks, not from the gradient-variant params.
  base.lambda_grad = 0.0;
  base.sigma_grad = 0.0;
  base.regularized.reset();
  if (base.schedules) base.schedules->beta_floor.reset();

  RunTrace trace;
  trace.dim = dim;
  trace.summary.seed = seed;
  trace.summary.warnings = validate_params(base, dim, problem.lower_grad != nullptr);
  quantile_count(base.beta, n_particles);  // still requires at least two particles
  if (problem.theta_good && problem.theta_good->size() != dim)
    throw ConfigError("reference minimizer dimension mismatch");

  const auto t_start = std::chrono::steady_clock::now();
  RngStream rng(seed);
  Ensemble e = init_ensemble(n_particles, dim, init, rng);
  if (hooks.projected)
    for (std::size_t i = 0; i < e.size(); ++i) (*hooks.project)(e.row(i));

  StepWorkspace ws;
  std::vector<double> m_prev;
  ReinitState reinit_state;
  StopReason reason = StopReason::MaxIters;
  std::size_t iterations = 0;

  for (std::size_t k = 0; k < base.max_iters; ++k) {
    const Cb2oParams p =
        base.schedules ? scheduled_params(base, k / base.schedules->epoch_len, e.size()) : base;
    if (hooks.on_iteration_start) hooks.on_iteration_start(k);
    double c = std::numeric_limits<double>::quiet_NaN();
    try {
      c = baseline_step_into(e, hooks, p, rng, ws);
      if (hooks.after_step) hooks.after_step(k, ws.consensus.point);
    } catch (const std::exception& ex) {
      reason = StopReason::Error;
      trace.summary.error_message = ex.what();
      iterations = k;
      break;
    }
    trace.summary.final_c_stop = c;
    const std::vector<double>& m = ws.consensus.point;
    if (mode == TraceMode::Full)
      push_record(trace, k, static_cast<double>(k) * base.dt, m, c, problem);

    if (observer) observer(k, e, m);

    iterations = k + 1;
    if (c <= base.eps_stop) {
      reason = StopReason::Converged;
      break;
    }

    if (base.reinit_patience) {
      if (!m_prev.empty() &&
          reinit_if_stuck(reinit_state, m_prev, m, e, p.sigma, rng, *base.reinit_patience)) {
        ++trace.summary.reinit_count;
        // A perturbation leaves the constraint set; put the particles back.
        if (hooks.projected)
          for (std::size_t i = 0; i < e.size(); ++i) (*hooks.project)(e.row(i));
      }
      m_prev = m;
    }
  }

  trace.summary.iterations = iterations;
  trace.summary.stop_reason = reason;

  try {
    ConsensusScratch final_ws;
    const Cb2oParams p =
        base.schedules
            ? scheduled_params(base, iterations / base.schedules->epoch_len, e.size())
            : base;
    gibbs_all_into(e, hooks.consensus_objective, p.alpha, final_ws);
    push_record(trace, iterations, static_cast<double>(iterations) * base.dt, final_ws.point,
                std::numeric_limits<double>::quiet_NaN(), problem);
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

}  // namespace detail

// Penalized CBO: standard CBO on the merged objective chi*L + G.  chi = 0 is
// exactly standard CBO on G (no gradients needed).
inline RunTrace penalized_cbo_run(const BiLevelProblem& problem, std::size_t dim,
                                  std::size_t n_particles, double chi, const Cb2oParams& params,
                                  const InitSpec& init, std::uint64_t seed,
                                  TraceMode mode = TraceMode::Full,
                                  const IterationObserver& observer = {}) {
  if (!std::isfinite(chi) || chi < 0.0) throw ConfigError("chi must be finite and >= 0");
  detail::BaselineHooks hooks;
  hooks.consensus_objective = [&problem, chi](std::span<const double> th) {
    return chi * problem.lower(th) + problem.upper(th);
  };
  return detail::baseline_run_impl(problem, dim, n_particles, params, init, seed, mode, observer,
                                   hooks);
}

// Adaptive penalized CBO run output: the trace plus the penalty state in
// effect at the START of each iteration (entry k entered step k).
struct AdaptiveRunResult {
  RunTrace trace;
  std::vector<double> chi;
  std::vector<double> zeta;
  double chi_final = 0.0;
  double zeta_final = 0.0;
};

inline AdaptiveRunResult adaptive_penalized_cbo_run(const BiLevelProblem& problem, std::size_t dim,
                                                    std::size_t n_particles,
                                                    const AdaptivePenalizedParams& ap,
                                                    const Cb2oParams& params, const InitSpec& init,
                                                    std::uint64_t seed,
                                                    TraceMode mode = TraceMode::Full,
                                                    const IterationObserver& observer = {}) {
  validate_adaptive(ap);
  AdaptiveRunResult out;
  double chi = ap.chi0;
  double zeta = ap.zeta0;
  detail::BaselineHooks hooks;
  hooks.consensus_objective = [&problem, &chi](std::span<const double> th) {
    return chi * problem.lower(th) + problem.upper(th);
  };
  hooks.on_iteration_start = [&](std::size_t) {
    out.chi.push_back(chi);
    out.zeta.push_back(zeta);
  };
  hooks.after_step = [&](std::size_t k, std::span<const double> m) {
    if ((k + 1) % ap.update_every != 0) return;
    // A non-finite violation fails the `<` test and lands in the chi branch,
    // i.e. it is treated as a huge violation.  (Per-particle evaluations of
    // the merged objective are finiteness-checked in the step itself.)
    const double violation = std::sqrt(problem.lower(m));
    if (violation < 1.0 / std::sqrt(zeta))
      zeta *= ap.eta_zeta;
    else
      chi *= ap.eta_chi;
  };
  out.trace =
      detail::baseline_run_impl(problem, dim, n_particles, params, init, seed, mode, observer,
                                hooks);
  out.chi_final = chi;
  out.zeta_final = zeta;
  return out;
}

// CBO with gradient force: standard CBO on G with an extra per-particle
// drift -dt*chi*grad L(theta_i).  chi = 0 is exactly standard CBO on G and
// never touches the gradient.
inline RunTrace cbo_gradient_force_run(const BiLevelProblem& problem, std::size_t dim,
                                       std::size_t n_particles, double chi,
                                       const Cb2oParams& params, const InitSpec& init,
                                       std::uint64_t seed, TraceMode mode = TraceMode::Full,
                                       const IterationObserver& observer = {}) {
  if (!std::isfinite(chi) || chi < 0.0) throw ConfigError("chi must be finite and >= 0");
  if (chi > 0.0 && !problem.lower_grad)
    throw ConfigError("gradient force requires a lower-level gradient");
  detail::BaselineHooks hooks;
  hooks.consensus_objective = problem.upper;
  if (chi > 0.0) {
    const double scale = params.dt * chi;
    hooks.extra_force = [&problem, scale](std::span<const double> row, std::span<double> force) {
      problem.lower_grad(row, force);
      for (double& f : force) f *= -scale;
    };
  }
  return detail::baseline_run_impl(problem, dim, n_particles, params, init, seed, mode, observer,
                                   hooks);
}

// Projected CBO: standard CBO on G with particles constrained to the set.
// The initial ensemble is projected onto the set; each step projects the
// update vector onto the tangent space at the particle and re-projects the
// result.  Requires the problem's projection operator (unit circle/sphere).
inline RunTrace projected_cbo_run(const BiLevelProblem& problem, std::size_t dim,
                                  std::size_t n_particles, const Cb2oParams& params,
                                  const InitSpec& init, std::uint64_t seed,
                                  TraceMode mode = TraceMode::Full,
                                  const IterationObserver& observer = {}) {
  if (!problem.project) throw ConfigError("projected CBO requires a projection operator");
  detail::BaselineHooks hooks;
  hooks.consensus_objective = problem.upper;
  hooks.projected = true;
  hooks.project = &problem.project;
  return detail::baseline_run_impl(problem, dim, n_particles, params, init, seed, mode, observer,
                                   hooks);
}

}  // namespace cb2o
