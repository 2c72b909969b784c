#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"
#include "cb2o/problem.hpp"

namespace cb2o {

// Number of particles the beta-quantile rule selects: ceil(beta*N), computed
// robustly so that products like 0.05 * 100 (= 5.000000000000001 in floating
// point) still select exactly 5.  Throws when fewer than 2 particles would be
// selected, reporting the minimal admissible beta = 2/N.
inline std::size_t quantile_count(double beta, std::size_t n) {
  if (!std::isfinite(beta) || !(beta > 0.0) || !(beta <= 1.0))
    throw ConfigError("beta must lie in (0, 1], got " + std::to_string(beta));
  const double bn = beta * static_cast<double>(n);
  const double nearest = std::round(bn);
  std::size_t m;
  if (nearest >= 1.0 && std::abs(bn - nearest) <= 1e-9 * std::max(1.0, bn))
    m = static_cast<std::size_t>(nearest);
  else
    m = static_cast<std::size_t>(std::ceil(bn));
  if (m > n) m = n;
  if (m < 2)
    throw ConfigError("ceil(beta*N) = " + std::to_string(m) +
                      " < 2 selected particles: beta = " + std::to_string(beta) +
                      " is below the admissible floor beta_min = 2/N = " +
                      std::to_string(2.0 / static_cast<double>(n)));
  return m;
}

struct QuantileResult {
  double value;                    // L value of the ceil(beta*N)-th best particle
  std::vector<std::size_t> order;  // all indices by L ascending, ties by index
};

struct ConsensusResult {
  std::vector<double> point;           // weighted consensus m
  std::vector<std::size_t> selected;   // selected particle indices, ascending
  std::vector<double> weights;         // normalized, aligned with `selected`
  double quantile_value;               // selection threshold actually used
};

namespace detail {

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void evaluate_all(const Ensemble& e, const Objective& f, const char* objective_name,
                         std::vector<double>& out) {
  const std::size_t n = e.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(e.row(i));
    if (!std::isfinite(v)) throw EvaluationError(objective_name, i, v);
    out[i] = v;
  }
}

// Scratch buffers shared across consensus evaluations of one run.
struct ConsensusScratch {
  std::vector<double> lower_values;
  std::vector<std::size_t> order;
  std::vector<std::size_t> selected;  // ascending particle indices
  std::vector<double> weights;        // aligned with selected
  std::vector<double> point;
  double quantile = 0.0;
};

// Indices of the m smallest values under (value, index) lexicographic order —
// the first m entries of a stable full sort, found without sorting the rest.
// Returns the m-th smallest value (the quantile) and fills ws.selected
// (ascending particle index).
inline double select_smallest(const std::vector<double>& values, std::size_t m,
                              std::vector<std::size_t>& order,
                              std::vector<std::size_t>& selected) {
  const std::size_t n = values.size();
  order.resize(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const auto cmp = [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    cmp);
  const double q = values[order[m - 1]];
  selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(selected.begin(), selected.end());
  return q;
}

// Gibbs weights exp(-alpha*(G_i - min G)) over ws.selected and the weighted
// consensus point.  The max-shift makes the largest raw weight exactly 1, so
// the normalizer never underflows even at alpha = 1e6.  Both reductions run
// in ascending selected order for bit-reproducibility.
inline void weights_and_point(const Ensemble& e, const Objective& upper, double alpha,
                              ConsensusScratch& ws) {
  const std::size_t m = ws.selected.size();
  const std::size_t d = e.dim();
  ws.weights.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = ws.selected[k];
    const double g = upper(e.row(i));
    if (!std::isfinite(g)) throw EvaluationError("upper objective", i, g);
    ws.weights[k] = g;  // raw G values first
  }
  double gmin = ws.weights[0];
  for (std::size_t k = 1; k < m; ++k) gmin = std::min(gmin, ws.weights[k]);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dg = ws.weights[k] - gmin;
    const double w = (dg == 0.0) ? 1.0 : std::exp(-alpha * dg);
    ws.weights[k] = w;
    total += w;
  }
  for (std::size_t k = 0; k < m; ++k) ws.weights[k] /= total;
  ws.point.assign(d, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto row = e.row(ws.selected[k]);
    const double w = ws.weights[k];
    for (std::size_t j = 0; j < d; ++j) ws.point[j] += w * row[j];
  }
}

inline void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw ConfigError("alpha must be finite and >= 0, got " + std::to_string(alpha));
}

// Empirical beta-quantile consensus into scratch buffers (no allocations on
// reuse).  Selection: the ceil(beta*N) particles of smallest L, ties broken
// by original index.
inline void consensus_into(const Ensemble& e, const Objective& lower, const Objective& upper,
                           double alpha, double beta, ConsensusScratch& ws) {
  check_alpha(alpha);
  const std::size_t m = quantile_count(beta, e.size());
  evaluate_all(e, lower, "lower objective", ws.lower_values);
  ws.quantile = select_smallest(ws.lower_values, m, ws.order, ws.selected);
  weights_and_point(e, upper, alpha, ws);
}

// Exact integral of the empirical quantile step function over [lo, hi]:
// q_a equals the j-th order statistic for a in ((j-1)/N, j/N], so the
// integral is a finite sum of sorted values times interval overlaps.
// Also reports the smallest order statistic with positive overlap, which is
// a rigorous lower bound on the averaged value (the average of a
// nondecreasing step function cannot fall below its leftmost plateau).
struct QuantileIntegral {
  double integral = 0.0;
  double lowest = -std::numeric_limits<double>::infinity();
};

inline QuantileIntegral integrate_empirical_quantile(const std::vector<double>& values,
                                                     std::vector<std::size_t>& order, double lo,
                                                     double hi) {
  const std::size_t n = values.size();
  order.resize(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  QuantileIntegral out;
  bool first = true;
  const double dn = static_cast<double>(n);
  for (std::size_t j = 1; j <= n; ++j) {
    const double seg_lo = static_cast<double>(j - 1) / dn;
    if (seg_lo >= hi) break;
    const double seg_hi = static_cast<double>(j) / dn;
    const double overlap = std::min(hi, seg_hi) - std::max(lo, seg_lo);
    if (overlap > 0.0) {
      out.integral += overlap * values[order[j - 1]];
      if (first) {
        out.lowest = values[order[j - 1]];
        first = false;
      }
    }
  }
  return out;
}

// Regularized selection: threshold tau = (2/beta) * Integral_{beta/2}^{beta}
// q_a da + delta_q, restricted to the ball of radius R around the origin.
inline void consensus_regularized_into(const Ensemble& e, const Objective& lower,
                                       const Objective& upper, double alpha, double beta,
                                       double radius, double delta_q, ConsensusScratch& ws) {
  check_alpha(alpha);
  if (!std::isfinite(beta) || !(beta > 0.0) || !(beta <= 1.0))
    throw ConfigError("beta must lie in (0, 1], got " + std::to_string(beta));
  if (!std::isfinite(radius) || !(radius > 0.0))
    throw ConfigError("regularized selection radius must be finite and positive");
  if (!std::isfinite(delta_q) || delta_q < 0.0)
    throw ConfigError("delta_q must be finite and >= 0");
  evaluate_all(e, lower, "lower objective", ws.lower_values);
  const QuantileIntegral qi =
      integrate_empirical_quantile(ws.lower_values, ws.order, beta / 2.0, beta);
  // Clamping to the smallest averaged order statistic is mathematically a
  // no-op; it only removes summation dust that could otherwise leave an
  // all-equal-L ensemble with an empty selection.
  const double tau = std::max((2.0 / beta) * qi.integral, qi.lowest) + delta_q;
  ws.quantile = tau;
  ws.selected.clear();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (ws.lower_values[i] <= tau && l2_norm(e.row(i)) <= radius) ws.selected.push_back(i);
  }
  if (ws.selected.empty()) throw DegenerateSelectionError(tau, radius);
  weights_and_point(e, upper, alpha, ws);
}

inline ConsensusResult package(ConsensusScratch&& ws) {
  return ConsensusResult{std::move(ws.point), std::move(ws.selected), std::move(ws.weights),
                         ws.quantile};
}

}  // namespace detail

// The beta-quantile of the lower objective over the ensemble: the value of
// the ceil(beta*N)-th smallest L, plus the full stable L-order.
inline QuantileResult quantile_value(const Ensemble& e, const Objective& lower, double beta) {
  const std::size_t m = quantile_count(beta, e.size());
  std::vector<double> values;
  detail::evaluate_all(e, lower, "lower objective", values);
  QuantileResult r;
  r.order.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) r.order[i] = i;
  std::sort(r.order.begin(), r.order.end(), [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  r.value = values[r.order[m - 1]];
  return r;
}

// The consensus point: Gibbs-weighted (weight exp(-alpha*G)) average of the
// ceil(beta*N) particles with smallest lower-objective value.
inline ConsensusResult consensus_point(const Ensemble& e, const BiLevelProblem& p, double alpha,
                                       double beta) {
  detail::ConsensusScratch ws;
  detail::consensus_into(e, p.lower, p.upper, alpha, beta, ws);
  return detail::package(std::move(ws));
}

// Convenience overload for ad-hoc lower/upper objective pairs.
inline ConsensusResult consensus_point(const Ensemble& e, const Objective& lower,
                                       const Objective& upper, double alpha, double beta) {
  detail::ConsensusScratch ws;
  detail::consensus_into(e, lower, upper, alpha, beta, ws);
  return detail::package(std::move(ws));
}

// Regularized variant: selection by the smoothed quantile threshold
// tau = (2/beta) * Integral_{beta/2}^{beta} q_a da + delta_q inside the ball
// of radius R.  Throws DegenerateSelectionError when no particle qualifies;
// callers may fall back to the empirical rule (and should log doing so).
inline ConsensusResult consensus_point_regularized(const Ensemble& e, const BiLevelProblem& p,
                                                   double alpha, double beta, double radius,
                                                   double delta_q) {
  detail::ConsensusScratch ws;
  detail::consensus_regularized_into(e, p.lower, p.upper, alpha, beta, radius, delta_q, ws);
  return detail::package(std::move(ws));
}

// Convenience overload for ad-hoc lower/upper objective pairs.
inline ConsensusResult consensus_point_regularized(const Ensemble& e, const Objective& lower,
                                                   const Objective& upper, double alpha,
                                                   double beta, double radius, double delta_q) {
  detail::ConsensusScratch ws;
  detail::consensus_regularized_into(e, lower, upper, alpha, beta, radius, delta_q, ws);
  return detail::package(std::move(ws));
}

struct InstabilityResult {
  double w2;             // exact W2 distance between the two discrete measures
  double consensus_gap;  // distance between their consensus points
};

// Instability of the consensus map under Wasserstein perturbations.
//
// Two concentric circles (radii 1 and 1.1, m_points each, equal mass) give a
// measure rho whose regularized consensus sits at the origin.  Shifting the
// right half of the outer circle to the right by s moves rho by W2 = s/2
// (one quarter of the mass travels distance s) yet expels exactly those
// points from the selection, displacing the consensus by a constant gap
// c_alpha that does not shrink with s.  The gap/W2 ratio therefore blows up
// as s -> 0: no Lipschitz bound in W2 can hold.
//
// Points sit at half-offset angles 2*pi*(k+1/2)/M so none lies on the x = 0
// axis and the set is mirror-symmetric; delta_q gets a 1e-9 bump over the
// radius gap so representation dust in ||theta|| cannot flip a membership.
inline InstabilityResult wasserstein_instability_demo(double s, double alpha, double beta = 0.3,
                                                      std::size_t m_points = 2000) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("perturbation size s must be > 0");
  const double r_inner = 1.0;
  const double r_outer = 1.1;
  const double delta_q = (r_outer - r_inner) + 1e-9;
  const double radius = 1e6;

  const std::size_t n = 2 * m_points;
  Ensemble base(n, 2);
  for (std::size_t k = 0; k < m_points; ++k) {
    const double phi =
        2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(m_points);
    const double c = std::cos(phi), si = std::sin(phi);
    base.row(k)[0] = r_inner * c;
    base.row(k)[1] = r_inner * si;
    base.row(m_points + k)[0] = r_outer * c;
    base.row(m_points + k)[1] = r_outer * si;
  }
  Ensemble perturbed = base;
  for (std::size_t k = 0; k < m_points; ++k) {
    auto row = perturbed.row(m_points + k);
    if (row[0] > 0.0) row[0] += s;
  }

  const Objective norm_obj = [](std::span<const double> th) { return detail::l2_norm(th); };
  BiLevelProblem p;
  p.lower = norm_obj;
  p.upper = norm_obj;

  const ConsensusResult m_base = consensus_point_regularized(base, p, alpha, beta, radius, delta_q);
  const ConsensusResult m_pert =
      consensus_point_regularized(perturbed, p, alpha, beta, radius, delta_q);

  double gap_sq = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const double dj = m_pert.point[j] - m_base.point[j];
    gap_sq += dj * dj;
  }
  // One quarter of the mass moves horizontally by s and nothing else moves,
  // so the optimal coupling is the identity on the rest: W2 = sqrt(s^2/4).
  return InstabilityResult{s / 2.0, std::sqrt(gap_sq)};
}

}  // namespace cb2o
