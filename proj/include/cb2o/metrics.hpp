#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"

namespace cb2o {

// l2 distance between the returned consensus point and the known good
// minimizer ("precision" in the experiment tables).
inline double precision(std::span<const double> final_consensus,
                        std::span<const double> theta_good) {
  if (final_consensus.size() != theta_good.size())
    throw ConfigError("precision: dimension mismatch (" +
                      std::to_string(final_consensus.size()) + " vs " +
                      std::to_string(theta_good.size()) + ")");
  double s = 0.0;
  for (std::size_t j = 0; j < final_consensus.size(); ++j) {
    const double dj = final_consensus[j] - theta_good[j];
    s += dj * dj;
  }
  return std::sqrt(s);
}

// Squared Wasserstein-2 distance between the empirical ensemble measure and a
// Dirac at `theta`: the coupling is forced, so it is exactly the mean squared
// distance (1/N) * sum_i ||theta_i - theta||^2.
inline double w2sq_to_dirac(const Ensemble& e, std::span<const double> theta) {
  if (theta.size() != e.dim())
    throw ConfigError("w2sq_to_dirac: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto row = e.row(i);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double dj = row[j] - theta[j];
      s += dj * dj;
    }
  }
  return s / static_cast<double>(e.size());
}

struct DecayFit {
  double rate;         // least-squares slope of log V vs t on the fit window
  double r_squared;    // goodness of the linear fit
  std::size_t first;   // fit window [first, last], indices into the trace
  std::size_t last;
};

// Fit the exponential decay rate of V(t): least squares on log V vs t over
// the window from where V first drops to 0.5*V(0) until it first reaches
// max(10 * noise_floor, 1e-6 * V(0)), with the noise floor estimated as the
// median of V over the final 10% of the trace.  If V never crosses the
// thresholds the window falls back to the full trace (a constant V then fits
// rate 0 exactly).
inline DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> v) {
  const std::size_t n = t.size();
  if (v.size() != n) throw FitWindowError("fit_decay_rate: t and V length mismatch");
  if (n < 10) throw FitWindowError("fit_decay_rate: need at least 10 trace points");
  if (!(v[0] > 0.0)) throw FitWindowError("fit_decay_rate: V(0) must be positive");

  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  std::vector<double> last_chunk(v.end() - static_cast<std::ptrdiff_t>(tail), v.end());
  std::nth_element(last_chunk.begin(), last_chunk.begin() + static_cast<std::ptrdiff_t>(tail / 2),
                   last_chunk.end());
  const double noise_floor = last_chunk[tail / 2];

  const double hi = 0.5 * v[0];
  const double lo = std::max(10.0 * noise_floor, 1e-6 * v[0]);

  std::size_t first = 0;
  while (first < n && !(v[first] <= hi)) ++first;
  if (first == n) first = 0;
  std::size_t last = first;
  while (last < n && !(v[last] <= lo)) ++last;
  if (last == n) last = n - 1;
  if (last <= first) {  // degenerate crossing (e.g. one-step collapse): use everything
    first = 0;
    last = n - 1;
  }

  double st = 0.0, sy = 0.0;
  const std::size_t cnt = last - first + 1;
  for (std::size_t i = first; i <= last; ++i) {
    if (!(v[i] > 0.0))
      throw FitWindowError("fit_decay_rate: V is non-positive inside the fit window at index " +
                           std::to_string(i));
    st += t[i];
    sy += std::log(v[i]);
  }
  const double mt = st / static_cast<double>(cnt);
  const double my = sy / static_cast<double>(cnt);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double dt = t[i] - mt;
    const double dy = std::log(v[i]) - my;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw FitWindowError("fit_decay_rate: degenerate time axis in fit window");
  const double slope = sxy / sxx;
  const double ss_res = syy - slope * sxy;
  const double r2 = (syy > 0.0) ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return DecayFit{slope, r2, first, last};
}

}  // namespace cb2o
