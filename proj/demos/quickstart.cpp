// Quickstart: define a bi-level problem, run the solver, inspect the trace.
//
// Lower level: a double-well in 1-D crossed with a parabola in the second
// coordinate; its global minimizers are the two points (-1, 0) and (1, 0).
// Upper level: distance to (2, 0), so the right-hand well is the target.

#include <cstdio>
#include <span>

#include "cb2o/cb2o.hpp"

int main() {
  cb2o::BiLevelProblem problem;
  problem.lower = [](std::span<const double> th) {
    const double a = th[0] * th[0] - 1.0;
    return a * a + th[1] * th[1];
  };
  problem.upper = [](std::span<const double> th) {
    const double dx = th[0] - 2.0;
    return dx * dx + th[1] * th[1];
  };
  problem.theta_good = {1.0, 0.0};

  cb2o::Cb2oParams params;
  params.lambda = 1.0;
  params.sigma = 0.8;
  params.alpha = 50.0;   // sharpness of the upper-objective weighting
  params.beta = 0.1;     // keep the best 10% of particles by lower value
  params.dt = 0.01;
  params.eps_stop = 1e-6;
  params.max_iters = 5000;

  const cb2o::RunTrace trace =
      cb2o::run(problem, /*dim=*/2, /*n_particles=*/200, params,
                cb2o::UniformBoxInit{-3.0, 3.0}, /*seed=*/42);

  const auto m = trace.consensus_at(trace.records() - 1);
  std::printf("stopped: %s after %zu iterations\n",
              cb2o::to_string(trace.summary.stop_reason), trace.summary.iterations);
  std::printf("consensus: (%.6f, %.6f), target (1, 0)\n", m[0], m[1]);
  std::printf("precision: %.3e\n", trace.summary.final_precision);
  return trace.summary.stop_reason == cb2o::StopReason::Error ? 1 : 0;
}
