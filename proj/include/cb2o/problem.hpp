#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cb2o/errors.hpp"

namespace cb2o {

using Objective = std::function<double(std::span<const double>)>;
// Gradient written into the second argument (same length as the input).
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;
// In-place projection onto the constraint set.
using ProjectFn = std::function<void(std::span<double>)>;

// A simple bi-level problem: minimize the upper-level objective G over the
// set of global minimizers of the lower-level objective L.  Evaluators must
// be deterministic for a fixed input (reproducible traces) and safe to call
// concurrently from independent runs.
struct BiLevelProblem {
  Objective lower;                                 // L
  Objective upper;                                 // G
  GradientFn lower_grad;                           // optional: grad L
  ProjectFn project;                               // optional: projection onto {L = min L}
  std::optional<std::vector<double>> theta_good;   // known good minimizer, for metrics
  std::optional<double> lower_min;                 // known min of L, for sanity checks
};

// Consistency check used by benchmark constructors: when both the good
// minimizer and the lower minimum are claimed, they must agree.
inline void validate_problem(const BiLevelProblem& p, double tol = 1e-9) {
  if (!p.lower || !p.upper) throw ConfigError("problem needs both lower and upper objectives");
  if (p.theta_good && p.lower_min) {
    const double at_good = p.lower(std::span<const double>(*p.theta_good));
    if (!(std::abs(at_good - *p.lower_min) <= tol))
      throw ConfigError("lower(theta_good) = " + std::to_string(at_good) +
                        " disagrees with the claimed lower_min = " +
                        std::to_string(*p.lower_min));
  }
}

}  // namespace cb2o
