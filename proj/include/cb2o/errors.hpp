#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cb2o {

// Invalid user-facing configuration: bad particle counts, beta below the
// admissible floor, malformed init specs, unknown benchmarks, ...
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// An objective returned a non-finite value; carries the offending particle.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& objective, std::size_t particle, double value)
      : std::runtime_error(objective + " returned non-finite value " +
                           std::to_string(value) + " for particle " +
                           std::to_string(particle)),
        particle_(particle) {}
  std::size_t particle() const { return particle_; }

 private:
  std::size_t particle_;
};

// A particle update produced a non-finite coordinate; names particle and term.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t particle, const std::string& term)
      : std::runtime_error("non-finite update for particle " + std::to_string(particle) +
                           " in the " + term + " term"),
        particle_(particle),
        term_(term) {}
  std::size_t particle() const { return particle_; }
  const std::string& term() const { return term_; }

 private:
  std::size_t particle_;
  std::string term_;
};

// The regularized selection rule admitted no particle.
class DegenerateSelectionError : public std::runtime_error {
 public:
  DegenerateSelectionError(double threshold, double radius)
      : std::runtime_error("regularized selection is empty (threshold " +
                           std::to_string(threshold) + ", ball radius " +
                           std::to_string(radius) + ")") {}
};

// fit_decay_rate could not form a valid fit window.
class FitWindowError : public std::runtime_error {
 public:
  explicit FitWindowError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cb2o
