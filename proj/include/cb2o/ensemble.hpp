#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cb2o/errors.hpp"
#include "cb2o/rng.hpp"

namespace cb2o {

// Dense row-major N x d particle ensemble.  N >= 2 always: the quantile
// selection rule requires ceil(beta*N) >= 2 admissible particles.
class Ensemble {
 public:
  Ensemble(std::size_t n, std::size_t d) : n_(n), d_(d), data_(n * d, 0.0) {
    if (n < 2) {
      throw ConfigError(
          "ensemble must have at least 2 particles: the selection rule needs "
          "ceil(beta*N) >= 2, i.e. beta >= beta_min = 2/N (got N = " +
          std::to_string(n) + ")");
    }
    if (d == 0) throw ConfigError("ensemble dimension must be positive");
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  std::size_t n_, d_;
  std::vector<double> data_;
};

// Initial particle laws.
struct GaussianInit {};  // i.i.d. standard normal coordinates
struct UniformBoxInit {  // i.i.d. uniform on [lo, hi] per coordinate
  double lo;
  double hi;
};
struct PointsInit {  // explicit list of positions, one per particle
  std::vector<std::vector<double>> points;
};
using InitSpec = std::variant<GaussianInit, UniformBoxInit, PointsInit>;

// Draw an N x d ensemble from `init`.  Deterministic given (init, rng):
// coordinates are filled row-major (particle 0 coordinate 0, 1, ..., then
// particle 1, ...), one rng draw per coordinate for the random laws.
inline Ensemble init_ensemble(std::size_t n, std::size_t d, const InitSpec& init,
                              RngStream& rng) {
  Ensemble e(n, d);
  if (const auto* g = std::get_if<GaussianInit>(&init)) {
    (void)g;
    for (std::size_t i = 0; i < n; ++i) gaussian_fill(rng, e.row(i));
  } else if (const auto* u = std::get_if<UniformBoxInit>(&init)) {
    if (!std::isfinite(u->lo) || !std::isfinite(u->hi))
      throw ConfigError("uniform init bounds must be finite");
    if (!(u->lo < u->hi)) throw ConfigError("uniform init requires lo < hi");
    const double w = u->hi - u->lo;
    for (std::size_t i = 0; i < n; ++i)
      for (double& x : e.row(i)) x = u->lo + w * rng.uniform01();
  } else {
    const auto& pts = std::get<PointsInit>(init).points;
    if (pts.size() != n)
      throw ConfigError("explicit init lists " + std::to_string(pts.size()) +
                        " points but the ensemble has " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (pts[i].size() != d)
        throw ConfigError("explicit init point " + std::to_string(i) +
                          " has dimension " + std::to_string(pts[i].size()) +
                          ", expected " + std::to_string(d));
      for (std::size_t j = 0; j < d; ++j) {
        if (!std::isfinite(pts[i][j]))
          throw ConfigError("explicit init point " + std::to_string(i) +
                            " has a non-finite coordinate");
        e.row(i)[j] = pts[i][j];
      }
    }
  }
  return e;
}

}  // namespace cb2o
