#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace cb2o {

namespace detail {

// SplitMix64 finalizer: a bijective 64-bit mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic counter-style 64-bit random stream.
//
// One master seed plus a stream id yield an independent sequence, so
// replicate r of an experiment uses RngStream(seed, r) and per-particle
// sub-streams can be derived with split().  The uniform source is SplitMix64:
// the state walks the Weyl sequence state += 0x9E3779B97F4A7C15 and each
// output is mix64(state); distinct (seed, stream) pairs start from
// well-separated mixed states.
//
// Gaussians use the Box-Muller transform
//   z0 = sqrt(-2 ln u1) * cos(2*pi*u2),   z1 = sqrt(-2 ln u1) * sin(2*pi*u2)
// with u1 in (0,1], u2 in [0,1); z1 is cached and returned by the next call.
// This exact draw sequence is part of the reproducibility contract: a run is
// bit-identical for a fixed (seed, stream) regardless of platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(detail::mix64(detail::mix64(seed + 0x9E3779B97F4A7C15ULL) ^
                             detail::mix64(stream + 0xD6E8FEB86659FD93ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // One standard normal draw (Box-Muller; draws come in cached pairs).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform01();                                              // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n); n >= 1.  Modulo reduction: the bias is
  // below 2^-53 for every n used here and determinism is what matters.
  std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

  // Derive a deterministic child stream (e.g. one per particle).
  RngStream split(std::uint64_t child) const {
    RngStream s{RawState{}, detail::mix64(state_ ^ detail::mix64(child + 0xA0761D6478BD642FULL))};
    return s;
  }

 private:
  struct RawState {};
  RngStream(RawState, std::uint64_t state) : state_(state) {}

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fill `out` with independent N(0,1) draws (coordinate order).
inline void gaussian_fill(RngStream& rng, std::span<double> out) {
  for (double& x : out) x = rng.normal();
}

// d independent N(0,1) draws as a fresh vector.
inline std::vector<double> gaussian_vector(RngStream& rng, std::size_t d) {
  std::vector<double> v(d);
  gaussian_fill(rng, v);
  return v;
}

}  // namespace cb2o
