#pragma once

#include <cstdint>
#include <random>

#include "swarmseek/types.hpp"

namespace swarmseek {

/// Seedable generator whose output is identical across platforms.
///
/// std::mt19937_64 has a fully specified output sequence; the standard
/// distributions do not, so the conversions below are done by hand.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform point in the closed ball of the given radius (cube rejection).
  Vector in_ball(Eigen::Index dim, double radius) {
    Vector v(dim);
    if (radius == 0.0) {
      v.setZero();
      return v;
    }
    for (;;) {
      for (Eigen::Index i = 0; i < dim; ++i) v[i] = uniform(-1.0, 1.0);
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace swarmseek
