#pragma once

#include <cstdint>

#include "lmaflow/small_sym.hpp"

namespace lmaflow {

/// xorshift64* generator: shifts 12, 25, 27 and multiplier
/// 2685821657736338717. Fixed update constants keep every randomized
/// suite reproducible from a single 64-bit seed.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed)
      : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ULL;
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Random rotation from composed Givens rotations.
void random_orthogonal(int n, Xorshift64Star& rng, double q[3][3]);

/// Symmetric matrix with eigenvalues drawn uniformly from [lo, hi].
SymMat random_symmetric_with_spectrum(int n, double lo, double hi,
                                      Xorshift64Star& rng);

}  // namespace lmaflow
