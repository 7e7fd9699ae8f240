// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace dpst {

/// Seeded random stream keyed by (master_seed, stream id). Streams with
/// different keys are statistically independent, so work split across
/// threads by key gives the same numbers regardless of scheduling.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream);

  /// Child stream; the child key mixes this stream's key with `id`.
  Rng substream(std::uint64_t id) const;

  double uniform();                                   // [0, 1)
  double uniform(double lo, double hi);               // [lo, hi)
  double normal();                                    // N(0, 1)
  std::complex<double> complex_normal();              // CN(0, 1): re, im ~ N(0, 1/2)

  std::uint64_t master_seed() const noexcept { return master_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t master_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace dpst
