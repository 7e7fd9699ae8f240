// SPDX-License-Identifier: Apache-2.0
#include "dpst/rng.hpp"

#include <cmath>

namespace dpst {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t master_seed, std::uint64_t stream)
    : master_(master_seed), stream_(stream), engine_(mix64(mix64(master_seed) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

Rng Rng::substream(std::uint64_t id) const { return Rng(master_, mix64(stream_ ^ mix64(id + 0x632be59bd9b4e019ULL))); }

double Rng::uniform() { return uniform_(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

double Rng::normal() { return normal_(engine_); }

std::complex<double> Rng::complex_normal() {
  static const double kHalf = std::sqrt(0.5);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {kHalf * re, kHalf * im};
}

}  // namespace dpst
