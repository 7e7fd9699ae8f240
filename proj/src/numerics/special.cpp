// SPDX-License-Identifier: Apache-2.0
#include "dpst/special.hpp"

#include <cmath>
#include <numbers>

namespace dpst {

double sinc(double x) noexcept {
  if (x == 0.0) return 1.0;
  // sin(pi x) is not exactly zero in floating point at integer x; the
  // zero-ISI property relies on exact zeros there.
  if (x == std::nearbyint(x)) return 0.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double bessel_j0(double x) noexcept { return std::cyl_bessel_j(0.0, std::abs(x)); }

}  // namespace dpst
