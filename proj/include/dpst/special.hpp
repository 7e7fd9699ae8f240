// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace dpst {

/// Normalized sinc, sin(pi x) / (pi x), equal to 1 at x = 0. Integer
/// arguments other than zero give exactly 0.
double sinc(double x) noexcept;

/// Bessel function of the first kind, order zero.
double bessel_j0(double x) noexcept;

}  // namespace dpst
