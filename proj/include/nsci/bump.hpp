#pragma once

#include <array>

namespace nsci {

// Derivatives of order 0..K of exp(-1/(1 - s)) for s < 1 (zero for s >= 1),
// from the Taylor recurrence e' = g' e.
template <int K>
std::array<double, K + 1> bump_radial(double s);

// Derivatives of order 0..K of exp(-1/(1 - s^2)) for |s| < 1.
template <int K>
std::array<double, K + 1> bump_line(double s);

}  // namespace nsci
