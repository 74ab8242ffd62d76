// SPDX-License-Identifier: Apache-2.0
#include "adseval/angles.hpp"

#include <cmath>

namespace adseval {

double wrap_angle(double radians) {
  if (radians >= -kPi && radians <= kPi) return radians;
  // remainder() is exact in IEEE arithmetic and lands in [-pi, pi].
  return std::remainder(radians, 2.0 * kPi);
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace adseval
