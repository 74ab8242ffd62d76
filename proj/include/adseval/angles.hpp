// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numbers>

namespace adseval {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into [-pi, pi]. Values already in range are returned
// unchanged, so the function is idempotent bit-for-bit.
double wrap_angle(double radians);

// Smallest signed difference a - b, wrapped into [-pi, pi].
double angle_diff(double a, double b);

}  // namespace adseval
