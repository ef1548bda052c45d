#pragma once

#include <cmath>
#include <numbers>

namespace mbhoming {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, kTwoPi);
    if (w <= -kPi) w += kTwoPi;
    return w;
}

// Absolute angular difference in [0, pi].
inline double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

} // namespace mbhoming
