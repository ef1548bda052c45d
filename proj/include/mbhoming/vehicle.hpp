#pragma once

// Kinematic bicycle model of the car-like robot (rear-axle reference point).

#include <algorithm>
#include <cmath>

#include "mbhoming/angles.hpp"
#include "mbhoming/error.hpp"
#include "mbhoming/sip_controller.hpp"

namespace mbhoming {

// DriveCommand uses negative steer for a left (CCW) turn; the yaw rate of the
// bicycle model is positive CCW. Flip this to drive a world with the opposite
// convention.
inline constexpr double kSteerToYawSign = -1.0;

struct VehicleParams {
    double wheelbase = 0.17;
    double max_steer = deg_to_rad(30.0);
    double v_max = 0.8;

    double min_turn_radius() const { return wheelbase / std::tan(max_steer); }

    friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double speed = 0.0;
    double steer = 0.0; // last applied command, DriveCommand convention
};

// Integrates one step holding steer and speed constant, exactly along the arc.
inline VehicleState step_vehicle(const VehicleState& s, const DriveCommand& cmd, double dt, const VehicleParams& p) {
    if (!(dt > 0.0) || dt > 0.5) throw InputError("step_vehicle: dt must be in (0, 0.5]");
    VehicleState n = s;
    n.steer = std::clamp(cmd.steer, -p.max_steer, p.max_steer);
    n.speed = std::clamp(cmd.speed, 0.0, p.v_max);
    const double v = n.speed;
    const double yaw_rate = kSteerToYawSign * v / p.wheelbase * std::tan(n.steer);
    const double dtheta = yaw_rate * dt;
    if (std::abs(dtheta) < 1e-12) {
        n.x += v * std::cos(s.heading) * dt;
        n.y += v * std::sin(s.heading) * dt;
    } else {
        const double radius = v / yaw_rate;
        n.x += radius * (std::sin(s.heading + dtheta) - std::sin(s.heading));
        n.y -= radius * (std::cos(s.heading + dtheta) - std::cos(s.heading));
    }
    n.heading = wrap_angle(s.heading + dtheta);
    return n;
}

} // namespace mbhoming
