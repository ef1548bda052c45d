#pragma once

// Premotor stage: MBON familiarities -> steering and throttle.
//
// Steering sign follows the homing-vector convention of the controller:
// negative steer means "turn left" (counter-clockwise).

#include <algorithm>
#include <cmath>

#include "mbhoming/angles.hpp"
#include "mbhoming/mushroom_body.hpp"

namespace mbhoming {

// Familiarity differences between banks are small (|e| is typically a few
// hundredths), so the proportional gain has to be large to reach the steering
// limit within a fraction of a turn.
struct SteeringGains {
    double kp = 20.0;
    double ki = 1.7;
    double kd = 0.8;
    double integral_clamp = 2.0;

    friend bool operator==(const SteeringGains&, const SteeringGains&) = default;
};

struct SteeringState {
    SteeringGains gains;
    double dt = 0.125;
    double max_steer = deg_to_rad(30.0);
    double integral = 0.0;
    double prev_error = 0.0;
};

struct DriveCommand {
    double steer = 0.0; // rad, negative = left
    double speed = 0.0; // m/s
};

// Left banks more familiar than right banks gives e < 0 (turn left).
inline double lateral_error(const FamiliarityReadout& f) {
    return 0.5 * ((f[MBONId::LeftA] - f[MBONId::RightA]) + (f[MBONId::LeftB] - f[MBONId::RightB]));
}

// PID on the lateral error with a clamped integral.
inline double steering(SteeringState& s, double e) {
    const auto& g = s.gains;
    s.integral = std::clamp(s.integral + e * s.dt, -g.integral_clamp, g.integral_clamp);
    const double derivative = (e - s.prev_error) / s.dt;
    s.prev_error = e;
    const double u = g.kp * e + g.ki * s.integral + g.kd * derivative;
    return std::clamp(u, -s.max_steer, s.max_steer);
}

// Speed follows an exponential moving average of the nest MBON's novelty.
class Throttle {
public:
    explicit Throttle(double v_max = 0.8, double alpha = 0.2) : v_max_(v_max), alpha_(alpha) {}

    double update(double f_nest) {
        smoothed_ += alpha_ * (std::clamp(f_nest, 0.0, 1.0) - smoothed_);
        return v_max_ * smoothed_;
    }

    double smoothed() const noexcept { return smoothed_; }
    double v_max() const noexcept { return v_max_; }

private:
    double v_max_;
    double alpha_;
    double smoothed_ = 1.0;
};

enum class ControlMode { FourMBON, FiveMBON };

struct ControlStep {
    double error = 0.0;
    DriveCommand cmd;
};

class SipController {
public:
    SipController(const SteeringState& steering, double v_max, double throttle_alpha = 0.2)
        : steering_(steering), throttle_(v_max, throttle_alpha) {}

    ControlStep step(const FamiliarityReadout& f, ControlMode mode) {
        ControlStep out;
        out.error = lateral_error(f);
        out.cmd.steer = steering(steering_, out.error);
        out.cmd.speed = mode == ControlMode::FiveMBON ? throttle_.update(f[MBONId::Nest]) : throttle_.v_max();
        return out;
    }

    const SteeringState& steering_state() const noexcept { return steering_; }

private:
    SteeringState steering_;
    Throttle throttle_;
};

} // namespace mbhoming
