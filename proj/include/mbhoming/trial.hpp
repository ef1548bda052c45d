#pragma once

// Closed-loop homing: render -> optic lobe -> mushroom body -> SIP -> vehicle.

#include <cmath>
#include <limits>
#include <vector>

#include "mbhoming/agent.hpp"
#include "mbhoming/sip_controller.hpp"
#include "mbhoming/vehicle.hpp"

namespace mbhoming {

struct TrialLimits {
    double max_time = 120.0;   // s
    double dt = 0.125;         // control period (8 Hz)
    double nest_radius = 1.0;  // search statistics start at the first pass within 2x this
    double stop_speed = 0.02;  // m/s
    double stop_hold = 2.0;    // s below stop_speed to count as stopped
    double post_stop = 3.0;    // s kept running after a stop to watch the speed settle
    double zero_speed = 1e-3;  // m/s treated as standing still

    friend bool operator==(const TrialLimits&, const TrialLimits&) = default;
};

struct TrialStep {
    double t = 0.0;
    double x = 0.0, y = 0.0, heading = 0.0;
    double error = 0.0;
    bool after_stop = false;
    DriveCommand cmd;
    FamiliarityReadout f;
};

enum class TrialOutcome { Completed, Stopped, LeftArena, Collided };

inline constexpr std::string_view to_string(TrialOutcome o) {
    switch (o) {
    case TrialOutcome::Completed: return "completed";
    case TrialOutcome::Stopped: return "stopped";
    case TrialOutcome::LeftArena: return "left_arena";
    case TrialOutcome::Collided: return "collided";
    }
    return "?";
}

struct TrialRecord {
    Vec2 start;
    double start_heading = 0.0;
    std::vector<TrialStep> trajectory;
    TrialOutcome outcome = TrialOutcome::Completed;
    double min_dist_to_nest = std::numeric_limits<double>::infinity();
    double mean_search_dist = std::numeric_limits<double>::quiet_NaN(); // NaN if never arrived
    double max_search_dist = std::numeric_limits<double>::quiet_NaN();
    bool arrived = false;
    bool stopped = false;
    bool stayed_stopped = false; // speed fell to zero_speed after the stop and stayed there
    double stop_time = std::numeric_limits<double>::quiet_NaN();
    double stop_dist = std::numeric_limits<double>::quiet_NaN(); // final distance to the nest
    double duration = 0.0;

    bool failed() const { return outcome == TrialOutcome::LeftArena || outcome == TrialOutcome::Collided; }
};

// Recomputes every summary statistic of `rec` from its trajectory.
inline void summarize_trial(TrialRecord& rec, Vec2 nest, const TrialLimits& limits) {
    rec.min_dist_to_nest = std::numeric_limits<double>::infinity();
    rec.arrived = false;
    double sum = 0.0, maxd = 0.0;
    std::size_t n = 0;
    for (const auto& s : rec.trajectory) {
        const double d = std::hypot(s.x - nest.x, s.y - nest.y);
        rec.min_dist_to_nest = std::min(rec.min_dist_to_nest, d);
        if (!rec.arrived && d <= 2.0 * limits.nest_radius) rec.arrived = true;
        if (rec.arrived) {
            sum += d;
            maxd = std::max(maxd, d);
            ++n;
        }
    }
    rec.mean_search_dist = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    rec.max_search_dist = n ? maxd : std::numeric_limits<double>::quiet_NaN();
    rec.stopped = false;
    rec.stop_time = std::numeric_limits<double>::quiet_NaN();
    const auto hold_steps = static_cast<std::size_t>(std::llround(limits.stop_hold / limits.dt));
    std::size_t slow = 0;
    for (const auto& s : rec.trajectory) {
        slow = s.cmd.speed < limits.stop_speed ? slow + 1 : 0;
        if (slow >= hold_steps) {
            rec.stopped = true;
            rec.stop_time = s.t;
            break;
        }
    }
    rec.stayed_stopped = false;
    if (rec.stopped) {
        // Once the commanded speed first reaches zero_speed it must not rise again.
        bool reached = false, rose = false;
        for (const auto& s : rec.trajectory) {
            if (s.t < rec.stop_time) continue;
            if (s.cmd.speed <= limits.zero_speed) {
                reached = true;
            } else if (reached) {
                rose = true;
            }
        }
        rec.stayed_stopped = reached && !rose;
    }
    if (!rec.trajectory.empty()) {
        const auto& last = rec.trajectory.back();
        rec.stop_dist = std::hypot(last.x - nest.x, last.y - nest.y);
        rec.duration = last.t;
    }
}

// An untrained bank is allowed: every familiarity reads 1, the lateral error is
// 0 and the vehicle drives straight until it leaves the arena.
inline TrialRecord run_homing_trial(const World& world, const VisualPipeline& pipeline, Vec2 start,
                                    double start_heading, ControlMode mode, const TrialLimits& limits = {},
                                    const VehicleParams& vehicle = {}, const SteeringGains& gains = {},
                                    double throttle_alpha = 0.2) {
    if (!world.in_arena(start)) throw InputError("run_homing_trial: start outside arena");

    TrialRecord rec;
    rec.start = start;
    rec.start_heading = start_heading;

    SteeringState st;
    st.gains = gains;
    st.dt = limits.dt;
    st.max_steer = vehicle.max_steer;
    SipController sip(st, vehicle.v_max, throttle_alpha);

    VehicleState v{start.x, start.y, start_heading, 0.0, 0.0};
    const auto steps = static_cast<std::size_t>(std::llround(limits.max_time / limits.dt));
    const auto hold_steps = static_cast<std::size_t>(std::llround(limits.stop_hold / limits.dt));
    std::size_t slow = 0;
    const auto post_steps = static_cast<std::size_t>(std::llround(limits.post_stop / limits.dt));
    std::size_t post_left = 0;
    for (std::size_t i = 0; i <= steps || (rec.stopped && post_left > 0); ++i) {
        const Vec2 pos{v.x, v.y};
        if (!world.in_arena(pos)) {
            rec.outcome = TrialOutcome::LeftArena;
            break;
        }
        if (world.blocked(pos)) {
            rec.outcome = TrialOutcome::Collided;
            break;
        }
        TrialStep step;
        step.t = static_cast<double>(i) * limits.dt;
        step.x = v.x;
        step.y = v.y;
        step.heading = v.heading;
        step.f = pipeline.familiarity(world, pos, v.heading);
        const auto ctl = sip.step(step.f, mode);
        step.error = ctl.error;
        step.cmd = ctl.cmd;
        step.after_stop = rec.stopped;
        rec.trajectory.push_back(step);

        if (rec.stopped) {
            if (--post_left == 0) break;
        } else if (mode == ControlMode::FiveMBON) {
            slow = ctl.cmd.speed < limits.stop_speed ? slow + 1 : 0;
            if (slow >= hold_steps) {
                rec.outcome = TrialOutcome::Stopped;
                rec.stopped = true;
                rec.stop_time = step.t;
                post_left = post_steps;
                if (post_left == 0) break;
            }
        }
        if (i < steps || rec.stopped) v = step_vehicle(v, ctl.cmd, limits.dt, vehicle);
    }
    summarize_trial(rec, world.nest, limits);
    return rec;
}

} // namespace mbhoming
