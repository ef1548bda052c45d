#pragma once

// Scripted learning walks and the learning loop that runs them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mbhoming/agent.hpp"
#include "mbhoming/angles.hpp"
#include "mbhoming/error.hpp"
#include "mbhoming/path_integrator.hpp"
#include "mbhoming/random.hpp"
#include "mbhoming/vehicle.hpp"

namespace mbhoming {

enum class OrbitDirection { CCW, CW };

// Breakpoint of a piecewise-linear radius profile.
struct RadiusKnot {
    double t = 0.0; // s
    double r = 0.0; // m

    friend bool operator==(const RadiusKnot&, const RadiusKnot&) = default;
};

struct OrbitWalk {
    OrbitDirection direction = OrbitDirection::CCW;
    std::vector<RadiusKnot> radius; // held constant after the last knot
    double duration = 94.0;         // s
    double speed = 0.8;             // m/s
    double start_angle = 0.0;       // polar angle of the start point around the nest

    double radius_at(double t) const {
        if (radius.empty()) throw ConfigError("orbit: empty radius profile");
        if (t <= radius.front().t) return radius.front().r;
        for (std::size_t i = 1; i < radius.size(); ++i) {
            if (t <= radius[i].t) {
                const auto& a = radius[i - 1];
                const auto& b = radius[i];
                return a.r + (b.r - a.r) * (t - a.t) / (b.t - a.t);
            }
        }
        return radius.back().r;
    }
};

struct RandomWalk {
    double max_radius = 8.0;    // m from the nest
    double duration = 352.5;    // s
    double speed = 0.8;         // m/s
    double steer_sigma = 0.2;   // rad, stationary spread of the steering process
    double steer_tau = 1.5;     // s, correlation time of the steering process
    std::uint64_t seed = 0;
    Vec2 start{0.0, 0.0};       // relative to the nest
    double start_heading = 0.0;
};

struct NestRotation {
    std::size_t views = 360;
    double start_heading = 0.0;
};

using WalkScript = std::variant<OrbitWalk, RandomWalk, NestRotation>;

// Ground-truth pose stream sampled every dt.
inline std::vector<LocalPose> walk_poses(const WalkScript& script, Vec2 nest, double dt,
                                         const VehicleParams& vehicle = {}) {
    std::vector<LocalPose> out;
    if (const auto* orbit = std::get_if<OrbitWalk>(&script)) {
        const double sign = orbit->direction == OrbitDirection::CCW ? 1.0 : -1.0;
        double phi = orbit->start_angle;
        const auto steps = static_cast<std::size_t>(std::llround(orbit->duration / dt));
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double r = orbit->radius_at(t);
            const double dr = (orbit->radius_at(t + dt) - r) / dt;
            const double tangential = std::sqrt(std::max(0.0, orbit->speed * orbit->speed - dr * dr));
            const Vec2 radial{std::cos(phi), std::sin(phi)};
            const Vec2 tangent{-sign * radial.y, sign * radial.x};
            const Vec2 vel = dr * radial + tangential * tangent;
            out.push_back({nest.x + r * radial.x, nest.y + r * radial.y, std::atan2(vel.y, vel.x), t});
            phi += sign * tangential * dt / r;
        }
    } else if (const auto* rw = std::get_if<RandomWalk>(&script)) {
        Rng rng(rw->seed);
        // Learning walks are driven by hand, so the walk speed is not capped by
        // the autonomous speed limit.
        VehicleParams hand = vehicle;
        hand.v_max = std::max(vehicle.v_max, rw->speed);
        VehicleState s{nest.x + rw->start.x, nest.y + rw->start.y, rw->start_heading, rw->speed, 0.0};
        double wander = 0.0;
        const double decay = std::exp(-dt / rw->steer_tau);
        const double kick = rw->steer_sigma * std::sqrt(1.0 - decay * decay);
        const auto steps = static_cast<std::size_t>(std::llround(rw->duration / dt));
        for (std::size_t i = 0; i < steps; ++i) {
            out.push_back({s.x, s.y, s.heading, static_cast<double>(i) * dt});
            wander = decay * wander + kick * rng.normal();
            double steer = wander;
            const Vec2 to_nest{nest.x - s.x, nest.y - s.y};
            const double r = to_nest.norm();
            if (r > 0.8 * rw->max_radius) {
                // Turn back toward the nest, harder the closer to the bound.
                const double bearing = wrap_angle(std::atan2(to_nest.y, to_nest.x) - s.heading);
                const double urgency = std::min(1.0, (r - 0.8 * rw->max_radius) / (0.2 * rw->max_radius));
                if (std::abs(bearing) > deg_to_rad(20.0)) {
                    steer = (1.0 - urgency) * wander - urgency * (bearing > 0 ? 1.0 : -1.0) * vehicle.max_steer;
                }
            }
            s = step_vehicle(s, {steer, rw->speed}, dt, hand);
        }
    } else {
        const auto& rot = std::get<NestRotation>(script);
        for (std::size_t i = 0; i < rot.views; ++i) {
            const double h = rot.start_heading + kTwoPi * static_cast<double>(i) / static_cast<double>(rot.views);
            out.push_back({nest.x, nest.y, wrap_angle(h), static_cast<double>(i) * dt});
        }
    }
    return out;
}

// How views get their category.
struct FixedLabel {
    TeachingSignal signal;
};
struct PILabel {
    PINoiseModel noise;
    double r_nest = kDefaultNestRadius;
    HeadingSource heading_source = HeadingSource::Reported;
    double min_move = kDefaultMinMove;
};
using LabelSource = std::variant<FixedLabel, PILabel>;

struct WalkLogRow {
    double t = 0.0;
    double x = 0.0, y = 0.0, heading = 0.0;
    double theta_n_true = 0.0;
    double r_true = 0.0;
    std::optional<TeachingSignal> label; // nullopt: no teaching signal yet, not learned
    TeachingSignal truth = TeachingSignal::Left;
    std::size_t depressed = 0; // synapses changed by this view; 0 = already familiar

    bool learned() const { return label && depressed > 0; }
};

struct FixLogRow {
    GeoFix geo;
    PathIntegrator::Output out;
};

struct WalkLog {
    std::vector<WalkLogRow> views;
    std::vector<FixLogRow> fixes;
    bool aborted = false;

    // Views that changed the memory. Frames whose code was already fully
    // familiar to the labelled bank leave it untouched and do not count.
    std::size_t learned(TeachingSignal s) const {
        std::size_t n = 0;
        for (const auto& v : views) n += (v.learned() && *v.label == s) ? 1 : 0;
        return n;
    }
    std::size_t learned() const {
        std::size_t n = 0;
        for (const auto& v : views) n += v.learned() ? 1 : 0;
        return n;
    }
    std::size_t labelled() const {
        std::size_t n = 0;
        for (const auto& v : views) n += v.label ? 1 : 0;
        return n;
    }
};

struct WalkTiming {
    double vision_dt = 0.125;
    GeoFix origin{43.234535, 5.443509, 0.0};

    friend bool operator==(const WalkTiming&, const WalkTiming&) = default;
};

// Drives the script, labelling every vision frame with the most recent
// teaching signal and learning it into the matching MBONs. Stops early (with
// `aborted` set) if the path leaves the arena or enters a landmark.
inline WalkLog run_learning_walk(const World& world, const WalkScript& script, VisualPipeline& pipeline,
                                 const LabelSource& labels, const WalkTiming& timing = {},
                                 const VehicleParams& vehicle = {}) {
    const auto poses = walk_poses(script, world.nest, timing.vision_dt, vehicle);
    WalkLog log;

    std::optional<NoisyFixStream> stream;
    std::optional<PathIntegrator> pi;
    double r_nest = kDefaultNestRadius;
    if (const auto* p = std::get_if<PILabel>(&labels)) {
        stream.emplace(p->noise, timing.origin);
        PathIntegratorConfig cfg;
        cfg.origin = timing.origin;
        cfg.nest = world.nest;
        cfg.r_nest = p->r_nest;
        cfg.heading_source = p->heading_source;
        cfg.min_move = p->min_move;
        pi.emplace(cfg);
        r_nest = p->r_nest;
    }

    std::optional<TeachingSignal> held;
    if (const auto* f = std::get_if<FixedLabel>(&labels)) held = f->signal;

    for (const auto& pose : poses) {
        if (!world.in_arena(pose.position()) || world.blocked(pose.position())) {
            log.aborted = true;
            break;
        }
        if (stream) {
            if (auto fix = stream->push(pose)) {
                const auto out = pi->update(*fix);
                if (out.valid) held = out.signal;
                log.fixes.push_back({fix->geo, out});
            }
        }
        WalkLogRow row;
        row.t = pose.t;
        row.x = pose.x;
        row.y = pose.y;
        row.heading = pose.heading;
        const auto hv = homing_vector(pose, world.nest);
        row.theta_n_true = hv.theta_n;
        row.r_true = hv.r;
        row.truth = teaching_signal(hv, r_nest);
        row.label = held;
        if (held) {
            const auto codes = pipeline.perceive(world, pose.position(), pose.heading);
            row.depressed = pipeline.mushroom_body().learn(*held, codes);
        }
        log.views.push_back(row);
    }
    return log;
}

} // namespace mbhoming
