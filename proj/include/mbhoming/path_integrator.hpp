#pragma once

// GPS-emulated path integration. Only used as a teaching signal while
// learning; homing itself never consults it.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mbhoming/angles.hpp"
#include "mbhoming/error.hpp"
#include "mbhoming/random.hpp"
#include "mbhoming/teaching_signal.hpp"

namespace mbhoming {

inline constexpr double kEarthRadius = 6371000.0;

struct GeoFix {
    double lat = 0.0; // degrees
    double lon = 0.0; // degrees
    double t = 0.0;   // seconds

    friend bool operator==(const GeoFix&, const GeoFix&) = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
    double norm() const { return std::hypot(x, y); }
};

// x east, y north, heading CCW from east.
struct LocalPose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double t = 0.0;

    Vec2 position() const { return {x, y}; }
};

// theta_n > 0: nest on the left of the heading.
struct HomingVector {
    double theta_n = 0.0;
    double r = 0.0;
};

struct PINoiseModel {
    double pos_sigma = 0.014;              // m, per axis
    double heading_sigma = deg_to_rad(5.0); // rad
    double update_rate = 2.0;              // Hz
    std::uint64_t seed = 0;

    static PINoiseModel noiseless() { return {0.0, 0.0, 2.0, 0}; }

    friend bool operator==(const PINoiseModel&, const PINoiseModel&) = default;
};

inline constexpr double kWorkingAreaRadius = 1000.0;

// Equirectangular projection about `origin`, scaled at the mean latitude of
// the two points. Distances agree with the great-circle distance to well under
// a millimetre over the ~100 m areas the robot works in.
inline Vec2 geo_to_local(const GeoFix& fix, const GeoFix& origin) {
    const double mid = deg_to_rad(0.5 * (fix.lat + origin.lat));
    const double dlat = deg_to_rad(fix.lat - origin.lat);
    const double dlon = deg_to_rad(fix.lon - origin.lon);
    const Vec2 p{kEarthRadius * std::cos(mid) * dlon, kEarthRadius * dlat};
    if (p.norm() > kWorkingAreaRadius) {
        throw RangeError("geo_to_local: fix is " + std::to_string(p.norm()) + " m from origin (limit 1 km)");
    }
    return p;
}

// Inverse of geo_to_local.
inline GeoFix local_to_geo(Vec2 p, const GeoFix& origin, double t = 0.0) {
    const double lat = origin.lat + rad_to_deg(p.y / kEarthRadius);
    const double mid = deg_to_rad(0.5 * (lat + origin.lat));
    return {lat, origin.lon + rad_to_deg(p.x / (kEarthRadius * std::cos(mid))), t};
}

inline constexpr double kDefaultMinMove = 0.05;

// nullopt when the displacement is too small to define a direction.
inline std::optional<double> heading_from_fixes(Vec2 prev, Vec2 next, double min_move = kDefaultMinMove) {
    const Vec2 d = next - prev;
    if (d.norm() < min_move || d.norm() == 0.0) return std::nullopt;
    return wrap_angle(std::atan2(d.y, d.x));
}

inline HomingVector homing_vector(const LocalPose& pose, Vec2 nest) {
    const Vec2 d = nest - pose.position();
    const double r = d.norm();
    const double theta = r == 0.0 ? 0.0 : wrap_angle(std::atan2(d.y, d.x) - pose.heading);
    return {theta, r};
}

inline constexpr double kDefaultNestRadius = 0.3;

inline TeachingSignal teaching_signal(const HomingVector& hv, double r_nest = kDefaultNestRadius) {
    if (hv.r <= r_nest) return TeachingSignal::Nest;
    return hv.theta_n >= 0.0 ? TeachingSignal::Left : TeachingSignal::Right;
}

// One emulated receiver output.
struct PIFix {
    GeoFix geo;
    LocalPose pose; // noisy position and reported heading
};

// Decimates a dense pose stream to the receiver rate and corrupts it.
// Stateful: feed poses in time order.
class NoisyFixStream {
public:
    NoisyFixStream(const PINoiseModel& noise, const GeoFix& origin)
        : noise_(noise), origin_(origin), rng_(noise.seed) {
        if (noise.pos_sigma < 0 || noise.heading_sigma < 0 || !(noise.update_rate > 0)) {
            throw ConfigError("PINoiseModel: sigmas must be >= 0 and update_rate > 0");
        }
    }

    std::optional<PIFix> push(const LocalPose& truth) {
        const double period = 1.0 / noise_.update_rate;
        // Tolerance for accumulated floating point in pose timestamps.
        const double eps = 1e-9 * std::max(1.0, std::abs(truth.t));
        if (started_ && truth.t + eps < next_due_) return std::nullopt;
        if (!started_) {
            started_ = true;
            next_due_ = truth.t;
        }
        while (next_due_ <= truth.t + eps) next_due_ += period;

        LocalPose noisy = truth;
        noisy.x += noise_.pos_sigma * rng_.normal();
        noisy.y += noise_.pos_sigma * rng_.normal();
        noisy.heading = wrap_angle(truth.heading + noise_.heading_sigma * rng_.normal());
        return PIFix{local_to_geo(noisy.position(), origin_, truth.t), noisy};
    }

private:
    PINoiseModel noise_;
    GeoFix origin_;
    Rng rng_;
    bool started_ = false;
    double next_due_ = 0.0;
};

inline std::vector<PIFix> noisy_fix_stream(std::span<const LocalPose> truth, const PINoiseModel& noise,
                                           const GeoFix& origin = {}) {
    NoisyFixStream stream(noise, origin);
    std::vector<PIFix> out;
    for (const auto& p : truth) {
        if (auto f = stream.push(p)) out.push_back(*f);
    }
    return out;
}

enum class HeadingSource {
    Reported,       // receiver heading field
    Differentiated, // atan2 of successive fixes, held below min_move
};

struct PathIntegratorConfig {
    GeoFix origin;
    Vec2 nest;
    double r_nest = kDefaultNestRadius;
    HeadingSource heading_source = HeadingSource::Reported;
    double min_move = kDefaultMinMove;
};

// Turns receiver fixes into homing vectors and teaching signals.
class PathIntegrator {
public:
    struct Output {
        double t = 0.0;
        Vec2 position;
        std::optional<double> heading;
        std::optional<HomingVector> hv;
        TeachingSignal signal = TeachingSignal::Left;
        bool valid = false;
    };

    explicit PathIntegrator(const PathIntegratorConfig& cfg) : cfg_(cfg) {}

    Output update(const PIFix& fix) {
        const Vec2 pos = geo_to_local(fix.geo, cfg_.origin);
        std::optional<double> heading;
        if (cfg_.heading_source == HeadingSource::Reported) {
            heading = fix.pose.heading;
        } else {
            if (last_anchor_) {
                if (auto h = heading_from_fixes(*last_anchor_, pos, cfg_.min_move)) {
                    held_heading_ = *h;
                    last_anchor_ = pos;
                }
            } else {
                last_anchor_ = pos;
            }
            heading = held_heading_;
        }

        Output out;
        out.t = fix.geo.t;
        out.position = pos;
        out.heading = heading;
        const double r = (cfg_.nest - pos).norm();
        if (r <= cfg_.r_nest) {
            out.hv = HomingVector{0.0, r};
            out.signal = TeachingSignal::Nest;
            out.valid = true;
        } else if (heading) {
            out.hv = homing_vector(LocalPose{pos.x, pos.y, *heading, out.t}, cfg_.nest);
            out.signal = teaching_signal(*out.hv, cfg_.r_nest);
            out.valid = true;
        }
        return out;
    }

private:
    PathIntegratorConfig cfg_;
    std::optional<Vec2> last_anchor_;
    std::optional<double> held_heading_;
};

} // namespace mbhoming
