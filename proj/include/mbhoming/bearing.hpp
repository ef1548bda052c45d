#pragma once

// Grid sampling and per-position home-bearing estimates.
//
// At a position the agent is turned through `n` evenly spaced headings and the
// lateral error e(theta) of the steering stage is recorded. The controller
// turns left while e < 0 and right while e > 0, so the heading it settles on
// is where e crosses zero from negative to positive as theta increases. That
// crossing is the estimated home bearing.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mbhoming/agent.hpp"
#include "mbhoming/angles.hpp"
#include "mbhoming/error.hpp"
#include "mbhoming/sip_controller.hpp"

namespace mbhoming {

struct GridDataset {
    std::vector<Vec2> nodes;
    std::size_t orientations = 36;
    double spacing = 0.2;
    double extent = 5.0;

    std::size_t size() const { return nodes.size() * orientations; }
    double heading(std::size_t j) const { return kTwoPi * static_cast<double>(j) / static_cast<double>(orientations); }
};

// Square grid of side `extent` centred on the nest, nodes every `spacing`
// metres; nodes inside landmarks are dropped. Views are rendered on demand.
inline GridDataset grid_sample(const World& world, double extent, double spacing, std::size_t orientations) {
    if (!(spacing > 0.0)) throw ConfigError("grid_sample: spacing must be > 0");
    if (!(extent >= 0.0)) throw ConfigError("grid_sample: extent must be >= 0");
    if (orientations == 0) throw ConfigError("grid_sample: orientations must be >= 1");
    GridDataset ds;
    ds.orientations = orientations;
    ds.spacing = spacing;
    ds.extent = extent;
    const auto per_axis = static_cast<std::size_t>(std::floor(extent / spacing + 1e-9)) + 1;
    const double x0 = world.nest.x - 0.5 * static_cast<double>(per_axis - 1) * spacing;
    const double y0 = world.nest.y - 0.5 * static_cast<double>(per_axis - 1) * spacing;
    for (std::size_t iy = 0; iy < per_axis; ++iy) {
        for (std::size_t ix = 0; ix < per_axis; ++ix) {
            const Vec2 p{x0 + static_cast<double>(ix) * spacing, y0 + static_cast<double>(iy) * spacing};
            if (!world.blocked(p)) ds.nodes.push_back(p);
        }
    }
    return ds;
}

// PN vectors for `n` evenly spaced headings at one position. When the render
// width is a multiple of n the panorama is rendered and blurred once and then
// rotated, which is exact because both stages commute with column rotation.
inline std::vector<PNVector> orientation_fan(const RenderConfig& rc, const VisionConfig& vc, const World& world,
                                             Vec2 pos, std::size_t n) {
    if (n == 0) throw ConfigError("orientation_fan: n must be >= 1");
    std::vector<PNVector> out;
    out.reserve(n);
    if (rc.width % n == 0) {
        const auto blurred = gaussian_blur(render_panorama(world, pos, 0.0, rc), vc.gaussian_sigma);
        const auto step = static_cast<std::ptrdiff_t>(rc.width / n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto edges =
                sobel_edges(downsample(blurred.rotated(static_cast<std::ptrdiff_t>(j) * step), vc.thumb_w, vc.thumb_h));
            out.emplace_back(edges.pixels().begin(), edges.pixels().end());
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double h = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
            out.push_back(process(render_panorama(world, pos, h, rc), vc));
        }
    }
    return out;
}

inline std::vector<PNVector> orientation_fan(const VisualPipeline& pipe, const World& world, Vec2 pos,
                                             std::size_t n) {
    return orientation_fan(pipe.render_config(), pipe.vision_config(), world, pos, n);
}

enum class BearingStatus { Crossing, Fallback, NoEstimate };

inline constexpr std::string_view to_string(BearingStatus s) {
    switch (s) {
    case BearingStatus::Crossing: return "crossing";
    case BearingStatus::Fallback: return "fallback";
    case BearingStatus::NoEstimate: return "none";
    }
    return "?";
}

struct BearingEstimate {
    BearingStatus status = BearingStatus::NoEstimate;
    double bearing = 0.0;    // rad, world frame, wrapped
    double confidence = 0.0; // 1 - combined lateral familiarity at the estimate
};

// Mean of the four lateral MBONs.
inline double combined_familiarity(const FamiliarityReadout& f) {
    return 0.25 * (f[MBONId::LeftA] + f[MBONId::RightA] + f[MBONId::LeftB] + f[MBONId::RightB]);
}

// `error[j]` and `combined[j]` are sampled at heading 2*pi*j/n.
inline BearingEstimate estimate_bearing_from_samples(std::span<const double> error, std::span<const double> combined) {
    const std::size_t n = error.size();
    if (n == 0 || combined.size() != n) throw InputError("estimate_bearing: sample count mismatch");
    const double step = kTwoPi / static_cast<double>(n);

    BearingEstimate best;
    double best_fam = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (!(error[j] < 0.0)) continue;
        // Skip exact zeros to find the next signed sample.
        std::size_t m = 1;
        while (m < n && error[(j + m) % n] == 0.0) ++m;
        if (m == n) continue;
        const std::size_t k = (j + m) % n;
        if (!(error[k] > 0.0)) continue;
        const double frac = error[j] / (error[j] - error[k]);
        const double fam = 0.5 * (combined[j] + combined[k]);
        if (fam < best_fam) {
            best_fam = fam;
            best.status = BearingStatus::Crossing;
            best.bearing = wrap_angle((static_cast<double>(j) + frac * static_cast<double>(m)) * step);
            best.confidence = 1.0 - fam;
        }
    }
    if (best.status == BearingStatus::Crossing) return best;

    std::size_t arg = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (combined[j] < combined[arg]) arg = j;
    }
    best.status = BearingStatus::Fallback;
    best.bearing = wrap_angle(static_cast<double>(arg) * step);
    best.confidence = 1.0 - combined[arg];
    return best;
}

inline bool lateral_banks_empty(const MBONBank& bank) {
    return bank.learned_count(MBONId::LeftA) + bank.learned_count(MBONId::RightA) +
               bank.learned_count(MBONId::LeftB) + bank.learned_count(MBONId::RightB) ==
           0;
}

inline BearingEstimate estimate_from_readouts(std::span<const FamiliarityReadout> readouts) {
    std::vector<double> e(readouts.size()), c(readouts.size());
    for (std::size_t j = 0; j < readouts.size(); ++j) {
        e[j] = lateral_error(readouts[j]);
        c[j] = combined_familiarity(readouts[j]);
    }
    return estimate_bearing_from_samples(e, c);
}

inline BearingEstimate estimate_home_bearing(const VisualPipeline& pipe, const World& world, Vec2 pos,
                                             std::size_t orientations) {
    if (orientations == 0) throw ConfigError("estimate_home_bearing: orientations must be >= 1");
    if (lateral_banks_empty(pipe.mushroom_body().bank())) return {};
    std::vector<FamiliarityReadout> readouts;
    readouts.reserve(orientations);
    for (const auto& pn : orientation_fan(pipe, world, pos, orientations)) {
        readouts.push_back(pipe.mushroom_body().readout(pipe.mushroom_body().encode(pn)));
    }
    return estimate_from_readouts(readouts);
}

struct BearingMapCell {
    Vec2 pos;
    BearingEstimate estimate;
    double true_bearing = 0.0;
};

struct BearingMap {
    double spacing = 0.0;
    std::vector<BearingMapCell> cells;
};

inline BearingMap build_bearing_map(const VisualPipeline& pipe, const World& world, double extent, double spacing,
                                    std::size_t orientations) {
    const auto grid = grid_sample(world, extent, spacing, orientations);
    BearingMap map;
    map.spacing = spacing;
    for (const auto& p : grid.nodes) {
        const Vec2 d = world.nest - p;
        map.cells.push_back({p, estimate_home_bearing(pipe, world, p, orientations), std::atan2(d.y, d.x)});
    }
    return map;
}

struct Streamline {
    std::vector<Vec2> points;
    bool reached = false;
};

// Follows the estimated bearing field in fixed steps until within
// `goal_radius` of the nest, outside `bound` (half-width around the nest), or
// out of steps.
inline Streamline integrate_streamline(const VisualPipeline& pipe, const World& world, Vec2 start,
                                       std::size_t orientations, double step = 0.1, double goal_radius = 0.5,
                                       double bound = 3.0, std::size_t max_steps = 200) {
    Streamline s;
    Vec2 p = start;
    s.points.push_back(p);
    for (std::size_t i = 0; i < max_steps; ++i) {
        if ((p - world.nest).norm() <= goal_radius) {
            s.reached = true;
            break;
        }
        if (std::abs(p.x - world.nest.x) > bound || std::abs(p.y - world.nest.y) > bound || world.blocked(p)) break;
        const auto est = estimate_home_bearing(pipe, world, p, orientations);
        if (est.status == BearingStatus::NoEstimate) break;
        p = p + step * Vec2{std::cos(est.bearing), std::sin(est.bearing)};
        s.points.push_back(p);
    }
    if (!s.reached && (p - world.nest).norm() <= goal_radius) s.reached = true;
    return s;
}

} // namespace mbhoming
