#pragma once

// Angular homing error over network size and image resolution.
//
// For each resolution the grid views are rendered once. For each network size
// a fresh mushroom body learns every grid view under noise-free path
// integration labels, then the bearing at every grid position is estimated
// from the same views and compared with the true direction to the nest.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mbhoming/bearing.hpp"
#include "mbhoming/config.hpp"
#include "mbhoming/io.hpp"

namespace mbhoming {

struct SweepCell {
    std::size_t n_kc = 0;
    std::size_t k = 0;
    VisionConfig vision;
    std::size_t positions = 0;  // evaluated positions (outside r_nest)
    std::size_t fallbacks = 0;  // estimates from the familiarity argmin
    std::size_t no_estimate = 0;
    double mean_error_deg = std::numeric_limits<double>::quiet_NaN();
    double std_error_deg = std::numeric_limits<double>::quiet_NaN();
    double rate_hz = 0.0; // measured, not reproducible
    bool flagged = false; // nothing to evaluate

    double resolution_deg() const { return vision.resolution_deg_per_px(); }
};

struct PositionError {
    std::size_t cell = 0;
    Vec2 pos;
    double estimate = 0.0; // rad
    double truth = 0.0;    // rad
    double error_deg = 0.0;
    BearingStatus status = BearingStatus::NoEstimate;
};

struct AngularErrorReport {
    std::vector<SweepCell> cells;
    std::vector<PositionError> positions;
};

inline std::size_t sweep_k(std::size_t n_kc, double fraction) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_kc)));
    return std::max<std::size_t>(1, std::min(k, n_kc));
}

// Mean and population std over the positions of one cell that got an estimate.
inline void aggregate_cell(SweepCell& cell, const std::vector<PositionError>& rows, std::size_t index) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    cell.fallbacks = cell.no_estimate = 0;
    for (const auto& r : rows) {
        if (r.cell != index) continue;
        if (r.status == BearingStatus::NoEstimate) {
            ++cell.no_estimate;
            continue;
        }
        if (r.status == BearingStatus::Fallback) ++cell.fallbacks;
        sum += r.error_deg;
        sq += r.error_deg * r.error_deg;
        ++n;
    }
    cell.positions = n;
    cell.flagged = n == 0;
    if (n == 0) {
        cell.mean_error_deg = cell.std_error_deg = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    cell.mean_error_deg = sum / static_cast<double>(n);
    cell.std_error_deg = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - cell.mean_error_deg * cell.mean_error_deg));
}

// Frames per second of process -> encode -> five familiarities -> control on
// a fixed pre-rendered view. Rendering stands in for the camera and is not timed.
inline double measure_control_rate(const MushroomBody& mb, const VisionConfig& vc, const PanoramicView& view,
                                   std::size_t frames, const RunConfig& cfg) {
    if (frames == 0) return 0.0;
    SteeringState st;
    st.gains = cfg.gains;
    st.dt = cfg.trial.dt;
    st.max_steer = cfg.vehicle.max_steer;
    SipController sip(st, cfg.vehicle.v_max, cfg.throttle_alpha);
    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < frames; ++i) {
        const auto f = mb.readout(mb.encode(process(view, vc)));
        sink += sip.step(f, ControlMode::FiveMBON).cmd.steer;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    volatile double keep = sink;
    (void)keep;
    return secs > 0.0 ? static_cast<double>(frames) / secs : std::numeric_limits<double>::infinity();
}

inline AngularErrorReport table1_sweep(const RunConfig& cfg, const World& world) {
    AngularErrorReport report;
    const auto& sp = cfg.sim;
    for (const auto& vc : cfg.sweep.resolutions) {
        vc.validate();
        if (cfg.render.width < vc.thumb_w || cfg.render.height < vc.thumb_h) {
            throw ConfigError("sweep: render size smaller than thumbnail " + std::to_string(vc.thumb_w) + "x" +
                              std::to_string(vc.thumb_h));
        }
        const auto grid = grid_sample(world, sp.extent, sp.spacing, sp.orientations);
        std::vector<std::vector<PNVector>> fans;
        fans.reserve(grid.nodes.size());
        for (const auto& p : grid.nodes) fans.push_back(orientation_fan(cfg.render, vc, world, p, sp.orientations));

        for (const auto n_kc : cfg.sweep.n_kc) {
            NetworkConfig net = cfg.network;
            net.n_kc = n_kc;
            net.k = sweep_k(n_kc, cfg.sweep.k_fraction);
            MushroomBody mb(vc.pn_count(), net, cfg.seeds.net);

            std::vector<std::vector<HemisphereCodes>> codes(grid.nodes.size());
            for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
                const Vec2 p = grid.nodes[i];
                codes[i].reserve(sp.orientations);
                for (std::size_t j = 0; j < sp.orientations; ++j) {
                    auto c = mb.encode(fans[i][j]);
                    const auto hv = homing_vector({p.x, p.y, grid.heading(j), 0.0}, world.nest);
                    mb.learn(teaching_signal(hv, cfg.r_nest), c);
                    codes[i].push_back(std::move(c));
                }
            }

            const std::size_t index = report.cells.size();
            const bool trained = !lateral_banks_empty(mb.bank());
            for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
                const Vec2 p = grid.nodes[i];
                const Vec2 d = world.nest - p;
                if (d.norm() <= cfg.r_nest) continue;
                PositionError row;
                row.cell = index;
                row.pos = p;
                row.truth = std::atan2(d.y, d.x);
                if (trained) {
                    std::vector<FamiliarityReadout> r;
                    r.reserve(codes[i].size());
                    for (const auto& c : codes[i]) r.push_back(mb.readout(c));
                    const auto est = estimate_from_readouts(r);
                    row.status = est.status;
                    row.estimate = est.bearing;
                    row.error_deg = rad_to_deg(angle_distance(est.bearing, row.truth));
                }
                report.positions.push_back(row);
            }

            SweepCell cell;
            cell.n_kc = n_kc;
            cell.k = net.k;
            cell.vision = vc;
            aggregate_cell(cell, report.positions, index);
            const Vec2 probe = grid.nodes.empty() ? world.nest : grid.nodes.front();
            if (!world.blocked(probe)) {
                cell.rate_hz = measure_control_rate(mb, vc, render_panorama(world, probe, 0.0, cfg.render),
                                                    cfg.sweep.rate_frames, cfg);
            }
            report.cells.push_back(cell);
        }
    }
    return report;
}

inline std::string sweep_cells_csv(const AngularErrorReport& r) {
    Csv csv{"n_kc", "k", "thumb_w", "thumb_h", "deg_per_px", "positions", "fallbacks", "no_estimate",
            "mean_error_deg", "std_error_deg", "rate_hz", "flagged"};
    for (const auto& c : r.cells) {
        csv << c.n_kc << c.k << c.vision.thumb_w << c.vision.thumb_h << c.resolution_deg() << c.positions
            << c.fallbacks << c.no_estimate << c.mean_error_deg << c.std_error_deg << c.rate_hz << c.flagged;
    }
    return csv.str();
}

inline std::string sweep_positions_csv(const AngularErrorReport& r) {
    Csv csv{"cell", "x", "y", "estimate_rad", "truth_rad", "error_deg", "status"};
    for (const auto& p : r.positions) {
        csv << p.cell << p.pos.x << p.pos.y << p.estimate << p.truth << p.error_deg << to_string(p.status);
    }
    return csv.str();
}

} // namespace mbhoming
