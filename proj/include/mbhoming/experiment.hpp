#pragma once

// End-to-end protocols and their on-disk artifacts.
//
//   sim   learn every view of a grid around the nest, then map the estimated
//         home bearing and integrate streamlines through it
//   exp1  one CCW and one CW orbit with fixed labels, then kidnapped trials
//   exp2  one random walk labelled by noisy path integration, then trials
//   exp3  a full turn on the nest plus the exp2 walk, then trials with the
//         nest MBON driving the throttle
//
// Artifacts are written as they become available. If a stage throws, the
// manifest still lists what was written plus the error, and the exception
// propagates to the caller.

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mbhoming/bearing.hpp"
#include "mbhoming/config.hpp"
#include "mbhoming/io.hpp"
#include "mbhoming/plots.hpp"
#include "mbhoming/sweep.hpp"
#include "mbhoming/trial.hpp"
#include "mbhoming/walks.hpp"

namespace mbhoming {

struct TrialStart {
    Vec2 pos;
    double heading = 0.0;
};

// Start i sits at angle_offset + 2 pi i / count around the nest at
// radii[i % radii.size()]; headings are uniform from the noise seed.
inline std::vector<TrialStart> trial_starts(const RunConfig& cfg, Vec2 nest) {
    std::vector<TrialStart> out;
    Rng rng(mix_seed(cfg.seeds.noise, 2));
    const auto& sp = cfg.starts;
    for (std::size_t i = 0; i < sp.count; ++i) {
        const double a = sp.angle_offset + kTwoPi * static_cast<double>(i) / static_cast<double>(sp.count);
        const double r = sp.radii[i % sp.radii.size()];
        out.push_back({{nest.x + r * std::cos(a), nest.y + r * std::sin(a)}, rng.uniform(0.0, kTwoPi)});
    }
    return out;
}

struct PurityStats {
    std::size_t checked = 0;
    std::size_t agree = 0;
    double fraction() const {
        return checked ? static_cast<double>(agree) / static_cast<double>(checked)
                       : std::numeric_limits<double>::quiet_NaN();
    }
};

// Learned views whose noise-free nest bearing is clearly to one side
// (min_deg < |theta_n| < max_deg, outside r_nest) and whose label matches it.
// Near 0 and near 180 degrees the side is ambiguous under heading noise.
inline PurityStats label_purity(const WalkLog& log, double r_nest, double min_deg = 15.0, double max_deg = 165.0) {
    PurityStats p;
    for (const auto& v : log.views) {
        if (!v.learned() || v.r_true <= r_nest) continue;
        const double a = std::abs(rad_to_deg(v.theta_n_true));
        if (a <= min_deg || a >= max_deg) continue;
        ++p.checked;
        p.agree += *v.label == v.truth ? 1 : 0;
    }
    return p;
}

// Learns all grid views with noise-free labels.
inline std::size_t learn_grid(VisualPipeline& pipe, const World& world, const SimParams& sp, double r_nest) {
    const auto grid = grid_sample(world, sp.extent, sp.spacing, sp.orientations);
    for (const auto& p : grid.nodes) {
        const auto fan = orientation_fan(pipe, world, p, sp.orientations);
        for (std::size_t j = 0; j < fan.size(); ++j) {
            const auto hv = homing_vector({p.x, p.y, grid.heading(j), 0.0}, world.nest);
            pipe.mushroom_body().learn(teaching_signal(hv, r_nest), pipe.mushroom_body().encode(fan[j]));
        }
    }
    return grid.size();
}

// Streamlines from a square lattice inside the learned grid, skipping starts
// already within the goal radius.
inline std::vector<Streamline> run_streamlines(const VisualPipeline& pipe, const World& world, const SimParams& sp) {
    std::vector<Streamline> out;
    const double half = 0.5 * sp.extent - sp.stream_margin;
    if (half < 0.0) return out;
    const auto per_axis = static_cast<std::size_t>(std::floor(2.0 * half / sp.stream_spacing + 1e-9)) + 1;
    const double start = -0.5 * static_cast<double>(per_axis - 1) * sp.stream_spacing;
    for (std::size_t iy = 0; iy < per_axis; ++iy) {
        for (std::size_t ix = 0; ix < per_axis; ++ix) {
            const Vec2 p{world.nest.x + start + static_cast<double>(ix) * sp.stream_spacing,
                         world.nest.y + start + static_cast<double>(iy) * sp.stream_spacing};
            if ((p - world.nest).norm() <= sp.stream_goal || world.blocked(p)) continue;
            out.push_back(integrate_streamline(pipe, world, p, sp.orientations, sp.stream_step, sp.stream_goal,
                                               0.5 * sp.extent + sp.stream_margin, sp.stream_max_steps));
        }
    }
    return out;
}

// A trial homes when it passes within 2x nest_radius and afterwards neither
// fails nor strays beyond `bound` from the nest.
inline bool trial_homed(const TrialRecord& t, double bound) {
    return t.arrived && !t.failed() && t.max_search_dist <= bound;
}

inline bool trial_stopped_at_nest(const TrialRecord& t, double max_dist) {
    return t.stopped && t.stayed_stopped && t.stop_dist <= max_dist;
}

struct SearchStats {
    std::size_t samples = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
};

// Pooled distance to the nest over every step from a trial's arrival to its end.
inline SearchStats search_stats(const std::vector<TrialRecord>& trials, Vec2 nest, double nest_radius) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& t : trials) {
        bool on = false;
        for (const auto& s : t.trajectory) {
            const double d = std::hypot(s.x - nest.x, s.y - nest.y);
            if (!on && d <= 2.0 * nest_radius) on = true;
            if (!on) continue;
            sum += d;
            sq += d * d;
            ++n;
        }
    }
    SearchStats st;
    st.samples = n;
    if (n) {
        st.mean = sum / static_cast<double>(n);
        st.std = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - st.mean * st.mean));
    }
    return st;
}

struct ExperimentOptions {
    bool sweep = false; // sim only: also run the resolution x network size sweep
};

struct ExperimentResult {
    World world;
    std::vector<std::pair<std::string, WalkLog>> walks;
    std::vector<TrialRecord> trials;
    std::optional<BearingMap> bearing_map;
    std::vector<Streamline> streamlines;
    std::optional<AngularErrorReport> sweep;
    std::vector<std::uint8_t> weights;
    PurityStats purity;
    double rate_hz = 0.0;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> files;
    std::vector<std::string> warnings;

    const std::string* metric(std::string_view name) const {
        for (const auto& [k, v] : summary) {
            if (k == name) return &v;
        }
        return nullptr;
    }
};

namespace detail {

class Artifacts {
public:
    Artifacts(std::filesystem::path dir, ExperimentResult& res) : dir_(std::move(dir)), res_(res) {}

    void write(const std::string& rel, std::string_view text) {
        write_file_atomic(dir_ / rel, text);
        res_.files.push_back(rel);
    }
    void write(const std::string& rel, std::span<const std::uint8_t> bytes) {
        write_file_atomic(dir_ / rel, bytes);
        res_.files.push_back(rel);
    }
    void warn(std::string w) { res_.warnings.push_back(std::move(w)); }

    void manifest(const std::string& error) {
        std::string m = "mbhoming-manifest 1\n";
        for (const auto& f : res_.files) m += "file " + f + "\n";
        for (const auto& w : res_.warnings) m += "warning " + w + "\n";
        m += error.empty() ? std::string("status ok\n") : "status error " + error + "\n";
        write_file_atomic(dir_ / "manifest.txt", m);
    }

private:
    std::filesystem::path dir_;
    ExperimentResult& res_;
};

inline void add(ExperimentResult& r, std::string key, std::string value) {
    r.summary.emplace_back(std::move(key), std::move(value));
}
inline void add(ExperimentResult& r, std::string key, double v) { add(r, std::move(key), fmt_fixed(v, 6)); }
inline void add_count(ExperimentResult& r, std::string key, std::size_t v) {
    add(r, std::move(key), std::to_string(v));
}

inline std::string walk_csv(const std::vector<std::pair<std::string, WalkLog>>& walks, const GeoFix& origin) {
    Csv csv{"walk", "t", "lat", "lon", "x", "y", "heading", "theta_n", "r", "truth", "signal", "depressed"};
    for (const auto& [name, log] : walks) {
        for (const auto& v : log.views) {
            const auto geo = local_to_geo({v.x, v.y}, origin, v.t);
            csv << name << v.t;
            csv.set_decimals(9) << geo.lat << geo.lon;
            csv.set_decimals(6) << v.x << v.y << v.heading << v.theta_n_true << v.r_true << to_string(v.truth)
                                << (v.label ? to_string(*v.label) : std::string_view("none")) << v.depressed;
        }
    }
    return csv.str();
}

inline std::string fixes_csv(const std::vector<std::pair<std::string, WalkLog>>& walks) {
    Csv csv{"walk", "t", "lat", "lon", "x", "y", "heading", "theta_n", "r", "signal", "valid"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [name, log] : walks) {
        for (const auto& f : log.fixes) {
            csv << name << f.out.t;
            csv.set_decimals(9) << f.geo.lat << f.geo.lon;
            csv.set_decimals(6) << f.out.position.x << f.out.position.y << f.out.heading.value_or(nan)
                                << (f.out.hv ? f.out.hv->theta_n : nan) << (f.out.hv ? f.out.hv->r : nan)
                                << to_string(f.out.signal) << f.out.valid;
        }
    }
    return csv.str();
}

inline std::string trials_csv(const std::vector<TrialRecord>& trials, double bound, double stop_max) {
    Csv csv{"trial", "start_x", "start_y", "start_heading", "outcome", "arrived", "homed", "min_dist",
            "mean_search_dist", "max_search_dist", "stopped", "stop_time", "stayed_stopped", "stop_dist",
            "stopped_at_nest", "duration"};
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        csv << i + 1 << t.start.x << t.start.y << t.start_heading << to_string(t.outcome) << t.arrived
            << trial_homed(t, bound) << t.min_dist_to_nest << t.mean_search_dist << t.max_search_dist << t.stopped
            << t.stop_time << t.stayed_stopped << t.stop_dist << trial_stopped_at_nest(t, stop_max) << t.duration;
    }
    return csv.str();
}

inline std::string trial_control_csv(const TrialRecord& t) {
    Csv csv{"t", "e", "steer", "f_LA", "f_RA", "f_LB", "f_RB", "f_nest", "speed"};
    for (const auto& s : t.trajectory) {
        csv << s.t << s.error << s.cmd.steer << s.f[MBONId::LeftA] << s.f[MBONId::RightA] << s.f[MBONId::LeftB]
            << s.f[MBONId::RightB] << s.f[MBONId::Nest] << s.cmd.speed;
    }
    return csv.str();
}

inline std::string trial_pose_csv(const TrialRecord& t, Vec2 nest) {
    Csv csv{"t", "x", "y", "heading", "dist", "after_stop"};
    for (const auto& s : t.trajectory) {
        csv << s.t << s.x << s.y << s.heading << std::hypot(s.x - nest.x, s.y - nest.y) << s.after_stop;
    }
    return csv.str();
}

inline std::string bearing_map_csv(const BearingMap& map) {
    Csv csv{"x", "y", "estimate_rad", "truth_rad", "error_deg", "status", "confidence"};
    for (const auto& c : map.cells) {
        const bool has = c.estimate.status != BearingStatus::NoEstimate;
        csv << c.pos.x << c.pos.y << c.estimate.bearing << c.true_bearing
            << (has ? rad_to_deg(angle_distance(c.estimate.bearing, c.true_bearing))
                    : std::numeric_limits<double>::quiet_NaN())
            << to_string(c.estimate.status) << c.estimate.confidence;
    }
    return csv.str();
}

inline std::string streamlines_csv(const std::vector<Streamline>& lines) {
    Csv csv{"line", "step", "x", "y", "reached"};
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = 0; j < lines[i].points.size(); ++j) {
            csv << i + 1 << j << lines[i].points[j].x << lines[i].points[j].y << lines[i].reached;
        }
    }
    return csv.str();
}

inline std::string summary_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
    Csv csv{"metric", "value"};
    for (const auto& [k, v] : rows) csv << k << v;
    return csv.str();
}

inline World load_world(const RunConfig& cfg) {
    if (cfg.world_file.empty()) return generate_world(cfg.seeds.world, cfg.world);
    std::ifstream in(cfg.world_file);
    if (!in) throw IoError("cannot open world file " + cfg.world_file);
    return read_world(in);
}

inline double bearing_map_mean_error(const BearingMap& map, Vec2 nest, double r_nest, std::size_t& n,
                                     std::size_t& fallbacks) {
    double sum = 0.0;
    n = fallbacks = 0;
    for (const auto& c : map.cells) {
        if ((c.pos - nest).norm() <= r_nest || c.estimate.status == BearingStatus::NoEstimate) continue;
        sum += rad_to_deg(angle_distance(c.estimate.bearing, c.true_bearing));
        fallbacks += c.estimate.status == BearingStatus::Fallback ? 1 : 0;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

inline void emit_trial_plots(Artifacts& out, const ExperimentResult& res, const RunConfig& cfg) {
    if (res.trials.empty()) {
        out.warn("no trials: trajectory, search and speed plots skipped");
        return;
    }
    out.write("plots/trajectories.svg", trajectories_svg(res.trials, res.world, cfg.trial.nest_radius));
    const auto ss = search_stats(res.trials, res.world.nest, cfg.trial.nest_radius);
    if (ss.samples == 0) {
        out.warn("no trial reached the nest: search histogram skipped");
    } else {
        out.write("plots/search_polar.svg", search_polar_svg(res.trials, res.world, cfg.trial.nest_radius));
    }
    out.write("plots/speed.svg", speed_svg(res.trials, cfg.vehicle.v_max));
}

} // namespace detail

inline ExperimentResult run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                       const ExperimentOptions& opt = {}) {
    ExperimentResult res;
    detail::Artifacts out(out_dir, res);
    try {
        cfg.validate();
        out.write("config.txt", config_to_string(cfg));
        res.world = detail::load_world(cfg);
        res.world.validate();
        {
            std::ostringstream ws;
            write_world(ws, res.world);
            out.write("world.txt", ws.str());
        }
        const World& world = res.world;

        VisualPipeline pipe(cfg.render, cfg.vision, cfg.network, cfg.seeds.net);
        PILabel pi_label{cfg.noise_model(), cfg.r_nest, cfg.heading_source, cfg.min_move};

        detail::add(res, "experiment", std::string(to_string(cfg.experiment)));
        detail::add(res, "mode", std::string(to_string(cfg.mode)));

        // Learning.
        switch (cfg.experiment) {
        case ExperimentId::Sim:
            detail::add_count(res, "grid_views", learn_grid(pipe, world, cfg.sim, cfg.r_nest));
            break;
        case ExperimentId::Exp1: {
            OrbitWalk ccw{OrbitDirection::CCW, cfg.orbit.radius, cfg.orbit.ccw_duration, cfg.vehicle.v_max, 0.0};
            OrbitWalk cw{OrbitDirection::CW, cfg.orbit.radius, cfg.orbit.cw_duration, cfg.vehicle.v_max, 0.0};
            res.walks.emplace_back("orbit_ccw", run_learning_walk(world, ccw, pipe, FixedLabel{TeachingSignal::Left},
                                                                  cfg.timing, cfg.vehicle));
            res.walks.emplace_back("orbit_cw", run_learning_walk(world, cw, pipe, FixedLabel{TeachingSignal::Right},
                                                                 cfg.timing, cfg.vehicle));
            break;
        }
        case ExperimentId::Exp2:
        case ExperimentId::Exp3: {
            if (cfg.experiment == ExperimentId::Exp3) {
                NestRotation rot{cfg.nest_views, 0.0};
                res.walks.emplace_back("nest_turn", run_learning_walk(world, rot, pipe, pi_label, cfg.timing,
                                                                      cfg.vehicle));
            }
            RandomWalk rw;
            rw.max_radius = cfg.walk.max_radius;
            rw.duration = cfg.walk.duration;
            rw.speed = cfg.walk.speed;
            rw.steer_sigma = cfg.walk.steer_sigma;
            rw.steer_tau = cfg.walk.steer_tau;
            rw.seed = mix_seed(cfg.seeds.noise, 3);
            rw.start = {cfg.walk.start_offset, 0.0};
            res.walks.emplace_back("random_walk",
                                   run_learning_walk(world, rw, pipe, pi_label, cfg.timing, cfg.vehicle));
            break;
        }
        }

        for (const auto& [name, log] : res.walks) {
            if (log.aborted) out.warn("walk " + name + " stopped early: path left the arena or hit a landmark");
            detail::add_count(res, "walk." + name + ".views", log.views.size());
            detail::add_count(res, "walk." + name + ".labelled", log.labelled());
            detail::add_count(res, "walk." + name + ".learned", log.learned());
            for (const auto s : {TeachingSignal::Left, TeachingSignal::Right, TeachingSignal::Nest}) {
                detail::add_count(res, "walk." + name + ".learned_" + std::string(to_string(s)), log.learned(s));
            }
        }
        if (!res.walks.empty()) {
            out.write("walk.csv", detail::walk_csv(res.walks, cfg.timing.origin));
            out.write("fixes.csv", detail::fixes_csv(res.walks));
        }
        for (const auto& [name, log] : res.walks) {
            if (name != "random_walk") continue;
            res.purity = label_purity(log, cfg.r_nest);
            detail::add_count(res, "label_purity_views", res.purity.checked);
            detail::add(res, "label_purity", res.purity.fraction());
        }

        res.weights = serialize(pipe.mushroom_body().bank());
        out.write("weights.mbw", res.weights);
        detail::add_count(res, "weights_bytes", res.weights.size());
        for (const auto id : kAllMbons) {
            detail::add_count(res, "learned_kc_" + std::string(to_string(id)),
                              pipe.mushroom_body().bank().learned_count(id));
        }

        {
            // Timed on the first trial start, or the nest for the simulation.
            const auto starts = trial_starts(cfg, world.nest);
            Vec2 probe = starts.empty() ? world.nest : starts.front().pos;
            if (world.blocked(probe)) probe = world.nest;
            res.rate_hz = measure_control_rate(pipe.mushroom_body(), cfg.vision,
                                               pipe.look(world, probe, 0.0), cfg.sweep.rate_frames, cfg);
            Csv timing{"metric", "value"};
            timing << "control_rate_hz" << res.rate_hz << "frames" << cfg.sweep.rate_frames;
            out.write("timing.csv", timing.str());
        }

        if (cfg.experiment == ExperimentId::Sim) {
            res.bearing_map = build_bearing_map(pipe, world, cfg.sim.extent, cfg.sim.spacing, cfg.sim.orientations);
            out.write("bearing_map.csv", detail::bearing_map_csv(*res.bearing_map));
            std::size_t n = 0, fb = 0;
            detail::add(res, "bearing_mean_error_deg",
                        detail::bearing_map_mean_error(*res.bearing_map, world.nest, cfg.r_nest, n, fb));
            detail::add_count(res, "bearing_positions", n);
            detail::add_count(res, "bearing_fallbacks", fb);
            out.write("plots/bearing_map.svg", bearing_quiver_svg(*res.bearing_map, world, cfg.sim.extent));

            res.streamlines = run_streamlines(pipe, world, cfg.sim);
            std::size_t reached = 0;
            for (const auto& s : res.streamlines) reached += s.reached ? 1 : 0;
            detail::add_count(res, "streamlines", res.streamlines.size());
            detail::add_count(res, "streamlines_reached", reached);
            out.write("streamlines.csv", detail::streamlines_csv(res.streamlines));
            if (res.streamlines.empty()) {
                out.warn("no streamline starts inside the grid: streamline plot skipped");
            } else {
                out.write("plots/streamlines.svg",
                          streamlines_svg(res.streamlines, world, 0.5 * cfg.sim.extent + cfg.sim.stream_margin));
            }
            if (opt.sweep) {
                res.sweep = table1_sweep(cfg, world);
                out.write("table1.csv", sweep_cells_csv(*res.sweep));
                out.write("table1_positions.csv", sweep_positions_csv(*res.sweep));
            }
        } else {
            double bound = 0.0;
            for (const double r : cfg.starts.radii) bound = std::max(bound, r);
            const double stop_max = 1.2;
            for (const auto& s : trial_starts(cfg, world.nest)) {
                if (!world.in_arena(s.pos)) {
                    out.warn("start outside the arena skipped");
                    continue;
                }
                res.trials.push_back(run_homing_trial(world, pipe, s.pos, s.heading, cfg.mode, cfg.trial,
                                                      cfg.vehicle, cfg.gains, cfg.throttle_alpha));
            }
            for (std::size_t i = 0; i < res.trials.size(); ++i) {
                const auto n = std::to_string(i + 1);
                out.write("trials/trial_" + n + ".csv", detail::trial_control_csv(res.trials[i]));
                out.write("trials/pose_" + n + ".csv", detail::trial_pose_csv(res.trials[i], world.nest));
            }
            out.write("trials.csv", detail::trials_csv(res.trials, bound, stop_max));

            std::size_t homed = 0, stopped = 0;
            for (const auto& t : res.trials) {
                homed += trial_homed(t, bound) ? 1 : 0;
                stopped += trial_stopped_at_nest(t, stop_max) ? 1 : 0;
            }
            const auto ss = search_stats(res.trials, world.nest, cfg.trial.nest_radius);
            detail::add_count(res, "trials", res.trials.size());
            detail::add_count(res, "trials_homed", homed);
            detail::add(res, "search_window",
                        "from first pass within " + fmt_fixed(2.0 * cfg.trial.nest_radius, 2) +
                            " m of the nest to the end of the trial");
            detail::add(res, "search_bound_m", bound);
            detail::add_count(res, "search_samples", ss.samples);
            detail::add(res, "search_dist_mean_m", ss.mean);
            detail::add(res, "search_dist_std_m", ss.std);
            if (cfg.mode == ControlMode::FiveMBON) {
                detail::add_count(res, "trials_stopped_at_nest", stopped);
                for (std::size_t i = 0; i < res.trials.size(); ++i) {
                    detail::add(res, "stop_dist_m." + std::to_string(i + 1), res.trials[i].stop_dist);
                }
            }
        }

        out.write("summary.csv", detail::summary_csv(res.summary));
        detail::emit_trial_plots(out, res, cfg);
        if (cfg.experiment != ExperimentId::Sim && res.trials.empty()) out.warn("no trials were run");
        out.manifest("");
    } catch (const std::exception& e) {
        try {
            out.write("summary.csv", detail::summary_csv(res.summary));
            out.manifest(e.what());
        } catch (...) {
        }
        throw;
    }
    return res;
}

} // namespace mbhoming
