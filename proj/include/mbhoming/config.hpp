#pragma once

// Run configuration and its text file format.
//
//   mbhoming-config 1
//   experiment exp2
//   seed.world 1
//   vision.thumb 32 32
//   ...
//
// One `key value...` line per field, '#' comments, blank lines ignored. Every
// field has a default, so a file only needs the header plus overrides.
// write_config emits every field at full precision and read_config of that
// output reproduces the config exactly.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mbhoming/error.hpp"
#include "mbhoming/format.hpp"
#include "mbhoming/mushroom_body.hpp"
#include "mbhoming/optic_lobe.hpp"
#include "mbhoming/path_integrator.hpp"
#include "mbhoming/sip_controller.hpp"
#include "mbhoming/trial.hpp"
#include "mbhoming/vehicle.hpp"
#include "mbhoming/walks.hpp"
#include "mbhoming/world.hpp"

namespace mbhoming {

enum class ExperimentId { Sim, Exp1, Exp2, Exp3 };

inline constexpr std::string_view to_string(ExperimentId id) {
    switch (id) {
    case ExperimentId::Sim: return "sim";
    case ExperimentId::Exp1: return "exp1";
    case ExperimentId::Exp2: return "exp2";
    case ExperimentId::Exp3: return "exp3";
    }
    return "?";
}

inline ExperimentId parse_experiment(std::string_view s) {
    for (auto id : {ExperimentId::Sim, ExperimentId::Exp1, ExperimentId::Exp2, ExperimentId::Exp3}) {
        if (s == to_string(id)) return id;
    }
    throw ConfigError("unknown experiment '" + std::string(s) + "' (expected sim, exp1, exp2 or exp3)");
}

inline constexpr std::string_view to_string(ControlMode m) {
    return m == ControlMode::FourMBON ? "4mbon" : "5mbon";
}

inline ControlMode parse_mode(std::string_view s) {
    if (s == "4mbon") return ControlMode::FourMBON;
    if (s == "5mbon") return ControlMode::FiveMBON;
    throw ConfigError("unknown mode '" + std::string(s) + "' (expected 4mbon or 5mbon)");
}

struct Seeds {
    std::uint64_t world = 1;
    std::uint64_t net = 1;
    std::uint64_t noise = 1;

    friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct SimParams {
    double extent = 5.0;   // m, side of the learned grid
    double spacing = 0.2;  // m
    std::size_t orientations = 36;
    double stream_spacing = 1.0; // m between streamline starts
    double stream_margin = 0.5;  // m kept clear of the grid edge
    double stream_step = 0.1;
    double stream_goal = 0.5;
    std::size_t stream_max_steps = 200;

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct OrbitParams {
    std::vector<RadiusKnot> radius{{0.0, 2.0}, {30.0, 6.0}};
    double ccw_duration = 94.0; // nest on the left
    double cw_duration = 129.0; // nest on the right

    friend bool operator==(const OrbitParams&, const OrbitParams&) = default;
};

// Hand-driven walk, about 282 m at walking pace. Every 8 Hz frame is
// presented; only novel ones change the memory.
struct RandomWalkParams {
    double max_radius = 8.0;
    double duration = 352.5;
    double speed = 0.8;
    double steer_sigma = 0.2;
    double steer_tau = 1.5;
    double start_offset = 0.5; // m east of the nest

    friend bool operator==(const RandomWalkParams&, const RandomWalkParams&) = default;
};

// Kidnapped start positions: start i sits at polar angle
// angle_offset + 2 pi i / count around the nest, at radii[i % radii.size()].
struct StartParams {
    std::size_t count = 12;
    std::vector<double> radii{6.0, 12.0};
    double angle_offset = 0.3;

    friend bool operator==(const StartParams&, const StartParams&) = default;
};

struct SweepParams {
    std::vector<std::size_t> n_kc{5000, 10000, 50000};
    std::vector<VisionConfig> resolutions{VisionConfig::res7(), VisionConfig::res5()};
    double k_fraction = 0.01;
    std::size_t rate_frames = 200; // frames timed per cell for the control rate

    friend bool operator==(const SweepParams&, const SweepParams&) = default;
};

struct RunConfig {
    ExperimentId experiment = ExperimentId::Sim;
    ControlMode mode = ControlMode::FourMBON;
    Seeds seeds;

    VisionConfig vision;
    RenderConfig render{288, 128, -35.0, 70.0, 0.0};
    NetworkConfig network;
    PINoiseModel noise; // its seed field is ignored; see noise_model()
    double r_nest = kDefaultNestRadius;
    HeadingSource heading_source = HeadingSource::Reported;
    double min_move = kDefaultMinMove;
    VehicleParams vehicle;
    SteeringGains gains;
    double throttle_alpha = 0.2;
    WorldParams world;
    std::string world_file; // when set, replaces the generated world
    TrialLimits trial;
    WalkTiming timing;
    std::size_t nest_views = 360;

    SimParams sim;
    OrbitParams orbit;
    RandomWalkParams walk;
    StartParams starts;
    SweepParams sweep;

    std::size_t n_pn() const { return vision.pn_count(); }

    PINoiseModel noise_model() const {
        PINoiseModel m = noise;
        m.seed = mix_seed(seeds.noise, 1);
        return m;
    }

    void validate() const {
        vision.validate();
        render.validate();
        network.validate(n_pn());
        if (render.width < vision.thumb_w || render.height < vision.thumb_h) {
            throw ConfigError("config: render size must be at least the thumbnail size");
        }
        if (noise.pos_sigma < 0 || noise.heading_sigma < 0 || !(noise.update_rate > 0)) {
            throw ConfigError("config: noise sigmas must be >= 0 and rate > 0");
        }
        if (!(r_nest >= 0)) throw ConfigError("config: pi.r_nest must be >= 0");
        if (!(vehicle.wheelbase > 0) || !(vehicle.max_steer > 0) || !(vehicle.v_max > 0)) {
            throw ConfigError("config: vehicle parameters must be > 0");
        }
        if (!(throttle_alpha > 0 && throttle_alpha <= 1)) throw ConfigError("config: throttle alpha must be in (0,1]");
        if (!(trial.dt > 0 && trial.dt <= 0.5) || !(trial.max_time > 0)) {
            throw ConfigError("config: trial.dt must be in (0,0.5] and max_time > 0");
        }
        if (world.n_landmarks == 0 && world.n_trees == 0 && world_file.empty()) {
            throw ConfigError("config: world has no landmarks");
        }
        if (!(sim.spacing > 0) || sim.orientations == 0 || !(sim.stream_spacing > 0)) {
            throw ConfigError("config: sim spacing and orientations must be > 0");
        }
        if (orbit.radius.empty()) throw ConfigError("config: orbit.radius needs at least one knot");
        for (std::size_t i = 0; i < orbit.radius.size(); ++i) {
            if (!(orbit.radius[i].r > 0)) throw ConfigError("config: orbit radii must be > 0");
            if (i && !(orbit.radius[i].t > orbit.radius[i - 1].t)) {
                throw ConfigError("config: orbit.radius knot times must increase");
            }
        }
        if (!(walk.max_radius > 0) || !(walk.duration > 0) || !(walk.speed > 0)) {
            throw ConfigError("config: walk radius, duration and speed must be > 0");
        }
        if (starts.radii.empty()) throw ConfigError("config: starts.radii must not be empty");
        if (sweep.n_kc.empty() || sweep.resolutions.empty()) throw ConfigError("config: sweep axes must not be empty");
        if (!(sweep.k_fraction > 0 && sweep.k_fraction <= 1)) throw ConfigError("config: sweep.k_fraction in (0,1]");
    }

    static RunConfig defaults(ExperimentId id);

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Per-experiment defaults. The worlds differ the way the sites differ: a
// compact city for the simulation, open campus with distant buildings for the
// first two outdoor runs, and a closer ring of objects around the third.
inline RunConfig RunConfig::defaults(ExperimentId id) {
    RunConfig c;
    c.experiment = id;
    switch (id) {
    case ExperimentId::Sim:
        c.world.min_radius = 5.0;
        c.world.max_radius = 20.0;
        c.world.n_landmarks = 30;
        break;
    case ExperimentId::Exp1:
        c.starts = {12, {6.0, 12.0}, 0.3};
        break;
    case ExperimentId::Exp2:
        c.world.min_radius = 25.0;
        c.world.max_radius = 40.0;
        c.starts = {7, {8.0, 16.0}, 0.3};
        break;
    case ExperimentId::Exp3:
        c.mode = ControlMode::FiveMBON;
        c.world.min_radius = 9.0;
        c.world.max_radius = 20.0;
        c.world.n_landmarks = 30;
        c.starts = {3, {8.0}, 0.3};
        c.trial.max_time = 180.0;
        // About 163 m.
        c.walk.duration = 204.0;
        break;
    }
    return c;
}

namespace detail {

struct ConfigField {
    std::string key;
    std::function<void(std::ostream&, const RunConfig&)> write;
    std::function<bool(std::istream&, RunConfig&)> read;
};

template <class T>
bool read_all(std::istream& is, T& v) {
    return static_cast<bool>(is >> v);
}

template <class T>
void put(std::ostream& os, const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        os << fmt_exact(v);
    } else {
        os << v;
    }
}

inline bool read_bool(std::istream& is, bool& v) {
    std::string s;
    if (!(is >> s)) return false;
    if (s == "true" || s == "1") {
        v = true;
    } else if (s == "false" || s == "0") {
        v = false;
    } else {
        return false;
    }
    return true;
}

inline const std::vector<ConfigField>& config_fields() {
    using C = RunConfig;
    using W = std::ostream;
    using R = std::istream;
    // Scalar helper: one value per line.
    const auto num = [](std::string key, auto member) {
        return ConfigField{std::move(key), [member](W& os, const C& c) { put(os, member(c)); },
                           [member](R& is, C& c) { return read_all(is, member(c)); }};
    };
    const auto flag = [](std::string key, auto member) {
        return ConfigField{std::move(key), [member](W& os, const C& c) { os << (member(c) ? "true" : "false"); },
                           [member](R& is, C& c) { return read_bool(is, member(c)); }};
    };
#define MB_REF(expr) [](auto& c) -> auto& { return expr; }
    static const std::vector<ConfigField> fields = {
        {"experiment", [](W& os, const C& c) { os << to_string(c.experiment); },
         [](R& is, C& c) {
             std::string s;
             if (!(is >> s)) return false;
             c.experiment = parse_experiment(s);
             return true;
         }},
        {"mode", [](W& os, const C& c) { os << to_string(c.mode); },
         [](R& is, C& c) {
             std::string s;
             if (!(is >> s)) return false;
             c.mode = parse_mode(s);
             return true;
         }},
        num("seed.world", MB_REF(c.seeds.world)),
        num("seed.net", MB_REF(c.seeds.net)),
        num("seed.noise", MB_REF(c.seeds.noise)),

        {"vision.thumb", [](W& os, const C& c) { put(os, c.vision.thumb_w); os << " "; put(os, c.vision.thumb_h); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.vision.thumb_w >> c.vision.thumb_h); }},
        num("vision.gaussian_sigma", MB_REF(c.vision.gaussian_sigma)),
        {"render.size", [](W& os, const C& c) { put(os, c.render.width); os << " "; put(os, c.render.height); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.render.width >> c.render.height); }},
        {"render.elevation_deg", [](W& os, const C& c) { put(os, c.render.elev_min_deg); os << " "; put(os, c.render.elev_max_deg); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.render.elev_min_deg >> c.render.elev_max_deg); }},
        num("render.camera_height", MB_REF(c.render.camera_height)),

        num("network.n_kc", MB_REF(c.network.n_kc)),
        num("network.fan_in", MB_REF(c.network.fan_in)),
        num("network.k", MB_REF(c.network.k)),
        flag("network.shared_projection", MB_REF(c.network.shared_projection)),

        num("noise.pos_sigma", MB_REF(c.noise.pos_sigma)),
        num("noise.heading_sigma_rad", MB_REF(c.noise.heading_sigma)),
        num("noise.rate_hz", MB_REF(c.noise.update_rate)),
        num("pi.r_nest", MB_REF(c.r_nest)),
        {"pi.heading_source",
         [](W& os, const C& c) { os << (c.heading_source == HeadingSource::Reported ? "reported" : "differentiated"); },
         [](R& is, C& c) {
             std::string s;
             if (!(is >> s)) return false;
             if (s == "reported") {
                 c.heading_source = HeadingSource::Reported;
             } else if (s == "differentiated") {
                 c.heading_source = HeadingSource::Differentiated;
             } else {
                 return false;
             }
             return true;
         }},
        num("pi.min_move", MB_REF(c.min_move)),
        {"pi.origin", [](W& os, const C& c) { put(os, c.timing.origin.lat); os << " "; put(os, c.timing.origin.lon); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.timing.origin.lat >> c.timing.origin.lon); }},
        num("vision.learn_dt", MB_REF(c.timing.vision_dt)),

        num("vehicle.wheelbase", MB_REF(c.vehicle.wheelbase)),
        num("vehicle.max_steer_rad", MB_REF(c.vehicle.max_steer)),
        num("vehicle.v_max", MB_REF(c.vehicle.v_max)),
        num("control.kp", MB_REF(c.gains.kp)),
        num("control.ki", MB_REF(c.gains.ki)),
        num("control.kd", MB_REF(c.gains.kd)),
        num("control.integral_clamp", MB_REF(c.gains.integral_clamp)),
        num("control.throttle_alpha", MB_REF(c.throttle_alpha)),

        {"world.file", [](W& os, const C& c) { os << (c.world_file.empty() ? "-" : c.world_file); },
         [](R& is, C& c) {
             std::string s;
             if (!(is >> s)) return false;
             c.world_file = s == "-" ? "" : s;
             return true;
         }},
        num("world.arena_half", MB_REF(c.world.arena_half)),
        num("world.landmarks", MB_REF(c.world.n_landmarks)),
        {"world.landmark_radius", [](W& os, const C& c) { put(os, c.world.min_radius); os << " "; put(os, c.world.max_radius); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.world.min_radius >> c.world.max_radius); }},
        {"world.landmark_height", [](W& os, const C& c) { put(os, c.world.min_height); os << " "; put(os, c.world.max_height); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.world.min_height >> c.world.max_height); }},
        {"world.landmark_width", [](W& os, const C& c) { put(os, c.world.min_width); os << " "; put(os, c.world.max_width); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.world.min_width >> c.world.max_width); }},
        num("world.skyline_harmonics", MB_REF(c.world.skyline_harmonics)),
        num("world.skyline_base_deg", MB_REF(c.world.skyline_base_deg)),
        {"world.albedo",
         [](W& os, const C& c) { put(os, c.world.sky_albedo); os << " "; put(os, c.world.skyline_albedo); os << " "; put(os, c.world.ground_albedo); },
         [](R& is, C& c) {
             return static_cast<bool>(is >> c.world.sky_albedo >> c.world.skyline_albedo >> c.world.ground_albedo);
         }},
        num("world.ground_waves", MB_REF(c.world.ground_waves)),
        num("world.ground_amp", MB_REF(c.world.ground_amp)),
        {"world.ground_wavelength",
         [](W& os, const C& c) { put(os, c.world.min_ground_wavelength); os << " "; put(os, c.world.max_ground_wavelength); },
         [](R& is, C& c) {
             return static_cast<bool>(is >> c.world.min_ground_wavelength >> c.world.max_ground_wavelength);
         }},
        num("world.trees", MB_REF(c.world.n_trees)),
        {"world.tree_radius", [](W& os, const C& c) { put(os, c.world.tree_min_radius); os << " "; put(os, c.world.tree_max_radius); },
         [](R& is, C& c) { return static_cast<bool>(is >> c.world.tree_min_radius >> c.world.tree_max_radius); }},

        num("trial.max_time", MB_REF(c.trial.max_time)),
        num("trial.dt", MB_REF(c.trial.dt)),
        num("trial.nest_radius", MB_REF(c.trial.nest_radius)),
        num("trial.stop_speed", MB_REF(c.trial.stop_speed)),
        num("trial.stop_hold", MB_REF(c.trial.stop_hold)),
        num("trial.post_stop", MB_REF(c.trial.post_stop)),
        num("trial.zero_speed", MB_REF(c.trial.zero_speed)),

        num("sim.extent", MB_REF(c.sim.extent)),
        num("sim.spacing", MB_REF(c.sim.spacing)),
        num("sim.orientations", MB_REF(c.sim.orientations)),
        num("sim.stream_spacing", MB_REF(c.sim.stream_spacing)),
        num("sim.stream_margin", MB_REF(c.sim.stream_margin)),
        num("sim.stream_step", MB_REF(c.sim.stream_step)),
        num("sim.stream_goal", MB_REF(c.sim.stream_goal)),
        num("sim.stream_max_steps", MB_REF(c.sim.stream_max_steps)),

        {"orbit.radius",
         [](W& os, const C& c) {
             for (std::size_t i = 0; i < c.orbit.radius.size(); ++i) {
                 os << (i ? " " : ""); put(os, c.orbit.radius[i].t); os << " "; put(os, c.orbit.radius[i].r);
             }
         },
         [](R& is, C& c) {
             c.orbit.radius.clear();
             RadiusKnot k;
             while (is >> k.t) {
                 if (!(is >> k.r)) return false;
                 c.orbit.radius.push_back(k);
             }
             return !c.orbit.radius.empty() && is.eof();
         }},
        num("orbit.ccw_duration", MB_REF(c.orbit.ccw_duration)),
        num("orbit.cw_duration", MB_REF(c.orbit.cw_duration)),
        num("walk.max_radius", MB_REF(c.walk.max_radius)),
        num("walk.duration", MB_REF(c.walk.duration)),
        num("walk.speed", MB_REF(c.walk.speed)),
        num("walk.steer_sigma", MB_REF(c.walk.steer_sigma)),
        num("walk.steer_tau", MB_REF(c.walk.steer_tau)),
        num("walk.start_offset", MB_REF(c.walk.start_offset)),
        num("nest.views", MB_REF(c.nest_views)),

        num("starts.count", MB_REF(c.starts.count)),
        {"starts.radii",
         [](W& os, const C& c) {
             for (std::size_t i = 0; i < c.starts.radii.size(); ++i) {
                 os << (i ? " " : "");
                 put(os, c.starts.radii[i]);
             }
         },
         [](R& is, C& c) {
             c.starts.radii.clear();
             double r = 0;
             while (is >> r) c.starts.radii.push_back(r);
             return !c.starts.radii.empty() && is.eof();
         }},
        num("starts.angle_offset", MB_REF(c.starts.angle_offset)),

        {"sweep.n_kc",
         [](W& os, const C& c) {
             for (std::size_t i = 0; i < c.sweep.n_kc.size(); ++i) os << (i ? " " : "") << c.sweep.n_kc[i];
         },
         [](R& is, C& c) {
             c.sweep.n_kc.clear();
             std::size_t n = 0;
             while (is >> n) c.sweep.n_kc.push_back(n);
             return !c.sweep.n_kc.empty() && is.eof();
         }},
        {"sweep.thumbs",
         [](W& os, const C& c) {
             for (std::size_t i = 0; i < c.sweep.resolutions.size(); ++i) {
                 os << (i ? " " : "") << c.sweep.resolutions[i].thumb_w << " " << c.sweep.resolutions[i].thumb_h;
             }
         },
         [](R& is, C& c) {
             c.sweep.resolutions.clear();
             VisionConfig v = c.vision;
             while (is >> v.thumb_w) {
                 if (!(is >> v.thumb_h)) return false;
                 c.sweep.resolutions.push_back(v);
             }
             return !c.sweep.resolutions.empty() && is.eof();
         }},
        num("sweep.k_fraction", MB_REF(c.sweep.k_fraction)),
        num("sweep.rate_frames", MB_REF(c.sweep.rate_frames)),
    };
#undef MB_REF
    return fields;
}

} // namespace detail

inline void write_config(std::ostream& os, const RunConfig& c) {
    os << "mbhoming-config 1\n";
    for (const auto& f : detail::config_fields()) {
        os << f.key << " ";
        f.write(os, c);
        os << "\n";
    }
}

inline std::string config_to_string(const RunConfig& c) {
    std::ostringstream os;
    write_config(os, c);
    return os.str();
}

// Fields absent from the file keep the defaults of the file's experiment
// (or of `fallback` if it names none). Throws FormatError with the line number.
inline RunConfig read_config(std::istream& is, ExperimentId fallback = ExperimentId::Sim) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::optional<ExperimentId> experiment;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (!header) {
            int version = 0;
            if (key != "mbhoming-config" || !(ls >> version) || version != 1) {
                throw FormatError("config: expected header 'mbhoming-config 1'", lineno);
            }
            header = true;
            continue;
        }
        if (key == "experiment") {
            std::string v;
            ls >> v;
            try {
                experiment = parse_experiment(v);
            } catch (const ConfigError& e) {
                throw FormatError(std::string("config: ") + e.what(), lineno);
            }
        }
        lines.emplace_back(lineno, line);
    }
    if (!header) throw FormatError("config: missing header 'mbhoming-config 1'", lineno);

    RunConfig c = RunConfig::defaults(experiment.value_or(fallback));
    const auto& fields = detail::config_fields();
    for (const auto& [no, text] : lines) {
        std::istringstream ls(text);
        std::string key;
        ls >> key;
        const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.key == key; });
        if (it == fields.end()) throw FormatError("config: unknown key '" + key + "'", no);
        bool ok = false;
        try {
            ok = it->read(ls, c);
        } catch (const ConfigError& e) {
            throw FormatError(std::string("config: ") + e.what(), no);
        }
        std::string rest;
        if (!ok || (ls.clear(), ls >> rest)) throw FormatError("config: malformed value for '" + key + "'", no);
    }
    c.validate();
    return c;
}

inline RunConfig config_from_string(const std::string& text, ExperimentId fallback = ExperimentId::Sim) {
    std::istringstream is(text);
    return read_config(is, fallback);
}

} // namespace mbhoming
