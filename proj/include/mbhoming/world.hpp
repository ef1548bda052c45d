#pragma once

// Procedural panoramic world and azimuthal ray-cast renderer.
//
// The world is flat ground with vertical landmarks (boxes and cylinders) and a
// distant skyline. A panorama is rendered one column at a time: each column is
// a horizontal ray, every landmark it meets is painted from the horizon up to
// its apparent elevation, far to near. Column W/2 looks straight ahead,
// column 0 straight behind, and azimuth decreases left to right, so objects
// on the left of the heading appear in the left half of the image.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mbhoming/angles.hpp"
#include "mbhoming/error.hpp"
#include "mbhoming/format.hpp"
#include "mbhoming/optic_lobe.hpp"
#include "mbhoming/path_integrator.hpp"
#include "mbhoming/random.hpp"

namespace mbhoming {

enum class LandmarkShape { Box, Cylinder };

struct Landmark {
    LandmarkShape shape = LandmarkShape::Cylinder;
    double x = 0.0;
    double y = 0.0;
    double width = 1.0; // box side or cylinder diameter, m
    double height = 2.0; // top above ground, m
    double albedo = 0.2;
    double base = 0.0;   // bottom above ground; raised landmarks (canopies) do not block driving

    bool contains(Vec2 p) const {
        if (base > 0.0) return false;
        const double h = 0.5 * width;
        if (shape == LandmarkShape::Box) return std::abs(p.x - x) < h && std::abs(p.y - y) < h;
        return std::hypot(p.x - x, p.y - y) < h;
    }

    // Entry and exit distances along the unit ray (origin, dir) through the
    // footprint; entry is negative when the origin is inside it.
    std::optional<std::pair<double, double>> intersect_span(Vec2 origin, Vec2 dir) const {
        const double h = 0.5 * width;
        if (shape == LandmarkShape::Cylinder) {
            const double ox = origin.x - x, oy = origin.y - y;
            const double b = ox * dir.x + oy * dir.y;
            const double c = ox * ox + oy * oy - h * h;
            const double disc = b * b - c;
            if (disc < 0.0) return std::nullopt;
            const double root = std::sqrt(disc);
            if (-b + root <= 0.0) return std::nullopt;
            return std::pair{-b - root, -b + root};
        }
        double t_near = -INFINITY, t_far = INFINITY;
        const double lo[2] = {x - h, y - h}, hi[2] = {x + h, y + h};
        const double o[2] = {origin.x, origin.y}, d[2] = {dir.x, dir.y};
        for (int a = 0; a < 2; ++a) {
            if (d[a] == 0.0) {
                if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
                continue;
            }
            double t1 = (lo[a] - o[a]) / d[a], t2 = (hi[a] - o[a]) / d[a];
            if (t1 > t2) std::swap(t1, t2);
            t_near = std::max(t_near, t1);
            t_far = std::min(t_far, t2);
        }
        if (t_near > t_far || t_far <= 0.0) return std::nullopt;
        return std::pair{t_near, t_far};
    }

    // Distance along the ray to the outer surface, if the ray hits it from outside.
    std::optional<double> intersect(Vec2 origin, Vec2 dir) const {
        const auto span = intersect_span(origin, dir);
        if (!span || span->first <= 0.0) return std::nullopt;
        return span->first;
    }

    friend bool operator==(const Landmark&, const Landmark&) = default;
};

// Distant hills: elevation (deg) = base + sum amp * sin(freq * azimuth + phase).
struct SkylineHarmonic {
    double freq = 1.0;
    double amp_deg = 1.0;
    double phase = 0.0;

    friend bool operator==(const SkylineHarmonic&, const SkylineHarmonic&) = default;
};

// Ground albedo perturbation amp * sin(kx x + ky y + phase), faded with
// distance from the camera so far-away texture does not alias.
struct GroundWave {
    double kx = 0.0; // rad/m
    double ky = 0.0;
    double amp = 0.0;
    double phase = 0.0;

    friend bool operator==(const GroundWave&, const GroundWave&) = default;
};

struct World {
    std::uint64_t seed = 0;
    double arena_half = 20.0; // driving area is the square |x|,|y| <= arena_half around the nest
    Vec2 nest{0.0, 0.0};
    double sky_albedo = 0.9;
    double skyline_albedo = 0.55;
    double ground_albedo = 0.55;
    double skyline_base_deg = 0.0;
    std::vector<SkylineHarmonic> skyline;
    std::vector<Landmark> landmarks;
    std::vector<GroundWave> ground_texture;
    double ground_fade = 4.0; // m

    double ground_albedo_at(Vec2 p, double dist) const {
        if (ground_texture.empty()) return ground_albedo;
        double v = 0.0;
        for (const auto& g : ground_texture) v += g.amp * std::sin(g.kx * p.x + g.ky * p.y + g.phase);
        return std::clamp(ground_albedo + v * std::exp(-dist / ground_fade), 0.0, 1.0);
    }

    double skyline_elevation_deg(double azimuth) const {
        double e = skyline_base_deg;
        for (const auto& h : skyline) e += h.amp_deg * std::sin(h.freq * azimuth + h.phase);
        return std::max(0.0, e);
    }

    bool in_arena(Vec2 p) const {
        return std::abs(p.x - nest.x) <= arena_half && std::abs(p.y - nest.y) <= arena_half;
    }

    bool blocked(Vec2 p) const {
        return std::any_of(landmarks.begin(), landmarks.end(), [p](const Landmark& l) { return l.contains(p); });
    }

    void validate() const {
        std::size_t near = 0;
        for (const auto& l : landmarks) {
            if (!(l.height > 0.0) || !(l.width > 0.0)) throw ConfigError("world: landmark width/height must be > 0");
            if (!(l.base >= 0.0) || !(l.base < l.height)) throw ConfigError("world: landmark base must be in [0, height)");
            if (l.albedo < 0.0 || l.albedo > 1.0) throw ConfigError("world: albedo must be in [0,1]");
            if (std::hypot(l.x - nest.x, l.y - nest.y) <= 30.0) ++near;
        }
        if (!(ground_fade > 0.0)) throw ConfigError("world: ground_fade must be > 0");
        if (near < 3) throw ConfigError("world: need at least 3 landmarks within 30 m of the nest");
    }

    friend bool operator==(const World&, const World&) = default;
};

struct WorldParams {
    double arena_half = 20.0;
    std::size_t n_landmarks = 25;
    double min_radius = 21.0; // landmark distance band around the nest
    double max_radius = 34.0;
    double min_height = 2.0;
    double max_height = 9.0;
    double min_width = 0.6;
    double max_width = 4.0;
    std::size_t skyline_harmonics = 4;
    double skyline_base_deg = 3.0;
    double sky_albedo = 0.9;
    double skyline_albedo = 0.55;
    double ground_albedo = 0.55; // same as the skyline, so the horizon itself carries no edge
    // Ground texture; only visible with a camera height above zero.
    std::size_t ground_waves = 0;
    double ground_amp = 0.15; // total amplitude, split across the waves
    double min_ground_wavelength = 0.4;
    double max_ground_wavelength = 3.0;
    // Trees: a thin trunk under a raised canopy, scattered around the nest.
    std::size_t n_trees = 0;
    double tree_min_radius = 3.0;
    double tree_max_radius = 16.0;
    double trunk_width = 0.3;
    double min_canopy_base = 1.2;
    double max_canopy_base = 2.5;
    double min_canopy_top = 4.0;
    double max_canopy_top = 9.0;
    double min_canopy_width = 2.0;
    double max_canopy_width = 5.0;

    friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

inline World generate_world(std::uint64_t seed, const WorldParams& p = {}) {
    Rng rng(seed);
    World w;
    w.seed = seed;
    w.arena_half = p.arena_half;
    w.skyline_base_deg = p.skyline_base_deg;
    w.sky_albedo = p.sky_albedo;
    w.skyline_albedo = p.skyline_albedo;
    w.ground_albedo = p.ground_albedo;
    for (std::size_t i = 0; i < p.skyline_harmonics; ++i) {
        w.skyline.push_back({static_cast<double>(i + 1), rng.uniform(0.5, 2.5), rng.uniform(0.0, kTwoPi)});
    }
    while (w.landmarks.size() < p.n_landmarks) {
        Landmark l;
        l.shape = rng.uniform() < 0.6 ? LandmarkShape::Cylinder : LandmarkShape::Box;
        const double r = std::sqrt(rng.uniform(p.min_radius * p.min_radius, p.max_radius * p.max_radius));
        const double a = rng.uniform(0.0, kTwoPi);
        l.x = w.nest.x + r * std::cos(a);
        l.y = w.nest.y + r * std::sin(a);
        l.width = rng.uniform(p.min_width, p.max_width);
        l.height = rng.uniform(p.min_height, p.max_height);
        l.albedo = rng.uniform(0.0, 0.45);
        w.landmarks.push_back(l);
    }
    for (std::size_t i = 0; i < p.ground_waves; ++i) {
        const double k = kTwoPi / rng.uniform(p.min_ground_wavelength, p.max_ground_wavelength);
        const double a = rng.uniform(0.0, kTwoPi);
        w.ground_texture.push_back({k * std::cos(a), k * std::sin(a), p.ground_amp / static_cast<double>(p.ground_waves),
                                    rng.uniform(0.0, kTwoPi)});
    }
    for (std::size_t i = 0; i < p.n_trees; ++i) {
        const double r = std::sqrt(rng.uniform(p.tree_min_radius * p.tree_min_radius,
                                               p.tree_max_radius * p.tree_max_radius));
        const double a = rng.uniform(0.0, kTwoPi);
        Landmark canopy;
        canopy.x = w.nest.x + r * std::cos(a);
        canopy.y = w.nest.y + r * std::sin(a);
        canopy.width = rng.uniform(p.min_canopy_width, p.max_canopy_width);
        canopy.base = rng.uniform(p.min_canopy_base, p.max_canopy_base);
        canopy.height = rng.uniform(p.min_canopy_top, p.max_canopy_top);
        canopy.albedo = rng.uniform(0.1, 0.4);
        Landmark trunk;
        trunk.x = canopy.x;
        trunk.y = canopy.y;
        trunk.width = p.trunk_width;
        trunk.height = canopy.base + 0.5;
        trunk.albedo = rng.uniform(0.05, 0.2);
        w.landmarks.push_back(trunk);
        w.landmarks.push_back(canopy);
    }
    return w;
}

struct RenderConfig {
    std::size_t width = 256;
    std::size_t height = 128;
    double elev_min_deg = -35.0;
    double elev_max_deg = 70.0;
    double camera_height = 0.0;

    double column_width() const { return kTwoPi / static_cast<double>(width); }
    double row_height() const { return deg_to_rad(elev_max_deg - elev_min_deg) / static_cast<double>(height); }

    void validate() const {
        if (width == 0 || height == 0) throw ConfigError("render: dimensions must be positive");
        if (!(elev_max_deg > elev_min_deg)) throw ConfigError("render: elev_max_deg must exceed elev_min_deg");
        if (camera_height < 0.0) throw ConfigError("render: camera_height must be >= 0");
    }

    friend bool operator==(const RenderConfig&, const RenderConfig&) = default;
};

namespace detail {

// Paints `value` over the part of the column between elevations lo and hi
// (radians), blending partially covered rows by their covered fraction.
inline void paint_span(std::vector<double>& column, const RenderConfig& rc, double lo, double hi, double value) {
    const double top = deg_to_rad(rc.elev_max_deg);
    const double rh = rc.row_height();
    if (hi <= lo) return;
    // Row r spans elevations [top - (r+1) rh, top - r rh].
    const double r_first = std::floor((top - hi) / rh);
    const double r_last = std::floor((top - lo) / rh);
    const auto n = static_cast<double>(column.size());
    for (double rf = std::max(0.0, r_first); rf <= std::min(n - 1.0, r_last); rf += 1.0) {
        const double row_hi = top - rf * rh;
        const double row_lo = row_hi - rh;
        const double cover = (std::min(hi, row_hi) - std::max(lo, row_lo)) / rh;
        if (cover <= 0.0) continue;
        auto& px = column[static_cast<std::size_t>(rf)];
        px = px * (1.0 - cover) + value * cover;
    }
}

struct Hit {
    double t;
    const Landmark* lm;
    bool overhead;
};

} // namespace detail

// Renders the panorama seen from (pos, heading). Column c looks along world
// azimuth heading + pi - c * 2pi/W. The image is built in a world-fixed column
// frame and rotated by an integer number of columns, so rotating the heading
// by whole columns shifts the output exactly.
inline PanoramicView render_panorama(const World& world, Vec2 pos, double heading, const RenderConfig& rc) {
    rc.validate();
    if (world.blocked(pos)) {
        throw RenderError("render: camera at (" + std::to_string(pos.x) + ", " + std::to_string(pos.y) +
                          ") is inside a landmark");
    }
    const std::size_t w = rc.width;
    const double dcol = rc.column_width();
    const double s = heading / dcol;
    const double whole = std::floor(s);
    const double frac = s - whole;
    const auto wi = static_cast<std::int64_t>(w);
    std::int64_t shift = static_cast<std::int64_t>(whole) % wi;
    if (shift < 0) shift += wi;

    PanoramicView out(w, rc.height);
    std::vector<double> column(rc.height);
    std::vector<detail::Hit> hits;
    hits.reserve(world.landmarks.size());
    const double bottom = deg_to_rad(rc.elev_min_deg);
    const double top = deg_to_rad(rc.elev_max_deg);
    const double rh = rc.row_height();

    for (std::size_t j = 0; j < w; ++j) {
        const double az = kPi + (frac - static_cast<double>(j)) * dcol;
        const Vec2 dir{std::cos(az), std::sin(az)};

        std::fill(column.begin(), column.end(), world.sky_albedo);
        if (world.ground_texture.empty() || rc.camera_height <= 0.0) {
            detail::paint_span(column, rc, bottom, 0.0, world.ground_albedo);
        } else {
            for (std::size_t r = 0; r < rc.height; ++r) {
                const double row_hi = std::min(0.0, top - static_cast<double>(r) * rh);
                const double row_lo = std::max(bottom, top - static_cast<double>(r + 1) * rh);
                if (row_hi <= row_lo) continue;
                const double dist = rc.camera_height / std::tan(-0.5 * (row_lo + row_hi));
                const Vec2 g{pos.x + dist * dir.x, pos.y + dist * dir.y};
                detail::paint_span(column, rc, row_lo, row_hi, world.ground_albedo_at(g, dist));
            }
        }
        detail::paint_span(column, rc, 0.0, deg_to_rad(world.skyline_elevation_deg(az)), world.skyline_albedo);

        hits.clear();
        for (const auto& lm : world.landmarks) {
            const auto span = lm.intersect_span(pos, dir);
            if (!span) continue;
            if (span->first > 0.0) {
                hits.push_back({span->first, &lm, false});
            } else {
                // Standing under a canopy: its underside reaches up to the zenith.
                hits.push_back({span->second, &lm, true});
            }
        }
        std::sort(hits.begin(), hits.end(), [](const detail::Hit& a, const detail::Hit& b) { return a.t > b.t; });
        for (const auto& h : hits) {
            const double lo = std::atan2(h.lm->base - rc.camera_height, h.t);
            const double hi = h.overhead ? top : std::atan2(h.lm->height - rc.camera_height, h.t);
            detail::paint_span(column, rc, std::max(lo, bottom), std::min(hi, top), h.lm->albedo);
        }

        const auto c = static_cast<std::size_t>((static_cast<std::int64_t>(j) + shift) % wi);
        for (std::size_t r = 0; r < rc.height; ++r) out.at(r, c) = column[r];
    }
    return out;
}

// ---------------------------------------------------------------------------
// World file (text):
//
//   mbhoming-world 1
//   seed <u64>
//   arena_half <m>
//   nest <x> <y>
//   albedo <sky> <skyline> <ground>
//   skyline_base <deg>
//   harmonic <freq> <amp_deg> <phase>          (repeated)
//   ground_fade <m>
//   ground_wave <kx> <ky> <amp> <phase>        (repeated)
//   landmark box|cylinder <x> <y> <width> <height> <albedo> [<base>]   (repeated)
//
// '#' starts a comment. Errors report the 1-based line number.
// ---------------------------------------------------------------------------

inline void write_world(std::ostream& os, const World& w) {
    const auto f = [](double v) { return fmt_exact(v); };
    os << "mbhoming-world 1\n";
    os << "seed " << w.seed << "\n";
    os << "arena_half " << f(w.arena_half) << "\n";
    os << "nest " << f(w.nest.x) << " " << f(w.nest.y) << "\n";
    os << "albedo " << f(w.sky_albedo) << " " << f(w.skyline_albedo) << " " << f(w.ground_albedo) << "\n";
    os << "skyline_base " << f(w.skyline_base_deg) << "\n";
    for (const auto& h : w.skyline) {
        os << "harmonic " << f(h.freq) << " " << f(h.amp_deg) << " " << f(h.phase) << "\n";
    }
    os << "ground_fade " << f(w.ground_fade) << "\n";
    for (const auto& g : w.ground_texture) {
        os << "ground_wave " << f(g.kx) << " " << f(g.ky) << " " << f(g.amp) << " " << f(g.phase) << "\n";
    }
    for (const auto& l : w.landmarks) {
        os << "landmark " << (l.shape == LandmarkShape::Box ? "box" : "cylinder") << " " << f(l.x) << " " << f(l.y)
           << " " << f(l.width) << " " << f(l.height) << " " << f(l.albedo);
        if (l.base > 0.0) os << " " << f(l.base);
        os << "\n";
    }
}

inline World read_world(std::istream& is) {
    World w;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        const auto fail = [&](const std::string& msg) { throw FormatError("world file: " + msg, lineno); };
        if (!header) {
            int version = 0;
            if (key != "mbhoming-world" || !(ls >> version) || version != 1) fail("expected 'mbhoming-world 1'");
            header = true;
            continue;
        }
        bool ok = true;
        if (key == "seed") {
            ok = static_cast<bool>(ls >> w.seed);
        } else if (key == "arena_half") {
            ok = static_cast<bool>(ls >> w.arena_half);
        } else if (key == "nest") {
            ok = static_cast<bool>(ls >> w.nest.x >> w.nest.y);
        } else if (key == "albedo") {
            ok = static_cast<bool>(ls >> w.sky_albedo >> w.skyline_albedo >> w.ground_albedo);
        } else if (key == "skyline_base") {
            ok = static_cast<bool>(ls >> w.skyline_base_deg);
        } else if (key == "harmonic") {
            SkylineHarmonic h;
            ok = static_cast<bool>(ls >> h.freq >> h.amp_deg >> h.phase);
            w.skyline.push_back(h);
        } else if (key == "ground_fade") {
            ok = static_cast<bool>(ls >> w.ground_fade);
        } else if (key == "ground_wave") {
            GroundWave g;
            ok = static_cast<bool>(ls >> g.kx >> g.ky >> g.amp >> g.phase);
            w.ground_texture.push_back(g);
        } else if (key == "landmark") {
            Landmark l;
            std::string shape;
            ok = static_cast<bool>(ls >> shape >> l.x >> l.y >> l.width >> l.height >> l.albedo);
            if (ok && !(ls >> l.base)) {
                if (!ls.eof()) ok = false;
                l.base = 0.0;
            }
            if (shape == "box") {
                l.shape = LandmarkShape::Box;
            } else if (shape == "cylinder") {
                l.shape = LandmarkShape::Cylinder;
            } else {
                fail("unknown landmark shape '" + shape + "'");
            }
            w.landmarks.push_back(l);
        } else {
            fail("unknown key '" + key + "'");
        }
        if (!ok) fail("malformed '" + key + "' line");
    }
    if (!header) throw FormatError("world file: missing header", lineno);
    w.validate();
    return w;
}

// 8-bit binary PGM.
inline void write_pgm(std::ostream& os, const PanoramicView& view) {
    os << "P5\n" << view.width() << " " << view.height() << "\n255\n";
    for (const double v : view.pixels()) {
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
}

} // namespace mbhoming
