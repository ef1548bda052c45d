#pragma once

// Minimal SVG figures. Coordinates print with fixed decimals so the same
// inputs always give the same bytes.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "mbhoming/angles.hpp"
#include "mbhoming/bearing.hpp"
#include "mbhoming/format.hpp"
#include "mbhoming/trial.hpp"

namespace mbhoming {

namespace detail {

inline std::string num(double v) { return fmt_fixed(v, 2); }

// World rectangle mapped onto a square canvas, y up.
struct Frame {
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    double size = 480, margin = 30;

    double sx(double x) const { return margin + (x - x0) / (x1 - x0) * (size - 2 * margin); }
    double sy(double y) const { return size - margin - (y - y0) / (y1 - y0) * (size - 2 * margin); }
    double scale() const { return (size - 2 * margin) / (x1 - x0); }

    static Frame around(Vec2 c, double half) {
        Frame f;
        f.x0 = c.x - half;
        f.x1 = c.x + half;
        f.y0 = c.y - half;
        f.y1 = c.y + half;
        return f;
    }
};

class Svg {
public:
    Svg(double w, double h) {
        s_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        s_ += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0) {
        s_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
              "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
    }
    void circle(double cx, double cy, double r, std::string_view stroke, std::string_view fill = "none") {
        s_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" stroke=\"" +
              std::string(stroke) + "\" fill=\"" + std::string(fill) + "\"/>\n";
    }
    void rect(double x, double y, double w, double h, std::string_view stroke, std::string_view fill = "none") {
        s_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
              "\" stroke=\"" + std::string(stroke) + "\" fill=\"" + std::string(fill) + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width = 1.0) {
        s_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
              "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) s_ += ' ';
            s_ += num(pts[i].first) + "," + num(pts[i].second);
        }
        s_ += "\"/>\n";
    }
    void path(const std::string& d, std::string_view fill, double opacity) {
        s_ += "<path d=\"" + d + "\" fill=\"" + std::string(fill) + "\" fill-opacity=\"" + fmt_fixed(opacity, 3) +
              "\" stroke=\"none\"/>\n";
    }
    void text(double x, double y, std::string_view t, std::string_view anchor = "start") {
        s_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) + "\">" +
              std::string(t) + "</text>\n";
    }
    void cross(double x, double y, double r, std::string_view stroke) {
        line(x - r, y - r, x + r, y + r, stroke, 1.5);
        line(x - r, y + r, x + r, y - r, stroke, 1.5);
    }

    std::string finish() {
        s_ += "</svg>\n";
        return std::move(s_);
    }

private:
    std::string s_;
};

inline const char* series_colour(std::size_t i) {
    static const char* const palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

inline void axes_box(Svg& svg, const Frame& f, std::string_view title) {
    svg.rect(f.margin, f.margin, f.size - 2 * f.margin, f.size - 2 * f.margin, "#999999");
    svg.text(f.size / 2, f.margin - 10, title, "middle");
    svg.text(f.margin, f.size - 8, "x " + num(f.x0) + ".." + num(f.x1) + " m, y " + num(f.y0) + ".." + num(f.y1) + " m");
}

inline void draw_landmarks(Svg& svg, const Frame& f, const World& w) {
    for (const auto& l : w.landmarks) {
        if (l.base > 0.0) continue;
        const double half = 0.5 * l.width;
        if (l.x + half < f.x0 || l.x - half > f.x1 || l.y + half < f.y0 || l.y - half > f.y1) continue;
        if (l.shape == LandmarkShape::Cylinder) {
            svg.circle(f.sx(l.x), f.sy(l.y), half * f.scale(), "#555555", "#cccccc");
        } else {
            svg.rect(f.sx(l.x - half), f.sy(l.y + half), l.width * f.scale(), l.width * f.scale(), "#555555",
                     "#cccccc");
        }
    }
}

} // namespace detail

// Arrow per grid cell along the estimated bearing; fallback estimates in red.
inline std::string bearing_quiver_svg(const BearingMap& map, const World& world, double extent) {
    const auto f = detail::Frame::around(world.nest, 0.5 * extent + map.spacing);
    detail::Svg svg(f.size, f.size);
    detail::axes_box(svg, f, "estimated home bearing");
    const double len = 0.8 * map.spacing * f.scale();
    for (const auto& c : map.cells) {
        if (c.estimate.status == BearingStatus::NoEstimate) continue;
        const char* colour = c.estimate.status == BearingStatus::Fallback ? "#d62728" : "#1f77b4";
        const double x = f.sx(c.pos.x), y = f.sy(c.pos.y);
        const double dx = std::cos(c.estimate.bearing), dy = -std::sin(c.estimate.bearing);
        const double tx = x + len * dx, ty = y + len * dy;
        svg.line(x - 0.5 * len * dx, y - 0.5 * len * dy, tx - 0.5 * len * dx, ty - 0.5 * len * dy, colour, 1.0);
        svg.circle(tx - 0.5 * len * dx, ty - 0.5 * len * dy, 1.2, colour, colour);
    }
    svg.circle(f.sx(world.nest.x), f.sy(world.nest.y), 0.3 * f.scale(), "black");
    return svg.finish();
}

inline std::string streamlines_svg(const std::vector<Streamline>& lines, const World& world, double half) {
    const auto f = detail::Frame::around(world.nest, half);
    detail::Svg svg(f.size, f.size);
    detail::axes_box(svg, f, "streamlines of the bearing field");
    detail::draw_landmarks(svg, f, world);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : lines[i].points) pts.emplace_back(f.sx(p.x), f.sy(p.y));
        svg.polyline(pts, lines[i].reached ? "#1f77b4" : "#d62728", 1.2);
        if (!lines[i].points.empty()) svg.cross(pts.front().first, pts.front().second, 3, "black");
    }
    svg.circle(f.sx(world.nest.x), f.sy(world.nest.y), 0.5 * f.scale(), "black");
    return svg.finish();
}

// Trial paths with start crosses and a circle of `nest_radius` at the nest.
inline std::string trajectories_svg(const std::vector<TrialRecord>& trials, const World& world, double nest_radius) {
    double half = 2.0;
    for (const auto& t : trials) {
        for (const auto& s : t.trajectory) {
            half = std::max({half, std::abs(s.x - world.nest.x), std::abs(s.y - world.nest.y)});
        }
    }
    const auto f = detail::Frame::around(world.nest, std::ceil(half * 1.05));
    detail::Svg svg(f.size, f.size);
    detail::axes_box(svg, f, "homing trajectories");
    detail::draw_landmarks(svg, f, world);
    for (std::size_t i = 0; i < trials.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : trials[i].trajectory) pts.emplace_back(f.sx(s.x), f.sy(s.y));
        svg.polyline(pts, detail::series_colour(i), 1.2);
        svg.cross(f.sx(trials[i].start.x), f.sy(trials[i].start.y), 4, detail::series_colour(i));
    }
    svg.circle(f.sx(world.nest.x), f.sy(world.nest.y), nest_radius * f.scale(), "black");
    return svg.finish();
}

// Time spent at (bearing from nest, distance) during search, pooled over
// trials. Sectors of 360/sectors degrees, rings of `ring` metres.
inline std::string search_polar_svg(const std::vector<TrialRecord>& trials, const World& world, double nest_radius,
                                    std::size_t sectors = 16, double ring = 1.0, std::size_t rings = 6) {
    std::vector<double> counts(sectors * rings, 0.0);
    for (const auto& t : trials) {
        bool searching = false;
        for (const auto& s : t.trajectory) {
            const double dx = s.x - world.nest.x, dy = s.y - world.nest.y;
            const double d = std::hypot(dx, dy);
            if (!searching && d <= 2.0 * nest_radius) searching = true;
            if (!searching) continue;
            const double a = std::atan2(dy, dx) + kPi;
            auto si = static_cast<std::size_t>(a / kTwoPi * static_cast<double>(sectors));
            si = std::min(si, sectors - 1);
            const auto ri = std::min(static_cast<std::size_t>(d / ring), rings - 1);
            counts[ri * sectors + si] += 1.0;
        }
    }
    const double peak = *std::max_element(counts.begin(), counts.end());
    const double size = 480, c = size / 2, scale = (size / 2 - 40) / (ring * static_cast<double>(rings));
    detail::Svg svg(size, size);
    svg.text(c, 20, "search positions around the nest", "middle");
    for (std::size_t ri = 0; ri < rings; ++ri) {
        const double r0 = static_cast<double>(ri) * ring * scale, r1 = static_cast<double>(ri + 1) * ring * scale;
        for (std::size_t si = 0; si < sectors; ++si) {
            const double v = counts[ri * sectors + si];
            if (v <= 0.0 || peak <= 0.0) continue;
            const double a0 = static_cast<double>(si) / static_cast<double>(sectors) * kTwoPi - kPi;
            const double a1 = static_cast<double>(si + 1) / static_cast<double>(sectors) * kTwoPi - kPi;
            const auto px = [&](double r, double a) { return detail::num(c + r * std::cos(a)); };
            const auto py = [&](double r, double a) { return detail::num(c - r * std::sin(a)); };
            std::string d = "M" + px(r0, a0) + "," + py(r0, a0) + " L" + px(r1, a0) + "," + py(r1, a0) + " A" +
                            detail::num(r1) + "," + detail::num(r1) + " 0 0 0 " + px(r1, a1) + "," + py(r1, a1) +
                            " L" + px(r0, a1) + "," + py(r0, a1);
            if (r0 > 0.0) d += " A" + detail::num(r0) + "," + detail::num(r0) + " 0 0 1 " + px(r0, a0) + "," + py(r0, a0);
            d += " Z";
            svg.path(d, "#1f77b4", 0.1 + 0.9 * v / peak);
        }
        svg.circle(c, c, r1, "#bbbbbb");
    }
    svg.circle(c, c, nest_radius * scale, "black");
    svg.text(10, size - 10,
             "sectors " + fmt_fixed(360.0 / static_cast<double>(sectors), 1) + " deg, rings " + fmt_fixed(ring, 1) +
                 " m (last ring open), shade = time steps");
    return svg.finish();
}

inline std::string speed_svg(const std::vector<TrialRecord>& trials, double v_max) {
    double tmax = 1.0;
    for (const auto& t : trials) {
        if (!t.trajectory.empty()) tmax = std::max(tmax, t.trajectory.back().t);
    }
    const double w = 560, h = 320, m = 40;
    const auto sx = [&](double t) { return m + t / tmax * (w - 2 * m); };
    const auto sy = [&](double v) { return h - m - v / v_max * (h - 2 * m); };
    detail::Svg svg(w, h);
    svg.rect(m, m, w - 2 * m, h - 2 * m, "#999999");
    svg.text(w / 2, m - 12, "commanded speed", "middle");
    svg.text(m, h - 10, "t 0.." + detail::num(tmax) + " s");
    svg.text(m - 4, m + 4, detail::num(v_max), "end");
    svg.text(m - 4, h - m, "0", "end");
    for (std::size_t i = 0; i < trials.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : trials[i].trajectory) pts.emplace_back(sx(s.t), sy(s.cmd.speed));
        svg.polyline(pts, detail::series_colour(i), 1.2);
    }
    return svg.finish();
}

} // namespace mbhoming
