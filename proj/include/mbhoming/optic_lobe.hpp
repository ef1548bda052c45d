#pragma once

// Front end of the visual pathway: panoramic image -> projection-neuron vector.
//
// All images are row-major grayscale with row 0 at the top. Columns span the
// full 360 degrees of azimuth, so every horizontal operation wraps around the
// seam between the last and first column; vertical operations clamp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mbhoming/error.hpp"

namespace mbhoming {

class PanoramicView {
public:
    PanoramicView() = default;
    PanoramicView(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), pixels_(width * height, fill) {}
    PanoramicView(std::size_t width, std::size_t height, std::vector<double> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (pixels_.size() != width_ * height_) {
            throw InputError("PanoramicView: pixel count does not match dimensions");
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

    double& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }
    double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

    // Column index taken modulo the width, so callers can step across the seam.
    double wrapped(std::size_t row, std::ptrdiff_t col) const {
        const auto w = static_cast<std::ptrdiff_t>(width_);
        std::ptrdiff_t c = col % w;
        if (c < 0) c += w;
        return pixels_[row * width_ + static_cast<std::size_t>(c)];
    }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }

    // Copy rotated by `shift` columns: out(r, c) = in(r, c - shift).
    PanoramicView rotated(std::ptrdiff_t shift) const {
        PanoramicView out(width_, height_);
        for (std::size_t r = 0; r < height_; ++r) {
            for (std::size_t c = 0; c < width_; ++c) {
                out.at(r, c) = wrapped(r, static_cast<std::ptrdiff_t>(c) - shift);
            }
        }
        return out;
    }

    friend bool operator==(const PanoramicView&, const PanoramicView&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> pixels_;
};

struct VisionConfig {
    std::size_t thumb_w = 32;
    std::size_t thumb_h = 32;
    double gaussian_sigma = 2.0; // source pixels

    std::size_t pn_count() const { return thumb_w * thumb_h; }

    // Horizontal angular resolution of the thumbnail (it always spans 360 deg).
    double resolution_deg_per_px() const { return 360.0 / static_cast<double>(thumb_w); }

    void validate() const {
        if (thumb_w == 0 || thumb_h == 0) throw ConfigError("VisionConfig: thumbnail dimensions must be positive");
        if (!(gaussian_sigma > 0.0)) throw ConfigError("VisionConfig: gaussian_sigma must be > 0");
    }

    static VisionConfig thumb32() { return {32, 32, 2.0}; }
    // 750 projection neurons.
    static VisionConfig pn750() { return {30, 25, 2.0}; }
    // ~7 deg/px and 5 deg/px over a 105 deg vertical band.
    static VisionConfig res7() { return {51, 15, 2.0}; }
    static VisionConfig res5() { return {72, 21, 2.0}; }

    friend bool operator==(const VisionConfig&, const VisionConfig&) = default;
};

using PNVector = std::vector<double>;

// Normalized sampled Gaussian of radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel: sigma must be > 0");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

inline PanoramicView gaussian_blur(const PanoramicView& view, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t w = view.width();
    const std::size_t h = view.height();

    const auto taps = kernel.size();
    const auto rad = static_cast<std::size_t>(radius);

    // Horizontal pass over a row padded with wrapped copies of its ends.
    PanoramicView horiz(w, h);
    std::vector<double> padded(w + 2 * rad);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t i = 0; i < padded.size(); ++i) {
            padded[i] = view.wrapped(r, static_cast<std::ptrdiff_t>(i) - radius);
        }
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps; ++t) acc += kernel[t] * padded[c + t];
            horiz.at(r, c) = acc;
        }
    }

    // Vertical pass, rows clamped at the top and bottom.
    PanoramicView out(w, h);
    const auto last = static_cast<std::ptrdiff_t>(h) - 1;
    for (std::size_t r = 0; r < h; ++r) {
        auto dst = out.pixels().subspan(r * w, w);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (std::size_t t = 0; t < taps; ++t) {
            const auto rr = std::clamp(static_cast<std::ptrdiff_t>(r + t) - radius, std::ptrdiff_t{0}, last);
            const auto src = horiz.pixels().subspan(static_cast<std::size_t>(rr) * w, w);
            const double k = kernel[t];
            for (std::size_t c = 0; c < w; ++c) dst[c] += k * src[c];
        }
    }
    return out;
}

namespace detail {

// Overlap weights of source cells [0, src) with each of `dst` equal bins.
// Weights sum to 1 per bin.
struct AreaBin {
    std::size_t first = 0;
    std::vector<double> weights;
};

inline std::vector<AreaBin> area_bins(std::size_t src, std::size_t dst) {
    std::vector<AreaBin> bins(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t b = 0; b < dst; ++b) {
        const double lo = static_cast<double>(b) * scale;
        const double hi = static_cast<double>(b + 1) * scale;
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto end = std::min(src, static_cast<std::size_t>(std::ceil(hi)));
        bins[b].first = first;
        for (std::size_t s = first; s < end; ++s) {
            const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
            bins[b].weights.push_back(overlap / scale);
        }
    }
    return bins;
}

} // namespace detail

// Fractional-area box filter; exact block mean when the sizes divide evenly.
inline PanoramicView downsample(const PanoramicView& view, std::size_t thumb_w, std::size_t thumb_h) {
    if (thumb_w == 0 || thumb_h == 0 || view.width() < thumb_w || view.height() < thumb_h) {
        throw InputError("downsample: view " + std::to_string(view.width()) + "x" + std::to_string(view.height()) +
                         " is smaller than target " + std::to_string(thumb_w) + "x" + std::to_string(thumb_h));
    }
    const auto cols = detail::area_bins(view.width(), thumb_w);
    const auto rows = detail::area_bins(view.height(), thumb_h);

    PanoramicView horiz(thumb_w, view.height());
    for (std::size_t r = 0; r < view.height(); ++r) {
        for (std::size_t c = 0; c < thumb_w; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < cols[c].weights.size(); ++i) {
                acc += cols[c].weights[i] * view.at(r, cols[c].first + i);
            }
            horiz.at(r, c) = acc;
        }
    }
    PanoramicView out(thumb_w, thumb_h);
    for (std::size_t r = 0; r < thumb_h; ++r) {
        for (std::size_t c = 0; c < thumb_w; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rows[r].weights.size(); ++i) {
                acc += rows[r].weights[i] * horiz.at(rows[r].first + i, c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

// Largest gradient magnitude a 3x3 Sobel pair can produce on [0,1] input.
inline const double kSobelMax = 4.0 * std::sqrt(2.0);

inline PanoramicView sobel_edges(const PanoramicView& view) {
    const std::size_t w = view.width();
    const std::size_t h = view.height();
    const auto last = static_cast<std::ptrdiff_t>(h) - 1;
    PanoramicView out(w, h);
    for (std::size_t r = 0; r < h; ++r) {
        const auto up = static_cast<std::size_t>(std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(r) - 1, 0));
        const auto down = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(r) + 1, last));
        for (std::size_t c = 0; c < w; ++c) {
            const auto ci = static_cast<std::ptrdiff_t>(c);
            const double tl = view.wrapped(up, ci - 1), tc = view.wrapped(up, ci), tr = view.wrapped(up, ci + 1);
            const double ml = view.wrapped(r, ci - 1), mr = view.wrapped(r, ci + 1);
            const double bl = view.wrapped(down, ci - 1), bc = view.wrapped(down, ci), br = view.wrapped(down, ci + 1);
            const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            out.at(r, c) = std::sqrt(gx * gx + gy * gy) / kSobelMax;
        }
    }
    return out;
}

// Blur -> downsample -> Sobel -> row-major flatten.
inline PNVector process(const PanoramicView& view, const VisionConfig& cfg) {
    cfg.validate();
    const auto edges = sobel_edges(downsample(gaussian_blur(view, cfg.gaussian_sigma), cfg.thumb_w, cfg.thumb_h));
    return PNVector(edges.pixels().begin(), edges.pixels().end());
}

} // namespace mbhoming
