#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mbhoming/optic_lobe.hpp"

using namespace mbhoming;

namespace {

PanoramicView random_view(std::size_t w, std::size_t h, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PanoramicView v(w, h);
    for (auto& p : v.pixels()) p = u(gen);
    return v;
}

// Explicit 3x3 correlation with the two Sobel kernels, columns wrapped and
// rows clamped.
PanoramicView sobel_oracle(const PanoramicView& in) {
    const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    const int w = static_cast<int>(in.width()), h = static_cast<int>(in.height());
    PanoramicView out(in.width(), in.height());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double gx = 0, gy = 0;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = std::clamp(r + dr, 0, h - 1);
                    const int cc = ((c + dc) % w + w) % w;
                    const double p = in.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                    gx += kx[dr + 1][dc + 1] * p;
                    gy += ky[dr + 1][dc + 1] * p;
                }
            }
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = std::hypot(gx, gy) / (4.0 * std::sqrt(2.0));
        }
    }
    return out;
}

} // namespace

TEST(Sobel, MatchesBruteForceConvolution) {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const auto v = random_view(37, 23, seed);
        const auto got = sobel_edges(v);
        const auto want = sobel_oracle(v);
        for (std::size_t i = 0; i < got.pixels().size(); ++i) {
            ASSERT_NEAR(got.pixels()[i], want.pixels()[i], 1e-12);
        }
    }
}

TEST(Sobel, OutputInUnitRange) {
    // A checkerboard drives both gradients hard; the normalization keeps it <= 1.
    PanoramicView v(16, 16);
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c) v.at(r, c) = (c < 8) ? 1.0 : 0.0;
    const auto e = sobel_edges(v);
    for (const double p : e.pixels()) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    const auto r = sobel_edges(random_view(20, 20, 9));
    for (const double p : r.pixels()) EXPECT_LE(p, 1.0);
}

TEST(Sobel, FlatImageHasNoEdges) {
    const auto e = sobel_edges(PanoramicView(10, 6, 0.4));
    for (const double p : e.pixels()) EXPECT_DOUBLE_EQ(p, 0.0);
}

TEST(Gaussian, KernelNormalizedAndSymmetric) {
    const auto k = gaussian_kernel(2.0);
    ASSERT_EQ(k.size(), 13u); // radius ceil(3 sigma) = 6
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
    for (std::size_t i = 0; i < k.size() / 2; ++i) EXPECT_DOUBLE_EQ(k[i], k[k.size() - 1 - i]);
    // Centre weight from the continuous density, renormalized over the support.
    double z = 0;
    for (int i = -6; i <= 6; ++i) z += std::exp(-i * i / 8.0);
    EXPECT_NEAR(k[6], 1.0 / z, 1e-15);
    EXPECT_THROW(gaussian_kernel(0.0), ConfigError);
}

TEST(Gaussian, BlurPreservesMeanOfWrappedRows) {
    // Horizontal wrap conserves each row sum; vertical clamp does not, so
    // use a view that is constant along each column.
    PanoramicView v(40, 8);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 40; ++c) v.at(r, c) = std::sin(0.3 * static_cast<double>(c));
    const auto b = gaussian_blur(v, 1.5);
    for (std::size_t r = 0; r < 8; ++r) {
        double a = 0, s = 0;
        for (std::size_t c = 0; c < 40; ++c) {
            a += v.at(r, c);
            s += b.at(r, c);
        }
        EXPECT_NEAR(a, s, 1e-12);
    }
}

TEST(Gaussian, CommutesWithColumnRotation) {
    const auto v = random_view(30, 10, 3);
    const auto a = gaussian_blur(v.rotated(7), 2.0);
    const auto b = gaussian_blur(v, 2.0).rotated(7);
    for (std::size_t i = 0; i < a.pixels().size(); ++i) EXPECT_NEAR(a.pixels()[i], b.pixels()[i], 1e-14);
}

TEST(Downsample, BlockMeanWhenSizesDivide) {
    const auto v = random_view(12, 8, 4);
    const auto d = downsample(v, 4, 2);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            double m = 0;
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 3; ++j) m += v.at(r * 4 + i, c * 3 + j);
            EXPECT_NEAR(d.at(r, c), m / 12.0, 1e-14);
        }
    }
}

TEST(Downsample, FractionalAreaPreservesTotal) {
    const auto v = random_view(288, 128, 5);
    const auto d = downsample(v, 51, 15);
    const double sv = std::accumulate(v.pixels().begin(), v.pixels().end(), 0.0) / (288.0 * 128.0);
    const double sd = std::accumulate(d.pixels().begin(), d.pixels().end(), 0.0) / (51.0 * 15.0);
    EXPECT_NEAR(sv, sd, 1e-12);
    EXPECT_THROW(downsample(v, 300, 10), InputError);
}

TEST(Process, ProducesUnitRangePNVectorOfThumbSize) {
    const auto pn = process(random_view(288, 128, 6), VisionConfig::thumb32());
    ASSERT_EQ(pn.size(), 1024u);
    for (const double p : pn) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_EQ(VisionConfig::pn750().pn_count(), 750u);
}

TEST(Process, RotationByWholeThumbColumnsShiftsPNVector) {
    // 288 source columns onto 32: 9 source columns per thumbnail column.
    const auto v = random_view(288, 128, 7);
    const auto vc = VisionConfig::thumb32();
    const auto a = process(v, vc);
    const auto b = process(v.rotated(9 * 5), vc);
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c) EXPECT_NEAR(b[r * 32 + (c + 5) % 32], a[r * 32 + c], 1e-12);
}
