#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mbhoming/world.hpp"

using namespace mbhoming;

namespace {

// One cylinder in an otherwise featureless world.
World single_landmark(Vec2 at, double width, double height, double base = 0.0) {
    World w;
    w.skyline_base_deg = 0.0;
    Landmark l;
    l.shape = LandmarkShape::Cylinder;
    l.x = at.x;
    l.y = at.y;
    l.width = width;
    l.height = height;
    l.base = base;
    l.albedo = 0.2;
    w.landmarks = {l};
    return w;
}

// 1 degree rows with the horizon on a row boundary.
RenderConfig degree_rows() { return {360, 105, -35.0, 70.0, 0.0}; }

} // namespace

TEST(Render, WholeColumnHeadingChangeIsAnExactShift) {
    const World w = generate_world(4);
    const RenderConfig rc{288, 64, -35.0, 70.0, 0.0};
    const double col = rc.column_width();
    for (const double h0 : {0.0, 0.37, -2.1}) {
        const auto base = render_panorama(w, {1.0, -0.5}, h0, rc);
        for (const int k : {1, 5, 143, -20}) {
            const auto turned = render_panorama(w, {1.0, -0.5}, h0 + k * col, rc);
            const auto shifted = base.rotated(k);
            if (h0 == 0.0) {
                // Whole-column headings take the exact integer path.
                EXPECT_EQ(turned, shifted) << k;
                continue;
            }
            // Otherwise the sub-column phase agrees only to rounding.
            for (std::size_t i = 0; i < turned.pixels().size(); ++i) {
                ASSERT_NEAR(turned.pixels()[i], shifted.pixels()[i], 1e-9) << "h0 " << h0 << " k " << k;
            }
        }
    }
}

TEST(Render, LandmarkAheadAppearsInTheCentreColumns) {
    const World w = single_landmark({10.0, 0.0}, 1.0, 4.0);
    const auto rc = degree_rows();
    const auto v = render_panorama(w, {0, 0}, 0.0, rc);
    const std::size_t horizon_above = 69; // row just above the horizon
    EXPECT_LT(v.at(horizon_above, rc.width / 2), 0.5);
    EXPECT_DOUBLE_EQ(v.at(horizon_above, 0), w.sky_albedo);
    // Turning left by 90 degrees moves the landmark into the right half.
    const auto left = render_panorama(w, {0, 0}, kPi / 2, rc);
    EXPECT_LT(left.at(horizon_above, 3 * rc.width / 4), 0.5);
}

TEST(Render, ApparentHeightIsArctanOfHeightOverDistance) {
    for (const double d : {4.0, 7.5, 15.0}) {
        const double h = 3.0;
        const World w = single_landmark({d, 0.0}, 0.5, h);
        const auto rc = degree_rows();
        // The centre column looks exactly along the heading.
        const auto v = render_panorama(w, {0, 0}, 0.0, rc);
        double covered = 0.0;
        for (std::size_t r = 0; r < 70; ++r) {
            covered += (w.sky_albedo - v.at(r, rc.width / 2)) / (w.sky_albedo - 0.2);
        }
        const double t = d - 0.25; // front surface of the cylinder
        EXPECT_NEAR(covered, rad_to_deg(std::atan(h / t)), 1e-9) << d;
    }
}

TEST(Render, RaisedCanopyLeavesAGapAndCoversOverhead) {
    const World w = single_landmark({5.0, 0.0}, 2.0, 6.0, 2.0);
    const auto rc = degree_rows();
    EXPECT_FALSE(w.blocked({5.0, 0.0}));
    const auto v = render_panorama(w, {0, 0}, 0.0, rc);
    const std::size_t c = rc.width / 2;
    // Just above the horizon the gap under the canopy shows sky.
    EXPECT_DOUBLE_EQ(v.at(69, c), w.sky_albedo);
    // atan(3/4) is about 36.9 degrees: canopy there.
    EXPECT_NEAR(v.at(70 - 30, c), 0.2, 1e-12);
    // Standing underneath, the canopy fills the top of the image.
    const auto under = render_panorama(w, {5.0, 0.0}, 0.0, rc);
    EXPECT_NEAR(under.at(0, c), 0.2, 1e-12);
}

TEST(Render, GroundTextureNeedsCameraHeight) {
    World w = single_landmark({10, 0}, 1, 3);
    w.ground_texture = {{3.0, 1.0, 0.2, 0.0}, {-1.0, 2.5, 0.1, 1.0}};
    RenderConfig rc = degree_rows();
    const auto flat = render_panorama(w, {0, 0}, 0.3, rc);
    for (std::size_t r = 70; r < rc.height; ++r) EXPECT_NEAR(flat.at(r, 17), w.ground_albedo, 1e-12);
    rc.camera_height = 0.3;
    const auto raised = render_panorama(w, {0, 0}, 0.3, rc);
    double spread = 0.0;
    for (std::size_t r = 71; r < rc.height; ++r) spread = std::max(spread, std::abs(raised.at(r, 17) - w.ground_albedo));
    EXPECT_GT(spread, 0.01);
}

TEST(Render, InsideLandmarkIsAnError) {
    const World w = single_landmark({0.0, 0.0}, 1.0, 2.0);
    EXPECT_THROW(render_panorama(w, {0.1, 0.0}, 0.0, degree_rows()), RenderError);
}

TEST(WorldGen, DeterministicAndValid) {
    const World a = generate_world(11), b = generate_world(11);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == generate_world(12));
    EXPECT_NO_THROW(a.validate());
    EXPECT_FALSE(a.blocked(a.nest));
}

TEST(WorldFile, RoundTripIsExact) {
    WorldParams p;
    p.n_trees = 4;
    p.ground_waves = 3;
    const World w = generate_world(21, p);
    std::ostringstream os;
    write_world(os, w);
    std::istringstream is(os.str());
    const World back = read_world(is);
    EXPECT_EQ(back, w);
    std::ostringstream again;
    write_world(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(WorldFile, ErrorsCarryTheLineNumber) {
    std::istringstream bad("mbhoming-world 1\nseed 3\nlandmark pyramid 1 2 3 4 0.5\n");
    try {
        read_world(bad);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset(), 3u);
    }
    std::istringstream no_header("seed 3\n");
    EXPECT_THROW(read_world(no_header), FormatError);
}

TEST(Pgm, HeaderAndSize) {
    std::ostringstream os;
    write_pgm(os, PanoramicView(4, 3, 0.5));
    const auto s = os.str();
    EXPECT_EQ(s.substr(0, 11), "P5\n4 3\n255\n");
    EXPECT_EQ(s.size(), 11u + 12u);
    EXPECT_EQ(static_cast<unsigned char>(s.back()), 128);
}
