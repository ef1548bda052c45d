#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mbhoming/path_integrator.hpp"

using namespace mbhoming;

namespace {

// Great-circle distance on the sphere.
double haversine(const GeoFix& a, const GeoFix& b) {
    const double p1 = deg_to_rad(a.lat), p2 = deg_to_rad(b.lat);
    const double dp = p2 - p1, dl = deg_to_rad(b.lon - a.lon);
    const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * kEarthRadius * std::asin(std::sqrt(h));
}

const GeoFix kOrigin{43.234535, 5.443509, 0.0};

} // namespace

TEST(Geo, LocalDistanceMatchesGreatCircleWithinAMillimetre) {
    for (int i = 0; i < 36; ++i) {
        const double bearing = deg_to_rad(10.0 * i + 3.0);
        for (const double d : {1.0, 25.0, 100.0}) {
            const GeoFix f = local_to_geo({d * std::cos(bearing), d * std::sin(bearing)}, kOrigin);
            const Vec2 p = geo_to_local(f, kOrigin);
            EXPECT_LT(std::abs(p.norm() - haversine(kOrigin, f)), 1e-3) << d << " m at " << i;
        }
    }
}

TEST(Geo, RoundTripAndAxes) {
    const Vec2 p{-37.5, 81.25};
    const Vec2 q = geo_to_local(local_to_geo(p, kOrigin), kOrigin);
    EXPECT_NEAR(q.x, p.x, 1e-9);
    EXPECT_NEAR(q.y, p.y, 1e-9);
    // North is +y, east is +x.
    EXPECT_GT(geo_to_local({kOrigin.lat + 1e-4, kOrigin.lon, 0}, kOrigin).y, 0.0);
    EXPECT_GT(geo_to_local({kOrigin.lat, kOrigin.lon + 1e-4, 0}, kOrigin).x, 0.0);
    EXPECT_THROW(geo_to_local({kOrigin.lat + 0.1, kOrigin.lon, 0}, kOrigin), RangeError);
}

TEST(HomingVectorTest, AngleAndDistance) {
    // Facing north with the nest at (3, 4): nest lies 36.87 degrees to the right.
    const auto hv = homing_vector({0.0, 0.0, kPi / 2, 0.0}, {3.0, 4.0});
    EXPECT_NEAR(hv.theta_n, -std::atan(0.75), 1e-12);
    EXPECT_NEAR(hv.theta_n, -0.6435011087932844, 1e-12);
    EXPECT_DOUBLE_EQ(hv.r, 5.0);
    EXPECT_EQ(teaching_signal(hv), TeachingSignal::Right);
    EXPECT_EQ(teaching_signal(homing_vector({0, 0, 0, 0}, {1, 1})), TeachingSignal::Left);
    EXPECT_EQ(teaching_signal(homing_vector({0, 0, 0, 0}, {0.1, 0.1})), TeachingSignal::Nest);
}

TEST(HomingVectorTest, SignFlipsWithMirroredPose) {
    for (int i = 1; i < 20; ++i) {
        const double h = 0.3 * i;
        const auto a = homing_vector({2.0, 1.0, h, 0}, {0, 0});
        const auto b = homing_vector({2.0, -1.0, -h, 0}, {0, 0});
        EXPECT_NEAR(a.theta_n, -b.theta_n, 1e-12);
    }
}

TEST(HeadingFromFixes, HoldsBelowMinimumMove) {
    EXPECT_FALSE(heading_from_fixes({0, 0}, {0.01, 0.0}).has_value());
    EXPECT_NEAR(*heading_from_fixes({0, 0}, {0.0, 1.0}), kPi / 2, 1e-15);
}

TEST(FixStream, DecimatesToReceiverRate) {
    std::vector<LocalPose> truth;
    for (int i = 0; i < 80; ++i) truth.push_back({0.1 * i, 0.0, 0.0, 0.125 * i}); // 10 s at 8 Hz
    const auto fixes = noisy_fix_stream(truth, PINoiseModel::noiseless(), kOrigin);
    ASSERT_EQ(fixes.size(), 20u);
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        EXPECT_NEAR(fixes[i].geo.t, 0.5 * static_cast<double>(i), 1e-12);
        EXPECT_NEAR(geo_to_local(fixes[i].geo, kOrigin).x, fixes[i].pose.x, 1e-9);
    }
}

TEST(FixStream, NoiseHasConfiguredSpread) {
    PINoiseModel n;
    n.update_rate = 8.0;
    n.seed = 99;
    std::vector<LocalPose> truth;
    for (int i = 0; i < 20000; ++i) truth.push_back({0.0, 0.0, 1.0, 0.125 * i});
    const auto fixes = noisy_fix_stream(truth, n, kOrigin);
    ASSERT_EQ(fixes.size(), truth.size());
    double sx = 0, sh = 0;
    for (const auto& f : fixes) {
        sx += f.pose.x * f.pose.x;
        sh += (f.pose.heading - 1.0) * (f.pose.heading - 1.0);
    }
    const double n_f = static_cast<double>(fixes.size());
    EXPECT_NEAR(std::sqrt(sx / n_f), 0.014, 0.0005);
    EXPECT_NEAR(std::sqrt(sh / n_f), deg_to_rad(5.0), deg_to_rad(0.15));
}

TEST(PathIntegratorTest, NoiselessReportedHeadingReproducesTruth) {
    PathIntegratorConfig cfg;
    cfg.origin = kOrigin;
    cfg.nest = {0, 0};
    PathIntegrator pi(cfg);
    const LocalPose p{3.0, -2.0, 0.7, 1.0};
    const auto out = pi.update({local_to_geo(p.position(), kOrigin, 1.0), p});
    ASSERT_TRUE(out.valid);
    const auto hv = homing_vector(p, cfg.nest);
    EXPECT_NEAR(out.hv->theta_n, hv.theta_n, 1e-9);
    EXPECT_NEAR(out.hv->r, hv.r, 1e-9);
    EXPECT_EQ(out.signal, teaching_signal(hv));
}

TEST(PathIntegratorTest, DifferentiatedHeadingNeedsTwoFixes) {
    PathIntegratorConfig cfg;
    cfg.origin = kOrigin;
    cfg.nest = {0, 5};
    cfg.heading_source = HeadingSource::Differentiated;
    PathIntegrator pi(cfg);
    auto fix = [&](Vec2 p, double t) { return PIFix{local_to_geo(p, kOrigin, t), {p.x, p.y, 0.0, t}}; };
    EXPECT_FALSE(pi.update(fix({2, 0}, 0)).valid);
    EXPECT_FALSE(pi.update(fix({2.01, 0}, 0.5)).valid); // below min_move
    const auto out = pi.update(fix({3, 0}, 1.0));
    ASSERT_TRUE(out.valid);
    EXPECT_NEAR(*out.heading, 0.0, 1e-9);
    EXPECT_EQ(out.signal, TeachingSignal::Left);
}

TEST(PathIntegratorTest, InsideNestRadiusSignalsNest) {
    PathIntegratorConfig cfg;
    cfg.origin = kOrigin;
    PathIntegrator pi(cfg);
    const LocalPose p{0.1, 0.1, 0.0, 0.0};
    const auto out = pi.update({local_to_geo(p.position(), kOrigin), p});
    EXPECT_TRUE(out.valid);
    EXPECT_EQ(out.signal, TeachingSignal::Nest);
}
