#include <gtest/gtest.h>

#include <cmath>

#include "mbhoming/sip_controller.hpp"
#include "mbhoming/vehicle.hpp"

using namespace mbhoming;

namespace {

FamiliarityReadout readout(double la, double ra, double lb, double rb, double nest = 1.0) {
    FamiliarityReadout f;
    f[MBONId::LeftA] = la;
    f[MBONId::RightA] = ra;
    f[MBONId::LeftB] = lb;
    f[MBONId::RightB] = rb;
    f[MBONId::Nest] = nest;
    return f;
}

} // namespace

TEST(LateralError, AveragesBothHemispheres) {
    EXPECT_DOUBLE_EQ(lateral_error(readout(0.2, 0.6, 0.4, 0.4)), -0.2);
    EXPECT_DOUBLE_EQ(lateral_error(readout(1, 1, 1, 1)), 0.0);
    // Left banks more familiar: turn left.
    EXPECT_LT(lateral_error(readout(0.1, 0.9, 0.1, 0.9)), 0.0);
}

TEST(Steering, PidTermsMatchHandComputation) {
    SteeringState s;
    s.gains = {2.0, 0.5, 0.1, 10.0};
    s.dt = 0.5;
    s.max_steer = 100.0;
    // e = 0.4: I = 0.2, D = 0.8.
    EXPECT_NEAR(steering(s, 0.4), 2.0 * 0.4 + 0.5 * 0.2 + 0.1 * 0.8, 1e-15);
    // e = 0.1: I = 0.25, D = -0.6.
    EXPECT_NEAR(steering(s, 0.1), 2.0 * 0.1 + 0.5 * 0.25 + 0.1 * -0.6, 1e-15);
}

TEST(Steering, OutputAndIntegralAreClamped) {
    SteeringState s;
    s.gains = {1.0, 1.0, 0.0, 0.5};
    s.dt = 1.0;
    s.max_steer = 0.3;
    for (int i = 0; i < 10; ++i) {
        const double u = steering(s, 5.0);
        EXPECT_LE(std::abs(u), 0.3);
        EXPECT_LE(std::abs(s.integral), 0.5);
    }
    EXPECT_DOUBLE_EQ(s.integral, 0.5);
}

TEST(ThrottleTest, ExponentialMovingAverage) {
    Throttle t(0.8, 0.2);
    // Starts at full speed; one step toward 0 drops by alpha.
    EXPECT_NEAR(t.update(0.0), 0.8 * 0.8, 1e-15);
    EXPECT_NEAR(t.update(0.0), 0.8 * 0.64, 1e-15);
    EXPECT_NEAR(t.update(1.0), 0.8 * (0.64 * 0.8 + 0.2), 1e-15);
    Throttle z(0.8, 0.2);
    for (int i = 0; i < 400; ++i) z.update(0.0);
    EXPECT_LT(z.update(0.0), 1e-30);
}

TEST(Sip, FourMbonModeHoldsFullSpeed) {
    SipController c(SteeringState{}, 0.8);
    for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(c.step(readout(0.5, 0.5, 0.5, 0.5, 0.0), ControlMode::FourMBON).cmd.speed, 0.8);
    SipController d(SteeringState{}, 0.8);
    EXPECT_LT(d.step(readout(0.5, 0.5, 0.5, 0.5, 0.0), ControlMode::FiveMBON).cmd.speed, 0.8);
}

TEST(Vehicle, TurnRadiusMatchesClosedForm) {
    VehicleParams p;
    const double expected = p.wheelbase / std::tan(p.max_steer);
    EXPECT_NEAR(p.min_turn_radius(), 0.294448637286709, 1e-12);
    EXPECT_NEAR(p.min_turn_radius(), expected, 1e-15);

    // Full lock for one revolution traces a circle of that radius and closes.
    const double v = 0.5;
    const double period = 2 * kPi * expected / v;
    const int steps = 1000;
    const double dt = period / steps;
    VehicleState s{0, 0, 0, v, 0};
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    for (int i = 0; i < steps; ++i) {
        s = step_vehicle(s, {-p.max_steer, v}, dt, p);
        min_x = std::min(min_x, s.x);
        max_x = std::max(max_x, s.x);
        min_y = std::min(min_y, s.y);
        max_y = std::max(max_y, s.y);
    }
    EXPECT_NEAR(s.x, 0.0, 1e-9);
    EXPECT_NEAR(s.y, 0.0, 1e-9);
    EXPECT_NEAR((max_y - min_y) / 2.0, expected, expected * 1e-6);
    EXPECT_NEAR((max_x - min_x) / 2.0, expected, expected * 1e-6);
    // Negative steer turns left (counter-clockwise): the circle lies at y > 0.
    EXPECT_GT(max_y, 0.5 * expected);
}

TEST(Vehicle, StraightLineAndLimits) {
    VehicleParams p;
    VehicleState s{1, 2, kPi / 2, 0, 0};
    s = step_vehicle(s, {0.0, 5.0}, 0.25, p);
    EXPECT_DOUBLE_EQ(s.speed, p.v_max);
    EXPECT_NEAR(s.x, 1.0, 1e-15);
    EXPECT_NEAR(s.y, 2.0 + 0.8 * 0.25, 1e-15);
    s = step_vehicle(s, {2.0, -1.0}, 0.25, p);
    EXPECT_DOUBLE_EQ(s.speed, 0.0);
    EXPECT_DOUBLE_EQ(s.steer, p.max_steer);
    EXPECT_THROW(step_vehicle(s, {}, 0.0, p), InputError);
}

TEST(Vehicle, StepsComposeExactlyAlongTheArc) {
    VehicleParams p;
    VehicleState a{0, 0, 0.3, 0, 0}, b = a;
    const DriveCommand cmd{0.2, 0.6};
    a = step_vehicle(a, cmd, 0.2, p);
    b = step_vehicle(step_vehicle(b, cmd, 0.1, p), cmd, 0.1, p);
    EXPECT_NEAR(a.x, b.x, 1e-14);
    EXPECT_NEAR(a.y, b.y, 1e-14);
    EXPECT_NEAR(a.heading, b.heading, 1e-14);
}
