#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trike/kinematics.hpp"

using namespace trike;

namespace {
const WheelGeometry kGeom{0.1, 0.4};
}

TEST(WheelSpeeds, SymmetricWheelsDriveStraight) {
    const auto twist = wheel_speeds_to_body(10.0, 10.0, kGeom);
    EXPECT_DOUBLE_EQ(twist.vx, 1.0);
    EXPECT_DOUBLE_EQ(twist.omega, 0.0);
}

TEST(WheelSpeeds, RightWheelFasterTurnsLeft) {
    // V_L = 0.8, V_R = 1.2 -> vx = 1, omega = +1 (anticlockwise)
    const auto twist = wheel_speeds_to_body(8.0, 12.0, kGeom);
    EXPECT_DOUBLE_EQ(twist.vx, 1.0);
    EXPECT_DOUBLE_EQ(twist.omega, 1.0);
}

TEST(WheelSpeeds, SwapAntisymmetry) {
    const auto a = wheel_speeds_to_body(12.0, 8.0, kGeom);
    const auto b = wheel_speeds_to_body(8.0, 12.0, kGeom);
    EXPECT_DOUBLE_EQ(a.vx, b.vx);
    EXPECT_DOUBLE_EQ(a.omega, -b.omega);
}

TEST(WheelSpeeds, LinearInWheelRates) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double l1 = dist(rng), r1 = dist(rng), l2 = dist(rng), r2 = dist(rng);
        const double a = 1.3, b = -0.7;
        const auto t1 = wheel_speeds_to_body(l1, r1, kGeom);
        const auto t2 = wheel_speeds_to_body(l2, r2, kGeom);
        const auto mix = wheel_speeds_to_body(a * l1 + b * l2, a * r1 + b * r2, kGeom);
        EXPECT_NEAR(mix.vx, a * t1.vx + b * t2.vx, 1e-12);
        EXPECT_NEAR(mix.omega, a * t1.omega + b * t2.omega, 1e-12);
    }
}

TEST(WheelSpeeds, ForwardRelationsReproduced) {
    // substituting the implemented omega back: V_L = vx - (d/2) w, V_R = vx + (d/2) w,
    // exact up to the rounding of the division chain (speeds are O(1) here)
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> dist(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double wl = dist(rng), wr = dist(rng);
        const auto twist = wheel_speeds_to_body(wl, wr, kGeom);
        const double v_l = twist.vx - kGeom.track_width / 2.0 * twist.omega;
        const double v_r = twist.vx + kGeom.track_width / 2.0 * twist.omega;
        EXPECT_NEAR(v_l, kGeom.wheel_radius * wl, 1e-13);
        EXPECT_NEAR(v_r, kGeom.wheel_radius * wr, 1e-13);
    }
}

TEST(Curvature, StraightLine) {
    const auto c = curvature({1.0, 0.0});
    EXPECT_DOUBLE_EQ(c.kappa, 0.0);
    EXPECT_TRUE(c.straight());
}

TEST(Curvature, UnitTurn) {
    const auto c = curvature({1.0, 1.0});
    EXPECT_DOUBLE_EQ(c.kappa, 1.0);
    EXPECT_DOUBLE_EQ(c.radius, 1.0);
    EXPECT_FALSE(c.straight());
}

TEST(Curvature, SpinInPlaceRejected) {
    EXPECT_THROW(curvature({1e-9, 0.5}), DegenerateSpeed);
}

TEST(RadiusFromWheels, MatchesHandArithmetic) {
    // R = (d/2)(v_r + v_l)/(v_r - v_l) = 0.2 * 2.0/0.4 = 1.0
    const auto r = radius_from_wheels(0.8, 1.2, 0.4);
    ASSERT_TRUE(r.has_value());
    EXPECT_DOUBLE_EQ(*r, 1.0);
}

TEST(RadiusFromWheels, EqualSpeedsAreStraight) {
    EXPECT_FALSE(radius_from_wheels(1.0, 1.0, 0.4).has_value());
}

TEST(RadiusFromWheels, SymmetricSpinHasZeroRadius) {
    const auto r = radius_from_wheels(-1.0, 1.0, 0.4);
    ASSERT_TRUE(r.has_value());
    EXPECT_DOUBLE_EQ(*r, 0.0);
}

TEST(ConsistencyTriangle, CurvatureAgreesWithWheelRadius) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-15.0, 15.0);
    int checked = 0;
    while (checked < 1000) {
        const double wl = dist(rng), wr = dist(rng);
        const double v_l = kGeom.wheel_radius * wl, v_r = kGeom.wheel_radius * wr;
        const auto twist = wheel_speeds_to_body(wl, wr, kGeom);
        if (std::abs(twist.vx) < 1e-3 || std::abs(twist.omega) < 1e-3) continue;
        const auto direct = radius_from_wheels(v_l, v_r, kGeom.track_width);
        ASSERT_TRUE(direct.has_value());
        const auto c = curvature(twist);
        EXPECT_NEAR(c.radius, *direct, 1e-12 * std::abs(*direct));
        EXPECT_NEAR(c.kappa * c.radius, 1.0, 1e-12);
        ++checked;
    }
}

TEST(SteerAngle, ZeroOmegaIsZeroSteer) {
    EXPECT_DOUBLE_EQ(steer_angle_ref(0.0, 1.0), 0.0);
}

TEST(SteerAngle, UnitProductGivesFortyFiveDegrees) {
    EXPECT_DOUBLE_EQ(steer_angle_ref(1.0, 1.0, 1.0), M_PI / 4.0);
}

TEST(SteerAngle, SmallAngleLinearization) {
    // atan(0.1) = 0.09967, within 0.34% of the linear value
    const double steer = steer_angle_ref(0.1, 1.0);
    EXPECT_NEAR(steer, 0.09966865, 1e-7);
    EXPECT_NEAR(steer, 0.1, 0.0034 * 0.1);
    // within 1% of omega*horizon over the quoted linear range
    for (double x : {0.05, 0.1, 0.17}) {
        EXPECT_NEAR(steer_angle_ref(x, 1.0), x, 0.01 * x);
    }
}

TEST(SteerAngle, LimitsEnforced) {
    EXPECT_THROW(steer_angle_ref(1.0, 0.0), HorizonNonpositive);
    EXPECT_THROW(steer_angle_ref(2.0, 1.0, 0.5), SteerSaturated);
    EXPECT_THROW(steer_angle_ref(20.0, 1.0, 10.0), SteerSaturated);  // beyond 85 degrees
    EXPECT_DOUBLE_EQ(steer_angle_ref_clamped(2.0, 1.0, 0.5), 0.5);
}

TEST(IntegratePose, StraightLine) {
    const auto p = integrate_pose({0.0, 0.0, 0.0}, {1.0, 0.0}, 2.0);
    EXPECT_DOUBLE_EQ(p.x, 2.0);
    EXPECT_DOUBLE_EQ(p.y, 0.0);
    EXPECT_DOUBLE_EQ(p.heading, 0.0);
}

TEST(IntegratePose, FullCircleCloses) {
    for (const double dt : {2.0 * M_PI / 100, 2.0 * M_PI / 941, 2.0 * M_PI / 4000}) {
        Pose p{0.25, -1.0, 0.5};
        const auto n = static_cast<std::size_t>(std::llround(2.0 * M_PI / dt));
        for (std::size_t k = 0; k < n; ++k) p = integrate_pose(p, {1.0, 1.0}, dt);
        EXPECT_NEAR(p.x, 0.25, 1e-9);
        EXPECT_NEAR(p.y, -1.0, 1e-9);
        EXPECT_NEAR(p.heading, 0.5, 1e-9);
    }
}

TEST(IntegratePose, VanishingStepLeavesPose) {
    const auto p = integrate_pose({1.0, 2.0, 0.3}, {1.0, 0.5}, 1e-12);
    EXPECT_NEAR(p.x, 1.0, 1e-9);
    EXPECT_NEAR(p.y, 2.0, 1e-9);
    EXPECT_NEAR(p.heading, 0.3, 1e-9);
}

TEST(IntegratePose, SubdivisionInvariance) {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> vdist(-2.0, 2.0);
    std::uniform_real_distribution<double> wdist(-1.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        const BodyTwist twist{vdist(rng), wdist(rng)};
        const double dt = 0.8;
        const auto whole = integrate_pose({0, 0, 0}, twist, dt);
        Pose split{0, 0, 0};
        const int parts = 7;
        for (int i = 0; i < parts; ++i) split = integrate_pose(split, twist, dt / parts);
        EXPECT_NEAR(split.x, whole.x, 1e-12);
        EXPECT_NEAR(split.y, whole.y, 1e-12);
        EXPECT_NEAR(std::abs(wrap_angle(split.heading - whole.heading)), 0.0, 1e-12);
    }
}

TEST(WrapAngle, Convention) {
    EXPECT_DOUBLE_EQ(wrap_angle(M_PI), M_PI);      // pi stays pi
    EXPECT_DOUBLE_EQ(wrap_angle(-M_PI), M_PI);     // -pi maps to pi
    EXPECT_NEAR(wrap_angle(3.0 * M_PI / 2.0), -M_PI / 2.0, 1e-15);
    EXPECT_NEAR(wrap_angle(-7.0 * M_PI), M_PI, 1e-12);
}
