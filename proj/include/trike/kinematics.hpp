#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "trike/errors.hpp"

namespace trike {

/// Minimum body speed for a defined curvature.
inline constexpr double kSpeedEpsilon = 1e-6;  // m/s

struct WheelGeometry {
    double wheel_radius = 0.0;  // m, > 0
    double track_width = 0.0;   // m, > 0
};

inline WheelGeometry make_geometry(double wheel_radius, double track_width) {
    if (wheel_radius <= 0.0 || track_width <= 0.0)
        throw ConfigMismatch("WheelGeometry: radius and track width must be positive");
    return {wheel_radius, track_width};
}

/// Planar body rates: forward speed along the body axis and yaw rate,
/// positive anticlockwise.
struct BodyTwist {
    double vx = 0.0;     // m/s
    double omega = 0.0;  // rad/s
};

/// Planar pose; heading wrapped to (-pi, pi].
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

inline double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0) a += 2.0 * M_PI;
    a -= M_PI;
    // fmod puts exact pi at -pi; keep the (-pi, pi] convention
    return a == -M_PI ? M_PI : a;
}

/// Path curvature sample. A straight line is the distinguished case with
/// kappa = 0 and infinite radius; kappa * radius = 1 whenever radius is
/// finite.
struct CurvatureSample {
    double kappa = 0.0;   // 1/m
    double radius = std::numeric_limits<double>::infinity();  // m, signed

    bool straight() const { return !std::isfinite(radius); }
};

/// Rear-axle differential-drive kinematics: wheel rim speeds are r*w, the
/// body speed is their mean and the yaw rate their difference over the track:
///
///   vx    = (V_L + V_R) / 2
///   omega = (V_R - V_L) / d
///
/// The sign convention keeps V_L = vx - (d/2) omega and V_R = vx + (d/2) omega
/// exact (anticlockwise positive, right wheel faster when turning left).
inline BodyTwist wheel_speeds_to_body(double omega_left, double omega_right,
                                      const WheelGeometry& geom) {
    const double v_l = geom.wheel_radius * omega_left;
    const double v_r = geom.wheel_radius * omega_right;
    return {(v_l + v_r) / 2.0, (v_r - v_l) / geom.track_width};
}

/// Inverse of the above; the rear wheels are unactuated followers, so
/// odometry synthesis derives their rim speeds from the body twist.
inline std::pair<double, double> body_to_wheel_speeds(const BodyTwist& twist,
                                                      const WheelGeometry& geom) {
    const double v_l = twist.vx - geom.track_width / 2.0 * twist.omega;
    const double v_r = twist.vx + geom.track_width / 2.0 * twist.omega;
    return {v_l / geom.wheel_radius, v_r / geom.wheel_radius};
}

/// kappa = omega / vx. Near-zero forward speed with a nonzero yaw rate has
/// no defined curvature (spin in place) and throws DegenerateSpeed.
inline CurvatureSample curvature(const BodyTwist& twist) {
    if (std::abs(twist.vx) < kSpeedEpsilon) {
        if (twist.omega != 0.0)
            throw DegenerateSpeed("curvature: yaw without forward speed");
        return {};
    }
    if (twist.omega == 0.0) return {};
    return {twist.omega / twist.vx, twist.vx / twist.omega};
}

/// Signed turn radius to the midpoint between the rear wheels,
/// R = (d/2)(v_r + v_l)/(v_r - v_l); nullopt marks straight-line motion.
inline std::optional<double> radius_from_wheels(double v_left, double v_right,
                                                double track_width) {
    const double diff = v_right - v_left;
    const double scale = std::max({std::abs(v_left), std::abs(v_right), 1e-9});
    if (std::abs(diff) < 1e-12 * scale) return std::nullopt;
    return track_width / 2.0 * (v_right + v_left) / diff;
}

/// Steering reference from a commanded yaw rate over a lookahead horizon:
/// steer = atan(omega * horizon). Saturates against the mechanical limit;
/// beyond 85 degrees the arctangent is too flat to actuate meaningfully and
/// the command is rejected as saturated too.
inline double steer_angle_ref(double omega, double horizon, double steer_limit = 0.5) {
    if (horizon <= 0.0) throw HorizonNonpositive("steer_angle_ref: horizon <= 0");
    static const double kMaxTan = std::tan(85.0 * M_PI / 180.0);
    if (std::abs(omega * horizon) >= kMaxTan)
        throw SteerSaturated("steer_angle_ref: command beyond 85 degrees");
    const double steer = std::atan(omega * horizon);
    if (std::abs(steer) > steer_limit)
        throw SteerSaturated("steer_angle_ref: command beyond the mechanical limit");
    return steer;
}

/// Non-throwing companion used inside control loops, where hitting the
/// mechanical stop is a normal operating condition.
inline double steer_angle_ref_clamped(double omega, double horizon, double steer_limit) {
    if (horizon <= 0.0) throw HorizonNonpositive("steer_angle_ref_clamped: horizon <= 0");
    const double steer = std::atan(omega * horizon);
    return std::clamp(steer, -steer_limit, steer_limit);
}

namespace detail {

inline double sinc_half(double x) {
    // sin(x)/x with a series for small arguments
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
    return std::sin(x) / x;
}

}  // namespace detail

/// Advance a pose along the exact circular arc described by a constant twist
/// over dt. The chord form  |chord| = vx*dt*sinc(omega*dt/2)  at heading
/// h + omega*dt/2 is algebraically identical to the usual R*(sin(h') - sin(h))
/// arc equations but stays smooth through omega = 0, so subdividing dt does
/// not change the endpoint.
inline Pose integrate_pose(const Pose& pose, const BodyTwist& twist, double dt) {
    if (dt <= 0.0) throw ConfigMismatch("integrate_pose: dt <= 0");
    const double half_turn = twist.omega * dt / 2.0;
    const double chord = twist.vx * dt * detail::sinc_half(half_turn);
    const double dir = pose.heading + half_turn;
    return {pose.x + chord * std::cos(dir), pose.y + chord * std::sin(dir),
            wrap_angle(pose.heading + twist.omega * dt)};
}

}  // namespace trike
