#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "trike/discrete.hpp"
#include "trike/errors.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Ideal PID gains: D(s) = kp + ki/s + kd*s.
struct PidGains {
    double kp = 0.0;  // dimensionless
    double ki = 0.0;  // 1/s
    double kd = 0.0;  // s
};

/// Frequency-domain design point. The crossover may be derived from the rise
/// time through crossover_from_rise_time or set directly; theta is the
/// controller phase at crossover, signed (negative = lag).
struct DesignSpec {
    double rise_time = 0.0;        // seconds, > 0
    double theta = 0.0;            // radians, |theta| < pi/2
    std::optional<double> omega_w1;  // rad/s crossover override
    double ki_choice = 0.0;        // the free integral gain, >= 0
};

/// Bandwidth heuristic omega = 1.8 / tr, the standard second-order
/// approximation. Overridable through DesignSpec::omega_w1.
inline double crossover_from_rise_time(double rise_time) {
    if (rise_time <= 0.0) throw NonpositiveRiseTime("crossover_from_rise_time: tr <= 0");
    return 1.8 / rise_time;
}

/// Gain-crossover PID synthesis. With |G| the plant magnitude at omega_w1:
///
///   kp = cos(theta) / |G|
///   kd*w - ki/w = sin(theta) / |G|   (kd solved for the chosen ki)
///
/// which places the loop gain at exactly 1 with controller phase theta at
/// the crossover. Works identically for a continuous plant or its w-plane
/// image; only the magnitude at j*omega_w1 enters.
inline PidGains design_pid(const TransferFunction& plant, double omega_w1, double theta,
                           double ki) {
    if (std::abs(theta) >= M_PI / 2.0)
        throw ThetaOutOfRange("design_pid: |theta| must be below pi/2");
    const double mag = std::abs(freq_response(plant, omega_w1));
    if (mag < 1e-12) throw PlantZeroGain("design_pid: plant gain vanishes at omega_w1");
    PidGains g;
    g.kp = std::cos(theta) / mag;
    g.ki = ki;
    g.kd = (std::sin(theta) / mag + ki / omega_w1) / omega_w1;
    return g;
}

/// Convenience ki default when the caller leaves the free parameter open:
/// one twentieth of the crossover, weighted by the proportional gain.
inline double default_ki(const TransferFunction& plant, double omega_w1, double theta) {
    const double mag = std::abs(freq_response(plant, omega_w1));
    if (mag < 1e-12) throw PlantZeroGain("default_ki: plant gain vanishes at omega_w1");
    return std::cos(theta) / mag * omega_w1 / 20.0;
}

/// The ki that cancels the derivative term for a lag design (theta < 0):
/// ki = -sin(theta) * omega_w1 / |G| makes kd exactly zero, leaving a pure
/// PI with phase theta at the crossover.
inline double ki_for_zero_kd(const TransferFunction& plant, double omega_w1, double theta) {
    const double mag = std::abs(freq_response(plant, omega_w1));
    if (mag < 1e-12) throw PlantZeroGain("ki_for_zero_kd: plant gain vanishes at omega_w1");
    return -std::sin(theta) * omega_w1 / mag;
}

/// D(j*omega) of the ideal PID.
inline std::complex<double> pid_response(const PidGains& g, double omega) {
    return {g.kp, g.kd * omega - g.ki / omega};
}

struct DesignReport {
    double loop_gain = 0.0;         // |D(jw1) G(jw1)|, 1 for gains from design_pid
    double controller_phase = 0.0;  // arg D(jw1), radians
};

/// Check the crossover identities for a gain set against a plant.
inline DesignReport verify_design(const TransferFunction& plant, const PidGains& gains,
                                  double omega_w1) {
    const double mag = std::abs(freq_response(plant, omega_w1));
    if (mag < 1e-12) throw PlantZeroGain("verify_design: plant gain vanishes at omega_w1");
    const std::complex<double> d = pid_response(gains, omega_w1);
    return {std::abs(d) * mag, std::atan2(d.imag(), d.real())};
}

/// Discrete PID realized as
///
///   D(z) = kp + (ki*T/2)(z+1)/(z-1) + kd (z-1)/(T z)
///
/// trapezoidal integrator, backward-difference differentiator. The step
/// recursion below is algebraically the same filter. When output limits are
/// set the output clamps and the integrator freezes while clamped
/// (conditional integration anti-windup).
class DigitalPid {
  public:
    DigitalPid() = default;
    DigitalPid(const PidGains& gains, double sample_time,
               std::optional<std::pair<double, double>> output_limits = std::nullopt)
        : gains_(gains), sample_time_(sample_time), limits_(output_limits) {
        if (sample_time <= 0.0) throw NonpositiveSampleTime("DigitalPid: sample_time <= 0");
        if (limits_ && limits_->first > limits_->second)
            throw ConfigMismatch("DigitalPid: output limits reversed");
    }

    const PidGains& gains() const { return gains_; }
    double sample_time() const { return sample_time_; }
    const std::optional<std::pair<double, double>>& output_limits() const { return limits_; }

    void set_output_limits(std::optional<std::pair<double, double>> limits) { limits_ = limits; }

    /// Advance one period with the given error sample and return the control.
    double step(double error) {
        const double T = sample_time_;
        const double integ_next = integrator_ + gains_.ki * T / 2.0 * (error + prev_error_);
        const double deriv = gains_.kd / T * (error - prev_error_);
        double out = gains_.kp * error + integ_next + deriv;
        bool commit = true;
        if (limits_) {
            if (out > limits_->second) {
                out = limits_->second;
                commit = false;
            } else if (out < limits_->first) {
                out = limits_->first;
                commit = false;
            }
        }
        if (commit) integrator_ = integ_next;
        prev_error_ = error;
        return out;
    }

    /// Return to the zero-history condition.
    void reset() {
        integrator_ = 0.0;
        prev_error_ = 0.0;
    }

  private:
    PidGains gains_;
    double sample_time_ = 1.0;
    std::optional<std::pair<double, double>> limits_;
    double integrator_ = 0.0;
    double prev_error_ = 0.0;
};

/// Realize the gains at a sample time (no output limits).
inline DigitalPid discretize_pid(const PidGains& gains, double sample_time) {
    return DigitalPid(gains, sample_time);
}

/// D(z) assembled as a single rational system over the common denominator
/// T z (z-1); used for loop algebra and for printing coefficients.
inline DiscreteTransferFunction pid_transfer_function(const PidGains& g, double sample_time) {
    if (sample_time <= 0.0)
        throw NonpositiveSampleTime("pid_transfer_function: sample_time <= 0");
    const double T = sample_time;
    const Poly num{(g.kp * T + g.ki * T * T / 2.0 + g.kd) / T,
                   (-g.kp * T + g.ki * T * T / 2.0 - 2.0 * g.kd) / T,
                   g.kd / T};
    return dtf_new(num, {1.0, -1.0, 0.0}, sample_time);
}

}  // namespace trike
