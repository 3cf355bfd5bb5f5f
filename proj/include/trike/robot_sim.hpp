#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "trike/bldc.hpp"
#include "trike/kinematics.hpp"
#include "trike/pid.hpp"
#include "trike/simulate.hpp"
#include "trike/time_series.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Test-signal description for references, disturbances and open-loop drives.
struct SignalSpec {
    enum class Kind { Step, Ramp, Sine, Prbs };
    Kind kind = Kind::Step;
    double amplitude = 1.0;   // step height, ramp slope per second, sine amplitude, PRBS level
    double frequency_hz = 0.125;  // sine only
    double start_time = 0.0;  // signal is zero before this
    std::size_t prbs_hold = 10;   // samples per PRBS chip

    std::vector<double> generate(std::size_t n, double sample_time, std::uint32_t seed) const {
        std::vector<double> out(n, 0.0);
        std::mt19937 rng(seed);
        std::bernoulli_distribution coin(0.5);
        double level = amplitude;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * sample_time;
            if (kind == Kind::Prbs && k % prbs_hold == 0)
                level = coin(rng) ? amplitude : -amplitude;
            if (t < start_time) continue;
            switch (kind) {
                case Kind::Step: out[k] = amplitude; break;
                case Kind::Ramp: out[k] = amplitude * (t - start_time); break;
                case Kind::Sine:
                    out[k] = amplitude * std::sin(2.0 * M_PI * frequency_hz * (t - start_time));
                    break;
                case Kind::Prbs: out[k] = level; break;
            }
        }
        return out;
    }
};

enum class LoopKind { Velocity, Steering, Trajectory, OpenLoop };

/// Inner steering servo plant: first-order lag with a hard mechanical stop.
struct SteeringPlant {
    double time_constant = 0.2;  // s
    double gain = 1.0;
    double steer_limit = 0.5;  // rad
};

/// One closed-loop experiment. The velocity loop runs in deviation variables
/// about the operating point; the optional BldcMap injects the static
/// nonlinearity (saturation) in equivalent input volts.
struct Scenario {
    TransferFunction plant;      // deviation volts -> deviation m/s
    DigitalPid controller;       // velocity (or steering) controller
    double sample_time = 0.05;   // s
    double duration = 30.0;      // s
    SignalSpec reference;
    std::optional<SignalSpec> disturbance;  // added to the measured output
    double noise_std = 0.0;                 // measurement noise, 0 disables
    std::optional<std::pair<double, double>> duty_limits;  // absolute duty clamp
    std::uint32_t seed = 0;
    LoopKind loop = LoopKind::Velocity;
    std::optional<BldcMap> bldc;   // engaged static nonlinearity; bypassed when unset
    double operating_voltage = 11.0;  // V
    double operating_speed = 1.0;     // m/s
};

/// Sampled record of a closed-loop run.
struct LoopTrace {
    std::vector<double> t;
    std::vector<double> reference;
    std::vector<double> control;  // actuator command (absolute duty for the velocity loop)
    std::vector<double> output;   // measured loop variable

    TimeSeries to_time_series() const {
        TimeSeries ts;
        ts.t = t;
        ts.u = control;
        ts.y = output;
        return ts;
    }
};

namespace detail {

/// Strictly proper plant stepper: exact ZOH realization plus an input FIFO
/// for the transport delay.
class PlantSimulator {
  public:
    PlantSimulator(const TransferFunction& plant, double sample_time) {
        if (!plant.strictly_proper())
            throw ConfigMismatch("closed loop needs a strictly proper plant");
        delay_ = delay_to_samples(plant.dead_time, sample_time);
        const StateSpace ss = to_state_space(plant);
        c_ = ss.C;
        auto [ad, bd] = zoh_step_matrices(ss, sample_time);
        ad_ = std::move(ad);
        bd_ = std::move(bd);
        x_ = Eigen::VectorXd::Zero(ad_.rows());
        // The state update already gives one tick of latency; the FIFO only
        // carries the transport delay itself.
        fifo_.assign(static_cast<std::size_t>(delay_), 0.0);
    }

    double output() const { return x_.size() ? (c_ * x_).value() : 0.0; }

    /// Feed the input for this tick and advance the state one period.
    void advance(double u) {
        fifo_.push_back(u);
        const double ud = fifo_.front();
        fifo_.erase(fifo_.begin());
        if (x_.size()) x_ = ad_ * x_ + bd_ * ud;
    }

  private:
    Eigen::MatrixXd ad_;
    Eigen::VectorXd bd_;
    Eigen::RowVectorXd c_;
    Eigen::VectorXd x_;
    std::vector<double> fifo_;
    int delay_ = 0;
};

}  // namespace detail

/// Velocity loop of the drive: error in speed -> PID -> voltage command ->
/// duty-cycle DAC -> static motor map -> ZOH plant. Deterministic given the
/// scenario seed. The controller output is a voltage deviation; the duty
/// clamp (and the matching PID anti-windup window) works on the absolute
/// duty commanded to the DAC.
inline LoopTrace run_velocity_loop(Scenario scenario) {
    if (scenario.loop != LoopKind::Velocity)
        throw ConfigMismatch("run_velocity_loop: scenario.loop is not velocity");
    const double T = scenario.sample_time;
    if (T <= 0.0) throw NonpositiveSampleTime("run_velocity_loop: sample_time <= 0");
    if (scenario.duration < 10.0 * T)
        throw ConfigMismatch("run_velocity_loop: duration below 10 sample periods");
    if (std::abs(scenario.controller.sample_time() - T) > 1e-9 * T)
        throw ConfigMismatch("run_velocity_loop: controller sample time mismatch");

    const double v_src = scenario.bldc ? scenario.bldc->source_voltage : 48.0;
    const double op_v = scenario.operating_voltage;
    const auto n = static_cast<std::size_t>(std::llround(scenario.duration / T));

    // Map the duty window into the controller's voltage-deviation output
    // units so saturation and integrator freeze happen in one place.
    if (scenario.duty_limits) {
        const auto [lo, hi] = *scenario.duty_limits;
        if (lo > hi || lo < 0.0 || hi > 1.0)
            throw ConfigMismatch("run_velocity_loop: duty limits must satisfy 0 <= lo <= hi <= 1");
        scenario.controller.set_output_limits(
            std::make_pair(lo * v_src - op_v, hi * v_src - op_v));
    }

    const double slope_at_op =
        scenario.bldc ? detail::bldc_slope_at(*scenario.bldc, op_v) : 1.0;
    if (scenario.bldc && slope_at_op <= 0.0)
        throw ConfigMismatch("run_velocity_loop: BLDC map is flat at the operating point");
    const double nl_at_op =
        scenario.bldc ? detail::bldc_eval_extended(*scenario.bldc, op_v) : 0.0;

    detail::PlantSimulator plant(scenario.plant, T);
    std::mt19937 rng(scenario.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::vector<double> ref = scenario.reference.generate(n, T, scenario.seed + 1);
    const std::vector<double> dist =
        scenario.disturbance ? scenario.disturbance->generate(n, T, scenario.seed + 2)
                             : std::vector<double>(n, 0.0);

    LoopTrace trace;
    trace.t.resize(n);
    trace.reference = ref;
    trace.control.resize(n);
    trace.output.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        trace.t[k] = static_cast<double>(k) * T;
        double y = plant.output() + dist[k];
        if (scenario.noise_std > 0.0) y += scenario.noise_std * gauss(rng);
        trace.output[k] = y;

        const double u_volt = scenario.controller.step(ref[k] - y);
        trace.control[k] = (op_v + u_volt) / v_src;

        double u_plant = u_volt;
        if (scenario.bldc) {
            const double v_abs = op_v + u_volt;
            u_plant = (detail::bldc_eval_extended(*scenario.bldc, v_abs) - nl_at_op) / slope_at_op;
        }
        plant.advance(u_plant);
    }
    return trace;
}

/// Inner steering servo: PID against the steer-angle error driving the
/// first-order steering plant, output clamped at the mechanical stop.
inline LoopTrace run_steering_loop(Scenario scenario, const SteeringPlant& steering) {
    if (scenario.loop != LoopKind::Steering)
        throw ConfigMismatch("run_steering_loop: scenario.loop is not steering");
    const double T = scenario.sample_time;
    if (T <= 0.0) throw NonpositiveSampleTime("run_steering_loop: sample_time <= 0");
    if (scenario.duration < 10.0 * T)
        throw ConfigMismatch("run_steering_loop: duration below 10 sample periods");
    if (std::abs(scenario.controller.sample_time() - T) > 1e-9 * T)
        throw ConfigMismatch("run_steering_loop: controller sample time mismatch");
    if (steering.time_constant <= 0.0 || steering.steer_limit <= 0.0)
        throw ConfigMismatch("run_steering_loop: invalid steering plant");

    const auto n = static_cast<std::size_t>(std::llround(scenario.duration / T));
    const std::vector<double> ref = scenario.reference.generate(n, T, scenario.seed + 1);
    const double a = std::exp(-T / steering.time_constant);

    LoopTrace trace;
    trace.t.resize(n);
    trace.reference = ref;
    trace.control.resize(n);
    trace.output.resize(n);
    double steer = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        trace.t[k] = static_cast<double>(k) * T;
        trace.output[k] = steer;
        const double u = scenario.controller.step(ref[k] - steer);
        trace.control[k] = u;
        steer = a * steer + steering.gain * (1.0 - a) * u;
        steer = std::clamp(steer, -steering.steer_limit, steering.steer_limit);
    }
    return trace;
}

/// Outer trajectory loop configuration.
struct TrajectoryConfig {
    DigitalPid curvature_controller;  // kappa error -> yaw-rate reference
    DigitalPid steering_controller;   // steer error -> servo input
    double horizon = 1.0;             // s, the lookahead in steer = atan(omega * horizon)
    double speed_command = 1.0;       // m/s commanded forward speed (0 disables the drive)
    WheelGeometry geometry{0.1, 0.4};
};

struct PoseTraceRow {
    double t, x, y, heading, vx, omega, kappa, steer;
};

/// Curvature-tracking loop of the full robot: rear-wheel odometry measures
/// the driven curvature, a PID turns the curvature error into a yaw-rate
/// reference, the steering linearization turns that into a steer-angle
/// reference for the inner servo, and the achieved steer angle maps back to
/// a yaw rate through the inverse linearization. The forward speed runs
/// through the velocity loop in deviation variables about the operating
/// point; a zero speed command leaves the drive off.
inline std::vector<PoseTraceRow> run_trajectory_loop(Scenario scenario, TrajectoryConfig cfg,
                                                     const SteeringPlant& steering) {
    if (scenario.loop != LoopKind::Trajectory)
        throw ConfigMismatch("run_trajectory_loop: scenario.loop is not trajectory");
    const double T = scenario.sample_time;
    if (T <= 0.0) throw NonpositiveSampleTime("run_trajectory_loop: sample_time <= 0");
    if (std::abs(cfg.curvature_controller.sample_time() - T) > 1e-9 * T ||
        std::abs(cfg.steering_controller.sample_time() - T) > 1e-9 * T)
        throw ConfigMismatch("run_trajectory_loop: controller sample time mismatch");
    if (cfg.horizon <= 0.0) throw HorizonNonpositive("run_trajectory_loop: horizon <= 0");

    const auto n = static_cast<std::size_t>(std::llround(scenario.duration / T));
    const std::vector<double> kappa_ref = scenario.reference.generate(n, T, scenario.seed + 1);

    const bool drive = cfg.speed_command != 0.0;
    std::optional<detail::PlantSimulator> plant;
    if (drive) plant.emplace(scenario.plant, T);
    const double speed_ref_dev = cfg.speed_command - scenario.operating_speed;

    const double a = std::exp(-T / steering.time_constant);
    double steer = 0.0;
    double omega = 0.0;
    Pose pose;
    std::vector<PoseTraceRow> rows;
    rows.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double vx = drive ? scenario.operating_speed + plant->output() : 0.0;

        // Odometry round trip through the free rear wheels.
        const auto [wl, wr] = body_to_wheel_speeds({vx, omega}, cfg.geometry);
        const BodyTwist measured = wheel_speeds_to_body(wl, wr, cfg.geometry);
        const CurvatureSample kappa = curvature(measured);  // DegenerateSpeed propagates

        rows.push_back({static_cast<double>(k) * T, pose.x, pose.y, pose.heading, vx, omega,
                        kappa.kappa, steer});

        const double omega_ref = cfg.curvature_controller.step(kappa_ref[k] - kappa.kappa);
        const double steer_ref =
            steer_angle_ref_clamped(omega_ref, cfg.horizon, steering.steer_limit);
        const double u_s = cfg.steering_controller.step(steer_ref - steer);
        steer = std::clamp(a * steer + steering.gain * (1.0 - a) * u_s, -steering.steer_limit,
                           steering.steer_limit);

        pose = integrate_pose(pose, {vx, omega}, T);
        omega = std::tan(steer) / cfg.horizon;
        if (drive) plant->advance(scenario.controller.step(speed_ref_dev - plant->output()));
    }
    return rows;
}

/// Pose-trace CSV schema: `t,x,y,heading,vx,omega,kappa,steer`.
inline void write_pose_csv(const std::vector<PoseTraceRow>& rows, std::ostream& os) {
    os << "t,x,y,heading,vx,omega,kappa,steer\n";
    for (const auto& r : rows) {
        os << detail::format_sig9(r.t) << ',' << detail::format_sig9(r.x) << ','
           << detail::format_sig9(r.y) << ',' << detail::format_sig9(r.heading) << ','
           << detail::format_sig9(r.vx) << ',' << detail::format_sig9(r.omega) << ','
           << detail::format_sig9(r.kappa) << ',' << detail::format_sig9(r.steer) << '\n';
    }
}

/// Open-loop validation protocol: apply a deviation-variable test signal to
/// the plant and record the response for comparison plots.
inline TimeSeries open_loop_experiment(const TransferFunction& plant, const SignalSpec& input,
                                       double sample_time, double duration,
                                       std::uint32_t seed = 0) {
    const auto n = static_cast<std::size_t>(std::llround(duration / sample_time));
    return simulate(plant, input.generate(n, sample_time, seed), sample_time);
}

}  // namespace trike
