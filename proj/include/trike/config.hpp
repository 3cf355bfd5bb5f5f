#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trike/bldc.hpp"
#include "trike/pid.hpp"
#include "trike/robot_sim.hpp"
#include "trike/spectrum.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Configuration rejected; `key` names the offending entry (dotted path).
struct ConfigError : Error {
    std::string key;
    ConfigError(std::string key_, const std::string& what_)
        : Error(key_ + ": " + what_), key(std::move(key_)) {}
};

namespace cfgdetail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& known) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& item : obj.items()) {
        if (!known.count(item.key()))
            throw ConfigError(path + "." + item.key(), "unknown key");
    }
}

inline double get_number(const json& obj, const std::string& path, const std::string& key,
                         std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key, "missing required value");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

inline std::vector<double> get_array(const json& obj, const std::string& path,
                                     const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing required value");
    const auto& v = obj.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path + "." + key, "expected a nonempty array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(path + "." + key, "expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace cfgdetail

/// Fully validated run configuration. Everything the CLI can do is driven
/// from one of these; unknown keys anywhere in the document are errors.
struct RunConfig {
    TransferFunction plant;
    double sample_time = 0.05;

    // design spec
    DesignSpec design;
    std::optional<PidGains> gains;  // explicit gains override the design

    // scenario
    LoopKind loop = LoopKind::Velocity;
    double duration = 30.0;
    SignalSpec reference;
    std::optional<SignalSpec> disturbance;
    double noise_std = 0.0;
    std::optional<std::pair<double, double>> duty_limits;
    std::uint32_t seed = 0;
    bool use_bldc = false;

    double operating_voltage = 11.0;
    double operating_speed = 1.0;
    BldcMap bldc = default_bldc_map();

    SteeringPlant steering;
    double horizon = 1.0;
    double speed_command = 1.0;
    PidGains curvature_gains{0.8, 2.0, 0.0};
    PidGains steering_gains{4.0, 12.0, 0.0};
    WheelGeometry geometry{0.1, 0.4};

    // linearity scan
    double linearity_f0_hz = 0.125;
    int linearity_cycles = 10;
    double linearity_threshold = 0.9999;
    std::vector<double> linearity_amplitudes{2, 4, 6, 8, 10, 12, 14, 16, 18, 20};

    // identification
    int id_zeros = 1;
    int id_poles = 2;
    std::optional<double> id_dead_time;  // estimated from data when unset
    int id_iv_iterations = 2;

    std::string output_dir = ".";  // where trace/report files land

    /// Velocity-loop gains: explicit if given, otherwise synthesized from the
    /// design spec against this config's plant.
    PidGains velocity_gains() const {
        if (gains) return *gains;
        const double w1 = design.omega_w1 ? *design.omega_w1
                                          : crossover_from_rise_time(design.rise_time);
        return design_pid(plant, w1, design.theta, design.ki_choice);
    }

    double crossover() const {
        return design.omega_w1 ? *design.omega_w1 : crossover_from_rise_time(design.rise_time);
    }

    Scenario make_scenario() const {
        Scenario s{plant,
                   DigitalPid(velocity_gains(), sample_time),
                   sample_time,
                   duration,
                   reference,
                   disturbance,
                   noise_std,
                   duty_limits,
                   seed,
                   loop,
                   use_bldc ? std::optional<BldcMap>(bldc) : std::nullopt,
                   operating_voltage,
                   operating_speed};
        return s;
    }

    TrajectoryConfig make_trajectory_config() const {
        return {DigitalPid(curvature_gains, sample_time), DigitalPid(steering_gains, sample_time),
                horizon, speed_command, geometry};
    }
};

namespace cfgdetail {

inline SignalSpec parse_signal(const json& obj, const std::string& path) {
    require_keys(obj, path, {"kind", "amplitude", "frequency_hz", "start_time", "prbs_hold"});
    SignalSpec spec;
    if (!obj.contains("kind") || !obj.at("kind").is_string())
        throw ConfigError(path + ".kind", "expected a string");
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "step") spec.kind = SignalSpec::Kind::Step;
    else if (kind == "ramp") spec.kind = SignalSpec::Kind::Ramp;
    else if (kind == "sine") spec.kind = SignalSpec::Kind::Sine;
    else if (kind == "prbs") spec.kind = SignalSpec::Kind::Prbs;
    else throw ConfigError(path + ".kind", "expected step, ramp, sine or prbs");
    spec.amplitude = get_number(obj, path, "amplitude", 1.0);
    spec.frequency_hz = get_number(obj, path, "frequency_hz", 0.125);
    spec.start_time = get_number(obj, path, "start_time", 0.0);
    const double hold = get_number(obj, path, "prbs_hold", 10.0);
    if (hold < 1.0) throw ConfigError(path + ".prbs_hold", "must be at least 1");
    spec.prbs_hold = static_cast<std::size_t>(hold);
    return spec;
}

inline PidGains parse_gains(const json& obj, const std::string& path) {
    require_keys(obj, path, {"kp", "ki", "kd"});
    return {get_number(obj, path, "kp"), get_number(obj, path, "ki"),
            get_number(obj, path, "kd", 0.0)};
}

}  // namespace cfgdetail

/// Parse and validate a configuration document. Throws ConfigError with the
/// offending dotted key path on any problem.
inline RunConfig load_config(const nlohmann::json& doc) {
    using namespace cfgdetail;
    require_keys(doc, "config",
                 {"schema", "plant", "sample_time", "design", "gains", "scenario",
                  "operating_point", "bldc", "steering", "trajectory", "linearity", "identify",
                  "output"});
    if (!doc.contains("schema") || !doc.at("schema").is_number_integer() ||
        doc.at("schema").get<int>() != 1)
        throw ConfigError("config.schema", "expected schema: 1");

    RunConfig cfg;

    {
        if (!doc.contains("plant")) throw ConfigError("config.plant", "missing required section");
        const json& p = doc.at("plant");
        require_keys(p, "plant", {"num", "den", "gain", "dead_time"});
        Poly num = get_array(p, "plant", "num");
        const Poly den = get_array(p, "plant", "den");
        const double gain = get_number(p, "plant", "gain", 1.0);
        const double dead = get_number(p, "plant", "dead_time", 0.0);
        for (double& c : num) c *= gain;
        try {
            cfg.plant = tf_new(num, den, dead);
        } catch (const Error& e) {
            throw ConfigError("plant.den", e.what());
        }
    }

    cfg.sample_time = cfgdetail::get_number(doc, "config", "sample_time", 0.05);
    if (cfg.sample_time <= 0.0) throw ConfigError("config.sample_time", "must be positive");

    if (doc.contains("design")) {
        const json& d = doc.at("design");
        require_keys(d, "design", {"rise_time", "theta_deg", "omega_w1", "ki"});
        cfg.design.rise_time = get_number(d, "design", "rise_time", 0.5);
        if (cfg.design.rise_time <= 0.0) throw ConfigError("design.rise_time", "must be positive");
        cfg.design.theta = get_number(d, "design", "theta_deg", -5.0) * M_PI / 180.0;
        if (std::abs(cfg.design.theta) >= M_PI / 2.0)
            throw ConfigError("design.theta_deg", "magnitude must be below 90");
        if (d.contains("omega_w1")) {
            cfg.design.omega_w1 = get_number(d, "design", "omega_w1");
            if (*cfg.design.omega_w1 <= 0.0)
                throw ConfigError("design.omega_w1", "must be positive");
        }
        if (d.contains("ki")) {
            cfg.design.ki_choice = get_number(d, "design", "ki");
            if (cfg.design.ki_choice < 0.0) throw ConfigError("design.ki", "must be nonnegative");
        } else {
            cfg.design.ki_choice =
                default_ki(cfg.plant, cfg.crossover(), cfg.design.theta);
        }
    } else {
        throw ConfigError("config.design", "missing required section");
    }

    if (doc.contains("gains")) cfg.gains = parse_gains(doc.at("gains"), "gains");

    if (doc.contains("scenario")) {
        const json& s = doc.at("scenario");
        require_keys(s, "scenario",
                     {"loop", "duration", "seed", "reference", "disturbance", "noise_std",
                      "duty_limits", "use_bldc"});
        if (s.contains("loop")) {
            const std::string loop = s.at("loop").is_string() ? s.at("loop").get<std::string>()
                                                              : std::string();
            if (loop == "velocity") cfg.loop = LoopKind::Velocity;
            else if (loop == "steering") cfg.loop = LoopKind::Steering;
            else if (loop == "trajectory") cfg.loop = LoopKind::Trajectory;
            else if (loop == "open_loop") cfg.loop = LoopKind::OpenLoop;
            else throw ConfigError("scenario.loop",
                                   "expected velocity, steering, trajectory or open_loop");
        }
        cfg.duration = get_number(s, "scenario", "duration", 30.0);
        if (cfg.duration < 10.0 * cfg.sample_time)
            throw ConfigError("scenario.duration", "must cover at least 10 sample periods");
        const double seed = get_number(s, "scenario", "seed", 0.0);
        if (seed < 0.0) throw ConfigError("scenario.seed", "must be nonnegative");
        cfg.seed = static_cast<std::uint32_t>(seed);
        if (s.contains("reference")) cfg.reference = parse_signal(s.at("reference"), "scenario.reference");
        if (s.contains("disturbance") && !s.at("disturbance").is_null())
            cfg.disturbance = parse_signal(s.at("disturbance"), "scenario.disturbance");
        cfg.noise_std = get_number(s, "scenario", "noise_std", 0.0);
        if (cfg.noise_std < 0.0) throw ConfigError("scenario.noise_std", "must be nonnegative");
        if (s.contains("duty_limits")) {
            const auto lim = get_array(s, "scenario", "duty_limits");
            if (lim.size() != 2) throw ConfigError("scenario.duty_limits", "expected [lo, hi]");
            cfg.duty_limits = std::make_pair(lim[0], lim[1]);
        }
        if (s.contains("use_bldc")) {
            if (!s.at("use_bldc").is_boolean())
                throw ConfigError("scenario.use_bldc", "expected a boolean");
            cfg.use_bldc = s.at("use_bldc").get<bool>();
        }
    }

    if (doc.contains("operating_point")) {
        const json& o = doc.at("operating_point");
        require_keys(o, "operating_point", {"voltage", "speed"});
        cfg.operating_voltage = get_number(o, "operating_point", "voltage", 11.0);
        cfg.operating_speed = get_number(o, "operating_point", "speed", 1.0);
    }

    if (doc.contains("bldc")) {
        const json& b = doc.at("bldc");
        require_keys(b, "bldc", {"source_voltage", "knees"});
        const double src = get_number(b, "bldc", "source_voltage", 48.0);
        std::vector<BldcMap::Knee> knees;
        if (b.contains("knees")) {
            if (!b.at("knees").is_array()) throw ConfigError("bldc.knees", "expected an array");
            for (const auto& kn : b.at("knees")) {
                if (!kn.is_array() || kn.size() != 2 || !kn[0].is_number() || !kn[1].is_number())
                    throw ConfigError("bldc.knees", "expected [voltage, speed] pairs");
                knees.push_back({kn[0].get<double>(), kn[1].get<double>()});
            }
        } else {
            knees = default_bldc_map().knees;
        }
        try {
            cfg.bldc = make_bldc_map(std::move(knees), src);
        } catch (const Error& e) {
            throw ConfigError("bldc.knees", e.what());
        }
    }

    if (doc.contains("steering")) {
        const json& st = doc.at("steering");
        require_keys(st, "steering", {"time_constant", "gain", "steer_limit"});
        cfg.steering.time_constant = get_number(st, "steering", "time_constant", 0.2);
        cfg.steering.gain = get_number(st, "steering", "gain", 1.0);
        cfg.steering.steer_limit = get_number(st, "steering", "steer_limit", 0.5);
        if (cfg.steering.time_constant <= 0.0)
            throw ConfigError("steering.time_constant", "must be positive");
        if (cfg.steering.steer_limit <= 0.0)
            throw ConfigError("steering.steer_limit", "must be positive");
    }

    if (doc.contains("trajectory")) {
        const json& tr = doc.at("trajectory");
        require_keys(tr, "trajectory",
                     {"horizon", "speed_command", "curvature_gains", "steering_gains", "geometry"});
        cfg.horizon = get_number(tr, "trajectory", "horizon", 1.0);
        if (cfg.horizon <= 0.0) throw ConfigError("trajectory.horizon", "must be positive");
        cfg.speed_command = get_number(tr, "trajectory", "speed_command", 1.0);
        if (tr.contains("curvature_gains"))
            cfg.curvature_gains = parse_gains(tr.at("curvature_gains"), "trajectory.curvature_gains");
        if (tr.contains("steering_gains"))
            cfg.steering_gains = parse_gains(tr.at("steering_gains"), "trajectory.steering_gains");
        if (tr.contains("geometry")) {
            const json& g = tr.at("geometry");
            require_keys(g, "trajectory.geometry", {"wheel_radius", "track_width"});
            const double r = get_number(g, "trajectory.geometry", "wheel_radius", 0.1);
            const double d = get_number(g, "trajectory.geometry", "track_width", 0.4);
            if (r <= 0.0) throw ConfigError("trajectory.geometry.wheel_radius", "must be positive");
            if (d <= 0.0) throw ConfigError("trajectory.geometry.track_width", "must be positive");
            cfg.geometry = {r, d};
        }
    }

    if (doc.contains("linearity")) {
        const json& l = doc.at("linearity");
        require_keys(l, "linearity", {"f0_hz", "cycles", "threshold", "amplitudes"});
        cfg.linearity_f0_hz = get_number(l, "linearity", "f0_hz", 0.125);
        if (cfg.linearity_f0_hz <= 0.0) throw ConfigError("linearity.f0_hz", "must be positive");
        const double cycles = get_number(l, "linearity", "cycles", 10.0);
        if (cycles < 3.0) throw ConfigError("linearity.cycles", "need at least 3 cycles");
        cfg.linearity_cycles = static_cast<int>(cycles);
        cfg.linearity_threshold = get_number(l, "linearity", "threshold", 0.9999);
        if (cfg.linearity_threshold <= 0.0 || cfg.linearity_threshold > 1.0)
            throw ConfigError("linearity.threshold", "must lie in (0, 1]");
        if (l.contains("amplitudes")) {
            cfg.linearity_amplitudes = get_array(l, "linearity", "amplitudes");
            for (double a : cfg.linearity_amplitudes)
                if (a <= 0.0) throw ConfigError("linearity.amplitudes", "must be positive");
        }
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        require_keys(o, "output", {"dir"});
        if (o.contains("dir")) {
            if (!o.at("dir").is_string()) throw ConfigError("output.dir", "expected a string");
            cfg.output_dir = o.at("dir").get<std::string>();
        }
    }

    if (doc.contains("identify")) {
        const json& i = doc.at("identify");
        require_keys(i, "identify", {"zeros", "poles", "dead_time", "iv_iterations"});
        cfg.id_zeros = static_cast<int>(get_number(i, "identify", "zeros", 1.0));
        cfg.id_poles = static_cast<int>(get_number(i, "identify", "poles", 2.0));
        if (cfg.id_poles < 1 || cfg.id_zeros < 0 || cfg.id_zeros >= cfg.id_poles)
            throw ConfigError("identify.zeros", "need 0 <= zeros < poles");
        if (i.contains("dead_time") && !i.at("dead_time").is_null())
            cfg.id_dead_time = get_number(i, "identify", "dead_time");
        cfg.id_iv_iterations = static_cast<int>(get_number(i, "identify", "iv_iterations", 2.0));
        if (cfg.id_iv_iterations < 0)
            throw ConfigError("identify.iv_iterations", "must be nonnegative");
    }

    return cfg;
}

/// The configuration the CLI runs with when none is supplied: the identified
/// robot plant at unit gain, the shipped frequency-domain design point
/// (0.5 s rise-time target, 5 degree lag at a 1.8 rad/s crossover, ki chosen
/// for a pure PI), and a unit velocity step.
inline nlohmann::json default_config_json() {
    using nlohmann::json;
    json doc;
    doc["schema"] = 1;
    doc["plant"] = {{"num", {1.0, 2.8}},
                    {"den", {1.0, 5.44, 2.2}},
                    {"gain", 1.0},
                    {"dead_time", 0.3}};
    doc["sample_time"] = 0.05;
    doc["design"] = {{"rise_time", 0.5},
                     {"theta_deg", -5.0},
                     {"omega_w1", 1.8},
                     {"ki", 0.46409386733579761}};
    doc["scenario"] = {{"loop", "velocity"},
                       {"duration", 30.0},
                       {"seed", 0},
                       {"noise_std", 0.0},
                       {"use_bldc", false},
                       {"reference", {{"kind", "step"}, {"amplitude", 1.0}, {"start_time", 0.0}}}};
    doc["operating_point"] = {{"voltage", 11.0}, {"speed", 1.0}};
    doc["bldc"] = {{"source_voltage", 48.0},
                   {"knees", {{0.0, -16.0 / 17.0}, {28.0, 4.0}, {48.0, 4.0}}}};
    doc["steering"] = {{"time_constant", 0.2}, {"gain", 1.0}, {"steer_limit", 0.5}};
    doc["trajectory"] = {{"horizon", 1.0},
                         {"speed_command", 1.0},
                         {"curvature_gains", {{"kp", 0.8}, {"ki", 2.0}, {"kd", 0.0}}},
                         {"steering_gains", {{"kp", 4.0}, {"ki", 12.0}, {"kd", 0.0}}},
                         {"geometry", {{"wheel_radius", 0.1}, {"track_width", 0.4}}}};
    doc["linearity"] = {{"f0_hz", 0.125},
                        {"cycles", 10},
                        {"threshold", 0.9999},
                        {"amplitudes", {2, 4, 6, 8, 10, 12, 14, 16, 18, 20}}};
    doc["identify"] = {{"zeros", 1}, {"poles", 2}, {"iv_iterations", 2}};
    return doc;
}

}  // namespace trike
