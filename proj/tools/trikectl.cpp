// trikectl: command-line front end for the trike control toolkit.
//
// Subcommands: simulate, design, identify, linearity, trajectory (simulate
// with the trajectory loop), calibrate-k, plot-script. Exit codes: 0 success,
// 2 configuration/schema problem, 3 runtime or I/O failure, 4 inadequate data.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trike/config.hpp"
#include "trike/sysid.hpp"
#include "trike/trike.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitData = 4;

bool use_color() {
    static const bool enabled = [] {
        if (std::getenv("TRIKECTL_NO_COLOR") != nullptr) return false;
        return isatty(fileno(stdout)) != 0;
    }();
    return enabled;
}

void print_header(const std::string& text) {
    if (use_color())
        std::cout << "\033[1m" << text << "\033[0m\n";
    else
        std::cout << text << "\n";
}

std::string sig9(double v) { return trike::detail::format_sig9(v); }

void print_kv(const std::string& key, double value) {
    std::cout << key << "=" << sig9(value) << "\n";
}

/// Write a file atomically: temp file in the same directory, then rename.
void atomic_write(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw trike::Error("cannot open " + tmp.string() + " for writing");
        os << contents;
        if (!os.flush()) throw trike::Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// Apply one `--set key=value` override onto the config document. The value
/// is parsed as JSON when possible and treated as a string otherwise.
void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw trike::ConfigError(assignment, "override must look like key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &doc;
    std::size_t start = 0;
    std::vector<std::string> keys;
    while (true) {
        const auto dot = path.find('.', start);
        keys.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) node = &((*node)[keys[i]]);

    json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) parsed = value;  // plain string
    (*node)[keys.back()] = parsed;
}

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    int64_t seed = -1;
};

json load_document(const GlobalArgs& args) {
    json doc;
    if (args.config_path.empty()) {
        doc = trike::default_config_json();
    } else {
        std::ifstream is(args.config_path);
        if (!is) throw trike::Error("cannot read config file " + args.config_path);
        doc = json::parse(is, nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded())
            throw trike::ConfigError("config", "not valid JSON: " + args.config_path);
    }
    for (const auto& o : args.overrides) apply_override(doc, o);
    if (args.seed >= 0) doc["scenario"]["seed"] = args.seed;
    return doc;
}

fs::path resolve_out_dir(const GlobalArgs& args, const trike::RunConfig& cfg) {
    fs::path dir = args.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(args.out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    return dir;
}

void print_step_summary(const trike::TimeSeries& ts) {
    try {
        const auto m = trike::step_metrics(ts);
        print_kv("rise_time_10_90", m.rise_time_10_90);
        print_kv("overshoot", m.overshoot);
        print_kv("settling_time_2pct", m.settling_time_2pct);
        print_kv("steady_state", m.steady_state);
    } catch (const trike::NotSettled&) {
        std::cout << "note=response_not_settled_no_step_metrics\n";
    } catch (const trike::TooShort&) {
        std::cout << "note=record_too_short_no_step_metrics\n";
    }
}

int cmd_simulate(const GlobalArgs& args, bool force_trajectory) {
    json doc = load_document(args);
    if (force_trajectory) doc["scenario"]["loop"] = "trajectory";
    const auto cfg = trike::load_config(doc);
    const fs::path out = resolve_out_dir(args, cfg);

    switch (cfg.loop) {
        case trike::LoopKind::Velocity: {
            const auto trace = trike::run_velocity_loop(cfg.make_scenario());
            std::ostringstream csv;
            trike::write_csv(trace.to_time_series(), csv);
            atomic_write(out / "velocity_trace.csv", csv.str());
            print_header("velocity loop");
            std::cout << "trace=" << (out / "velocity_trace.csv").string() << "\n";
            trike::TimeSeries ts;
            ts.t = trace.t;
            ts.u = trace.reference;
            ts.y = trace.output;
            print_step_summary(ts);
            break;
        }
        case trike::LoopKind::Steering: {
            auto scenario = cfg.make_scenario();
            scenario.controller = trike::DigitalPid(cfg.steering_gains, cfg.sample_time);
            const auto trace = trike::run_steering_loop(scenario, cfg.steering);
            std::ostringstream csv;
            trike::write_csv(trace.to_time_series(), csv);
            atomic_write(out / "steering_trace.csv", csv.str());
            print_header("steering loop");
            std::cout << "trace=" << (out / "steering_trace.csv").string() << "\n";
            trike::TimeSeries ts;
            ts.t = trace.t;
            ts.u = trace.reference;
            ts.y = trace.output;
            print_step_summary(ts);
            break;
        }
        case trike::LoopKind::Trajectory: {
            const auto rows = trike::run_trajectory_loop(
                cfg.make_scenario(), cfg.make_trajectory_config(), cfg.steering);
            std::ostringstream csv;
            trike::write_pose_csv(rows, csv);
            atomic_write(out / "trajectory_trace.csv", csv.str());
            print_header("trajectory loop");
            std::cout << "trace=" << (out / "trajectory_trace.csv").string() << "\n";
            print_kv("final_kappa", rows.back().kappa);
            print_kv("final_x", rows.back().x);
            print_kv("final_y", rows.back().y);
            print_kv("final_heading", rows.back().heading);
            break;
        }
        case trike::LoopKind::OpenLoop: {
            const auto ts = trike::open_loop_experiment(cfg.plant, cfg.reference,
                                                        cfg.sample_time, cfg.duration, cfg.seed);
            std::ostringstream csv;
            trike::write_csv(ts, csv);
            atomic_write(out / "open_loop_trace.csv", csv.str());
            print_header("open-loop experiment");
            std::cout << "trace=" << (out / "open_loop_trace.csv").string() << "\n";
            print_step_summary(ts);
            break;
        }
    }
    return kExitOk;
}

int cmd_design(const GlobalArgs& args, const std::string& write_path) {
    const json doc = load_document(args);
    const auto cfg = trike::load_config(doc);

    const double w1 = cfg.crossover();
    const auto gains = cfg.velocity_gains();
    const auto report = trike::verify_design(cfg.plant, gains, w1);
    const auto dz = trike::pid_transfer_function(gains, cfg.sample_time);

    print_header("frequency-domain PID design");
    print_kv("omega_w1", w1);
    print_kv("plant_magnitude", std::abs(trike::freq_response(cfg.plant, w1)));
    print_kv("theta_deg", cfg.design.theta * 180.0 / M_PI);
    print_kv("kp", gains.kp);
    print_kv("ki", gains.ki);
    print_kv("kd", gains.kd);
    print_kv("loop_gain_at_crossover", report.loop_gain);
    print_kv("controller_phase_at_crossover", report.controller_phase);
    std::cout << "dz_num=[" << sig9(dz.num[0]) << "," << sig9(dz.num[1]) << ","
              << sig9(dz.num[2]) << "]\n";
    std::cout << "dz_den=[" << sig9(dz.den[0]) << "," << sig9(dz.den[1]) << ","
              << sig9(dz.den[2]) << "]\n";
    print_kv("sample_time", cfg.sample_time);

    if (!write_path.empty()) {
        json out = doc;
        out["gains"] = {{"kp", gains.kp}, {"ki", gains.ki}, {"kd", gains.kd}};
        atomic_write(write_path, out.dump(2) + "\n");
        std::cout << "config_written=" << write_path << "\n";
    }
    return kExitOk;
}

int cmd_identify(const GlobalArgs& args, const std::string& data_path, double op_voltage,
                 double op_speed, const std::string& write_path) {
    const json doc = load_document(args);
    const auto cfg = trike::load_config(doc);

    std::ifstream is(data_path);
    if (!is) throw trike::Error("cannot read data file " + data_path);
    trike::IdExperiment experiment;
    experiment.data = trike::read_csv(is);  // schema errors propagate as exit 2
    experiment.sample_time = experiment.data.sample_time();
    experiment.operating_voltage = op_voltage;
    experiment.operating_speed = op_speed;

    const double dead_time = cfg.id_dead_time ? *cfg.id_dead_time
                                              : trike::estimate_delay(experiment);
    trike::IdOptions options;
    options.iv_iterations = cfg.id_iv_iterations;
    const auto result =
        trike::identify_iv(experiment, cfg.id_zeros, cfg.id_poles, dead_time, options);

    print_header("identified model");
    std::cout << "num=[";
    for (std::size_t i = 0; i < result.model.num.size(); ++i)
        std::cout << (i ? "," : "") << sig9(result.model.num[i]);
    std::cout << "]\nden=[";
    for (std::size_t i = 0; i < result.model.den.size(); ++i)
        std::cout << (i ? "," : "") << sig9(result.model.den[i]);
    std::cout << "]\n";
    print_kv("dead_time", result.model.dead_time);
    print_kv("fit", result.fit);
    print_kv("residual_whiteness", result.residual_whiteness);
    if (result.unstable_warning) std::cout << "warning=unstable_estimate\n";

    json model_json = {{"plant",
                        {{"num", result.model.num},
                         {"den", result.model.den},
                         {"gain", 1.0},
                         {"dead_time", result.model.dead_time}}}};
    if (!write_path.empty()) {
        atomic_write(write_path, model_json.dump(2) + "\n");
        std::cout << "model_written=" << write_path << "\n";
    }
    return kExitOk;
}

int cmd_linearity(const GlobalArgs& args) {
    const json doc = load_document(args);
    const auto cfg = trike::load_config(doc);
    const fs::path out = resolve_out_dir(args, cfg);

    // Hammerstein path: static motor map in equivalent input volts feeding
    // the identified linear dynamics, all in deviations about the operating
    // point. Large sweeps below the first knee follow the extrapolated
    // segment; saturation above the last knee is what the scan detects.
    const double op_v = cfg.operating_voltage;
    const double slope = trike::detail::bldc_slope_at(cfg.bldc, op_v);
    const double nl_op = trike::detail::bldc_eval_extended(cfg.bldc, op_v);
    const auto plant = cfg.plant;
    const double T = cfg.sample_time;
    const trike::SystemUnderTest robot = [&](const std::vector<double>& u_dev) {
        std::vector<double> warped(u_dev.size());
        for (std::size_t k = 0; k < u_dev.size(); ++k)
            warped[k] =
                (trike::detail::bldc_eval_extended(cfg.bldc, op_v + u_dev[k]) - nl_op) / slope;
        return trike::simulate(plant, warped, T).y;
    };

    trike::LinearityScanConfig scan;
    scan.f0_hz = cfg.linearity_f0_hz;
    scan.sample_time = T;
    scan.cycles = cfg.linearity_cycles;
    scan.threshold = cfg.linearity_threshold;
    const auto report = trike::linearity_scan(robot, scan.f0_hz, cfg.linearity_amplitudes, scan);

    std::ostringstream csv;
    csv << "amplitude,fundamental_power,distortion,verdict\n";
    for (const auto& row : report.rows) {
        csv << sig9(row.amplitude) << ',' << sig9(row.fundamental_power) << ','
            << sig9(row.distortion) << ',' << (row.linear ? "linear" : "nonlinear") << '\n';
    }
    atomic_write(out / "linearity_report.csv", csv.str());

    print_header("linearity scan");
    std::cout << "report=" << (out / "linearity_report.csv").string() << "\n";
    print_kv("f0_hz", scan.f0_hz);
    print_kv("threshold", scan.threshold);
    print_kv("linear_range", report.linear_range);
    return kExitOk;
}

int cmd_calibrate_k(const GlobalArgs& args, double slope_arg, const std::string& write_path) {
    const json doc = load_document(args);
    const auto cfg = trike::load_config(doc);

    // DC speed/voltage slope to match: explicit, or the static map's local
    // slope at the operating voltage.
    const double slope =
        slope_arg > 0.0 ? slope_arg : trike::detail::bldc_slope_at(cfg.bldc, cfg.operating_voltage);

    // DC gain of the structural plant at unit gain multiplier.
    const double configured_gain = doc.contains("plant") && doc["plant"].contains("gain")
                                       ? doc["plant"]["gain"].get<double>()
                                       : 1.0;
    const double dc_unit = cfg.plant.dc_gain() / configured_gain;
    const double k = slope / dc_unit;

    print_header("gain calibration");
    print_kv("target_slope", slope);
    print_kv("unit_gain_dc", dc_unit);
    print_kv("k", k);

    if (!write_path.empty()) {
        json out = doc;
        out["plant"]["gain"] = k;
        atomic_write(write_path, out.dump(2) + "\n");
        std::cout << "config_written=" << write_path << "\n";
    }
    return kExitOk;
}

int cmd_plot_script(const GlobalArgs& args) {
    const json doc = load_document(args);
    const auto cfg = trike::load_config(doc);
    const fs::path out = resolve_out_dir(args, cfg);

    std::ostringstream gp;
    gp << "# gnuplot script for trikectl traces\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set grid\n\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output 'velocity_trace.png'\n"
       << "set xlabel 't [s]'\n"
       << "plot 'velocity_trace.csv' using 1:2 with lines title 'duty', \\\n"
       << "     'velocity_trace.csv' using 1:3 with lines title 'speed deviation'\n\n"
       << "set output 'trajectory_xy.png'\n"
       << "set xlabel 'x [m]'\nset ylabel 'y [m]'\nset size ratio -1\n"
       << "plot 'trajectory_trace.csv' using 2:3 with lines title 'path'\n\n"
       << "set output 'linearity.png'\n"
       << "set xlabel 'amplitude [V]'\nset ylabel 'fundamental power fraction'\nset size noratio\n"
       << "plot 'linearity_report.csv' using 1:2 with linespoints title 'fundamental power'\n";
    atomic_write(out / "plots.gp", gp.str());
    std::cout << "script=" << (out / "plots.gp").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trike control toolkit: model, identify, design, discretize and simulate the "
                 "front-steer three-wheeled robot loops"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalArgs args;
    app.add_option("--config", args.config_path, "configuration JSON (built-in default if omitted)");
    app.add_option("--out", args.out_dir, "output directory for CSV traces");
    app.add_option("--seed", args.seed, "override scenario.seed");
    app.add_option("--set", args.overrides, "dotted-path config override, e.g. design.omega_w1=2.0")
        ->take_all();

    auto* sim = app.add_subcommand("simulate", "run the configured closed or open loop");
    auto* design = app.add_subcommand("design", "synthesize PID gains from the design spec");
    std::string design_write;
    design->add_option("--write-config", design_write, "write a config copy with the gains filled");

    auto* identify = app.add_subcommand("identify", "estimate a plant model from a t,u,y CSV");
    std::string data_path, identify_write;
    double op_voltage = 0.0, op_speed = 0.0;
    identify->add_option("data", data_path, "input CSV (schema t,u,y)")->required();
    identify->add_option("--op-voltage", op_voltage,
                         "operating-point voltage to subtract (V); 0 for deviation data");
    identify->add_option("--op-speed", op_speed,
                         "operating-point speed to subtract (m/s); 0 for deviation data");
    identify->add_option("--write-model", identify_write, "write the identified plant as JSON");

    auto* linearity = app.add_subcommand("linearity", "Fourier linearity scan of the motor map");
    auto* trajectory = app.add_subcommand("trajectory", "simulate with the trajectory loop");
    auto* calibrate = app.add_subcommand("calibrate-k", "pick the plant gain K from a DC slope");
    double slope = 0.0;
    std::string calibrate_write;
    calibrate->add_option("--slope", slope, "target DC speed/voltage slope (m/s per V)");
    calibrate->add_option("--write-config", calibrate_write, "write a config copy with K set");
    auto* plot = app.add_subcommand("plot-script", "emit a gnuplot script for the trace CSVs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(args, false);
        if (trajectory->parsed()) return cmd_simulate(args, true);
        if (design->parsed()) return cmd_design(args, design_write);
        if (identify->parsed())
            return cmd_identify(args, data_path, op_voltage, op_speed, identify_write);
        if (linearity->parsed()) return cmd_linearity(args);
        if (calibrate->parsed()) return cmd_calibrate_k(args, slope, calibrate_write);
        if (plot->parsed()) return cmd_plot_script(args);
    } catch (const trike::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const trike::BinMisalignment& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const trike::InsufficientExcitation& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const trike::SampleTimeMismatch& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const trike::MalformedCsv& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const trike::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
