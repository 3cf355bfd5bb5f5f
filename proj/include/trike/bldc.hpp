#pragma once

#include <cmath>
#include <vector>

#include "trike/errors.hpp"

namespace trike {

/// Static voltage-to-steady-speed characteristic of the drive motor as a
/// monotone piecewise-linear map. Evaluation clamps flat beyond the last
/// knee (the saturation the linearity experiment detects).
struct BldcMap {
    struct Knee {
        double voltage = 0.0;  // V
        double speed = 0.0;    // m/s
    };
    std::vector<Knee> knees;      // voltages strictly increasing, speeds non-decreasing
    double source_voltage = 48.0;  // V
};

inline BldcMap make_bldc_map(std::vector<BldcMap::Knee> knees, double source_voltage = 48.0) {
    if (knees.size() < 2) throw ConfigMismatch("BldcMap: need at least two knee points");
    for (std::size_t i = 1; i < knees.size(); ++i) {
        if (knees[i].voltage <= knees[i - 1].voltage)
            throw ConfigMismatch("BldcMap: knee voltages must be strictly increasing");
        if (knees[i].speed < knees[i - 1].speed)
            throw ConfigMismatch("BldcMap: knee speeds must be non-decreasing");
    }
    if (source_voltage <= 0.0) throw ConfigMismatch("BldcMap: source voltage must be positive");
    return {std::move(knees), source_voltage};
}

/// Shipped characteristic: one linear segment with slope 3/17 (m/s)/V passing
/// through (11 V, 1 m/s) and (28 V, 4 m/s), saturating flat at 4 m/s beyond
/// 28 V. Below roughly 5.3 V the linearized segment extrapolates to negative
/// speed; it is a small-signal model around the operating point, not a
/// standstill model.
inline BldcMap default_bldc_map() {
    return make_bldc_map({{0.0, -16.0 / 17.0}, {28.0, 4.0}, {48.0, 4.0}}, 48.0);
}

/// duty * source_voltage; duty must lie in [0, 1].
inline double duty_to_voltage(double duty, double source_voltage) {
    if (duty < 0.0 || duty > 1.0) throw DutyOutOfRange("duty_to_voltage: duty outside [0, 1]");
    return duty * source_voltage;
}

namespace detail {

/// Piecewise-linear evaluation extended below the first knee by extrapolating
/// the first segment. Simulation adapters use this so large deviation sweeps
/// stay on the linear segment instead of faulting.
inline double bldc_eval_extended(const BldcMap& map, double voltage) {
    const auto& k = map.knees;
    if (voltage >= k.back().voltage) return k.back().speed;  // saturated
    std::size_t i = 0;
    if (voltage > k.front().voltage) {
        while (i + 2 < k.size() && voltage > k[i + 1].voltage) ++i;
    }
    const double dv = k[i + 1].voltage - k[i].voltage;
    const double slope = (k[i + 1].speed - k[i].speed) / dv;
    return k[i].speed + slope * (voltage - k[i].voltage);
}

/// Local slope at the operating voltage, used to express the static map in
/// equivalent input volts for Hammerstein-style simulation.
inline double bldc_slope_at(const BldcMap& map, double voltage) {
    const auto& k = map.knees;
    std::size_t i = 0;
    while (i + 2 < k.size() && voltage > k[i + 1].voltage) ++i;
    return (k[i + 1].speed - k[i].speed) / (k[i + 1].voltage - k[i].voltage);
}

}  // namespace detail

/// Steady speed at the given average voltage. Negative voltages are rejected;
/// beyond the last knee the map saturates flat.
inline double bldc_static(const BldcMap& map, double voltage) {
    if (voltage < 0.0) throw NegativeVoltage("bldc_static: voltage < 0");
    return detail::bldc_eval_extended(map, voltage);
}

}  // namespace trike
