#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "trike/errors.hpp"

namespace trike {

struct SpectrumPoint {
    double frequency_hz = 0.0;
    double power = 0.0;  // signal^2 units
};

/// One-sided DFT power spectrum. Bin powers are scaled so their sum equals
/// the mean square of the signal (Parseval); non-DC, non-Nyquist bins carry
/// the doubled two-sided power. O(N^2) with an exact twiddle table — records
/// here are short experiment captures, not audio streams.
inline std::vector<SpectrumPoint> power_spectrum(const std::vector<double>& series,
                                                 double sample_time) {
    const std::size_t n = series.size();
    if (n < 16) throw TooShort("power_spectrum: need at least 16 samples");
    if (sample_time <= 0.0) throw NonpositiveSampleTime("power_spectrum: sample_time <= 0");

    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
        twiddle[j] = {std::cos(ang), std::sin(ang)};
    }

    const std::size_t half = n / 2;
    std::vector<SpectrumPoint> out(half + 1);
    const double nf = static_cast<double>(n);
    for (std::size_t k = 0; k <= half; ++k) {
        std::complex<double> acc{0.0, 0.0};
        std::size_t idx = 0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += series[j] * twiddle[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        double p = std::norm(acc) / (nf * nf);
        const bool nyquist = (n % 2 == 0) && (k == half);
        if (k != 0 && !nyquist) p *= 2.0;
        out[k] = {static_cast<double>(k) / (nf * sample_time), p};
    }
    return out;
}

/// One row of a linearity scan.
struct LinearityRow {
    double amplitude = 0.0;          // input units
    double fundamental_power = 0.0;  // fraction of total AC power in the f0 bin
    double distortion = 0.0;         // RMS harmonic-to-fundamental ratio
    bool linear = false;             // fundamental_power >= threshold
};

struct LinearityReport {
    std::vector<LinearityRow> rows;  // sorted by amplitude ascending
    double threshold = 0.95;
    double linear_range = 0.0;  // largest amplitude judged linear, 0 if none
};

/// A system under test maps deviation-input samples to output samples on the
/// scan's sample grid.
using SystemUnderTest = std::function<std::vector<double>(const std::vector<double>&)>;

struct LinearityScanConfig {
    double f0_hz = 0.125;
    double sample_time = 0.05;
    int cycles = 10;
    double threshold = 0.95;
    double transient_discard = 0.2;  // fraction of cycles dropped, rounded up
};

/// Superposition probe: drive the system with a sinusoid at each amplitude,
/// drop the leading transient, and measure how much of the output AC power
/// stays in the excitation bin. An LTI system cannot move power across
/// frequencies, so anything below the threshold marks nonlinear behavior.
///
/// f0 must be bin-exact: the sample period has to divide the excitation
/// period so whole cycles align with the record.
inline LinearityReport linearity_scan(const SystemUnderTest& system, double f0_hz,
                                      std::vector<double> amplitudes,
                                      const LinearityScanConfig& cfg) {
    const double per_cycle = 1.0 / (f0_hz * cfg.sample_time);
    const double rounded = std::round(per_cycle);
    if (std::abs(per_cycle - rounded) > 1e-9 * per_cycle || rounded < 4.0) {
        const double f_near = 1.0 / (std::max(rounded, 4.0) * cfg.sample_time);
        throw BinMisalignment(
            "linearity_scan: f0 does not divide the sample grid into whole cycles; nearest "
            "aligned frequency is " + std::to_string(f_near) + " Hz (duration " +
            std::to_string(cfg.cycles / f_near) + " s for " + std::to_string(cfg.cycles) +
            " cycles)");
    }
    const auto samples_per_cycle = static_cast<std::size_t>(rounded);
    if (cfg.cycles < 3) throw ConfigMismatch("linearity_scan: need at least 3 cycles");

    std::sort(amplitudes.begin(), amplitudes.end());
    const std::size_t n = samples_per_cycle * static_cast<std::size_t>(cfg.cycles);
    const auto discard_cycles =
        static_cast<std::size_t>(std::ceil(cfg.transient_discard * cfg.cycles));
    const std::size_t discard = discard_cycles * samples_per_cycle;

    LinearityReport report;
    report.threshold = cfg.threshold;
    for (double amp : amplitudes) {
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k)
            u[k] = amp * std::sin(2.0 * M_PI * f0_hz * static_cast<double>(k) * cfg.sample_time);
        std::vector<double> y = system(u);
        if (y.size() != n) throw ConfigMismatch("linearity_scan: system returned wrong length");
        y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(discard));

        const auto spec = power_spectrum(y, cfg.sample_time);
        const std::size_t bin = static_cast<std::size_t>(
            std::llround(f0_hz * static_cast<double>(y.size()) * cfg.sample_time));
        double ac = 0.0;
        for (std::size_t k = 1; k < spec.size(); ++k) ac += spec[k].power;

        LinearityRow row;
        row.amplitude = amp;
        if (ac > 0.0 && bin < spec.size()) {
            row.fundamental_power = spec[bin].power / ac;
            const double harm = std::max(0.0, ac - spec[bin].power);
            row.distortion = spec[bin].power > 0.0 ? std::sqrt(harm / spec[bin].power) : 0.0;
        }
        row.linear = row.fundamental_power >= cfg.threshold;
        if (row.linear) report.linear_range = std::max(report.linear_range, amp);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace trike
