#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "trike/discrete.hpp"
#include "trike/state_space.hpp"
#include "trike/time_series.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Filter an input sequence through a discrete system (zero initial state).
/// Direct-form recursion on the normalized num/den plus the pure sample delay.
inline std::vector<double> filter_sequence(const DiscreteTransferFunction& sys,
                                           const std::vector<double>& u) {
    const std::size_t n = u.size();
    const std::size_t len = sys.den.size();
    const int d = sys.pure_delay_samples;

    // Pad the numerator to denominator length so tap j of either polynomial
    // multiplies the sample j steps back:
    //   y[k] = sum_j b[j] u[k-j-d] - sum_{j>=1} a[j] y[k-j]
    std::vector<double> b(len, 0.0);
    std::copy(sys.num.begin(), sys.num.end(), b.begin() + static_cast<std::ptrdiff_t>(len - sys.num.size()));

    std::vector<double> y(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            const std::ptrdiff_t iu = static_cast<std::ptrdiff_t>(k) - d - static_cast<std::ptrdiff_t>(j);
            if (iu >= 0) acc += b[j] * u[static_cast<std::size_t>(iu)];
        }
        for (std::size_t j = 1; j < len; ++j) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(j);
            if (iy >= 0) acc -= sys.den[j] * y[static_cast<std::size_t>(iy)];
        }
        y[k] = acc;
    }
    return y;
}

/// Simulate a discrete system over the given input samples.
inline TimeSeries simulate(const DiscreteTransferFunction& sys, const std::vector<double>& input,
                           double sample_time) {
    if (std::abs(sample_time - sys.sample_time) > 1e-9 * sys.sample_time)
        throw SampleTimeMismatch("simulate: input grid does not match system sample time");
    return make_time_series(input, filter_sequence(sys, input), sample_time);
}

/// Simulate a continuous system with the input held constant between samples
/// (zero-order hold). Output samples are exact for that input class: the
/// realization is stepped with the matrix exponential, not an ODE solver,
/// so there is no integration drift. Dead time shifts the input by its
/// sample count.
inline TimeSeries simulate(const TransferFunction& sys, const std::vector<double>& input,
                           double sample_time) {
    if (sample_time <= 0.0) throw NonpositiveSampleTime("simulate: sample_time <= 0");
    const int delay = detail::delay_to_samples(sys.dead_time, sample_time);
    const StateSpace ss = to_state_space(sys);
    const std::size_t n = input.size();
    std::vector<double> y(n, 0.0);

    const auto delayed = [&](std::size_t k) -> double {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k) - delay;
        return idx >= 0 ? input[static_cast<std::size_t>(idx)] : 0.0;
    };

    if (ss.order() == 0) {
        for (std::size_t k = 0; k < n; ++k) y[k] = ss.D * delayed(k);
        return make_time_series(input, std::move(y), sample_time);
    }

    const auto [ad, bd] = zoh_step_matrices(ss, sample_time);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ss.order());
    for (std::size_t k = 0; k < n; ++k) {
        const double uk = delayed(k);
        y[k] = (ss.C * x).value() + ss.D * uk;
        x = ad * x + bd * uk;
    }
    return make_time_series(input, std::move(y), sample_time);
}

/// Step-response figures of merit.
struct StepMetrics {
    double rise_time_10_90 = 0.0;   // seconds
    double overshoot = 0.0;         // fraction of steady state, clamped at 0
    double settling_time_2pct = 0.0;  // seconds
    double steady_state = 0.0;      // output units
};

/// Analyze a settled step response. The steady state is the mean of the last
/// tenth of the record; the record must already sit inside the 2% band there,
/// otherwise NotSettled is thrown. Crossings are interpolated linearly.
inline StepMetrics step_metrics(const TimeSeries& response) {
    const std::size_t n = response.size();
    if (n < 10) throw TooShort("step_metrics: record too short");
    const auto& y = response.y;
    const auto& t = response.t;

    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double ss = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) ss += y[i];
    ss /= static_cast<double>(tail);

    double peak_abs = 0.0;
    for (double v : y) peak_abs = std::max(peak_abs, std::abs(v));
    const double band = 0.02 * std::max(std::abs(ss), 1e-12 * std::max(1.0, peak_abs));
    for (std::size_t i = n - tail; i < n; ++i)
        if (std::abs(y[i] - ss) > band)
            throw NotSettled("step_metrics: last 10% of samples leave the 2% band");

    StepMetrics m;
    m.steady_state = ss;
    if (std::abs(ss) <= 1e-12 * std::max(1.0, peak_abs)) return m;  // degenerate zero step

    const double sgn = ss > 0.0 ? 1.0 : -1.0;
    const auto first_crossing = [&](double level) -> double {
        if (sgn * y[0] >= sgn * level) return t[0];  // started beyond the level
        for (std::size_t i = 1; i < n; ++i) {
            if (sgn * y[i] >= sgn * level) {
                const double f = (level - y[i - 1]) / (y[i] - y[i - 1]);
                return t[i - 1] + f * (t[i] - t[i - 1]);
            }
        }
        return t[n - 1];
    };
    m.rise_time_10_90 = first_crossing(0.9 * ss) - first_crossing(0.1 * ss);

    double peak = sgn * y[0];
    for (double v : y) peak = std::max(peak, sgn * v);
    m.overshoot = std::max(0.0, (peak - sgn * ss) / std::abs(ss));

    std::size_t last_violation = 0;
    bool violated = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(y[i] - ss) > band) {
            last_violation = i;
            violated = true;
        }
    }
    m.settling_time_2pct = violated ? t[std::min(last_violation + 1, n - 1)] : t[0];
    return m;
}

}  // namespace trike
