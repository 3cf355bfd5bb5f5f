#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "trike/discrete.hpp"
#include "trike/simulate.hpp"
#include "trike/spectrum.hpp"
#include "trike/time_series.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// A sampled identification experiment. Identification runs on deviation
/// variables: input minus operating voltage, output minus operating speed.
struct IdExperiment {
    TimeSeries data;                 // u in volts (average), y in m/s
    double operating_voltage = 0.0;  // V
    double operating_speed = 0.0;    // m/s
    double sample_time = 0.0;        // seconds

    std::vector<double> input_deviation() const {
        std::vector<double> u(data.u);
        for (double& v : u) v -= operating_voltage;
        return u;
    }
    std::vector<double> output_deviation() const {
        std::vector<double> y(data.y);
        for (double& v : y) v -= operating_speed;
        return y;
    }
};

struct IdentifiedModel {
    TransferFunction model;
    double fit = 0.0;                 // 1 - RMS(error)/RMS(deviation from mean), validation tail
    double residual_whiteness = 0.0;  // max |autocorrelation| of residuals, lags 1..20
    bool unstable_warning = false;    // estimate has a pole outside the stable region
};

struct IdOptions {
    int iv_iterations = 2;          // 0 gives the plain least-squares estimate
    double estimation_split = 0.7;  // leading fraction used for estimation
};

namespace detail {

inline double stddev(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

inline std::vector<double> diff(const std::vector<double>& v) {
    std::vector<double> d(v.size() > 0 ? v.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    return d;
}

/// Reflect unstable roots of a monic polynomial inside the unit circle; the
/// auxiliary model is only simulated for instruments, so it must not blow up.
inline Poly stabilize_discrete(const Poly& monic) {
    auto roots = poly_roots(monic);
    bool changed = false;
    for (auto& r : roots) {
        if (std::abs(r) >= 0.999) {
            r = r / std::norm(r) * 0.998;
            changed = true;
        }
    }
    if (!changed) return monic;
    return poly_from_roots(roots);
}

inline std::vector<double> filter_iir(const Poly& num, const Poly& den,
                                      const std::vector<double>& u, int delay = 0) {
    DiscreteTransferFunction f;
    f.num = num;
    f.den = den;
    f.sample_time = 1.0;
    f.pure_delay_samples = delay;
    return filter_sequence(f, u);
}

}  // namespace detail

/// Dead-time estimate from the cross-correlation of the input and output
/// increments (differencing prewhitens step-like records). A strictly proper
/// sampled plant responds one tick after its input, so one sample is
/// subtracted from the correlation peak; the result is clamped at zero.
inline double estimate_delay(const IdExperiment& experiment) {
    if (!experiment.data.uniform())
        throw SampleTimeMismatch("estimate_delay: non-uniform sampling");
    const std::vector<double> du = detail::diff(experiment.input_deviation());
    const std::vector<double> dy = detail::diff(experiment.output_deviation());
    if (du.size() < 8) throw TooShort("estimate_delay: record too short");
    if (detail::stddev(du) < 1e-12)
        throw InsufficientExcitation("estimate_delay: constant input");

    const std::size_t max_lag = std::min<std::size_t>(du.size() / 2, 2000);
    double best = -1.0;
    std::size_t best_lag = 0;
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k + lag < dy.size(); ++k) acc += du[k] * dy[k + lag];
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            best_lag = lag;
        }
    }
    const std::size_t samples = best_lag > 0 ? best_lag - 1 : 0;
    return static_cast<double>(samples) * experiment.sample_time;
}

/// Two-stage estimate of a continuous transfer function from sampled data.
///
/// Stage one is least squares on the delay-compensated one-step regression;
/// stage two refines it with auxiliary-model instrumental variables: the
/// current estimate simulates a noise-free output that replaces the measured
/// output inside the instrument vector, and all regression signals are
/// prefiltered by 1/A_hat(z) so the equation error approximates output error.
/// The refined discrete model maps to continuous time by taking logarithms of
/// its roots (the inverse of the zero-order-hold pole relation) and scaling
/// the numerator for an exact DC-gain match.
inline IdentifiedModel identify_iv(const IdExperiment& experiment, int zero_count,
                                   int pole_count, double dead_time,
                                   const IdOptions& options = {}) {
    if (pole_count < 1 || zero_count < 0 || zero_count > pole_count - 1)
        throw ConfigMismatch("identify_iv: need 0 <= zeros < poles");
    if (!experiment.data.uniform())
        throw SampleTimeMismatch("identify_iv: non-uniform sampling");
    const double T = experiment.sample_time;
    const std::vector<double> u = experiment.input_deviation();
    const std::vector<double> y = experiment.output_deviation();
    const std::size_t n = u.size();
    if (n < 20 * static_cast<std::size_t>(pole_count))
        throw TooShort("identify_iv: need at least 20 samples per model order");

    if (detail::stddev(u) < 1e-12)
        throw InsufficientExcitation("identify_iv: constant input");
    {
        const auto spec = power_spectrum(u, T);
        double peak = 0.0;
        for (std::size_t k = 1; k < spec.size(); ++k) peak = std::max(peak, spec[k].power);
        int excited = 0;
        for (std::size_t k = 1; k < spec.size(); ++k)
            if (spec[k].power > 1e-10 * peak) ++excited;
        if (excited < zero_count + pole_count + 1)
            throw InsufficientExcitation("identify_iv: input excites too few frequencies");
    }

    const int d = detail::delay_to_samples(dead_time, T);
    const int na = pole_count;
    const int nb = pole_count;  // strictly proper: taps u[k-1-d] .. u[k-nb-d]
    const auto ne = static_cast<std::size_t>(options.estimation_split * static_cast<double>(n));
    const std::size_t k0 = static_cast<std::size_t>(std::max(na, nb + d));
    if (ne <= k0 + static_cast<std::size_t>(na + nb))
        throw TooShort("identify_iv: estimation split too short");

    const int p = na + nb;
    const auto build_normal =
        [&](const std::vector<double>& yr, const std::vector<double>& ur,
            const std::vector<double>& inst, Eigen::MatrixXd& ztp, Eigen::VectorXd& zty) {
            ztp.setZero(p, p);
            zty.setZero(p);
            Eigen::VectorXd phi(p), zeta(p);
            for (std::size_t k = k0; k < ne; ++k) {
                for (int i = 1; i <= na; ++i) {
                    phi(i - 1) = -yr[k - static_cast<std::size_t>(i)];
                    zeta(i - 1) = -inst[k - static_cast<std::size_t>(i)];
                }
                for (int i = 1; i <= nb; ++i) {
                    const double uv = ur[k - static_cast<std::size_t>(i + d)];
                    phi(na + i - 1) = uv;
                    zeta(na + i - 1) = uv;
                }
                ztp.noalias() += zeta * phi.transpose();
                zty.noalias() += zeta * yr[k];
            }
        };

    const auto solve_theta = [&](const Eigen::MatrixXd& ztp, const Eigen::VectorXd& zty) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(ztp);
        if (!lu.isInvertible())
            throw SingularRegression("identify_iv: instruments correlate poorly with regressors");
        return Eigen::VectorXd(lu.solve(zty));
    };

    Eigen::MatrixXd ztp(p, p);
    Eigen::VectorXd zty(p);
    build_normal(y, u, y, ztp, zty);  // instruments = regressors: plain LS
    Eigen::VectorXd theta = solve_theta(ztp, zty);

    for (int pass = 0; pass < options.iv_iterations; ++pass) {
        Poly a_hat(static_cast<std::size_t>(na) + 1);
        a_hat[0] = 1.0;
        for (int i = 0; i < na; ++i) a_hat[static_cast<std::size_t>(i) + 1] = theta(i);
        a_hat = detail::stabilize_discrete(a_hat);
        Poly b_hat(static_cast<std::size_t>(nb) + 1, 0.0);
        for (int i = 0; i < nb; ++i) b_hat[static_cast<std::size_t>(i) + 1] = theta(na + i);

        const std::vector<double> uf = detail::filter_iir({1.0}, a_hat, u);
        const std::vector<double> yf = detail::filter_iir({1.0}, a_hat, y);
        const std::vector<double> xf = detail::filter_iir(b_hat, a_hat, uf, d);
        build_normal(yf, uf, xf, ztp, zty);
        theta = solve_theta(ztp, zty);
    }

    // --- map the discrete estimate to continuous time ---
    Poly a_est(static_cast<std::size_t>(na) + 1);
    a_est[0] = 1.0;
    for (int i = 0; i < na; ++i) a_est[static_cast<std::size_t>(i) + 1] = theta(i);
    Poly b_est(static_cast<std::size_t>(nb), 0.0);
    for (int i = 0; i < nb; ++i) b_est[static_cast<std::size_t>(i)] = theta(na + i);

    IdentifiedModel result;
    const auto discrete_poles = poly_roots(a_est);
    for (const auto& pd : discrete_poles)
        if (std::abs(pd) >= 1.0) result.unstable_warning = true;

    std::vector<std::complex<double>> cont_poles;
    for (const auto& pd : discrete_poles) cont_poles.push_back(std::log(pd) / T);

    // Keep the zero_count discrete zeros with the largest real part: extra
    // sampling zeros sit far from z = 1 and have no continuous counterpart.
    auto discrete_zeros = poly_roots(poly_trim(b_est));
    std::sort(discrete_zeros.begin(), discrete_zeros.end(),
              [](const std::complex<double>& l, const std::complex<double>& r) {
                  return l.real() > r.real();
              });
    std::vector<std::complex<double>> cont_zeros;
    for (std::size_t i = 0; i < discrete_zeros.size() && cont_zeros.size() <
         static_cast<std::size_t>(zero_count); ++i)
        cont_zeros.push_back(std::log(discrete_zeros[i]) / T);

    Poly den_c = poly_from_roots(cont_poles);
    Poly num_c = poly_from_roots(cont_zeros);
    const double dc_discrete = poly_eval(b_est, 1.0) / poly_eval(a_est, 1.0);
    const double dc_unscaled = num_c.back() / den_c.back();
    if (std::abs(dc_unscaled) < 1e-300 || !std::isfinite(dc_unscaled))
        throw SingularRegression("identify_iv: degenerate DC gain in the estimate");
    num_c = poly_scale(num_c, dc_discrete / dc_unscaled);
    result.model = tf_new(num_c, den_c, static_cast<double>(d) * T);

    // --- validation fit and residual whiteness on the held-out tail ---
    const TimeSeries sim = simulate(result.model, u, T);
    std::vector<double> resid;
    double mean_tail = 0.0;
    for (std::size_t k = ne; k < n; ++k) mean_tail += y[k];
    mean_tail /= static_cast<double>(n - ne);
    double se = 0.0, sy = 0.0, peak = 0.0;
    for (std::size_t k = ne; k < n; ++k) {
        const double e = y[k] - sim.y[k];
        resid.push_back(e);
        se += e * e;
        sy += (y[k] - mean_tail) * (y[k] - mean_tail);
        peak = std::max(peak, std::abs(y[k]));
    }
    // A settled record has a nearly constant tail; floor the normalizer at
    // 0.1% of the signal peak so the fit stays meaningful instead of
    // diverging on zero deviation.
    const double denom = std::max(std::sqrt(sy), 1e-3 * std::max(1e-12, peak) *
                                                     std::sqrt(static_cast<double>(n - ne)));
    result.fit = 1.0 - std::sqrt(se) / denom;

    const double rmean =
        std::accumulate(resid.begin(), resid.end(), 0.0) / static_cast<double>(resid.size());
    for (double& e : resid) e -= rmean;
    double r0 = 0.0;
    for (double e : resid) r0 += e * e;
    if (r0 > 0.0) {
        for (std::size_t lag = 1; lag <= 20 && lag < resid.size(); ++lag) {
            double r = 0.0;
            for (std::size_t k = 0; k + lag < resid.size(); ++k) r += resid[k] * resid[k + lag];
            result.residual_whiteness = std::max(result.residual_whiteness, std::abs(r / r0));
        }
    }
    return result;
}

/// Pseudo-random binary excitation: chips of +-amplitude held for `hold`
/// samples, deterministic in the seed.
inline std::vector<double> prbs_signal(std::size_t length, std::size_t hold, double amplitude,
                                       std::uint32_t seed) {
    if (hold == 0) throw ConfigMismatch("prbs_signal: hold must be positive");
    std::mt19937 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> out(length);
    double level = amplitude;
    for (std::size_t k = 0; k < length; ++k) {
        if (k % hold == 0) level = coin(rng) ? amplitude : -amplitude;
        out[k] = level;
    }
    return out;
}

}  // namespace trike
