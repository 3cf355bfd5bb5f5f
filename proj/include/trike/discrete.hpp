#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "trike/errors.hpp"
#include "trike/state_space.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Sampled-data rational system in z with an explicit pure delay:
///
///   H(z) = num(z)/den(z) * z^{-pure_delay_samples},  evaluated at z = e^{jwT}
struct DiscreteTransferFunction {
    Poly num;
    Poly den;
    double sample_time = 0.0;
    int pure_delay_samples = 0;

    std::size_t order() const { return den.size() - 1; }

    double dc_gain() const {
        const double d = poly_eval(den, 1.0);
        if (std::abs(d) < kPoleMagnitudeFloor)
            throw PoleOnAxis("dc_gain: discrete pole at z = 1");
        return poly_eval(num, 1.0) / d;
    }
};

inline DiscreteTransferFunction dtf_new(Poly num, Poly den, double sample_time,
                                        int pure_delay_samples = 0) {
    if (sample_time <= 0.0) throw NonpositiveSampleTime("dtf_new: sample_time <= 0");
    if (den.empty()) throw ZeroDenominator("dtf_new: empty denominator");
    den = poly_trim(den);
    if (den[0] == 0.0) throw ZeroDenominator("dtf_new: zero denominator");
    if (num.empty()) num = {0.0};
    num = poly_trim(num);
    if (num.size() > den.size())
        throw ImproperSystem("dtf_new: numerator degree exceeds denominator degree");
    if (den.size() - 1 > kMaxOrder)
        throw UnsupportedOrder("dtf_new: order above " + std::to_string(kMaxOrder));
    const double lead = den[0];
    for (double& c : den) c /= lead;
    for (double& c : num) c /= lead;
    return DiscreteTransferFunction{std::move(num), std::move(den), sample_time,
                                    pure_delay_samples};
}

/// H(e^{jwT}), delay included.
inline std::complex<double> freq_response(const DiscreteTransferFunction& sys, double omega) {
    const std::complex<double> z = std::exp(std::complex<double>{0.0, omega * sys.sample_time});
    const std::complex<double> d = poly_eval(sys.den, z);
    if (std::abs(d) < kPoleMagnitudeFloor)
        throw PoleOnAxis("freq_response: evaluation at a discrete pole");
    return poly_eval(sys.num, z) / d * std::pow(z, -sys.pure_delay_samples);
}

namespace detail {

/// Dead time must land on the sample grid: the ratio dead_time/T may deviate
/// from an integer by at most 1% — beyond that the caller asked for a
/// fractional delay this toolkit deliberately does not approximate.
inline int delay_to_samples(double dead_time, double sample_time) {
    const double ratio = dead_time / sample_time;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-2)
        throw FractionalDelay("dead time is not an integer multiple of the sample time");
    return static_cast<int>(rounded);
}

}  // namespace detail

/// Zero-order-hold discretization. The delay-free rational part is
/// discretized through the exact matrix exponential of the augmented
/// realization, so step responses agree with the continuous system exactly
/// at the sample instants. Dead time becomes a whole number of samples.
inline DiscreteTransferFunction c2d_zoh(const TransferFunction& sys, double sample_time) {
    if (sample_time <= 0.0) throw NonpositiveSampleTime("c2d_zoh: sample_time <= 0");
    const int delay = detail::delay_to_samples(sys.dead_time, sample_time);
    if (sys.order() == 0)
        return dtf_new(sys.num, sys.den, sample_time, delay);

    const StateSpace ss = to_state_space(sys);
    const auto [ad, bd] = zoh_step_matrices(ss, sample_time);
    auto [num, den] = realization_to_rational(ad, bd, ss.C, ss.D);
    return dtf_new(std::move(num), std::move(den), sample_time, delay);
}

/// Bilinear (Tustin) discretization: s <- (2/T)(z-1)/(z+1). Preserves the DC
/// gain exactly and maps the open left half-plane strictly inside the unit
/// circle. Dead time becomes a whole number of samples, as with ZOH.
inline DiscreteTransferFunction c2d_tustin(const TransferFunction& sys, double sample_time) {
    if (sample_time <= 0.0) throw NonpositiveSampleTime("c2d_tustin: sample_time <= 0");
    const int delay = detail::delay_to_samples(sys.dead_time, sample_time);
    const double c = 2.0 / sample_time;

    // A continuous pole at s = 2/T maps to z = infinity; reject it.
    double scale = 0.0;
    for (double v : sys.den) scale = std::max(scale, std::abs(v));
    if (std::abs(poly_eval(sys.den, c)) < 1e-9 * scale * std::pow(std::max(c, 1.0), sys.order()))
        throw BilinearSingularity("c2d_tustin: continuous pole at 2/T");

    // p(s) -> sum_i p_i c^{deg_i} (z-1)^{deg_i} (z+1)^{n-deg_i}, common
    // denominator (z+1)^n with n the system order.
    const std::size_t n = sys.order();
    const auto substitute = [&](const Poly& p) {
        Poly acc{0.0};
        const std::size_t np = p.size();
        for (std::size_t i = 0; i < np; ++i) {
            const std::size_t deg = np - 1 - i;           // degree of this term
            Poly term{p[i] * std::pow(c, static_cast<double>(deg))};
            for (std::size_t k = 0; k < deg; ++k) term = poly_mul(term, {1.0, -1.0});
            for (std::size_t k = 0; k < n - deg; ++k) term = poly_mul(term, {1.0, 1.0});
            acc = poly_add(acc, term);
        }
        return acc;
    };
    Poly num_d = substitute(sys.num);
    Poly den_d = substitute(sys.den);

    // The substitution preserves the DC gain identically in exact arithmetic;
    // re-anchor the numerator to remove the expansion's floating-point drift.
    const double num0 = sys.num.back(), den0 = sys.den.back();
    if (std::abs(den0) > kPoleMagnitudeFloor && num0 != 0.0) {
        const double current = poly_eval(num_d, 1.0) / poly_eval(den_d, 1.0);
        if (std::isfinite(current) && current != 0.0)
            num_d = poly_scale(num_d, (num0 / den0) / current);
    }
    return dtf_new(std::move(num_d), std::move(den_d), sample_time, delay);
}

/// Map a discrete system into the continuous-like w-plane via
/// z <- (1 + wT/2)/(1 - wT/2), the inverse of the Tustin substitution.
/// The pure delay z^{-k} is absorbed exactly as the rational all-pass
/// ((1 - wT/2)/(1 + wT/2))^k, so evaluating the result at
/// w = j (2/T) tan(wT/2) reproduces the discrete response at z = e^{jwT}.
inline TransferFunction w_transform(const DiscreteTransferFunction& dsys) {
    const double h = dsys.sample_time / 2.0;
    const std::size_t n = dsys.order();
    const Poly up{h, 1.0};     // 1 + wT/2, descending
    const Poly down{-h, 1.0};  // 1 - wT/2

    // p(z) -> sum_i p_i (1+wT/2)^{deg_i} (1-wT/2)^{n-deg_i}
    const auto substitute = [&](const Poly& p) {
        Poly acc{0.0};
        const std::size_t np = p.size();
        for (std::size_t i = 0; i < np; ++i) {
            const std::size_t deg = np - 1 - i;
            Poly term{p[i]};
            for (std::size_t k = 0; k < deg; ++k) term = poly_mul(term, up);
            for (std::size_t k = 0; k < n - deg; ++k) term = poly_mul(term, down);
            acc = poly_add(acc, term);
        }
        return acc;
    };

    Poly num = substitute(dsys.num);
    Poly den = substitute(dsys.den);
    for (int k = 0; k < dsys.pure_delay_samples; ++k) {
        num = poly_mul(num, down);
        den = poly_mul(den, up);
    }
    // Roots at z = -1 (the image of w = infinity) provably lower the degree
    // of the result; trim the floating-point residue they leave behind.
    num = poly_trim_rel(num);
    den = poly_trim_rel(den);
    return tf_new(std::move(num), std::move(den), 0.0);
}

}  // namespace trike
