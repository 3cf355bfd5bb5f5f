#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "trike/errors.hpp"
#include "trike/polynomial.hpp"

namespace trike {

/// Highest denominator degree the toolkit accepts. Low-order plants are the
/// whole scope; double-precision polynomial arithmetic degrades past this.
inline constexpr std::size_t kMaxOrder = 10;

inline constexpr double kPoleMagnitudeFloor = 1e-12;

/// Continuous-time rational LTI system with a pure transport delay:
///
///   G(s) = num(s)/den(s) * exp(-dead_time * s)
///
/// Coefficients are stored descending in degree with the denominator made
/// monic on construction. Immutable after construction.
struct TransferFunction {
    Poly num;
    Poly den;
    double dead_time = 0.0;  // seconds

    std::size_t order() const { return den.size() - 1; }
    bool strictly_proper() const { return num.size() < den.size(); }

    /// num(0)/den(0); the denominator constant term must be nonzero.
    double dc_gain() const {
        const double d0 = den.back();
        if (std::abs(d0) < kPoleMagnitudeFloor)
            throw PoleOnAxis("dc_gain: pole at the origin");
        return num.back() / d0;
    }
};

/// Build a normalized TransferFunction. The denominator leading coefficient
/// is scaled to one and the numerator rescaled to match.
inline TransferFunction tf_new(Poly num, Poly den, double dead_time = 0.0) {
    if (dead_time < 0.0) throw NegativeDeadTime("tf_new: dead_time < 0");
    if (den.empty()) throw ZeroDenominator("tf_new: empty denominator");
    if (den[0] == 0.0) throw ZeroDenominator("tf_new: zero leading denominator coefficient");
    if (num.empty()) num = {0.0};
    num = poly_trim(num);
    if (num.size() > den.size())
        throw ImproperSystem("tf_new: numerator degree exceeds denominator degree");
    if (den.size() - 1 > kMaxOrder)
        throw UnsupportedOrder("tf_new: order above " + std::to_string(kMaxOrder));
    const double lead = den[0];
    for (double& c : den) c /= lead;
    for (double& c : num) c /= lead;
    return TransferFunction{std::move(num), std::move(den), dead_time};
}

/// G(jw), delay included. Throws PoleOnAxis when evaluated on a pole.
inline std::complex<double> freq_response(const TransferFunction& sys, double omega) {
    const std::complex<double> jw{0.0, omega};
    const std::complex<double> d = poly_eval(sys.den, jw);
    if (std::abs(d) < kPoleMagnitudeFloor)
        throw PoleOnAxis("freq_response: evaluation at a pole");
    std::complex<double> g = poly_eval(sys.num, jw) / d;
    if (sys.dead_time > 0.0)
        g *= std::exp(std::complex<double>{0.0, -omega * sys.dead_time});
    return g;
}

/// Phase wrapped to (-pi, pi].
inline double phase_of(std::complex<double> g) {
    double p = std::arg(g);
    if (p <= -M_PI) p += 2.0 * M_PI;
    return p;
}

/// Unwrap a phase sequence in place by removing 2*pi jumps between
/// consecutive samples. Companion to freq_response over a frequency grid.
inline void unwrap_phase(std::vector<double>& phases) {
    for (std::size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] - phases[i - 1];
        while (d > M_PI) { phases[i] -= 2.0 * M_PI; d = phases[i] - phases[i - 1]; }
        while (d < -M_PI) { phases[i] += 2.0 * M_PI; d = phases[i] - phases[i - 1]; }
    }
}

/// Cascade a*b: numerators and denominators multiply, delays add.
inline TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
    return tf_new(poly_mul(a.num, b.num), poly_mul(a.den, b.den), a.dead_time + b.dead_time);
}

/// Identified velocity plant of the front-drive robot:
/// gain * (s + 2.8) / ((s + 0.44)(s + 5)) with 0.3 s of transport delay.
/// The gain multiplier is a caller decision (see the calibrate-k CLI helper).
inline TransferFunction identified_velocity_plant(double gain = 1.0) {
    return tf_new({gain * 1.0, gain * 2.8}, poly_mul({1.0, 0.44}, {1.0, 5.0}), 0.3);
}

}  // namespace trike
