#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trike/bldc.hpp"
#include "trike/simulate.hpp"
#include "trike/spectrum.hpp"
#include "trike/transfer_function.hpp"

using namespace trike;

namespace {

std::vector<double> sine(std::size_t n, double f_hz, double T, double amp = 1.0) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = amp * std::sin(2.0 * M_PI * f_hz * static_cast<double>(k) * T);
    return out;
}

}  // namespace

TEST(PowerSpectrum, PureSineConcentratesInItsBin) {
    const double T = 0.05;
    const auto x = sine(640, 0.125, T);  // bin 4 of a 640-sample record
    const auto spec = power_spectrum(x, T);
    const std::size_t bin = 4;
    EXPECT_NEAR(spec[bin].frequency_hz, 0.125, 1e-12);
    double ac = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) ac += spec[k].power;
    EXPECT_NEAR(spec[bin].power / ac, 1.0, 1e-12);
    EXPECT_NEAR(spec[bin].power, 0.5, 1e-9);  // mean square of a unit sine
}

TEST(PowerSpectrum, ConstantSignalIsAllDc) {
    const std::vector<double> x(64, 3.0);
    const auto spec = power_spectrum(x, 0.1);
    EXPECT_NEAR(spec[0].power, 9.0, 1e-12);
    for (std::size_t k = 1; k < spec.size(); ++k) EXPECT_NEAR(spec[k].power, 0.0, 1e-12);
}

TEST(PowerSpectrum, ParsevalHolds) {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t n : {64u, 100u, 641u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = dist(rng);
        double mean_square = 0.0;
        for (double v : x) mean_square += v * v;
        mean_square /= static_cast<double>(n);
        const auto spec = power_spectrum(x, 0.05);
        double total = 0.0;
        for (const auto& p : spec) total += p.power;
        EXPECT_NEAR(total, mean_square, 1e-9 * mean_square);
    }
}

TEST(PowerSpectrum, ShortRecordRejected) {
    EXPECT_THROW(power_spectrum(std::vector<double>(15, 1.0), 0.1), TooShort);
}

namespace {

SystemUnderTest lti_system(const TransferFunction& g, double T) {
    return [g, T](const std::vector<double>& u) { return simulate(g, u, T).y; };
}

}  // namespace

TEST(LinearityScan, LtiSystemIsLinearAtEveryAmplitude) {
    LinearityScanConfig cfg;
    cfg.threshold = 0.999;
    const auto report = linearity_scan(lti_system(identified_velocity_plant(1.0), cfg.sample_time),
                                       0.125, {1.0, 5.0, 10.0, 20.0}, cfg);
    for (const auto& row : report.rows) {
        EXPECT_GE(row.fundamental_power, 0.999);
        EXPECT_TRUE(row.linear);
        EXPECT_LT(row.distortion, 0.05);
    }
    EXPECT_DOUBLE_EQ(report.linear_range, 20.0);
}

TEST(LinearityScan, HardSaturationFlagged) {
    // clamp(u, -1, 1) driven at amplitude 2: deep clipping; the fundamental
    // share drops below 0.95 (0.9486 from the DFT oracle)
    const SystemUnderTest clipper = [](const std::vector<double>& u) {
        std::vector<double> y(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) y[k] = std::clamp(u[k], -1.0, 1.0);
        return y;
    };
    LinearityScanConfig cfg;
    const auto report = linearity_scan(clipper, 0.125, {0.5, 2.0}, cfg);
    EXPECT_TRUE(report.rows[0].linear);
    EXPECT_FALSE(report.rows[1].linear);
    EXPECT_NEAR(report.rows[1].fundamental_power, 0.9486, 5e-3);
    EXPECT_LT(report.rows[1].fundamental_power, 0.95);
    EXPECT_DOUBLE_EQ(report.linear_range, 0.5);
}

TEST(LinearityScan, ConstructedKneeIsLocated) {
    // static map linear up to a knee at 6 deviation units, flat beyond
    const SystemUnderTest knee_map = [](const std::vector<double>& u) {
        std::vector<double> y(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) y[k] = std::min(u[k], 6.0);
        return y;
    };
    LinearityScanConfig cfg;
    cfg.threshold = 0.9999;
    const auto report = linearity_scan(knee_map, 0.125, {2.0, 4.0, 6.0, 8.0, 10.0}, cfg);
    EXPECT_DOUBLE_EQ(report.linear_range, 6.0);  // knee found within one step
}

TEST(LinearityScan, MisalignedFrequencyRejected) {
    LinearityScanConfig cfg;
    EXPECT_THROW(linearity_scan([](const std::vector<double>& u) { return u; }, 0.13, {1.0}, cfg),
                 BinMisalignment);
}
