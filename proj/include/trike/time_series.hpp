#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trike/errors.hpp"

namespace trike {

/// Uniformly sampled input/output record. The time axis must be uniform to
/// one part in 1e9; every consumer in the toolkit relies on that.
struct TimeSeries {
    std::vector<double> t;  // seconds, strictly increasing, uniform step
    std::vector<double> u;  // input samples
    std::vector<double> y;  // output samples

    std::size_t size() const { return t.size(); }

    double sample_time() const {
        if (t.size() < 2) throw TooShort("TimeSeries: need at least two samples");
        return t[1] - t[0];
    }

    /// Uniformity check: max deviation of any step from the first, relative.
    bool uniform(double rel_tol = 1e-9) const {
        if (t.size() < 2) return true;
        const double dt = t[1] - t[0];
        if (dt <= 0.0) return false;
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (std::abs((t[i] - t[i - 1]) - dt) > rel_tol * dt) return false;
        }
        return true;
    }
};

inline TimeSeries make_time_series(std::vector<double> u, std::vector<double> y, double t_step,
                                   double t0 = 0.0) {
    TimeSeries ts;
    ts.t.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ts.t[i] = t0 + static_cast<double>(i) * t_step;
    ts.u = std::move(u);
    ts.y = std::move(y);
    return ts;
}

namespace detail {

inline std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

/// CSV schema: header `t,u,y`, one row per sample, nine significant digits.
inline void write_csv(const TimeSeries& ts, std::ostream& os) {
    os << "t,u,y\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        os << detail::format_sig9(ts.t[i]) << ',' << detail::format_sig9(ts.u[i]) << ','
           << detail::format_sig9(ts.y[i]) << '\n';
    }
}

/// Parse the `t,u,y` schema. Throws trike::Error on malformed rows and
/// SampleTimeMismatch when the time axis is not uniform.
inline TimeSeries read_csv(std::istream& is) {
    TimeSeries ts;
    std::string line;
    if (!std::getline(is, line)) throw MalformedCsv("time-series CSV: empty stream");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "t,u,y") throw MalformedCsv("time-series CSV: expected header 't,u,y'");
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(ss, cell, ',') || cell.empty())
                throw MalformedCsv("time-series CSV: row " + std::to_string(row) + " malformed");
            std::size_t used = 0;
            vals[c] = std::stod(cell, &used);
            if (used != cell.size())
                throw MalformedCsv("time-series CSV: row " + std::to_string(row) + " malformed");
        }
        if (std::getline(ss, cell, ','))
            throw MalformedCsv("time-series CSV: row " + std::to_string(row) + " has extra columns");
        ts.t.push_back(vals[0]);
        ts.u.push_back(vals[1]);
        ts.y.push_back(vals[2]);
    }
    if (!ts.uniform())
        throw SampleTimeMismatch("time-series CSV: non-uniform sampling");
    return ts;
}

}  // namespace trike
