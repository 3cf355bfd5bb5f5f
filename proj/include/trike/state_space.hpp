#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "trike/errors.hpp"
#include "trike/transfer_function.hpp"

namespace trike {

/// Single-input single-output state-space realization
///   x' = A x + B u,  y = C x + D u
/// plus the transport delay carried over from the source system.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    double dead_time = 0.0;

    Eigen::Index order() const { return A.rows(); }
};

/// Controllable-canonical realization of a proper transfer function.
/// For a biproper system the direct feedthrough is split off first so the
/// remaining numerator is strictly proper.
inline StateSpace to_state_space(const TransferFunction& sys) {
    const std::size_t n = sys.order();
    StateSpace ss;
    ss.dead_time = sys.dead_time;

    // Pad the numerator to denominator length (descending degree).
    Poly num(sys.den.size(), 0.0);
    std::copy(sys.num.begin(), sys.num.end(),
              num.begin() + static_cast<std::ptrdiff_t>(sys.den.size() - sys.num.size()));

    ss.D = num[0];  // nonzero only for a biproper system (den is monic)
    if (n == 0) {
        ss.A.resize(0, 0);
        ss.B.resize(0);
        ss.C.resize(0);
        return ss;
    }

    // Strictly proper remainder: num - D * den, degree < n.
    Poly rem(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rem[i] = num[i + 1] - ss.D * sys.den[i + 1];

    const auto ni = static_cast<Eigen::Index>(n);
    ss.A = Eigen::MatrixXd::Zero(ni, ni);
    for (Eigen::Index i = 0; i + 1 < ni; ++i) ss.A(i, i + 1) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        ss.A(ni - 1, static_cast<Eigen::Index>(i)) = -sys.den[n - i];

    ss.B = Eigen::VectorXd::Zero(ni);
    ss.B(ni - 1) = 1.0;

    ss.C.resize(ni);
    for (std::size_t i = 0; i < n; ++i)
        ss.C(static_cast<Eigen::Index>(i)) = rem[n - 1 - i];
    return ss;
}

/// Exact zero-order-hold step of the realization over one period:
/// Ad = e^{AT}, Bd = integral_0^T e^{As} ds * B, via the matrix exponential
/// of the augmented block [[A B],[0 0]].
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> zoh_step_matrices(const StateSpace& ss,
                                                                     double sample_time) {
    const Eigen::Index n = ss.order();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = ss.A;
    aug.topRightCorner(n, 1) = ss.B;
    const Eigen::MatrixXd e = (aug * sample_time).exp();
    return {e.topLeftCorner(n, n), e.topRightCorner(n, 1)};
}

/// Characteristic polynomial of a square matrix by the Faddeev-LeVerrier
/// recurrence, together with the matrices M_k forming adj(xI - A). Exact in
/// rational arithmetic; adequate in double for the low orders accepted here.
struct CharPoly {
    Poly coeffs;                        // monic, descending: x^n + c1 x^{n-1} + ... + cn
    std::vector<Eigen::MatrixXd> adj;   // adj(xI - A) = sum_k x^{n-1-k} adj[k]
};

inline CharPoly faddeev_leverrier(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    CharPoly out;
    out.coeffs.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.coeffs[0] = 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        out.adj.push_back(m);
        const Eigen::MatrixXd am = a * m;
        const double c = -am.trace() / static_cast<double>(k);
        out.coeffs[static_cast<std::size_t>(k)] = c;
        m = am + c * Eigen::MatrixXd::Identity(n, n);
    }
    return out;
}

/// Rational transfer function H(x) = C (xI - A)^{-1} B + D recovered from a
/// realization: numerator = C adj(xI - A) B + D * charpoly.
inline std::pair<Poly, Poly> realization_to_rational(const Eigen::MatrixXd& a,
                                                     const Eigen::VectorXd& b,
                                                     const Eigen::RowVectorXd& c, double d) {
    const CharPoly cp = faddeev_leverrier(a);
    Poly num(cp.coeffs.size(), 0.0);
    for (std::size_t k = 0; k < cp.adj.size(); ++k)
        num[k + 1] = (c * cp.adj[k] * b).value();
    if (d != 0.0) num = poly_add(num, poly_scale(cp.coeffs, d));
    return {poly_trim(num), cp.coeffs};
}

}  // namespace trike
