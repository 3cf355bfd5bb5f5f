#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace trike {

// Polynomials are stored as real coefficient vectors in descending degree:
// {a, b, c} means a*x^2 + b*x + c. The empty vector is not a valid polynomial;
// the zero polynomial is {0}.
using Poly = std::vector<double>;

/// Evaluate p(x) for complex x (Horner).
inline std::complex<double> poly_eval(const Poly& p, std::complex<double> x) {
    std::complex<double> acc{0.0, 0.0};
    for (double c : p) acc = acc * x + c;
    return acc;
}

inline double poly_eval(const Poly& p, double x) {
    double acc = 0.0;
    for (double c : p) acc = acc * x + c;
    return acc;
}

/// Drop leading (highest-degree) zero coefficients; keeps at least one entry.
inline Poly poly_trim(Poly p) {
    std::size_t i = 0;
    while (i + 1 < p.size() && p[i] == 0.0) ++i;
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i));
    return p;
}

inline std::size_t poly_degree(const Poly& p) { return poly_trim(p).size() - 1; }

/// Drop leading coefficients that are negligible against the largest one;
/// used where a substitution provably lowers the degree but floating-point
/// residue survives.
inline Poly poly_trim_rel(Poly p, double rel_tol = 1e-12) {
    double scale = 0.0;
    for (double c : p) scale = std::max(scale, std::abs(c));
    std::size_t i = 0;
    while (i + 1 < p.size() && std::abs(p[i]) <= rel_tol * scale) ++i;
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i));
    return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    const std::size_t oa = out.size() - a.size(), ob = out.size() - b.size();
    for (std::size_t i = 0; i < a.size(); ++i) out[oa + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[ob + i] += b[i];
    return out;
}

inline Poly poly_scale(Poly p, double s) {
    for (double& c : p) c *= s;
    return p;
}

/// Monic polynomial with the given roots; conjugate pairs combine to real
/// quadratics, so small imaginary residue is discarded at the end.
inline Poly poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> acc{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i] += acc[i];
            next[i + 1] -= acc[i] * r;
        }
        acc = std::move(next);
    }
    Poly out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].real();
    return out;
}

/// Roots via the companion-matrix eigenvalues of the trimmed polynomial.
inline std::vector<std::complex<double>> poly_roots(const Poly& p_in) {
    Poly p = poly_trim(p_in);
    if (p.size() <= 1) return {};
    const std::size_t n = p.size() - 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        companion(0, static_cast<Eigen::Index>(i)) = -p[i + 1] / p[0];
    for (std::size_t i = 1; i < n; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    return out;
}

}  // namespace trike
