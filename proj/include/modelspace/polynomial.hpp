#pragma once

// Dense complex polynomials (ascending coefficients) and their roots.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "modelspace/types.hpp"

namespace modelspace {

using Poly = std::vector<Complex>;

inline Poly polyTrim(Poly p, double relTol = 0.0) {
    double scale = 0.0;
    for (const auto& c : p) scale = std::max(scale, std::abs(c));
    while (!p.empty() && std::abs(p.back()) <= relTol * scale) p.pop_back();
    return p;
}

inline int polyDegree(const Poly& p) {
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
        if (p[k] != Complex{}) return k;
    return -1;
}

/// Horner evaluation returning (p(z), p'(z)).
inline std::pair<Complex, Complex> polyEvalD(const Poly& p, Complex z) {
    Complex v{}, d{};
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        d = d * z + v;
        v = v * z + *it;
    }
    return {v, d};
}

inline Complex polyEval(const Poly& p, Complex z) {
    Complex v{};
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * z + *it;
    return v;
}

/// Running bound sum |a_k||z|^k, used for rounding error estimates.
inline double polyAbsEval(const Poly& p, double r) {
    double v = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * r + std::abs(*it);
    return v;
}

inline Poly polyAdd(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Poly polyScale(const Poly& a, Complex s) {
    Poly out(a);
    for (auto& c : out) c *= s;
    return out;
}

inline Poly polyMul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly polyPow(const Poly& a, int n) {
    Poly out{Complex{1.0}};
    for (int i = 0; i < n; ++i) out = polyMul(out, a);
    return out;
}

inline Poly polyDerivative(const Poly& p) {
    if (p.size() <= 1) return {};
    Poly out(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k) out[k - 1] = p[k] * static_cast<double>(k);
    return out;
}

namespace detail {

inline void newtonPolish(const Poly& p, Complex& z, int iterations = 6) {
    auto [v, d] = polyEvalD(p, z);
    double best = std::abs(v);
    for (int it = 0; it < iterations && best > 0.0; ++it) {
        if (d == Complex{}) break;
        Complex candidate = z - v / d;
        auto [v2, d2] = polyEvalD(p, candidate);
        if (!(std::abs(v2) < best)) break;
        z = candidate;
        v = v2;
        d = d2;
        best = std::abs(v2);
    }
}

}  // namespace detail

/// All roots of p with multiplicity (unmerged). Exactly vanishing low-order
/// coefficients yield exact roots at 0; leading coefficients below
/// `leadingRelTol` of the largest coefficient are dropped (their roots lie
/// near infinity).
inline std::vector<Complex> polyRoots(Poly p, double leadingRelTol = 1e-14) {
    p = polyTrim(std::move(p), leadingRelTol);
    std::vector<Complex> roots;
    std::size_t lowZeros = 0;
    while (lowZeros < p.size() && p[lowZeros] == Complex{}) ++lowZeros;
    if (lowZeros == p.size()) return roots;  // zero polynomial: caller's problem
    roots.assign(lowZeros, Complex{});
    Poly q(p.begin() + static_cast<std::ptrdiff_t>(lowZeros), p.end());
    const int n = static_cast<int>(q.size()) - 1;
    if (n <= 0) return roots;
    if (n == 1) {
        roots.push_back(-q[0] / q[1]);
        return roots;
    }
    if (n == 2) {
        const Complex a = q[2], b = q[1], c = q[0];
        const Complex disc = std::sqrt(b * b - 4.0 * a * c);
        const Complex qq = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
        if (qq == Complex{}) {
            roots.push_back(Complex{});
            roots.push_back(Complex{});
        } else {
            roots.push_back(qq / a);
            roots.push_back(c / qq);
        }
        for (std::size_t i = roots.size() - 2; i < roots.size(); ++i) detail::newtonPolish(q, roots[i]);
        return roots;
    }
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -q[i] / q[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success) return roots;
    for (int i = 0; i < n; ++i) {
        Complex z = solver.eigenvalues()(i);
        detail::newtonPolish(q, z);
        roots.push_back(z);
    }
    return roots;
}

}  // namespace modelspace
