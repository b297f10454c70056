#pragma once

#include <complex>
#include <numbers>

namespace modelspace {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Value and complex derivative of a holomorphic function at one point.
/// `conditionEstimate` is a relative error bound on `value` (absolute when
/// the value vanishes); for truncated Blaschke products it includes the
/// certified tail bound.
struct EvalResult {
    Complex value{};
    Complex derivative{};
    double conditionEstimate = 0.0;
};

inline Complex unimodular(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// e^{ix} - 1 without cancellation for small x.
inline Complex expim1(double x) {
    const double s = std::sin(0.5 * x);
    return Complex(0.0, 2.0 * s) * unimodular(0.5 * x);
}

}  // namespace modelspace
