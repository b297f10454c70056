#pragma once

// Aleksandrov-Clark measures mu_alpha of phi: boundary density
// h_alpha = (1-|phi|^2)/|alpha-phi|^2, mass decomposition, atoms through the
// radial Poisson quotient, the A_n/B_n balance, and the pullback measure
// nu_phi = m o (phi*)^{-1} as a histogram.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "modelspace/errors.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/parallel.hpp"
#include "modelspace/quadrature.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

inline Complex boundaryValue(const MapExpr& phi, Complex xi) {
    try {
        return evalMap(phi, xi).value;
    } catch (const Error& e) {
        throw Error(ErrorCode::BoundaryValueUnavailable, e.what());
    }
}

/// h_alpha(xi) = (1 - |phi(xi)|^2) / |alpha - phi(xi)|^2.
inline double clarkDensity(const MapExpr& phi, Complex alpha, Complex xi) {
    const Complex v = boundaryValue(phi, xi);
    const double gap = std::norm(alpha - v);
    if (gap < 1e-24) throw Error(ErrorCode::DensityPole, "phi(xi) = alpha");
    return std::max(0.0, 1.0 - std::norm(v)) / gap;
}

struct AtomEstimate {
    Complex zeta;
    double mass = 0.0;
    double error = 0.0;
    bool converged = false;
    std::vector<std::pair<double, double>> curve;  // (r, quotient)
};

inline std::vector<double> defaultAtomRadii() {
    std::vector<double> r;
    for (int k = 8; k <= 20; ++k) r.push_back(1.0 - std::ldexp(1.0, -k));
    return r;
}

/// mu_alpha({zeta}) as the radial limit of ((1-r)/(1+r)) (1-|phi(r zeta)|^2)/|alpha - phi(r zeta)|^2,
/// extrapolated (two Richardson levels) from the last three radii, which are
/// expected to halve 1-r. Converged when the last two extrapolants agree to 1e-3.
inline AtomEstimate atomMassEstimate(const MapExpr& phi, Complex alpha, Complex zeta,
                                     const std::vector<double>& radii = defaultAtomRadii()) {
    if (radii.size() < 4) throw Error(ErrorCode::InvalidArgument, "atom extrapolation needs at least four radii");
    AtomEstimate out;
    out.zeta = zeta;
    for (double r : radii) {
        const Complex v = evalMap(phi, r * zeta).value;
        const double gap = std::norm(alpha - v);
        const double q = gap == 0.0 ? std::numeric_limits<double>::infinity()
                                    : (1.0 - r) / (1.0 + r) * std::max(0.0, 1.0 - std::norm(v)) / gap;
        out.curve.emplace_back(r, q);
    }
    auto extrapolate = [&](std::size_t last) {
        const double q0 = out.curve[last - 2].second, q1 = out.curve[last - 1].second, q2 = out.curve[last].second;
        const double a = 2.0 * q1 - q0, b = 2.0 * q2 - q1;
        return std::pair{(4.0 * b - a) / 3.0, std::abs(b - (4.0 * b - a) / 3.0)};
    };
    const std::size_t n = out.curve.size() - 1;
    const auto [latest, err] = extrapolate(n);
    const auto [previous, errPrev] = extrapolate(n - 1);
    (void)errPrev;
    out.mass = latest;
    out.error = std::max(err, std::abs(latest - previous));
    out.converged = std::isfinite(latest) && std::abs(latest - previous) < 1e-3;
    if (out.converged && (out.mass < 1e-6 || out.curve.back().second < 1e-6)) out.mass = 0.0;
    out.mass = std::max(0.0, out.mass);
    return out;
}

/// Throws NonConvergent (with the raw quotient curve in the message) when the
/// extrapolants do not settle.
inline double atomMass(const MapExpr& phi, Complex alpha, Complex zeta, const std::vector<double>& radii = defaultAtomRadii()) {
    const AtomEstimate e = atomMassEstimate(phi, alpha, zeta, radii);
    if (!e.converged) {
        std::string curve;
        for (auto [r, q] : e.curve) curve += " (" + std::to_string(r) + ", " + std::to_string(q) + ")";
        throw Error(ErrorCode::NonConvergent, "atom quotient did not converge:" + curve);
    }
    return e.mass;
}

/// Boundary points where phi comes within 1e-2 of alpha at r = 1 - 1e-4
/// (on an N-point scan), refined by minimizing |alpha - phi(e^{is})|.
inline std::vector<Complex> contactCandidates(const MapExpr& phi, Complex alpha, int scanPoints = 4096) {
    const double r = 1.0 - 1e-4;
    std::vector<char> hit(static_cast<std::size_t>(scanPoints), 0);
    parallelFor(hit.size(), [&](std::size_t k) {
        try {
            hit[k] = std::abs(alpha - evalMap(phi, r * unimodular(kTwoPi * static_cast<double>(k) / scanPoints)).value) < 1e-2;
        } catch (const Error&) {
        }
    });
    std::vector<Complex> out;
    const double step = kTwoPi / scanPoints;
    auto gap = [&](double s) {
        try {
            return std::abs(alpha - evalMap(phi, unimodular(s)).value);
        } catch (const Error&) {
            return std::abs(alpha - evalMap(phi, (1.0 - 1e-12) * unimodular(s)).value);
        }
    };
    std::size_t k = 0;
    const std::size_t n = hit.size();
    // start scanning just after a non-hit so cyclic runs stay whole
    std::size_t start = 0;
    while (start < n && hit[start]) ++start;
    if (start == n) return out;  // phi touches alpha everywhere: no isolated contacts
    while (k < n) {
        const std::size_t i = (start + k) % n;
        if (!hit[i]) {
            ++k;
            continue;
        }
        std::size_t len = 0;
        while (k + len < n && hit[(start + k + len) % n]) ++len;
        const double lo = step * static_cast<double>(start + k) - step;
        const double hi = step * static_cast<double>(start + k + len - 1) + step;
        const auto best = boost::math::tools::brent_find_minima(gap, lo, hi, 52);
        double sBest = best.first;
        // Newton on arg(phi/alpha) when phi is unimodular at the contact
        for (int it = 0; it < 8; ++it) {
            EvalResult e;
            try {
                e = evalMap(phi, unimodular(sBest));
            } catch (const Error&) {
                break;
            }
            if (std::abs(std::abs(e.value) - 1.0) > 1e-6 || std::abs(e.value) == 0.0) break;
            const double psi = std::arg(e.value / alpha);
            const double dpsi = std::real(unimodular(sBest) * e.derivative / e.value);
            if (!(std::abs(dpsi) > 1e-12) || std::abs(psi / dpsi) > step) break;
            sBest -= psi / dpsi;
            if (std::abs(psi) < 1e-15) break;
        }
        out.push_back(unimodular(sBest));
        k += len;
    }
    return out;
}

struct ClarkReport {
    Complex alpha;
    std::vector<std::pair<Complex, double>> density;  // (xi, h_alpha(xi)) at included samples
    double totalMass = 1.0;
    double acMass = 0.0;
    double singularMass = 0.0;
    /// Estimated absolutely continuous mass inside excised arcs (contained in singularMass).
    double excisionUncertainty = 0.0;
    long unavailableSamples = 0;
    std::vector<AtomEstimate> atoms;

    double atomTotal() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.mass;
        return s;
    }
};

inline constexpr double kAtomReportFloor = 1e-4;

/// Mass decomposition of mu_alpha: totalMass from the Herglotz value at 0,
/// acMass by the trapezoid rule on `boundaryGrid` points with arcs of
/// half-width 4 * 2pi/boundaryGrid excised around contact points, and
/// singularMass = totalMass - acMass. `extraCandidates` (e.g. spectrum
/// centers) are always probed for atoms.
inline ClarkReport clarkMasses(const MapExpr& phi, Complex alpha, int boundaryGrid = 4096,
                               const std::vector<Complex>& extraCandidates = {}) {
    if (boundaryGrid < 16) throw Error(ErrorCode::InvalidArgument, "boundary grid too small");
    ClarkReport rep;
    rep.alpha = alpha;
    const Complex phi0 = evalMap(phi, Complex{}).value;
    rep.totalMass = std::abs(phi0) < 1e-15 ? 1.0 : std::real((alpha + phi0) / (alpha - phi0));

    std::vector<Complex> contacts = contactCandidates(phi, alpha, std::max(boundaryGrid, 4096));
    for (auto c : extraCandidates) {
        const bool dup = std::any_of(contacts.begin(), contacts.end(), [&](Complex z) { return std::abs(z - c) < 1e-9; });
        if (!dup) contacts.push_back(c / std::abs(c));
    }
    for (auto zeta : contacts) {
        AtomEstimate a;
        try {
            a = atomMassEstimate(phi, alpha, zeta);
        } catch (const Error&) {
            continue;
        }
        if (a.mass > kAtomReportFloor) rep.atoms.push_back(a);
    }

    const double arc = 4.0 * kTwoPi / boundaryGrid;
    std::vector<Complex> excised;
    for (auto z : contacts) {
        // excise only around genuine contacts (atoms or density poles)
        bool pole = false;
        try {
            pole = std::abs(alpha - boundaryValue(phi, z)) < 1e-6;
        } catch (const Error&) {
            pole = true;
        }
        const bool atom = std::any_of(rep.atoms.begin(), rep.atoms.end(), [&](const AtomEstimate& a) { return a.zeta == z; });
        if (pole || atom) excised.push_back(z);
    }
    const std::size_t n = static_cast<std::size_t>(boundaryGrid);
    std::vector<double> h(n, 0.0);
    std::vector<char> state(n, 0);  // 0 included, 1 excised, 2 unavailable
    parallelFor(n, [&](std::size_t k) {
        const Complex xi = unimodular(kTwoPi * static_cast<double>(k) / boundaryGrid);
        for (auto z : excised)
            if (std::abs(std::arg(xi / z)) <= arc) {
                state[k] = 1;
                return;
            }
        try {
            h[k] = clarkDensity(phi, alpha, xi);
        } catch (const Error& e) {
            state[k] = e.code() == ErrorCode::DensityPole ? 1 : 2;
        }
    });
    long excludedCount = 0;
    double edgeDensity = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (state[k] == 0) {
            rep.density.emplace_back(unimodular(kTwoPi * static_cast<double>(k) / boundaryGrid), h[k]);
            const bool nearExcised = state[(k + 1) % n] == 1 || state[(k + n - 1) % n] == 1;
            if (nearExcised) edgeDensity = std::max(edgeDensity, h[k]);
        } else if (state[k] == 1) {
            ++excludedCount;
        } else {
            ++rep.unavailableSamples;
        }
    }
    rep.acMass = pairwiseSum(h) / static_cast<double>(n - static_cast<std::size_t>(rep.unavailableSamples));
    rep.singularMass = rep.totalMass - rep.acMass;
    rep.excisionUncertainty = edgeDensity * static_cast<double>(excludedCount) / static_cast<double>(n);
    return rep;
}

struct PoissonBalanceRow {
    double r = 0.0;
    double A = 0.0;
    double B = 0.0;
};

/// A_n = Re((alpha + r phi(0))/(alpha - r phi(0))),
/// B_n = int r^2 (1-|phi|^2)/|alpha - r phi|^2 dm (graded quadrature around contacts).
inline std::vector<PoissonBalanceRow> poissonBalance(const MapExpr& phi, Complex alpha, const std::vector<double>& radii) {
    const Complex phi0 = evalMap(phi, Complex{}).value;
    std::vector<double> peaks;
    for (auto z : contactCandidates(phi, alpha)) peaks.push_back(std::arg(z));
    std::sort(peaks.begin(), peaks.end());
    std::vector<PoissonBalanceRow> rows;
    for (double r : radii) {
        if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "radii must lie in (0,1)");
        PoissonBalanceRow row;
        row.r = r;
        row.A = std::real((alpha + r * phi0) / (alpha - r * phi0));
        row.B = circleMeanGraded(
            [&](double s) {
                const Complex v = boundaryValue(phi, unimodular(s));
                return r * r * std::max(0.0, 1.0 - std::norm(v)) / std::norm(alpha - r * v);
            },
            peaks);
        rows.push_back(row);
    }
    return rows;
}

struct PushforwardHistogram {
    std::vector<double> radialEdges;   // size radialBins + 1, last bin closed at 1
    std::vector<double> angularEdges;  // size angularBins + 1 over [-pi, pi]
    std::vector<double> mass;          // radial-major
    std::vector<Complex> centroid;     // mass-weighted mean point per bin
    long samples = 0;
    long unavailable = 0;

    std::size_t radialBins() const { return radialEdges.size() - 1; }
    std::size_t angularBins() const { return angularEdges.size() - 1; }

    /// int g d nu_phi, approximating each bin by a point mass at its centroid.
    template <class G>
    double integrate(G&& g) const {
        std::vector<double> parts(mass.size(), 0.0);
        for (std::size_t i = 0; i < mass.size(); ++i)
            if (mass[i] > 0.0) parts[i] = mass[i] * g(centroid[i]);
        return pairwiseSum(parts);
    }
};

/// Empirical nu_phi from boundarySamples equispaced boundary points.
inline PushforwardHistogram pushforwardHistogram(const MapExpr& phi, int boundarySamples, int radialBins = 64,
                                                 int angularBins = 256) {
    if (boundarySamples < 1 || radialBins < 1 || angularBins < 1)
        throw Error(ErrorCode::InvalidArgument, "histogram sizes must be positive");
    PushforwardHistogram hist;
    for (int i = 0; i <= radialBins; ++i) hist.radialEdges.push_back(static_cast<double>(i) / radialBins);
    for (int j = 0; j <= angularBins; ++j) hist.angularEdges.push_back(-kPi + kTwoPi * j / angularBins);
    const std::size_t bins = static_cast<std::size_t>(radialBins) * static_cast<std::size_t>(angularBins);
    hist.mass.assign(bins, 0.0);
    hist.centroid.assign(bins, Complex{});
    std::vector<Complex> values(static_cast<std::size_t>(boundarySamples));
    std::vector<char> ok(values.size(), 1);
    parallelFor(values.size(), [&](std::size_t k) {
        try {
            values[k] = boundaryValue(phi, unimodular(kTwoPi * (static_cast<double>(k) + 0.5) / boundarySamples));
        } catch (const Error&) {
            ok[k] = 0;
        }
    });
    std::vector<long> counts(bins, 0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!ok[k]) {
            ++hist.unavailable;
            continue;
        }
        const Complex v = values[k];
        const int ri = std::min(radialBins - 1, static_cast<int>(std::abs(v) * radialBins));
        const int ai = std::clamp(static_cast<int>((std::arg(v) + kPi) / kTwoPi * angularBins), 0, angularBins - 1);
        const std::size_t b = static_cast<std::size_t>(ri) * static_cast<std::size_t>(angularBins) + static_cast<std::size_t>(ai);
        ++counts[b];
        hist.centroid[b] += v;
    }
    hist.samples = boundarySamples - hist.unavailable;
    if (hist.samples == 0) throw Error(ErrorCode::BoundaryValueUnavailable, "no boundary values available");
    for (std::size_t b = 0; b < bins; ++b) {
        if (counts[b] == 0) continue;
        hist.centroid[b] /= static_cast<double>(counts[b]);
        hist.mass[b] = static_cast<double>(counts[b]) / static_cast<double>(hist.samples);
    }
    return hist;
}

}  // namespace modelspace
