#pragma once

// Compactness analysis of C_phi : K_theta -> H^2 via the indicator
//   Q(w) = N_phi(w) (1 - |theta(w)|^2) / (1 - |w|^2),
// annular suprema near the circle, trend classification and verdicts.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "modelspace/clark.hpp"
#include "modelspace/counting.hpp"
#include "modelspace/errors.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/parallel.hpp"
#include "modelspace/quadrature.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

struct IndicatorSample {
    Complex w;
    double Q = 0.0;
    double N = 0.0;
    /// |theta(w)|; NaN when no theta (the plain N/(-log|w|) ratio is used).
    double thetaModulus = std::numeric_limits<double>::quiet_NaN();
    int annulus = 0;
    bool partial = false;
    double uncertainty = 0.0;

    /// Q rebuilt from the stored components.
    double recombined() const {
        if (std::isnan(thetaModulus)) return N / -std::log(std::abs(w));
        return N * (1.0 - thetaModulus * thetaModulus) / (1.0 - std::norm(w));
    }
};

inline IndicatorSample indicatorFromCount(const CountingSample& c, const InnerFunction* theta) {
    IndicatorSample s;
    s.w = c.w;
    s.N = c.value;
    s.partial = c.partial;
    s.uncertainty = c.uncertainty;
    if (theta) s.thetaModulus = std::abs(evalInner(*theta, c.w).value);
    s.Q = s.N == 0.0 ? 0.0 : s.recombined();
    return s;
}

inline IndicatorSample indicator(const FiberSolver& solver, const InnerFunction& theta, Complex w) {
    if (!(std::abs(w) < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "indicator needs |w| < 1");
    return indicatorFromCount(solver.count(w), &theta);
}

inline IndicatorSample indicator(const MapExpr& phi, const InnerFunction& theta, Complex w) {
    return indicator(FiberSolver(phi), theta, w);
}

struct SweepConfig {
    int angles = 256;
    int depth = 14;
    FiberOptions fiber{};
};

struct AnnulusSupremum {
    int k = 0;
    double sup = 0.0;
    bool partial = false;
};

struct SweepResult {
    std::vector<IndicatorSample> samples;  // ordered by (k, angle index)
    std::vector<AnnulusSupremum> suprema;  // k = 2..depth
    bool withTheta = true;
    int partialSamples = 0;
};

inline double annulusRadius(int k) { return 1.0 - std::ldexp(1.0, -k); }

/// Samples at radii 1-2^-k (k = 2..depth) times `angles` equispaced angles
/// starting at 0. Every angle is evaluated; empty fibers give Q = 0.
inline SweepResult sweep(const MapExpr& phi, const std::optional<InnerFunction>& theta, const SweepConfig& cfg) {
    if (cfg.depth < 2 || cfg.depth > 40) throw Error(ErrorCode::InvalidArgument, "sweep depth must lie in [2, 40]");
    if (cfg.angles < 1) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one angle");
    const FiberSolver solver(phi, cfg.fiber);
    const std::size_t perRing = static_cast<std::size_t>(cfg.angles);
    const std::size_t rings = static_cast<std::size_t>(cfg.depth - 1);
    SweepResult out;
    out.withTheta = theta.has_value();
    out.samples.resize(rings * perRing);
    std::vector<char> skipped(out.samples.size(), 0);
    const InnerFunction* th = theta ? &*theta : nullptr;
    parallelFor(out.samples.size(), [&](std::size_t idx) {
        const int k = static_cast<int>(idx / perRing) + 2;
        const double angle = kTwoPi * static_cast<double>(idx % perRing) / cfg.angles;
        const Complex w = annulusRadius(k) * unimodular(angle);
        if (std::abs(w - solver.phiAtZero()) <= 1e-14) {
            skipped[idx] = 1;
            out.samples[idx].w = w;
            out.samples[idx].annulus = k;
            return;
        }
        IndicatorSample s = indicatorFromCount(solver.count(w), th);
        s.annulus = k;
        out.samples[idx] = s;
    });
    for (std::size_t r = 0; r < rings; ++r) {
        AnnulusSupremum a;
        a.k = static_cast<int>(r) + 2;
        for (std::size_t j = 0; j < perRing; ++j) {
            const std::size_t idx = r * perRing + j;
            if (skipped[idx]) continue;
            a.sup = std::max(a.sup, out.samples[idx].Q);
            if (out.samples[idx].partial) {
                a.partial = true;
                ++out.partialSamples;
            }
        }
        out.suprema.push_back(a);
    }
    return out;
}

enum class Trend { Decaying, Plateau, Growing, Inconclusive };

inline const char* to_string(Trend t) {
    switch (t) {
        case Trend::Decaying: return "decaying";
        case Trend::Plateau: return "plateau";
        case Trend::Growing: return "growing";
        case Trend::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct TrendReport {
    Trend trend = Trend::Inconclusive;
    double level = 0.0;  // mean of the last three suprema
    double slope = 0.0;  // least-squares slope of log(sup) vs k over k >= 4
};

inline constexpr double kDecayRatio = 0.05;
inline constexpr double kDecayFloor = 1e-6;
inline constexpr double kPlateauBand = 0.20;
inline constexpr double kSingularThreshold = 0.05;

inline TrendReport classifyTrend(const std::vector<AnnulusSupremum>& suprema) {
    if (suprema.size() < 3) throw Error(ErrorCode::InvalidArgument, "trend needs at least three annuli");
    TrendReport rep;
    const std::size_t n = suprema.size();
    double lastMax = 0.0, lastMin = std::numeric_limits<double>::infinity(), lastSum = 0.0;
    for (std::size_t i = n - 3; i < n; ++i) {
        lastMax = std::max(lastMax, suprema[i].sup);
        lastMin = std::min(lastMin, suprema[i].sup);
        lastSum += suprema[i].sup;
    }
    rep.level = lastSum / 3.0;
    double ref = 0.0;
    for (const auto& a : suprema)
        if (a.k == 4) ref = a.sup;

    std::vector<double> xs, ys;
    for (const auto& a : suprema)
        if (a.k >= 4 && a.sup > 0.0) {
            xs.push_back(a.k);
            ys.push_back(std::log(a.sup));
        }
    if (xs.size() >= 2) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        rep.slope = sxy / sxx;
    }

    if (lastMax < kDecayFloor || lastMax < kDecayRatio * ref) {
        rep.trend = Trend::Decaying;
    } else if (lastMax <= (1.0 + kPlateauBand) * rep.level && lastMin >= (1.0 - kPlateauBand) * rep.level) {
        rep.trend = Trend::Plateau;
    } else if (rep.slope > 0.0) {
        rep.trend = Trend::Growing;
    }
    return rep;
}

enum class Classification { Compact, NonCompact, Inconclusive };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::Compact: return "COMPACT-evidence";
        case Classification::NonCompact: return "NON-COMPACT-evidence";
        case Classification::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct CriterionSEntry {
    Complex alpha;
    double singularMass = 0.0;
    double uncertainty = 0.0;
};

struct CompactnessVerdict {
    std::vector<AnnulusSupremum> annulusSuprema;
    TrendReport trend;
    std::vector<CriterionSEntry> criterionS;
    bool criterionSHolds = true;
    std::optional<OneComponentReport> oneComponent;
    Classification classification = Classification::Inconclusive;
    double essentialNormEstimate = 0.0;
    std::vector<std::string> caveats;
};

/// limsup of the sweep indicator, estimated as the sup over the last three annuli.
inline double essentialNorm(const SweepResult& s) {
    double best = 0.0;
    const std::size_t n = s.suprema.size();
    for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) best = std::max(best, s.suprema[i].sup);
    return best;
}

inline double essentialNorm(const MapExpr& phi, const std::optional<InnerFunction>& theta, const SweepConfig& cfg = {}) {
    return essentialNorm(sweep(phi, theta, cfg));
}

/// Verdict from the sweep trend and criterion (S) over the spectrum.
///   trend plateau/growing                           -> NON-COMPACT
///   trend decaying, (S) holds                       -> COMPACT
///   trend decaying, (S) fails, theta not one-comp.  -> COMPACT (caveat: (C) does not force (S))
///   trend decaying, (S) fails, theta one-component  -> INCONCLUSIVE (the two tests disagree)
///   trend inconclusive: (S) holds -> COMPACT; (S) fails with one-component theta -> NON-COMPACT
inline CompactnessVerdict verdict(const SweepResult& sw, const std::vector<ClarkReport>& clark,
                                  const std::optional<OneComponentReport>& oneComponent, int depth) {
    if (depth < 8) throw Error(ErrorCode::InvalidArgument, "verdict needs sweep depth >= 8");
    CompactnessVerdict v;
    v.annulusSuprema = sw.suprema;
    v.trend = classifyTrend(sw.suprema);
    v.oneComponent = oneComponent;
    v.essentialNormEstimate = essentialNorm(sw);
    for (const auto& c : clark) {
        v.criterionS.push_back({c.alpha, c.singularMass, c.excisionUncertainty});
        if (c.singularMass > kSingularThreshold) v.criterionSHolds = false;
    }
    const bool oneComp = oneComponent && oneComponent->connected;
    const bool disconnected = oneComponent && !oneComponent->connected;
    switch (v.trend.trend) {
        case Trend::Plateau:
        case Trend::Growing:
            v.classification = Classification::NonCompact;
            if (v.criterionSHolds) v.caveats.push_back("criterion (S) holds on the sampled spectrum although the indicator does not decay");
            break;
        case Trend::Decaying:
            if (v.criterionSHolds) {
                v.classification = Classification::Compact;
            } else if (disconnected) {
                v.classification = Classification::Compact;
                v.caveats.push_back("criterion (S) fails but theta is not one-component, so (S) is not necessary for compactness");
            } else {
                v.classification = Classification::Inconclusive;
                v.caveats.push_back(oneComp ? "criterion (S) fails for a one-component theta while the indicator decays"
                                            : "criterion (S) fails and the one-component status is unknown");
            }
            break;
        case Trend::Inconclusive:
            if (v.criterionSHolds) {
                v.classification = Classification::Compact;
                v.caveats.push_back("indicator trend inconclusive; classification rests on criterion (S)");
            } else if (oneComp) {
                v.classification = Classification::NonCompact;
                v.caveats.push_back("indicator trend inconclusive; classification rests on criterion (S) with one-component theta");
            } else {
                v.classification = Classification::Inconclusive;
            }
            break;
    }
    if (!v.criterionSHolds && oneComponent)
        v.caveats.push_back(std::string("one-component probe: ") + std::to_string(oneComponent->componentCount) +
                            " component(s) of {|theta| < " + std::to_string(oneComponent->level) + "}");
    if (sw.partialSamples > 0) v.caveats.push_back(std::to_string(sw.partialSamples) + " sweep samples flagged partial");
    if (clark.empty()) v.caveats.push_back("no spectrum points sampled for criterion (S)");
    return v;
}

/// N_phi(w) / max(1-|w|^2, |1-w|^2).
inline double pwRatio(const FiberSolver& solver, Complex w) {
    if (!(std::abs(w) < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "pwRatio needs |w| < 1");
    const double n = solver.count(w).value;
    return n / std::max(1.0 - std::norm(w), std::norm(1.0 - w));
}

inline double pwRatio(const MapExpr& phi, Complex w) { return pwRatio(FiberSolver(phi), w); }

enum class KernelQuadrature { Graded, Trapezoid14, Trapezoid16 };

/// ||C_phi k~_lambda||^2 = (1-|lambda|^2) int |1 - conj(lambda) phi(xi)|^-2 dm(xi).
/// `defect` = 1-|lambda|^2 when lambda is too close to the circle for its
/// modulus to be stored. Graded mode locates the near-singular peaks of the
/// integrand (Gauss-Newton on 1 - conj(lambda) phi(e^{is})) and grades the
/// quadrature toward them.
inline double kernelCompositionNormSquared(const MapExpr& phi, Complex lambda, std::optional<double> defect = {},
                                           KernelQuadrature mode = KernelQuadrature::Graded) {
    const double d = defect ? *defect : 1.0 - std::norm(lambda);
    if (!(d > 0.0 && d <= 1.0)) throw Error(ErrorCode::PointOutsideDomain, "kernel anchor must lie in the open disk");
    const Complex lc = std::conj(lambda);
    auto gap = [&](double s) { return 1.0 - lc * boundaryValue(phi, unimodular(s)); };
    auto integrand = [&](double s) { return 1.0 / std::norm(gap(s)); };
    if (mode != KernelQuadrature::Graded) {
        const int n = mode == KernelQuadrature::Trapezoid14 ? 1 << 14 : 1 << 16;
        return d * circleMeanTrapezoid(integrand, n);
    }
    if (lambda == Complex{}) return d * circleMeanGraded(integrand, {});
    const int scan = 4096;
    std::vector<double> g(scan);
    parallelFor(g.size(), [&](std::size_t j) { g[j] = std::abs(gap(kTwoPi * static_cast<double>(j) / scan)); });
    std::vector<double> starts{std::arg(lambda)};
    for (int j = 0; j < scan; ++j) {
        const double prev = g[static_cast<std::size_t>((j + scan - 1) % scan)];
        const double next = g[static_cast<std::size_t>((j + 1) % scan)];
        if (g[static_cast<std::size_t>(j)] <= prev && g[static_cast<std::size_t>(j)] <= next && g[static_cast<std::size_t>(j)] < 0.5)
            starts.push_back(kTwoPi * j / scan);
    }
    std::vector<double> peaks;
    for (double s : starts) {
        double best = s;
        double bestGap = std::abs(gap(s));
        for (int it = 0; it < 40; ++it) {
            const Complex z = unimodular(best);
            const EvalResult e = evalMap(phi, z);
            const Complex u = 1.0 - lc * e.value;
            const Complex du = -lc * Complex{0.0, 1.0} * z * e.derivative;
            const double den = std::norm(du);
            if (den == 0.0) break;
            const double step = std::real(std::conj(du) * u) / den;
            const double cand = best - std::clamp(step, -0.1, 0.1);
            const double cg = std::abs(gap(cand));
            if (!(cg < bestGap)) break;
            best = cand;
            bestGap = cg;
        }
        if (bestGap < 0.5) {
            double p = best - kTwoPi * std::floor(best / kTwoPi);
            const bool dup = std::any_of(peaks.begin(), peaks.end(), [&](double q) { return std::abs(q - p) < 1e-15 * (1.0 + std::abs(p)); });
            if (!dup) peaks.push_back(p);
        }
    }
    std::sort(peaks.begin(), peaks.end());
    return d * circleMeanGraded(integrand, peaks);
}

inline double kernelCompositionNorm(const MapExpr& phi, Complex lambda, std::optional<double> defect = {},
                                    KernelQuadrature mode = KernelQuadrature::Graded) {
    return std::sqrt(kernelCompositionNormSquared(phi, lambda, defect, mode));
}

}  // namespace modelspace
