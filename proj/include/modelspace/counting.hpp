#pragma once

// Fibers phi^{-1}(w) and the Nevanlinna counting function
// N_phi(w) = sum over the fiber of -log|z| (with multiplicity), computed by
// two independent engines: an exact rational solve and an argument-principle
// subdivision that only needs pointwise evaluation of phi.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "modelspace/errors.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/polynomial.hpp"
#include "modelspace/quadrature.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

enum class CountingMethod { Auto, RationalExact, ArgumentPrinciple };

inline const char* to_string(CountingMethod m) {
    switch (m) {
        case CountingMethod::Auto: return "auto";
        case CountingMethod::RationalExact: return "rational-exact";
        case CountingMethod::ArgumentPrinciple: return "argument-principle";
    }
    return "?";
}

struct FiberOptions {
    CountingMethod method = CountingMethod::Auto;
    /// Roots with |z| >= 1 - boundaryExclusion are excluded and flagged.
    double boundaryExclusion = 1e-6;
    /// Roots closer than this are merged (rational engine).
    double clusterTolerance = 1e-8;
    /// Radius of the verification circle used to certify a multiple root
    /// in the argument-principle engine.
    double multiplicityRadius = 1e-6;
    int initialDepth = 4;
    int maxDepth = 24;
    long cellBudget = 100000;
};

struct PreimageRoot {
    Complex z;
    int multiplicity = 1;
};

struct PreimageSet {
    Complex target;
    std::vector<PreimageRoot> roots;
    CountingMethod method = CountingMethod::RationalExact;
    double residualBound = 0.0;
    /// Roots found (or suspected) inside the excluded boundary annulus.
    int boundaryRoots = 0;
    bool partial = false;
    /// Additive uncertainty of N from excluded roots: boundaryRoots * -log(1 - exclusion).
    double uncertainty = 0.0;

    int totalMultiplicity() const {
        int m = 0;
        for (const auto& r : roots) m += r.multiplicity;
        return m;
    }
};

struct CountingSample {
    Complex w;
    double value = 0.0;
    /// -log|w| - N (nonnegative by the Littlewood subordination bound when phi(0) = 0).
    double littlewoodSlack = 0.0;
    double uncertainty = 0.0;
    bool partial = false;
};

namespace detail {

inline std::vector<PreimageRoot> mergeClusters(std::vector<Complex> zs, double tol) {
    std::sort(zs.begin(), zs.end(), [](Complex a, Complex b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    std::vector<PreimageRoot> out;
    std::vector<Complex> sums;
    for (auto z : zs) {
        bool merged = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (std::abs(out[i].z - z) < tol) {
                sums[i] += z;
                ++out[i].multiplicity;
                out[i].z = sums[i] / static_cast<double>(out[i].multiplicity);
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.push_back({z, 1});
            sums.push_back(z);
        }
    }
    return out;
}

/// Polar cell: annular sector {r0 <= |z| <= r1, t0 <= arg z <= t1}, or the
/// disk |z| <= r1 when `central` is set.
struct PolarCell {
    double r0 = 0, r1 = 0, t0 = 0, t1 = 0;
    bool central = false;
    int count = 0;
    int depth = 0;

    double diameter() const { return central ? 2.0 * r1 : std::max(r1 - r0, r1 * (t1 - t0)); }
    Complex center() const {
        if (central) return Complex{};
        return 0.5 * (r0 + r1) * unimodular(0.5 * (t0 + t1));
    }
    bool contains(Complex z, double slack) const {
        const double r = std::abs(z);
        if (central) return r <= r1 + slack;
        if (r < r0 - slack || r > r1 + slack) return false;
        double a = std::arg(z) - t0;
        a -= kTwoPi * std::floor(a / kTwoPi);
        const double span = t1 - t0;
        return a <= span + slack / std::max(r, 1e-300) || a >= kTwoPi - slack / std::max(r, 1e-300);
    }
};

class ArgumentPrincipleSolver {
public:
    ArgumentPrincipleSolver(const MapExpr& map, Complex target, const FiberOptions& opts)
        : map_(map), w_(target), opts_(opts) {}

    PreimageSet run() {
        PreimageSet out;
        out.target = w_;
        out.method = CountingMethod::ArgumentPrinciple;
        double radius = 1.0 - opts_.boundaryExclusion;
        std::optional<int> total;
        for (int attempt = 0; attempt < 6 && !total; ++attempt) {
            total = windingOnCircle(radius, Complex{});
            if (!total) {
                radius *= 1.0 - 0.25 * opts_.boundaryExclusion;
                out.partial = true;
            }
        }
        if (!total) throw Error(ErrorCode::NoConvergence, "winding number on the retained circle did not stabilize");
        if (*total < 0) throw Error(ErrorCode::NoConvergence, "negative winding number: map has poles in the disk");
        if (*total == 0) return out;

        std::vector<PolarCell> work;
        bool seeded = false;
        for (int attempt = 0; attempt < 8 && !seeded; ++attempt) seeded = seed(radius, *total, attempt, work);
        if (!seeded) throw Error(ErrorCode::NoConvergence, "could not partition the disk without boundary roots");

        std::vector<Complex> roots;
        std::vector<int> mult;
        while (!work.empty()) {
            PolarCell cell = work.back();
            work.pop_back();
            if (cell.depth > opts_.maxDepth) throw Error(ErrorCode::NoConvergence, "subdivision exceeded maximum depth");
            if (auto root = tryIsolate(cell)) {
                roots.push_back(*root);
                mult.push_back(cell.count);
                continue;
            }
            std::vector<PolarCell> kids;
            if (!split(cell, kids)) throw Error(ErrorCode::NoConvergence, "subdivision could not avoid roots on cell boundaries");
            cells_ += static_cast<long>(kids.size());
            if (cells_ > opts_.cellBudget) throw Error(ErrorCode::NoConvergence, "cell budget exhausted");
            // reverse so the stack pops children in index order
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) work.push_back(*it);
        }
        for (std::size_t i = 0; i < roots.size(); ++i) {
            out.roots.push_back({roots[i], mult[i]});
            out.residualBound = std::max(out.residualBound, std::abs(evalMap(map_, roots[i]).value - w_));
        }
        std::sort(out.roots.begin(), out.roots.end(), [](const PreimageRoot& a, const PreimageRoot& b) {
            return a.z.real() < b.z.real() || (a.z.real() == b.z.real() && a.z.imag() < b.z.imag());
        });
        return out;
    }

private:
    Complex f(Complex z) const { return evalMap(map_, z).value - w_; }

    /// Winding number of f along a closed polyline traced by `pointAt(s)`,
    /// s in [0,1); doubles the sample count until every argument increment
    /// is small. Empty when a root sits on (or numerically at) the contour.
    template <class Path>
    std::optional<int> winding(Path&& pointAt) const {
        for (int n = 64; n <= (1 << 15); n *= 2) {
            double total = 0.0, worst = 0.0;
            Complex first = f(pointAt(0.0));
            Complex prev = first;
            double scale = std::abs(first);
            bool degenerate = false;
            for (int k = 1; k <= n; ++k) {
                const Complex cur = (k == n) ? first : f(pointAt(static_cast<double>(k) / n));
                scale = std::max(scale, std::abs(cur));
                if (std::abs(cur) <= 1e-14 * std::max(scale, 1e-300) || cur == Complex{}) {
                    degenerate = true;
                    break;
                }
                const double step = std::arg(cur / prev);
                worst = std::max(worst, std::abs(step));
                total += step;
                prev = cur;
            }
            if (degenerate) return std::nullopt;
            if (worst < 0.5) {
                const double turns = total / kTwoPi;
                const double rounded = std::round(turns);
                if (std::abs(turns - rounded) > 0.1) return std::nullopt;
                return static_cast<int>(rounded);
            }
        }
        return std::nullopt;
    }

    std::optional<int> windingOnCircle(double radius, Complex center) const {
        return winding([&](double s) { return center + radius * unimodular(kTwoPi * s + 0.3); });
    }

    std::optional<int> windingOnCell(const PolarCell& c) const {
        if (c.central) return winding([&](double s) { return c.r1 * unimodular(c.t0 + kTwoPi * s); });
        const double arcIn = c.r0 * (c.t1 - c.t0), arcOut = c.r1 * (c.t1 - c.t0), radial = c.r1 - c.r0;
        const double perim = arcIn + arcOut + 2.0 * radial;
        const double b1 = radial / perim, b2 = b1 + arcOut / perim, b3 = b2 + radial / perim;
        return winding([&](double s) -> Complex {
            if (s < b1) return (c.r0 + (c.r1 - c.r0) * (s / b1)) * unimodular(c.t0);
            if (s < b2) return c.r1 * unimodular(c.t0 + (c.t1 - c.t0) * ((s - b1) / (b2 - b1)));
            if (s < b3) return (c.r1 - (c.r1 - c.r0) * ((s - b2) / (b3 - b2))) * unimodular(c.t1);
            return c.r0 * unimodular(c.t1 - (c.t1 - c.t0) * ((s - b3) / (1.0 - b3)));
        });
    }

    bool seed(double radius, int total, int attempt, std::vector<PolarCell>& work) {
        work.clear();
        const double jitter = 1.0 + 0.0137 * attempt;
        const double offset = 0.0917 + 0.37 * attempt;
        const int sectors = 1 << opts_.initialDepth;
        const double rc = 0.31 * radius * jitter;
        std::vector<double> rings{rc, 0.62 * radius * jitter, 0.87 * radius * std::min(jitter, 1.1), radius};
        std::vector<PolarCell> cells;
        cells.push_back({0.0, rc, offset, offset + kTwoPi, true, 0, 0});
        for (std::size_t i = 0; i + 1 < rings.size(); ++i)
            for (int k = 0; k < sectors; ++k)
                cells.push_back({rings[i], rings[i + 1], offset + kTwoPi * k / sectors, offset + kTwoPi * (k + 1) / sectors, false, 0, 0});
        int sum = 0;
        for (auto& c : cells) {
            auto n = windingOnCell(c);
            if (!n || *n < 0) return false;
            c.count = *n;
            sum += *n;
        }
        if (sum != total) return false;
        for (auto it = cells.rbegin(); it != cells.rend(); ++it)
            if (it->count > 0) work.push_back(*it);
        cells_ = static_cast<long>(cells.size());
        return true;
    }

    bool split(const PolarCell& cell, std::vector<PolarCell>& kids) const {
        static constexpr double fractions[] = {0.5, 0.43, 0.57, 0.37, 0.63, 0.47, 0.53, 0.41};
        for (double s : fractions) {
            kids.clear();
            if (cell.central) {
                const double inner = cell.r1 * s;
                kids.push_back({0.0, inner, cell.t0 + 0.21, cell.t0 + 0.21 + kTwoPi, true, 0, cell.depth + 1});
                for (int k = 0; k < 4; ++k)
                    kids.push_back({inner, cell.r1, cell.t0 + kTwoPi * k / 4, cell.t0 + kTwoPi * (k + 1) / 4, false, 0, cell.depth + 1});
            } else {
                const double rm = cell.r0 + (cell.r1 - cell.r0) * s;
                const double tm = cell.t0 + (cell.t1 - cell.t0) * (1.0 - s);
                kids.push_back({cell.r0, rm, cell.t0, tm, false, 0, cell.depth + 1});
                kids.push_back({cell.r0, rm, tm, cell.t1, false, 0, cell.depth + 1});
                kids.push_back({rm, cell.r1, cell.t0, tm, false, 0, cell.depth + 1});
                kids.push_back({rm, cell.r1, tm, cell.t1, false, 0, cell.depth + 1});
            }
            int sum = 0;
            bool ok = true;
            for (auto& k : kids) {
                auto n = windingOnCell(k);
                if (!n || *n < 0) {
                    ok = false;
                    break;
                }
                k.count = *n;
                sum += *n;
            }
            if (ok && sum == cell.count) {
                kids.erase(std::remove_if(kids.begin(), kids.end(), [](const PolarCell& k) { return k.count == 0; }), kids.end());
                return true;
            }
        }
        return false;
    }

    /// Newton (modified by the multiplicity for clusters) from the cell
    /// center; accepted when it converges inside the cell and, for
    /// multiple roots, a small verification circle winds `count` times.
    std::optional<Complex> tryIsolate(const PolarCell& cell) const {
        if (cell.diameter() > 0.25) return std::nullopt;
        const double m = static_cast<double>(cell.count);
        Complex z = cell.center();
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            if (!(std::abs(z) < 1.0)) return std::nullopt;
            const EvalResult r = evalMap(map_, z);
            const Complex val = r.value - w_;
            if (val == Complex{}) {
                converged = true;
                break;
            }
            if (r.derivative == Complex{}) break;
            const Complex step = m * val / r.derivative;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged || !cell.contains(z, 1e-12)) return std::nullopt;
        if (cell.count > 1) {
            auto n = windingOnCircle(opts_.multiplicityRadius, z);
            if (!n || *n != cell.count) return std::nullopt;
        }
        return z;
    }

    const MapExpr& map_;
    Complex w_;
    FiberOptions opts_;
    long cells_ = 0;
};

}  // namespace detail

/// Fiber solver prepared once per map; `solve` is const and thread-safe.
class FiberSolver {
public:
    explicit FiberSolver(MapExpr map, FiberOptions opts = {}) : map_(std::move(map)), opts_(opts) {
        if (opts_.method != CountingMethod::ArgumentPrinciple) rational_ = map_.asRational();
        if (opts_.method == CountingMethod::RationalExact && !rational_)
            throw Error(ErrorCode::InvalidArgument, "rational-exact engine requested for a non-rational map");
        phiAtZero_ = evalMap(map_, Complex{}).value;
    }

    const MapExpr& map() const { return map_; }
    const FiberOptions& options() const { return opts_; }
    Complex phiAtZero() const { return phiAtZero_; }
    bool usesRationalEngine() const { return rational_.has_value(); }

    PreimageSet solve(Complex w) const {
        if (!(std::abs(w) < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "fiber target must lie in the open disk");
        if (!rational_) return detail::ArgumentPrincipleSolver(map_, w, opts_).run();
        return solveRational(w);
    }

    /// N_phi(w) with the Littlewood slack. Rejects w = phi(0).
    CountingSample count(Complex w) const {
        if (std::abs(w - phiAtZero_) <= 1e-14)
            throw Error(ErrorCode::TargetEqualsPhiOfZero, "N_phi is infinite at w = phi(0)");
        return countUnchecked(w);
    }

    /// As `count` without the phi(0) guard; used inside quadratures where a
    /// node can never coincide with phi(0) but may sit arbitrarily close.
    CountingSample countUnchecked(Complex w) const {
        const PreimageSet fiber = solve(w);
        CountingSample s;
        s.w = w;
        for (const auto& r : fiber.roots) s.value += r.multiplicity * -std::log(std::abs(r.z));
        s.littlewoodSlack = -std::log(std::abs(w)) - s.value;
        s.uncertainty = fiber.uncertainty;
        s.partial = fiber.partial;
        return s;
    }

private:
    PreimageSet solveRational(Complex w) const {
        PreimageSet out;
        out.target = w;
        out.method = CountingMethod::RationalExact;
        const Poly p = polyAdd(rational_->num, polyScale(rational_->den, -w));
        const double limit = 1.0 - opts_.boundaryExclusion;
        std::vector<Complex> inside;
        for (auto z : polyRoots(p)) {
            const double r = std::abs(z);
            if (r < limit) {
                inside.push_back(z);
            } else if (r < 1.0) {
                ++out.boundaryRoots;
            }
        }
        out.roots = detail::mergeClusters(std::move(inside), opts_.clusterTolerance);
        for (const auto& root : out.roots) {
            const Complex v = polyEval(rational_->num, root.z) / polyEval(rational_->den, root.z);
            out.residualBound = std::max(out.residualBound, std::abs(v - w));
        }
        if (out.boundaryRoots > 0) {
            out.partial = true;
            out.uncertainty = out.boundaryRoots * -std::log1p(-opts_.boundaryExclusion);
        }
        return out;
    }

    MapExpr map_;
    FiberOptions opts_;
    std::optional<Rational> rational_;
    Complex phiAtZero_;
};

inline PreimageSet preimages(const MapExpr& map, Complex w, const FiberOptions& opts = {}) {
    return FiberSolver(map, opts).solve(w);
}

inline CountingSample nevanlinna(const MapExpr& map, Complex w, const FiberOptions& opts = {}) {
    return FiberSolver(map, opts).count(w);
}

struct CountingCheck {
    double N = 0.0;
    bool littlewoodOK = true;
    double slack = 0.0;
    /// False when the hyperbolic disk contains phi(0) (sub-mean property does not apply).
    bool subMeanApplicable = true;
    bool subMeanOK = true;
    double subMeanAverage = 0.0;
    double subMeanGap = 0.0;
};

/// Littlewood bound N(w) <= log(1/|w|) and the sub-mean inequality for the
/// subharmonic function N over D_eps(w). The mean is taken in the local
/// coordinate u of zeta = (w+u)/(1+conj(w)u), |u| < eps, where
/// u -> N(zeta(u)) is subharmonic with value N(w) at the center, using a
/// radialNodes x angularNodes product rule.
inline CountingCheck countingChecks(const FiberSolver& solver, Complex w, double eps, int radialNodes = 8,
                                    int angularNodes = 64, double quadratureTolerance = 1e-6) {
    if (std::abs(solver.phiAtZero()) > 1e-12) throw Error(ErrorCode::InvalidArgument, "counting checks require phi(0) = 0");
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
    CountingCheck c;
    const CountingSample s = solver.count(w);
    c.N = s.value;
    c.slack = s.littlewoodSlack;
    c.littlewoodOK = c.N <= -std::log(std::abs(w)) + 1e-9;
    const HyperbolicDisk disk{w, eps};
    if (inHyperbolicDisk(disk, solver.phiAtZero())) {
        c.subMeanApplicable = false;
        return c;
    }
    const GaussRule rule = gaussLegendre(radialNodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double rho = eps * 0.5 * (1.0 + rule.nodes[i]);
        const double wr = eps * 0.5 * rule.weights[i] * rho;
        double ring = 0.0;
        for (int j = 0; j < angularNodes; ++j)
            ring += solver.countUnchecked(disk.fromLocal(rho * unimodular(kTwoPi * (j + 0.5) / angularNodes))).value;
        acc += wr * ring * kTwoPi / angularNodes;
    }
    c.subMeanAverage = acc / (kPi * eps * eps);
    c.subMeanGap = c.subMeanAverage - c.N;
    c.subMeanOK = c.subMeanGap >= -quadratureTolerance;
    return c;
}

}  // namespace modelspace
