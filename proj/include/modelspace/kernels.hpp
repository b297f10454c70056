#pragma once

// Reproducing kernels of H^2 and of model spaces K_theta, concrete test
// functions, and norm identities evaluated by quadrature: boundary L^2,
// the Littlewood-Paley area form, the counting-function (Stanton) form of
// ||f o phi||, and the weighted energy with weight (1-|z|)/(1-|theta|)^p.

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "modelspace/counting.hpp"
#include "modelspace/errors.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/quadrature.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

/// Constant in ||f||^2 = c_LP * int |f'|^2 log(1/|z|^2) dA + |f(0)|^2 with dA
/// normalized area; fixed by exactness on f(z) = z (int log(1/|z|^2) dA = 1).
inline constexpr double kLittlewoodPaleyConstant = 1.0;
/// The counting form carries N_phi = sum -log|z| = (1/2) sum log(1/|z|^2),
/// hence twice the Littlewood-Paley constant.
inline constexpr double kStantonConstant = 2.0 * kLittlewoodPaleyConstant;

struct KernelSpec {
    std::optional<InnerFunction> theta;  // empty: Hardy space
    Complex anchor;
    bool normalized = false;

    static KernelSpec hardy(Complex w, bool normalized = false) { return {std::nullopt, w, normalized}; }
    static KernelSpec model(InnerFunction theta, Complex w, bool normalized = false) {
        return {std::move(theta), w, normalized};
    }
};

namespace detail {
inline void requireAnchor(Complex w) {
    if (!(std::abs(w) < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "kernel anchor must lie in the open disk");
}
}  // namespace detail

/// ||k_w|| = (1-|w|^2)^{-1/2};  ||kappa_w|| = ((1-|theta(w)|^2)/(1-|w|^2))^{1/2}.
inline double kernelNorm(const KernelSpec& spec) {
    detail::requireAnchor(spec.anchor);
    const double base = 1.0 - std::norm(spec.anchor);
    if (!spec.theta) return 1.0 / std::sqrt(base);
    const double t = std::norm(evalInner(*spec.theta, spec.anchor).value);
    return std::sqrt(std::max(0.0, 1.0 - t) / base);
}

inline Complex kernelValue(const KernelSpec& spec, Complex zeta) {
    detail::requireAnchor(spec.anchor);
    const Complex denom = 1.0 - std::conj(spec.anchor) * zeta;
    Complex v = 1.0 / denom;
    if (spec.theta) {
        const Complex tw = evalInner(*spec.theta, spec.anchor).value;
        const Complex tz = evalInner(*spec.theta, zeta).value;
        v = (1.0 - std::conj(tw) * tz) / denom;
    }
    return spec.normalized ? v / kernelNorm(spec) : v;
}

/// d/dzeta of the kernel: -theta'(zeta) conj(theta(w))/(1 - conj(w) zeta)
/// + conj(w)(1 - conj(theta(w)) theta(zeta))/(1 - conj(w) zeta)^2.
inline Complex kernelDerivative(const KernelSpec& spec, Complex zeta) {
    detail::requireAnchor(spec.anchor);
    const Complex wbar = std::conj(spec.anchor);
    const Complex denom = 1.0 - wbar * zeta;
    Complex d = wbar / (denom * denom);
    if (spec.theta) {
        const Complex twc = std::conj(evalInner(*spec.theta, spec.anchor).value);
        const EvalResult tz = evalInner(*spec.theta, zeta);
        d = -tz.derivative * twc / denom + wbar * (1.0 - twc * tz.value) / (denom * denom);
    }
    return spec.normalized ? d / kernelNorm(spec) : d;
}

/// f(z) = sum_k coeffs[k] z^k.
struct Polynomial {
    Poly coeffs;

    Complex value(Complex z) const { return polyEval(coeffs, z); }
    Complex derivative(Complex z) const { return polyEvalD(coeffs, z).second; }
    double squaredNorm() const {
        double s = 0.0;
        for (auto c : coeffs) s += std::norm(c);
        return s;
    }
};

/// Finite combination f = sum_j c_j K_{w_j} of Hardy or model-space kernels;
/// such combinations lie in the space by construction.
class TestFunction {
public:
    TestFunction(std::optional<InnerFunction> theta, std::vector<Complex> anchors, std::vector<Complex> coefficients)
        : theta_(std::move(theta)), anchors_(std::move(anchors)), coefficients_(std::move(coefficients)) {
        if (anchors_.size() != coefficients_.size())
            throw Error(ErrorCode::InvalidArgument, "anchors and coefficients differ in length");
        for (auto w : anchors_) detail::requireAnchor(w);
        thetaConjAtAnchors_.resize(anchors_.size(), Complex{});
        if (theta_)
            for (std::size_t j = 0; j < anchors_.size(); ++j)
                thetaConjAtAnchors_[j] = std::conj(evalInner(*theta_, anchors_[j]).value);
    }

    static TestFunction hardyKernel(Complex w, Complex c = 1.0) { return TestFunction(std::nullopt, {w}, {c}); }
    static TestFunction modelKernel(const InnerFunction& theta, Complex w, Complex c = 1.0) {
        return TestFunction(theta, {w}, {c});
    }

    const std::optional<InnerFunction>& theta() const { return theta_; }
    const std::vector<Complex>& anchors() const { return anchors_; }
    const std::vector<Complex>& coefficients() const { return coefficients_; }

    Complex value(Complex z) const {
        const Complex tz = theta_ ? evalInner(*theta_, z).value : Complex{};
        Complex s{};
        for (std::size_t j = 0; j < anchors_.size(); ++j)
            s += coefficients_[j] * (1.0 - thetaConjAtAnchors_[j] * tz) / (1.0 - std::conj(anchors_[j]) * z);
        return s;
    }

    Complex derivative(Complex z) const {
        EvalResult tz{};
        if (theta_) tz = evalInner(*theta_, z);
        Complex s{};
        for (std::size_t j = 0; j < anchors_.size(); ++j) {
            const Complex wbar = std::conj(anchors_[j]);
            const Complex den = 1.0 - wbar * z;
            s += coefficients_[j] * (-tz.derivative * thetaConjAtAnchors_[j] / den +
                                     wbar * (1.0 - thetaConjAtAnchors_[j] * tz.value) / (den * den));
        }
        return s;
    }

    /// G_ij = K_{w_j}(w_i) = <K_{w_j}, K_{w_i}>.
    Complex gram(std::size_t i, std::size_t j) const {
        return (1.0 - thetaConjAtAnchors_[j] * std::conj(thetaConjAtAnchors_[i])) /
               (1.0 - std::conj(anchors_[j]) * anchors_[i]);
    }

    /// c^* G c.
    double squaredNorm() const {
        Complex s{};
        for (std::size_t i = 0; i < anchors_.size(); ++i)
            for (std::size_t j = 0; j < anchors_.size(); ++j)
                s += std::conj(coefficients_[i]) * coefficients_[j] * gram(i, j);
        return std::max(0.0, s.real());
    }

    /// <this, g> from kernel values only: sum_{i,j} c_j conj(d_i) K_{w_j}(v_i).
    Complex innerProduct(const TestFunction& g) const {
        Complex s{};
        for (std::size_t i = 0; i < g.anchors_.size(); ++i) s += std::conj(g.coefficients_[i]) * value(g.anchors_[i]);
        return s;
    }

private:
    std::optional<InnerFunction> theta_;
    std::vector<Complex> anchors_;
    std::vector<Complex> coefficients_;
    std::vector<Complex> thetaConjAtAnchors_;
};

using AnalyticFunction = std::variant<Polynomial, TestFunction>;

inline Complex valueAt(const AnalyticFunction& f, Complex z) {
    return std::visit([&](const auto& g) { return g.value(z); }, f);
}
inline Complex derivativeAt(const AnalyticFunction& f, Complex z) {
    return std::visit([&](const auto& g) { return g.derivative(z); }, f);
}
/// Closed-form H^2 norm squared: sum |a_k|^2 or the Gram form.
inline double exactSquaredNorm(const AnalyticFunction& f) {
    return std::visit([](const auto& g) { return g.squaredNorm(); }, f);
}

enum class NormMethod { Coefficients, Boundary, LittlewoodPaley, Counting };

struct NormResult {
    double norm = 0.0;
    double squared = 0.0;
    /// Quadrature-independent uncertainty carried in (e.g. excluded fiber roots).
    double uncertainty = 0.0;
    long skippedSamples = 0;
};

inline NormResult makeNorm(double squared, double uncertainty = 0.0, long skipped = 0) {
    return {std::sqrt(std::max(0.0, squared)), squared, uncertainty, skipped};
}

inline constexpr int kDefaultBoundaryPoints = 1 << 14;

/// H^2 norm of f by the requested method.
inline NormResult h2Norm(const AnalyticFunction& f, NormMethod method, const QuadratureGrid& grid = QuadratureGrid::standard(),
                         int boundaryPoints = kDefaultBoundaryPoints) {
    switch (method) {
        case NormMethod::Coefficients: return makeNorm(exactSquaredNorm(f));
        case NormMethod::Boundary: {
            return makeNorm(circleMeanTrapezoid([&](double t) { return std::norm(valueAt(f, unimodular(t))); }, boundaryPoints));
        }
        case NormMethod::LittlewoodPaley: {
            const double area = grid.integrate([&](Complex z) {
                return std::norm(derivativeAt(f, z)) * -std::log(std::norm(z));
            });
            return makeNorm(kLittlewoodPaleyConstant * area + std::norm(valueAt(f, Complex{})));
        }
        case NormMethod::Counting: break;
    }
    throw Error(ErrorCode::InvalidArgument, "counting method applies to composition norms only");
}

/// Computes two methods and raises GridTooCoarse when their relative
/// disagreement exceeds 10x `tolerance`.
inline NormResult crossCheckedH2Norm(const AnalyticFunction& f, NormMethod a, NormMethod b, double tolerance = 1e-4,
                                     const QuadratureGrid& grid = QuadratureGrid::standard()) {
    const NormResult ra = h2Norm(f, a, grid), rb = h2Norm(f, b, grid);
    const double scale = std::max(ra.squared, 1e-300);
    if (std::abs(ra.squared - rb.squared) / scale > 10.0 * tolerance)
        throw Error(ErrorCode::GridTooCoarse, "norm methods disagree beyond tolerance");
    return ra;
}

/// N_phi on every node of the grid, ring-major; reusable across test functions.
inline std::vector<double> countingOnGrid(const FiberSolver& solver, const QuadratureGrid& grid, double* uncertainty = nullptr) {
    const std::size_t nr = grid.radialCount(), na = static_cast<std::size_t>(grid.angularCount());
    std::vector<double> values(nr * na), unc(nr, 0.0);
    parallelFor(nr, [&](std::size_t ring) {
        double u = 0.0;
        for (std::size_t j = 0; j < na; ++j) {
            const CountingSample s = solver.countUnchecked(grid.node(ring, static_cast<int>(j)));
            values[ring * na + j] = s.value;
            u += s.uncertainty;
        }
        unc[ring] = u * grid.weight(ring);
    });
    if (uncertainty) *uncertainty = pairwiseSum(unc);
    return values;
}

/// Counting (Stanton) form of ||f o phi||^2 from precomputed N_phi grid values.
inline NormResult compositionNormFromCounting(const AnalyticFunction& f, Complex phiAtZero, const QuadratureGrid& grid,
                                              const std::vector<double>& countingValues, double countingUncertainty = 0.0) {
    const std::size_t nr = grid.radialCount(), na = static_cast<std::size_t>(grid.angularCount());
    std::vector<double> ringSums(nr);
    double maxDerivative = 0.0;
    std::vector<double> ringMax(nr, 0.0);
    parallelFor(nr, [&](std::size_t ring) {
        std::vector<double> vals(na);
        for (std::size_t j = 0; j < na; ++j) {
            const double n = countingValues[ring * na + j];
            if (n == 0.0) continue;
            const double d2 = std::norm(derivativeAt(f, grid.node(ring, static_cast<int>(j))));
            ringMax[ring] = std::max(ringMax[ring], d2);
            vals[j] = d2 * n;
        }
        ringSums[ring] = grid.weight(ring) * pairwiseSum(vals);
    });
    for (double m : ringMax) maxDerivative = std::max(maxDerivative, m);
    const double sq = kStantonConstant * pairwiseSum(ringSums) + std::norm(valueAt(f, phiAtZero));
    return makeNorm(sq, kStantonConstant * maxDerivative * countingUncertainty);
}

/// ||f o phi|| by boundary quadrature of |f(phi(xi))|^2 or by the counting form
/// 2 int |f'|^2 N_phi dA + |f(phi(0))|^2.
inline NormResult compositionNorm(const AnalyticFunction& f, const MapExpr& phi, NormMethod method,
                                  const QuadratureGrid& grid = QuadratureGrid::standard(),
                                  int boundaryPoints = kDefaultBoundaryPoints, const FiberOptions& fiberOpts = {}) {
    if (method == NormMethod::Boundary) {
        std::vector<double> vals(static_cast<std::size_t>(boundaryPoints));
        std::vector<char> ok(vals.size(), 1);
        parallelFor(vals.size(), [&](std::size_t k) {
            try {
                const Complex xi = unimodular(kTwoPi * (static_cast<double>(k) + 0.5) / boundaryPoints);
                vals[k] = std::norm(valueAt(f, evalMap(phi, xi).value));
            } catch (const Error&) {
                vals[k] = 0.0;
                ok[k] = 0;
            }
        });
        const long skipped = static_cast<long>(std::count(ok.begin(), ok.end(), 0));
        if (skipped == boundaryPoints) throw Error(ErrorCode::BoundaryValueUnavailable, "no boundary values available");
        return makeNorm(pairwiseSum(vals) / static_cast<double>(boundaryPoints - skipped), 0.0, skipped);
    }
    if (method == NormMethod::Counting) {
        const FiberSolver solver(phi, fiberOpts);
        double unc = 0.0;
        const auto values = countingOnGrid(solver, grid, &unc);
        return compositionNormFromCounting(f, solver.phiAtZero(), grid, values, unc);
    }
    throw Error(ErrorCode::InvalidArgument, "composition norms use the boundary or counting method");
}

struct CohnEnergy {
    double energy = 0.0;
    double squaredNorm = 0.0;
    double ratio = 0.0;  // energy / ||f||^2
    long skippedNodes = 0;
    /// int over skipped nodes of |f'|^2 (1-|z|) dA: a lower bound for their
    /// missing contribution.
    double skippedLowerBound = 0.0;
};

/// E_p(f) = int |f'|^2 (1-|z|)/(1-|theta(z)|)^p dA. p = 0 gives the limit weight 1-|z|.
inline CohnEnergy cohnEnergy(const AnalyticFunction& f, const InnerFunction& theta, double p,
                             const QuadratureGrid& grid = QuadratureGrid::standard()) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0,1]");
    const std::size_t nr = grid.radialCount(), na = static_cast<std::size_t>(grid.angularCount());
    std::vector<double> ringSums(nr), ringSkipped(nr);
    std::vector<long> skipCount(nr, 0);
    parallelFor(nr, [&](std::size_t ring) {
        std::vector<double> vals(na), lost(na);
        for (std::size_t j = 0; j < na; ++j) {
            const Complex z = grid.node(ring, static_cast<int>(j));
            const double base = std::norm(derivativeAt(f, z)) * (1.0 - std::abs(z));
            try {
                const double t = p == 0.0 ? 0.0 : std::abs(evalInner(theta, z).value);
                vals[j] = base / std::pow(1.0 - t, p);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TruncationBudgetExceeded) throw;
                lost[j] = base;
                ++skipCount[ring];
            }
        }
        ringSums[ring] = grid.weight(ring) * pairwiseSum(vals);
        ringSkipped[ring] = grid.weight(ring) * pairwiseSum(lost);
    });
    CohnEnergy out;
    out.energy = pairwiseSum(ringSums);
    out.skippedLowerBound = pairwiseSum(ringSkipped);
    for (long s : skipCount) out.skippedNodes += s;
    out.squaredNorm = exactSquaredNorm(f);
    out.ratio = out.squaredNorm > 0.0 ? out.energy / out.squaredNorm : 0.0;
    return out;
}

struct Lemma1Probe {
    Complex w;
    double thetaModulus = 0.0;
    /// max over test functions of |<normalized kappa_w, f>| = |f(w)| / ||kappa_w||.
    double pairing = 0.0;
    /// min over samples zeta of D_eps(w) of |kappa_w'(zeta)| (1-|w|^2)^2.
    double derivativeConstant = 0.0;
};

/// Numerical probes for the kernel lemma along a sequence w_n with
/// |theta(w_n)| < a: a finite-family surrogate of weak convergence of the
/// normalized kernels to 0, and the empirical lower constant for the kernel
/// derivative on hyperbolic disks D_eps(w_n) (32 sample points each).
inline std::vector<Lemma1Probe> lemma1Probes(const InnerFunction& theta, const std::vector<Complex>& sequence, double a,
                                             double eps, const std::vector<AnalyticFunction>& testFns) {
    std::vector<Lemma1Probe> out;
    for (auto w : sequence) {
        const double tm = std::abs(evalInner(theta, w).value);
        if (!(tm < a)) throw Error(ErrorCode::HypothesisViolated, "|theta(w_n)| >= a for w_n = " + std::to_string(std::abs(w)));
        Lemma1Probe p;
        p.w = w;
        p.thetaModulus = tm;
        const double kn = kernelNorm(KernelSpec::model(theta, w));
        for (const auto& f : testFns) p.pairing = std::max(p.pairing, std::abs(valueAt(f, w)) / kn);
        const KernelSpec spec = KernelSpec::model(theta, w);
        const double scale = (1.0 - std::norm(w)) * (1.0 - std::norm(w));
        double best = std::numeric_limits<double>::infinity();
        for (auto zeta : hyperbolicDiskSamples(HyperbolicDisk{w, eps}, 4, 8))
            best = std::min(best, std::abs(kernelDerivative(spec, zeta)) * scale);
        p.derivativeConstant = best;
        out.push_back(p);
    }
    return out;
}

}  // namespace modelspace
