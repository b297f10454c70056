#pragma once

// Inner functions: Blaschke products (finite, or truncations of infinite
// families with a certified tail) times atomic singular inner factors.

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "modelspace/errors.hpp"
#include "modelspace/parallel.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

/// A Blaschke zero. `defect` is 1 - |point|^2 carried separately so that
/// zeros closer to the circle than double precision resolves (|point|
/// rounds to 1) still produce exact factor moduli.
struct BlaschkeZero {
    Complex point;
    double defect = 1.0;

    static BlaschkeZero at(Complex z) {
        const double r = std::abs(z);
        return {z, (1.0 - r) * (1.0 + r)};
    }
    double modulus() const { return std::sqrt(1.0 - defect); }
    double angle() const { return std::arg(point); }
};

struct SingularAtom {
    Complex xi;        // unimodular
    double omega = 0;  // positive mass
};

/// Generator parameters of a named infinite zero family; kept so the
/// function serializes back to the same description.
struct ZeroFamily {
    std::string name;  // "sparse-tangential" | "radial"
    int count = 0;
    double tRatio = 0.5;      // sparse-tangential: t_m = tRatio^m
    double alphaRatio = 0.5;  // sparse-tangential: alpha_m = alphaRatio^m
    double q = 0.5;           // radial: lambda_m = 1 - q^m
};

struct InnerFunction {
    std::vector<BlaschkeZero> zeros;
    std::vector<SingularAtom> atoms;
    /// Sum of (1 - |lambda|) over zeros not listed (0 for finite products).
    double tailSum = 0.0;
    /// Accumulation points of the full zero sequence on the circle.
    std::vector<Complex> limitPoints;
    double truncationBudget = 1e-8;
    std::optional<ZeroFamily> family;

    bool isFiniteBlaschke() const { return atoms.empty() && tailSum == 0.0; }
};

namespace inner {

inline InnerFunction identity() { return {{BlaschkeZero{Complex{}, 1.0}}, {}, 0.0, {}, 1e-8, {}}; }

inline InnerFunction fromZeros(const std::vector<Complex>& zs) {
    InnerFunction f;
    for (auto z : zs) {
        if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::InvalidArgument, "Blaschke zero outside the open disk");
        f.zeros.push_back(BlaschkeZero::at(z));
    }
    return f;
}

inline InnerFunction singular(const std::vector<SingularAtom>& atoms) {
    InnerFunction f;
    for (const auto& a : atoms) {
        if (!(a.omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "singular atom mass must be positive");
        if (std::abs(std::abs(a.xi) - 1.0) > 1e-12)
            throw Error(ErrorCode::InvalidArgument, "singular atom must lie on the unit circle");
        f.atoms.push_back({a.xi / std::abs(a.xi), a.omega});
    }
    return f;
}

/// exp((z+1)/(z-1)): one atom of mass 1 at xi = 1.
inline InnerFunction paleyWiener() { return singular({{Complex{1.0}, 1.0}}); }

/// lambda_m = (1 - alpha_m t_m^3)^{1/2} e^{i t_m}, t_m = tRatio^m,
/// alpha_m = alphaRatio^m, m = 1..count; remaining zeros declared as tail.
inline InnerFunction sparseTangential(int count, double tRatio = 0.5, double alphaRatio = 0.5) {
    if (count < 1 || !(tRatio > 0 && tRatio < 1) || !(alphaRatio > 0 && alphaRatio <= 1))
        throw Error(ErrorCode::InvalidArgument, "sparse-tangential parameters out of range");
    InnerFunction f;
    for (int m = 1; m <= count; ++m) {
        const double t = std::pow(tRatio, m);
        const double defect = std::pow(alphaRatio, m) * t * t * t;
        f.zeros.push_back({std::sqrt(1.0 - defect) * unimodular(t), defect});
    }
    // 1 - |lambda| <= 1 - |lambda|^2 = (alphaRatio tRatio^3)^m, geometric tail.
    const double q = alphaRatio * tRatio * tRatio * tRatio;
    f.tailSum = std::pow(q, count + 1) / (1.0 - q);
    f.limitPoints = {Complex{1.0}};
    f.family = ZeroFamily{"sparse-tangential", count, tRatio, alphaRatio, 0.5};
    return f;
}

/// lambda_m = 1 - q^m, m = 1..count, with the tail sum q^{count+1}/(1-q).
inline InnerFunction radial(int count, double q = 0.5) {
    if (count < 1 || !(q > 0 && q < 1)) throw Error(ErrorCode::InvalidArgument, "radial family parameters out of range");
    InnerFunction f;
    for (int m = 1; m <= count; ++m) {
        const double d = std::pow(q, m);
        f.zeros.push_back({Complex{1.0 - d}, d * (2.0 - d)});
    }
    f.tailSum = std::pow(q, count + 1) / (1.0 - q);
    f.limitPoints = {Complex{1.0}};
    f.family = ZeroFamily{"radial", count, 0.5, 0.5, q};
    return f;
}

}  // namespace inner

/// b_lambda(z) = (|lambda|/lambda)(lambda - z)/(1 - conj(lambda) z), b_0(z) = z,
/// with derivative. Evaluated as 1 - (1-|lambda|)(u + z)/(u (1 - conj(lambda) z)), u = lambda/|lambda|,
/// with 1 - |lambda| taken from the stored defect rather than from |lambda|.
inline std::pair<Complex, Complex> blaschkeFactor(const BlaschkeZero& zero, Complex z) {
    if (zero.point == Complex{}) return {z, Complex{1.0}};
    const Complex lam = zero.point;
    const double mod = zero.modulus();
    const double oneMinusMod = zero.defect / (1.0 + mod);
    const Complex denom = 1.0 - std::conj(lam) * z;
    const Complex unit = lam / std::abs(lam);
    const Complex value = 1.0 - oneMinusMod * (unit + z) / (unit * denom);
    const Complex derivative = -std::conj(unit) * zero.defect / (denom * denom);
    return {value, derivative};
}

/// 1 - |b_a(z)|^2 = (1-|a|^2)(1-|z|^2)/|1 - conj(a) z|^2, computed from the
/// stored defects so that near-circle pairs keep relative accuracy.
inline double pseudoHyperbolicComplement(const BlaschkeZero& a, const BlaschkeZero& z) {
    const double ra = a.modulus(), rz = z.modulus();
    const double delta = (a.point == Complex{} || z.point == Complex{}) ? 0.0 : z.angle() - a.angle();
    const double oneMinusProd = (a.defect + z.defect - a.defect * z.defect) / (1.0 + ra * rz);
    const Complex d = -expim1(delta) + oneMinusProd * unimodular(delta);
    const double den = std::norm(d);
    if (den == 0.0) return 1.0;
    return std::min(1.0, a.defect * z.defect / den);
}

/// Evaluates theta and theta' at |z| <= 1. Boundary evaluation is allowed
/// for finite products and away from atoms; truncated products certify the
/// tail through `conditionEstimate` and refuse when it exceeds the budget.
inline EvalResult evalInner(const InnerFunction& theta, Complex z) {
    const double rz = std::abs(z);
    if (!(rz <= 1.0 + 1e-12)) throw Error(ErrorCode::PointOutsideDomain, "inner function evaluated outside the closed disk");
    double tailBound = 0.0;
    if (theta.tailSum > 0.0) {
        const double gap = 1.0 - rz;
        tailBound = gap > 0.0 ? 2.0 * theta.tailSum / gap : std::numeric_limits<double>::infinity();
        if (tailBound > theta.truncationBudget)
            throw Error(ErrorCode::TruncationBudgetExceeded, "Blaschke tail bound exceeds the truncation budget at |z| = " + std::to_string(rz));
    }
    Complex value{1.0}, derivative{};
    for (const auto& zero : theta.zeros) {
        auto [b, db] = blaschkeFactor(zero, z);
        derivative = derivative * b + value * db;
        value *= b;
    }
    if (!theta.atoms.empty()) {
        Complex exponent{}, dexponent{};
        for (const auto& atom : theta.atoms) {
            const Complex gap = atom.xi - z;
            if (std::abs(gap) < 1e-12)
                throw Error(ErrorCode::EvaluationAtEssentialSingularity, "evaluation within the guard band of a singular atom");
            exponent -= atom.omega * (atom.xi + z) / gap;
            dexponent -= atom.omega * 2.0 * atom.xi / (gap * gap);
        }
        const Complex s = std::exp(exponent);
        derivative = derivative * s + value * s * dexponent;
        value *= s;
    }
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(theta.zeros.size() + theta.atoms.size() + 1);
    const double mag = std::abs(value);
    return {value, derivative, rounding + (mag > 0.0 ? tailBound / mag : tailBound)};
}

/// inf_m prod_{k != m} |b_{lambda_k}(lambda_m)|; 0 when a point repeats.
inline double carlesonSeparation(const std::vector<BlaschkeZero>& zeros) {
    double delta = 1.0;
    for (std::size_t m = 0; m < zeros.size(); ++m) {
        double logProd = 0.0;
        for (std::size_t k = 0; k < zeros.size(); ++k) {
            if (k == m) continue;
            const double complement = pseudoHyperbolicComplement(zeros[k], zeros[m]);
            if (complement >= 1.0) return 0.0;
            logProd += 0.5 * std::log1p(-complement);
        }
        delta = std::min(delta, std::exp(logProd));
    }
    return delta;
}

inline double carlesonSeparation(const std::vector<Complex>& points) {
    std::vector<BlaschkeZero> zs;
    zs.reserve(points.size());
    for (auto p : points) zs.push_back(BlaschkeZero::at(p));
    return carlesonSeparation(zs);
}

struct SpectrumArc {
    Complex center;
    double halfWidth = 0.0;  // radians
    std::string source;      // "atom" | "limit-point" | "zero-cluster"

    bool contains(Complex alpha) const {
        return std::abs(std::arg(alpha / center)) <= halfWidth + 1e-15;
    }
};

struct SpectrumProbe {
    Complex alpha;
    double liminfEstimate = 1.0;  // min of |theta(r alpha)| over the outermost radii
    bool flagged = false;         // liminfEstimate < 0.99
};

struct SpectrumEstimate {
    std::vector<SpectrumArc> arcs;
    std::vector<SpectrumProbe> probes;

    bool covers(Complex alpha) const {
        return std::any_of(arcs.begin(), arcs.end(), [&](const SpectrumArc& a) { return a.contains(alpha); });
    }
};

inline std::vector<double> defaultRadialGrid() { return {0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999}; }

/// Boundary spectrum: arcs around atoms, declared limit points and circle
/// clusters of deep zeros (at least 3 zeros with 1-|lambda| <= 1/64 in one
/// arc bin). Probes record the minimum of |theta(r alpha)| over the last three
/// radii of `radialGrid` at every bin center alpha.
inline SpectrumEstimate spectrumEstimate(const InnerFunction& theta, int arcResolution = 64,
                                         const std::vector<double>& radialGrid = defaultRadialGrid()) {
    if (arcResolution < 4) throw Error(ErrorCode::InvalidArgument, "arcResolution must be >= 4");
    const double halfWidth = kPi / arcResolution;
    SpectrumEstimate est;
    auto addArc = [&](Complex center, const char* source) {
        for (const auto& a : est.arcs)
            if (a.contains(center) && std::abs(std::arg(center / a.center)) < 1e-12) return;
        est.arcs.push_back({center, halfWidth, source});
    };
    for (const auto& atom : theta.atoms) addArc(atom.xi, "atom");
    for (auto p : theta.limitPoints) addArc(p / std::abs(p), "limit-point");

    std::vector<int> binCounts(static_cast<std::size_t>(arcResolution), 0);
    for (const auto& z : theta.zeros) {
        if (z.point == Complex{}) continue;
        const double oneMinusMod = z.defect / (1.0 + z.modulus());
        if (oneMinusMod > 1.0 / 64.0) continue;
        double a = z.angle();
        if (a < 0) a += kTwoPi;
        int bin = static_cast<int>(std::lround(a / (2.0 * halfWidth))) % arcResolution;
        ++binCounts[static_cast<std::size_t>(bin)];
    }
    for (int j = 0; j < arcResolution; ++j) {
        if (binCounts[static_cast<std::size_t>(j)] < 3) continue;
        const Complex center = unimodular(2.0 * halfWidth * j);
        if (!est.covers(center)) addArc(center, "zero-cluster");
    }

    const std::size_t tail = std::min<std::size_t>(3, radialGrid.size());
    for (int j = 0; j < arcResolution; ++j) {
        const Complex alpha = unimodular(2.0 * halfWidth * j);
        double minMod = 1.0;
        bool any = false;
        for (std::size_t i = radialGrid.size() - tail; i < radialGrid.size(); ++i) {
            try {
                minMod = std::min(minMod, std::abs(evalInner(theta, radialGrid[i] * alpha).value));
                any = true;
            } catch (const Error&) {
            }
        }
        est.probes.push_back({alpha, any ? minMod : 1.0, any && minMod < 0.99});
    }
    return est;
}

struct OneComponentReport {
    double level = 0.5;
    int gridSize = 0;
    int componentCount = 0;
    bool connected = true;
    long unknownCells = 0;
};

/// Samples |theta| on a gridSize x gridSize grid over [-1,1]^2 restricted to
/// |z| <= 1 - 2/gridSize and counts 4-connected components of {|theta| < r}.
/// Heuristic evidence only: features thinner than the grid spacing are missed.
inline OneComponentReport oneComponentProbe(const InnerFunction& theta, double r, int gridSize) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0,1)");
    if (gridSize < 8) throw Error(ErrorCode::InvalidArgument, "gridSize must be >= 8");
    const std::size_t n = static_cast<std::size_t>(gridSize);
    const double h = 2.0 / gridSize;
    const double rmax = 1.0 - 2.0 / gridSize;
    // 0 = outside/above level, 1 = below level, 2 = unknown
    std::vector<unsigned char> mask(n * n, 0);
    parallelFor(n, [&](std::size_t row) {
        const double y = -1.0 + (static_cast<double>(row) + 0.5) * h;
        for (std::size_t col = 0; col < n; ++col) {
            const Complex z(-1.0 + (static_cast<double>(col) + 0.5) * h, y);
            if (std::abs(z) > rmax) continue;
            try {
                mask[row * n + col] = std::abs(evalInner(theta, z).value) < r ? 1 : 0;
            } catch (const Error&) {
                mask[row * n + col] = 2;
            }
        }
    });
    OneComponentReport rep{r, gridSize, 0, true, 0};
    rep.unknownCells = std::count(mask.begin(), mask.end(), static_cast<unsigned char>(2));
    std::vector<unsigned char> seen(n * n, 0);
    std::queue<std::size_t> frontier;
    for (std::size_t start = 0; start < n * n; ++start) {
        if (mask[start] != 1 || seen[start]) continue;
        ++rep.componentCount;
        seen[start] = 1;
        frontier.push(start);
        while (!frontier.empty()) {
            const std::size_t cur = frontier.front();
            frontier.pop();
            const std::size_t row = cur / n, col = cur % n;
            const std::size_t nbrs[4] = {row > 0 ? cur - n : cur, row + 1 < n ? cur + n : cur,
                                         col > 0 ? cur - 1 : cur, col + 1 < n ? cur + 1 : cur};
            for (std::size_t nb : nbrs) {
                if (nb == cur || seen[nb] || mask[nb] != 1) continue;
                seen[nb] = 1;
                frontier.push(nb);
            }
        }
    }
    rep.connected = rep.componentCount <= 1;
    return rep;
}

}  // namespace modelspace
