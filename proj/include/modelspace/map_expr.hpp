#pragma once

// Holomorphic self-maps of the unit disk as immutable expression trees,
// evaluated with their derivatives, plus disk geometry helpers.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modelspace/errors.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/polynomial.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

/// num/den with den free of zeros in the closed disk.
struct Rational {
    Poly num;
    Poly den;
};

inline constexpr int kMaxCompositionDepth = 16;
inline constexpr int kSelfMapSamples = 512;
inline constexpr double kSelfMapTolerance = 1e-9;

class MapExpr {
public:
    enum class Kind { Identity, Scale, Moebius, Polynomial, Rational, Blaschke, SingularInner, Compose };

    static MapExpr identity();
    static MapExpr scale(Complex c);
    /// (a z + b)/(c z + d); coefficients are rescaled so the largest modulus is 1.
    static MapExpr moebius(Complex a, Complex b, Complex c, Complex d);
    static MapExpr polynomial(Poly coeffs);
    static MapExpr rational(Poly num, Poly den);
    static MapExpr blaschke(InnerFunction zeros);
    static MapExpr singularInner(InnerFunction atoms);
    static MapExpr compose(const MapExpr& outer, const MapExpr& inner);

    Kind kind() const;
    int depth() const;
    Complex scaleFactor() const;
    std::array<Complex, 4> moebiusCoefficients() const;
    const Poly& numerator() const;    // polynomial coefficients or rational numerator
    const Poly& denominator() const;  // rational denominator
    const InnerFunction& innerFunction() const;
    const MapExpr& outer() const;
    const MapExpr& inner() const;

    /// Exact rational form when every node is rational (finite Blaschke
    /// products included); std::nullopt for singular or truncated factors.
    std::optional<Rational> asRational() const;

    /// Whether boundary values are defined everywhere on the circle except
    /// at finitely many known points (no truncated tail anywhere).
    bool hasBoundaryValues() const;

private:
    struct Node;
    explicit MapExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct MapExpr::Node {
    Kind kind = Kind::Identity;
    Complex c{};
    std::array<Complex, 4> m{};
    Poly num, den;
    InnerFunction inner;
    std::optional<MapExpr> outerMap, innerMap;
    int depth = 1;
};

inline const char* to_string(MapExpr::Kind k) {
    switch (k) {
        case MapExpr::Kind::Identity: return "identity";
        case MapExpr::Kind::Scale: return "scale";
        case MapExpr::Kind::Moebius: return "moebius";
        case MapExpr::Kind::Polynomial: return "polynomial";
        case MapExpr::Kind::Rational: return "rational";
        case MapExpr::Kind::Blaschke: return "blaschke";
        case MapExpr::Kind::SingularInner: return "singular-inner";
        case MapExpr::Kind::Compose: return "compose";
    }
    return "?";
}

EvalResult evalMap(const MapExpr& map, Complex z);

namespace detail {

inline void checkSelfMap(const MapExpr& map) {
    double worst = 0.0;
    for (int k = 0; k < kSelfMapSamples; ++k) {
        const Complex z = unimodular(kTwoPi * k / kSelfMapSamples);
        try {
            worst = std::max(worst, std::abs(evalMap(map, z).value));
        } catch (const Error& e) {
            // radial limits only exist at regular points
            if (e.code() != ErrorCode::EvaluationAtEssentialSingularity && e.code() != ErrorCode::TruncationBudgetExceeded)
                throw;
        }
    }
    if (worst > 1.0 + kSelfMapTolerance)
        throw Error(ErrorCode::NotSelfMap, "max |phi| on the boundary samples is " + std::to_string(worst));
}

inline void checkDenominator(const Poly& den) {
    if (polyDegree(den) < 0) throw Error(ErrorCode::NotSelfMap, "zero denominator");
    for (auto root : polyRoots(den))
        if (std::abs(root) <= 1.0 + 1e-12)
            throw Error(ErrorCode::NotSelfMap, "denominator vanishes in the closed disk");
}

}  // namespace detail

inline MapExpr MapExpr::identity() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Identity;
    return MapExpr(std::move(n));
}

inline MapExpr MapExpr::scale(Complex c) {
    if (std::abs(c) > 1.0 + kSelfMapTolerance) throw Error(ErrorCode::NotSelfMap, "scale factor exceeds 1 in modulus");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Scale;
    n->c = c;
    return MapExpr(std::move(n));
}

inline MapExpr MapExpr::moebius(Complex a, Complex b, Complex c, Complex d) {
    const double largest = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (largest == 0.0 || a * d - b * c == Complex{})
        throw Error(ErrorCode::InvalidArgument, "degenerate Moebius coefficients");
    if (std::abs(d) <= std::abs(c) * (1.0 + 1e-12))
        throw Error(ErrorCode::NotSelfMap, "Moebius pole inside the closed disk");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Moebius;
    n->m = {a / largest, b / largest, c / largest, d / largest};
    MapExpr out(std::move(n));
    detail::checkSelfMap(out);
    return out;
}

inline MapExpr MapExpr::polynomial(Poly coeffs) {
    coeffs = polyTrim(std::move(coeffs));
    if (coeffs.empty()) coeffs = {Complex{}};
    auto n = std::make_shared<Node>();
    n->kind = Kind::Polynomial;
    n->num = std::move(coeffs);
    MapExpr out(std::move(n));
    detail::checkSelfMap(out);
    return out;
}

inline MapExpr MapExpr::rational(Poly num, Poly den) {
    num = polyTrim(std::move(num));
    den = polyTrim(std::move(den));
    detail::checkDenominator(den);
    if (num.empty()) num = {Complex{}};
    auto n = std::make_shared<Node>();
    n->kind = Kind::Rational;
    n->num = std::move(num);
    n->den = std::move(den);
    MapExpr out(std::move(n));
    detail::checkSelfMap(out);
    return out;
}

inline MapExpr MapExpr::blaschke(InnerFunction zeros) {
    if (!zeros.atoms.empty()) throw Error(ErrorCode::InvalidArgument, "blaschke map takes zeros only");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Blaschke;
    n->inner = std::move(zeros);
    return MapExpr(std::move(n));
}

inline MapExpr MapExpr::singularInner(InnerFunction atoms) {
    if (!atoms.zeros.empty() || atoms.atoms.empty())
        throw Error(ErrorCode::InvalidArgument, "singular-inner map takes atoms only");
    auto n = std::make_shared<Node>();
    n->kind = Kind::SingularInner;
    n->inner = std::move(atoms);
    return MapExpr(std::move(n));
}

inline MapExpr MapExpr::compose(const MapExpr& outer, const MapExpr& inner) {
    const int depth = std::max(outer.depth(), inner.depth()) + 1;
    if (depth > kMaxCompositionDepth) throw Error(ErrorCode::CompositionTooDeep, "composition depth exceeds 16");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Compose;
    n->outerMap = outer;
    n->innerMap = inner;
    n->depth = depth;
    return MapExpr(std::move(n));
}

inline MapExpr::Kind MapExpr::kind() const { return node_->kind; }
inline int MapExpr::depth() const { return node_->depth; }
inline Complex MapExpr::scaleFactor() const { return node_->c; }
inline std::array<Complex, 4> MapExpr::moebiusCoefficients() const { return node_->m; }
inline const Poly& MapExpr::numerator() const { return node_->num; }
inline const Poly& MapExpr::denominator() const { return node_->den; }
inline const InnerFunction& MapExpr::innerFunction() const { return node_->inner; }
inline const MapExpr& MapExpr::outer() const { return *node_->outerMap; }
inline const MapExpr& MapExpr::inner() const { return *node_->innerMap; }

inline std::optional<Rational> MapExpr::asRational() const {
    switch (kind()) {
        case Kind::Identity: return Rational{{Complex{}, Complex{1.0}}, {Complex{1.0}}};
        case Kind::Scale: return Rational{{Complex{}, node_->c}, {Complex{1.0}}};
        case Kind::Moebius: return Rational{{node_->m[1], node_->m[0]}, {node_->m[3], node_->m[2]}};
        case Kind::Polynomial: return Rational{node_->num, {Complex{1.0}}};
        case Kind::Rational: return Rational{node_->num, node_->den};
        case Kind::Blaschke: {
            if (!node_->inner.isFiniteBlaschke()) return std::nullopt;
            Rational r{{Complex{1.0}}, {Complex{1.0}}};
            for (const auto& z : node_->inner.zeros) {
                if (z.point == Complex{}) {
                    r.num = polyMul(r.num, {Complex{}, Complex{1.0}});
                    continue;
                }
                const Complex unitConj = std::conj(z.point / std::abs(z.point));
                r.num = polyMul(r.num, {unitConj * z.point, -unitConj});
                r.den = polyMul(r.den, {Complex{1.0}, -std::conj(z.point)});
            }
            return r;
        }
        case Kind::SingularInner: return std::nullopt;
        case Kind::Compose: {
            auto o = outer().asRational();
            auto i = inner().asRational();
            if (!o || !i) return std::nullopt;
            // P/Q o p/q = sum P_k p^k q^{n-k} / sum Q_k p^k q^{n-k}
            const int n = static_cast<int>(std::max(o->num.size(), o->den.size())) - 1;
            Rational r{{}, {}};
            for (int k = 0; k <= n; ++k) {
                const Poly basis = polyMul(polyPow(i->num, k), polyPow(i->den, n - k));
                if (k < static_cast<int>(o->num.size())) r.num = polyAdd(r.num, polyScale(basis, o->num[k]));
                if (k < static_cast<int>(o->den.size())) r.den = polyAdd(r.den, polyScale(basis, o->den[k]));
            }
            r.num = polyTrim(r.num, 1e-15);
            r.den = polyTrim(r.den, 1e-15);
            if (r.num.empty()) r.num = {Complex{}};
            return r;
        }
    }
    return std::nullopt;
}

inline bool MapExpr::hasBoundaryValues() const {
    switch (kind()) {
        case Kind::Blaschke:
        case Kind::SingularInner: return node_->inner.tailSum == 0.0;
        case Kind::Compose: return outer().hasBoundaryValues() && inner().hasBoundaryValues();
        default: return true;
    }
}

/// Evaluates phi and phi' at |z| <= 1 (closed-form per variant, chain rule
/// through compositions).
inline EvalResult evalMap(const MapExpr& map, Complex z) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (!(std::abs(z) <= 1.0 + 1e-12)) throw Error(ErrorCode::PointOutsideDomain, "map evaluated outside the closed disk");
    switch (map.kind()) {
        case MapExpr::Kind::Identity: return {z, Complex{1.0}, 0.0};
        case MapExpr::Kind::Scale: return {map.scaleFactor() * z, map.scaleFactor(), eps};
        case MapExpr::Kind::Moebius: {
            const auto m = map.moebiusCoefficients();
            const Complex den = m[2] * z + m[3];
            return {(m[0] * z + m[1]) / den, (m[0] * m[3] - m[1] * m[2]) / (den * den), 6.0 * eps};
        }
        case MapExpr::Kind::Polynomial: {
            auto [v, d] = polyEvalD(map.numerator(), z);
            const double bound = 2.0 * map.numerator().size() * eps * polyAbsEval(map.numerator(), std::abs(z));
            const double mag = std::abs(v);
            return {v, d, mag > 0.0 ? bound / mag : bound};
        }
        case MapExpr::Kind::Rational: {
            auto [p, dp] = polyEvalD(map.numerator(), z);
            auto [q, dq] = polyEvalD(map.denominator(), z);
            const double r = std::abs(z);
            const double np = std::abs(p), nq = std::abs(q);
            double rel = 2.0 * eps * (map.numerator().size() * polyAbsEval(map.numerator(), r) / std::max(np, 1e-300) +
                                      map.denominator().size() * polyAbsEval(map.denominator(), r) / nq);
            if (np == 0.0) rel = 2.0 * eps * map.numerator().size() * polyAbsEval(map.numerator(), r) / nq;
            return {p / q, (dp * q - p * dq) / (q * q), rel};
        }
        case MapExpr::Kind::Blaschke:
        case MapExpr::Kind::SingularInner: return evalInner(map.innerFunction(), z);
        case MapExpr::Kind::Compose: {
            const EvalResult in = evalMap(map.inner(), z);
            Complex u = in.value;
            if (std::abs(u) > 1.0 && std::abs(u) <= 1.0 + 1e-12) u /= std::abs(u);
            const EvalResult out = evalMap(map.outer(), u);
            const double mag = std::abs(out.value);
            const double propagated = std::abs(out.derivative) * std::abs(in.value) * in.conditionEstimate;
            return {out.value, out.derivative * in.derivative,
                    out.conditionEstimate + (mag > 0.0 ? propagated / mag : propagated)};
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown map kind");
}

/// Conformal map of the unit disk onto {|w - center| < radius}, which must
/// contain 0 and be internally tangent to the circle at tau = center/|center|;
/// normalized by phi(0) = 0, phi(tau) = tau.
inline MapExpr conformalOntoDisk(Complex center, double radius, double tol = 1e-12) {
    const double c = std::abs(center);
    if (!(radius > 0.0) || !(c < radius)) throw Error(ErrorCode::ZeroNotInterior, "0 is not interior to the target disk");
    if (c + radius > 1.0 + tol) throw Error(ErrorCode::NotContained, "target disk leaves the unit disk");
    if (c + radius < 1.0 - tol) throw Error(ErrorCode::NotTangent, "target disk does not touch the unit circle");
    if (c == 0.0) return MapExpr::identity();
    const Complex tau = center / c;
    // phi(z) = (radius - c^2/radius) z / (1 - (c/radius) conj(tau) z)
    return MapExpr::moebius(Complex{radius - c * c / radius}, Complex{}, -(c / radius) * std::conj(tau), Complex{1.0});
}

/// (1 - |phi(z)|^2) - |phi'(z)| (1 - |z|^2); nonnegative for self-maps,
/// zero for automorphisms.
inline double schwarzPickDefect(const MapExpr& map, Complex z) {
    if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::PointOutsideDomain, "Schwarz-Pick defect needs |z| < 1");
    const EvalResult r = evalMap(map, z);
    return (1.0 - std::norm(r.value)) - std::abs(r.derivative) * (1.0 - std::norm(z));
}

/// Pseudo-hyperbolic disk {zeta : |zeta - w| < eps |1 - conj(zeta) w|}.
struct HyperbolicDisk {
    Complex center;
    double radius = 0.5;

    /// Image of the Euclidean point u (|u| < radius) under u -> (w+u)/(1+conj(w)u).
    Complex fromLocal(Complex u) const { return (center + u) / (1.0 + std::conj(center) * u); }
};

inline bool inHyperbolicDisk(const HyperbolicDisk& disk, Complex zeta) {
    return std::abs(zeta - disk.center) < disk.radius * std::abs(1.0 - std::conj(zeta) * disk.center);
}

/// rings x perRing sample points of the disk, at local radii 0.95*eps*(i+1)/rings.
inline std::vector<Complex> hyperbolicDiskSamples(const HyperbolicDisk& disk, int rings = 4, int perRing = 8) {
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(rings * perRing));
    for (int i = 0; i < rings; ++i) {
        const double rho = disk.radius * 0.95 * (i + 1) / rings;
        for (int j = 0; j < perRing; ++j)
            pts.push_back(disk.fromLocal(rho * unimodular(kTwoPi * (j + 0.5 * (i % 2)) / perRing)));
    }
    return pts;
}

}  // namespace modelspace
