#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace modelspace;
using Catch::Approx;

namespace {

FiberOptions engine(CountingMethod m) {
    FiberOptions o;
    o.method = m;
    return o;
}

bool hasRoot(const PreimageSet& s, Complex z, int mult, double tol = 1e-10) {
    for (const auto& r : s.roots)
        if (std::abs(r.z - z) < tol && r.multiplicity == mult) return true;
    return false;
}

/// Winding number of phi - w around 0 along |z| = 1 (boundary samples).
int boundaryWinding(const MapExpr& phi, Complex w, int n = 8192) {
    double total = 0.0;
    Complex prev = evalMap(phi, 1.0).value - w;
    for (int k = 1; k <= n; ++k) {
        const Complex cur = evalMap(phi, unimodular(kTwoPi * k / n)).value - w;
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace

TEST_CASE("preimages examples, both engines") {
    const auto sq = MapExpr::polynomial({0.0, 0.0, 1.0});
    const auto mob = MapExpr::moebius(2.0, 0.0, -1.0, 3.0);
    for (auto m : {CountingMethod::RationalExact, CountingMethod::ArgumentPrinciple}) {
        INFO(to_string(m));
        const double tol = m == CountingMethod::RationalExact ? 1e-12 : 1e-7;
        const auto a = preimages(sq, 0.25, engine(m));
        CHECK(a.roots.size() == 2);
        CHECK(hasRoot(a, 0.5, 1, tol));
        CHECK(hasRoot(a, -0.5, 1, tol));
        const auto b = preimages(mob, 0.5, engine(m));
        REQUIRE(b.roots.size() == 1);
        CHECK(std::abs(b.roots[0].z - 0.6) < tol);
        const auto c = preimages(sq, 0.0, engine(m));
        REQUIRE(c.roots.size() == 1);
        CHECK(c.roots[0].multiplicity == 2);
        CHECK(std::abs(c.roots[0].z) < 1e-6);
        for (const auto& s : {a, b})
            for (const auto& r : s.roots) CHECK(std::abs(r.z) < 1.0);
    }
}

TEST_CASE("nevanlinna examples") {
    CHECK(std::abs(nevanlinna(MapExpr::identity(), 0.5).value - std::log(2.0)) < 1e-14);
    CHECK(std::abs(nevanlinna(MapExpr::polynomial({0.0, 0.0, 1.0}), 0.25).value - 2.0 * std::log(2.0)) < 1e-14);
    CHECK(std::abs(nevanlinna(MapExpr::polynomial({0.0, 0.0, 1.0}), 0.25, engine(CountingMethod::ArgumentPrinciple)).value -
                   2.0 * std::log(2.0)) < 1e-6);
    CHECK(nevanlinna(MapExpr::scale(0.5), 0.75).value == 0.0);
    CHECK(nevanlinna(MapExpr::scale(0.5), 0.75, engine(CountingMethod::ArgumentPrinciple)).value == 0.0);
    try {
        nevanlinna(MapExpr::identity(), 0.0);
        FAIL("expected TargetEqualsPhiOfZero");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TargetEqualsPhiOfZero);
    }
}

TEST_CASE("argument principle handles non-rational maps") {
    // theta_1 o (z/2): single-valued near 0, compare with a direct Newton solve
    const auto phi = MapExpr::compose(MapExpr::singularInner(inner::paleyWiener()), MapExpr::scale(0.5));
    const FiberSolver solver(phi);
    CHECK_FALSE(solver.usesRationalEngine());
    const Complex w = 0.3;
    const auto s = solver.solve(w);
    for (const auto& r : s.roots) CHECK(std::abs(evalMap(phi, r.z).value - w) < 1e-9);
    // z/2 maps into |u|<1/2 where exp((u+1)/(u-1)) - 0.3 has a single root near u = -0.09
    CHECK(s.totalMultiplicity() == 1);
}

TEST_CASE("engines agree on random targets") {
    const auto maps = testing::shippedMaps();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int i = 0; i < 200; ++i) {
        const auto& [name, phi] = maps[static_cast<std::size_t>(i) % maps.size()];
        const Complex w = 0.95 * std::sqrt(u(rng)) * unimodular(kTwoPi * u(rng));
        if (std::abs(w) < 1e-3) continue;
        const double a = nevanlinna(phi, w, engine(CountingMethod::RationalExact)).value;
        const double b = nevanlinna(phi, w, engine(CountingMethod::ArgumentPrinciple)).value;
        INFO(name << " w=" << w);
        CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, a));
        ++compared;
    }
    CHECK(compared >= 195);
}

TEST_CASE("Littlewood bound on random targets") {
    for (const auto& [name, phi] : testing::shippedMaps()) {
        const FiberSolver solver(phi);
        double worst = std::numeric_limits<double>::infinity();
        for (auto w : testing::diskPoints(10000, 0.999, 17)) {
            if (std::abs(w) < 1e-12) continue;
            worst = std::min(worst, solver.count(w).littlewoodSlack);
        }
        INFO(name);
        CHECK(worst >= -1e-9);
    }
}

TEST_CASE("fiber count equals the boundary winding number") {
    const auto phi = MapExpr::compose(MapExpr::moebius(2.0, 0.0, -1.0, 3.0), MapExpr::blaschke(inner::fromZeros({0.0, 0.5})));
    const FiberSolver solver(phi);
    for (auto w : testing::diskPoints(100, 0.95, 23)) {
        if (std::abs(w) < 1e-6) continue;
        CHECK(solver.solve(w).totalMultiplicity() == boundaryWinding(phi, w));
    }
    const auto sq = MapExpr::polynomial({0.0, 0.0, 1.0});
    CHECK(preimages(sq, 0.3).totalMultiplicity() == boundaryWinding(sq, 0.3));
}

TEST_CASE("enlarging the boundary exclusion never increases N") {
    const auto phi = MapExpr::moebius(2.0, 0.0, -1.0, 3.0);
    for (int k = 4; k <= 24; k += 2) {
        const Complex w = 1.0 - std::ldexp(1.0, -k);
        double prev = std::numeric_limits<double>::infinity();
        for (double d : {1e-12, 1e-9, 1e-6, 1e-3}) {
            FiberOptions o;
            o.boundaryExclusion = d;
            const auto s = nevanlinna(phi, w, o);
            CHECK(s.value <= prev);
            if (s.partial) CHECK(s.uncertainty == Approx(-std::log1p(-d)));
            prev = s.value;
        }
    }
}

TEST_CASE("countingChecks examples") {
    const auto id = countingChecks(FiberSolver(MapExpr::identity()), Complex{0.3, 0.4}, 0.2);
    CHECK(id.littlewoodOK);
    CHECK(std::abs(id.slack) < 1e-14);

    const auto sc = countingChecks(FiberSolver(MapExpr::scale(0.5)), 0.4, 0.2);
    CHECK(sc.N == Approx(std::log(1.0 / 0.8)).epsilon(1e-13));
    CHECK(sc.slack == Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(sc.littlewoodOK);

    const auto sq = countingChecks(FiberSolver(MapExpr::polynomial({0.0, 0.0, 1.0})), 0.25, 0.2);
    CHECK(sq.subMeanApplicable);
    CHECK(sq.subMeanOK);

    // sub-mean inequality on the shipped maps
    for (const auto& [name, phi] : testing::shippedMaps()) {
        const FiberSolver solver(phi);
        for (auto w : testing::diskPoints(20, 0.95, 31)) {
            if (std::abs(w) < 0.3) continue;
            const auto c = countingChecks(solver, w, 0.1);
            INFO(name << " w=" << w);
            CHECK(c.littlewoodOK);
            if (c.subMeanApplicable) CHECK(c.subMeanOK);
        }
    }
}
