#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace modelspace;
using Catch::Approx;

namespace {
const QuadratureGrid& grid() {
    static const QuadratureGrid g = QuadratureGrid::standard();
    return g;
}
}  // namespace

TEST_CASE("quadrature grid integrates constants and has positive weights") {
    const auto& g = grid();
    CHECK(g.radialCount() == 256);
    CHECK(g.angularCount() == 1024);
    CHECK(std::abs(g.integrate([](Complex) { return 1.0; }) - 1.0) < 1e-12);
    for (std::size_t i = 0; i < g.radialCount(); ++i) CHECK(g.weight(i) > 0.0);
    // int log(1/|z|^2) dA = 1 fixes the Littlewood-Paley constant
    CHECK(std::abs(g.integrate([](Complex z) { return -std::log(std::norm(z)); }) - 1.0) < 1e-8);
    const auto r1 = QuadratureGrid::standard(1);
    CHECK(r1.radialCount() == 512);
    CHECK(r1.angularCount() == 2048);
}

TEST_CASE("kernel values and norms") {
    const auto z = inner::identity();
    const auto pw = inner::paleyWiener();
    CHECK(std::abs(kernelValue(KernelSpec::model(z, Complex{0.3, 0.2}), Complex{-0.5, 0.1}) - 1.0) < 1e-15);
    CHECK(std::abs(kernelValue(KernelSpec::hardy(0.0), Complex{0.7, 0.1}) - 1.0) < 1e-15);
    CHECK(std::abs(kernelValue(KernelSpec::model(pw, 0.0), 0.0) - (1.0 - std::exp(-2.0))) < 1e-15);

    CHECK(kernelNorm(KernelSpec::model(z, Complex{0.3, 0.2})) == Approx(1.0));
    CHECK(kernelNorm(KernelSpec::hardy(0.5)) == Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-14));
    CHECK(kernelNorm(KernelSpec::model(pw, 0.0)) == Approx(std::sqrt(1.0 - std::exp(-2.0))).epsilon(1e-14));

    // normalized kernels have unit norm value at the anchor scaled accordingly
    const auto kn = KernelSpec::hardy(0.5, true);
    CHECK(std::abs(kernelValue(kn, 0.5) - kernelNorm(KernelSpec::hardy(0.5))) < 1e-14);
}

TEST_CASE("kernel derivatives") {
    const auto z = inner::identity();
    const auto pw = inner::paleyWiener();
    CHECK(std::abs(kernelDerivative(KernelSpec::model(z, 0.4), Complex{0.1, 0.3})) < 1e-15);
    CHECK(std::abs(kernelDerivative(KernelSpec::hardy(0.5), 0.0) - 0.5) < 1e-15);
    CHECK(std::abs(kernelDerivative(KernelSpec::model(pw, 0.0), 0.0) - 2.0 * std::exp(-2.0)) < 1e-15);

    std::vector<KernelSpec> specs{KernelSpec::hardy(Complex{0.3, -0.5}), KernelSpec::model(pw, Complex{0.2, 0.6}),
                                  KernelSpec::model(inner::fromZeros({0.5, Complex{-0.2, 0.4}}), Complex{-0.6, 0.1}),
                                  KernelSpec::model(pw, Complex{0.5, 0.5}, true)};
    for (const auto& s : specs)
        for (auto zeta : testing::diskPoints(100, 0.95, 8)) {
            const Complex d = kernelDerivative(s, zeta);
            const Complex fd = testing::centralDifference([&](Complex u) { return kernelValue(s, u); }, zeta);
            CHECK(std::abs(fd - d) <= 1e-5 * std::max(std::abs(d), 1e-3));
        }
}

TEST_CASE("h2Norm examples by all methods") {
    std::vector<std::pair<AnalyticFunction, double>> cases{
        {Polynomial{{0.0, 1.0}}, 1.0},
        {Polynomial{{1.0, 1.0}}, 2.0},
        {TestFunction::hardyKernel(0.5), 4.0 / 3.0},
    };
    for (const auto& [f, sq] : cases) {
        CHECK(h2Norm(f, NormMethod::Coefficients).squared == Approx(sq).epsilon(1e-14));
        CHECK(h2Norm(f, NormMethod::Boundary).squared == Approx(sq).epsilon(1e-12));
        CHECK(h2Norm(f, NormMethod::LittlewoodPaley, grid()).squared == Approx(sq).epsilon(1e-6));
    }
    CHECK_THROWS(h2Norm(Polynomial{{0.0, 1.0}}, NormMethod::Counting));
}

TEST_CASE("Littlewood-Paley calibration: constant fixed by f = z") {
    const double area = grid().integrate([](Complex z) { return -std::log(std::norm(z)); });
    CHECK(kLittlewoodPaleyConstant * area == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("boundary vs Littlewood-Paley on polynomials up to degree 16") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int deg = 0; deg <= 16; ++deg) {
        Poly c;
        for (int k = 0; k <= deg; ++k) c.emplace_back(n(rng), n(rng));
        const AnalyticFunction f = Polynomial{c};
        const double b = h2Norm(f, NormMethod::Boundary).squared;
        const double lp = h2Norm(f, NormMethod::LittlewoodPaley, grid()).squared;
        INFO("degree " << deg);
        CHECK(std::abs(b - lp) <= 1e-4 * b);
        CHECK_NOTHROW(crossCheckedH2Norm(f, NormMethod::Boundary, NormMethod::LittlewoodPaley));
    }
    // a grid that is far too coarse is caught
    const auto coarse = QuadratureGrid({0.0, 1.0}, 2, 8);
    CHECK_THROWS_AS(crossCheckedH2Norm(Polynomial{Poly(13, Complex{1.0})}, NormMethod::Coefficients, NormMethod::LittlewoodPaley,
                                       1e-4, coarse),
                    Error);
}

TEST_CASE("test functions: Gram form and reproducing identity") {
    const std::vector<InnerFunction> thetas{inner::fromZeros({0.0, 0.0}), inner::fromZeros({0.5, Complex{-0.3, 0.6}, Complex{0.1, -0.8}})};
    for (const auto& th : thetas) {
        const TestFunction f(th, {Complex{0.2, 0.1}, Complex{-0.5, 0.3}, Complex{0.6, -0.6}}, {Complex{1.0, -0.5}, 2.0, Complex{0.0, 0.7}});
        // Gram matrix is Hermitian positive semidefinite
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(f.gram(i, j) - std::conj(f.gram(j, i))) < 1e-15);
        CHECK(f.squaredNorm() > 0.0);
        for (auto w : testing::diskPoints(100, 0.95, 13)) {
            const auto spec = KernelSpec::model(th, w);
            const Complex pairing =
                testing::boundaryPairing([&](Complex xi) { return f.value(xi); }, [&](Complex xi) { return kernelValue(spec, xi); });
            CHECK(std::abs(pairing - f.value(w)) < 1e-10);
            CHECK(std::abs(f.innerProduct(TestFunction::modelKernel(th, w)) - pairing) < 1e-10);
        }
        // Gram norm vs boundary norm (finite Blaschke products are exact on the circle)
        CHECK(h2Norm(AnalyticFunction{f}, NormMethod::Boundary).squared == Approx(f.squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("composition norms") {
    const auto& g = grid();
    const auto mob = MapExpr::moebius(2.0, 0.0, -1.0, 3.0);
    const AnalyticFunction z = Polynomial{{0.0, 1.0}};
    CHECK(compositionNorm(z, MapExpr::polynomial({0.0, 0.0, 1.0}), NormMethod::Boundary).squared == Approx(1.0).epsilon(1e-12));
    CHECK(compositionNorm(z, mob, NormMethod::Boundary).squared == Approx(0.5).epsilon(1e-12));
    CHECK(compositionNorm(z, mob, NormMethod::Counting, g).squared == Approx(0.5).epsilon(1e-6));

    const AnalyticFunction k = TestFunction::hardyKernel(0.3);
    CHECK(compositionNorm(k, MapExpr::identity(), NormMethod::Counting, g).squared ==
          Approx(h2Norm(k, NormMethod::Coefficients).squared).epsilon(1e-6));

    // contractivity for phi(0) = 0
    for (const auto& [name, phi] : testing::shippedMaps()) {
        for (const auto& f : {z, k, AnalyticFunction{Polynomial{{0.5, Complex{0.0, -1.0}, 0.25, 1.0}}}}) {
            INFO(name);
            CHECK(compositionNorm(f, phi, NormMethod::Boundary).norm <= h2Norm(f, NormMethod::Coefficients).norm + 1e-9);
        }
    }
}

TEST_CASE("pushforward histogram reproduces the boundary composition norm") {
    const auto mob = MapExpr::moebius(2.0, 0.0, -1.0, 3.0);
    const auto h = pushforwardHistogram(mob, 1 << 14);
    const double viaNu = h.integrate([](Complex w) { return std::norm(w); });
    CHECK(viaNu == Approx(0.5).epsilon(1e-3));
}

TEST_CASE("cohnEnergy") {
    const auto& g = grid();
    const auto z = inner::identity();
    CHECK(cohnEnergy(TestFunction::modelKernel(z, 0.0), z, 0.5, g).energy == 0.0);
    const auto sq = inner::fromZeros({0.0, 0.0});
    const AnalyticFunction f = Polynomial{{0.0, 1.0}};
    CHECK(cohnEnergy(f, sq, 0.0, g).energy == Approx(1.0 / 3.0).epsilon(1e-12));
    const double e = cohnEnergy(f, sq, 0.5, g).energy;
    const double eRef = cohnEnergy(f, sq, 0.5, QuadratureGrid::standard(2)).energy;
    CHECK(std::abs(e - eRef) <= 1e-4 * eRef);
    CHECK(g.totalNodes() >= 100000);
    CHECK_THROWS(cohnEnergy(f, sq, 1.5, g));
}

TEST_CASE("lemma1Probes") {
    const auto pw = inner::paleyWiener();
    std::vector<Complex> seq;
    for (int n = 3; n <= 10; ++n) seq.push_back(1.0 - std::ldexp(1.0, -n));
    const std::vector<AnalyticFunction> fns{TestFunction::modelKernel(pw, 0.0)};
    const auto probes = lemma1Probes(pw, seq, 0.5, 0.3, fns);
    REQUIRE(probes.size() == seq.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        CHECK(probes[i].thetaModulus < 0.5);
        CHECK(probes[i].derivativeConstant > 0.0);
        if (i > 0) CHECK(probes[i].pairing < probes[i - 1].pairing);
    }
    CHECK(probes.back().pairing < 0.1);
    try {
        lemma1Probes(inner::identity(), seq, 0.5, 0.3, fns);
        FAIL("expected HypothesisViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HypothesisViolated);
    }
}
