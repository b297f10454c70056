#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace modelspace;
using Catch::Approx;
using testing::shippedMaps;

TEST_CASE("evalMap examples") {
    const auto id = evalMap(MapExpr::identity(), 0.3);
    CHECK(id.value == Complex{0.3});
    CHECK(id.derivative == Complex{1.0});

    const auto mob = MapExpr::moebius(2.0, 0.0, -1.0, 3.0);
    const auto r = evalMap(mob, 0.0);
    CHECK(std::abs(r.value) < 1e-15);
    CHECK(std::abs(r.derivative - 2.0 / 3.0) < 1e-15);
    const Complex fd = testing::centralDifference([&](Complex z) { return evalMap(mob, z).value; }, 0.0);
    CHECK(std::abs(fd - r.derivative) < 1e-9);

    const auto comp = MapExpr::compose(MapExpr::polynomial({0.0, 0.0, 1.0}), MapExpr::scale(0.5));
    const auto c = evalMap(comp, 1.0);
    CHECK(std::abs(c.value - 0.25) < 1e-15);
    CHECK(std::abs(c.derivative - 0.5) < 1e-15);
    CHECK(c.conditionEstimate >= 0.0);
}

TEST_CASE("evalMap errors") {
    CHECK_THROWS_MATCHES(evalMap(MapExpr::identity(), 1.5), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == ErrorCode::PointOutsideDomain;
                         }));
    const auto pw = MapExpr::singularInner(inner::paleyWiener());
    try {
        evalMap(pw, 1.0);
        FAIL("expected EvaluationAtEssentialSingularity");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EvaluationAtEssentialSingularity);
    }
}

TEST_CASE("constructors reject non-self-maps") {
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code([] { MapExpr::polynomial({0.0, 2.0}); }) == ErrorCode::NotSelfMap);
    CHECK(code([] { MapExpr::scale(1.5); }) == ErrorCode::NotSelfMap);
    CHECK(code([] { MapExpr::rational({0.0, 0.1}, {0.5, -1.0}); }) == ErrorCode::NotSelfMap);
    CHECK(code([] { MapExpr::moebius(1.0, 0.0, 2.0, 1.0); }) == ErrorCode::NotSelfMap);
    CHECK(code([] {
              MapExpr m = MapExpr::identity();
              for (int i = 0; i < 17; ++i) m = MapExpr::compose(MapExpr::scale(0.9), m);
          }) == ErrorCode::CompositionTooDeep);
}

TEST_CASE("moebius coefficients are normalized") {
    const auto m = MapExpr::moebius(20.0, 0.0, -10.0, 30.0).moebiusCoefficients();
    double largest = 0.0;
    for (auto c : m) largest = std::max(largest, std::abs(c));
    CHECK(largest == Approx(1.0));
    CHECK(std::abs(m[0] - 2.0 / 3.0) < 1e-15);
}

TEST_CASE("conformalOntoDisk") {
    const auto phi = conformalOntoDisk(0.25, 0.75);
    const auto m = phi.moebiusCoefficients();
    // proportional to (2, 0, -1, 3)
    const Complex s = m[3] / 3.0;
    CHECK(std::abs(m[0] - 2.0 * s) < 1e-14);
    CHECK(std::abs(m[1]) < 1e-14);
    CHECK(std::abs(m[2] + s) < 1e-14);
    CHECK(std::abs(evalMap(phi, 0.0).value) < 1e-15);
    CHECK(std::abs(evalMap(phi, 1.0).value - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(evalMap(phi, Complex{0.0, 1.0}).value - 0.25) - 0.75) < 1e-14);
    CHECK(std::abs(std::abs(evalMap(phi, -1.0).value - 0.25) - 0.75) < 1e-14);
    for (int k = 0; k < 32; ++k) {
        const Complex v = evalMap(phi, unimodular(kTwoPi * k / 32)).value;
        CHECK(std::abs(std::abs(v - 0.25) - 0.75) < 1e-10);
    }

    const auto rot = conformalOntoDisk(0.3 * unimodular(1.0), 0.7);
    CHECK(std::abs(evalMap(rot, unimodular(1.0)).value - unimodular(1.0)) < 1e-13);
    for (int k = 0; k < 32; ++k) {
        const Complex v = evalMap(rot, unimodular(kTwoPi * k / 32)).value;
        CHECK(std::abs(std::abs(v - 0.3 * unimodular(1.0)) - 0.7) < 1e-10);
    }

    const auto same = conformalOntoDisk(0.0, 1.0);
    CHECK(same.kind() == MapExpr::Kind::Identity);

    auto code = [](Complex c, double r) {
        try {
            conformalOntoDisk(c, r);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code(0.5, 0.2) == ErrorCode::ZeroNotInterior);
    CHECK(code(0.5, 0.8) == ErrorCode::NotContained);
    CHECK(code(0.1, 0.5) == ErrorCode::NotTangent);
}

TEST_CASE("schwarzPickDefect examples") {
    CHECK(std::abs(schwarzPickDefect(MapExpr::identity(), Complex{0.3, -0.4})) < 1e-15);
    CHECK(schwarzPickDefect(MapExpr::scale(0.5), 0.0) == Approx(0.5));
    const double expected = (1.0 - std::exp(-2.0)) - 2.0 * std::exp(-1.0);
    CHECK(std::abs(schwarzPickDefect(MapExpr::singularInner(inner::paleyWiener()), 0.0) - expected) < 1e-14);
    CHECK(expected == Approx(0.128906).epsilon(1e-5));
    // automorphism: zero defect
    const auto aut = MapExpr::moebius(1.0, -0.4, -0.4, 1.0);
    for (auto z : testing::diskPoints(100, 0.95, 7)) CHECK(std::abs(schwarzPickDefect(aut, z)) < 1e-12);
}

TEST_CASE("Schwarz-Pick defect is nonnegative on shipped maps") {
    auto pts = testing::diskPoints(10000, 0.999, 11);
    auto maps = shippedMaps();
    maps.emplace_back("theta_1", MapExpr::singularInner(inner::paleyWiener()));
    for (const auto& [name, m] : maps) {
        double worst = 0.0;
        for (auto z : pts) worst = std::min(worst, schwarzPickDefect(m, z));
        INFO(name);
        CHECK(worst >= -1e-9);
    }
}

TEST_CASE("derivatives match central differences") {
    auto maps = shippedMaps();
    maps.emplace_back("theta_1", MapExpr::singularInner(inner::paleyWiener()));
    maps.emplace_back("rational", MapExpr::rational({0.0, 0.3, 0.2}, {2.0, 0.5}));
    for (const auto& [name, m] : maps) {
        double worst = 0.0;
        for (auto z : testing::diskPoints(200, 0.95, 3)) {
            const Complex d = evalMap(m, z).derivative;
            const Complex fd = testing::centralDifference([&](Complex u) { return evalMap(m, u).value; }, z);
            worst = std::max(worst, std::abs(fd - d) / std::max(std::abs(d), 1e-3));
        }
        INFO(name);
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("rational form of compositions") {
    const auto phi = MapExpr::compose(MapExpr::moebius(2.0, 0.0, -1.0, 3.0), MapExpr::polynomial({0.0, 0.0, 1.0}));
    const auto rat = phi.asRational();
    REQUIRE(rat.has_value());
    for (auto z : testing::diskPoints(50, 0.99, 5))
        CHECK(std::abs(polyEval(rat->num, z) / polyEval(rat->den, z) - evalMap(phi, z).value) < 1e-13);
    CHECK_FALSE(MapExpr::singularInner(inner::paleyWiener()).asRational().has_value());
    const auto b = MapExpr::blaschke(inner::fromZeros({0.5, Complex{0.0, 0.3}}));
    const auto rb = b.asRational();
    REQUIRE(rb.has_value());
    for (auto z : testing::diskPoints(50, 0.99, 6))
        CHECK(std::abs(polyEval(rb->num, z) / polyEval(rb->den, z) - evalMap(b, z).value) < 1e-13);
}

TEST_CASE("inHyperbolicDisk") {
    const HyperbolicDisk d0{0.0, 0.5};
    CHECK(inHyperbolicDisk(d0, 0.3));
    CHECK_FALSE(inHyperbolicDisk(d0, 0.6));
    CHECK(inHyperbolicDisk({Complex{0.2, 0.7}, 1e-3}, Complex{0.2, 0.7}));
    CHECK(inHyperbolicDisk({0.9, 0.5}, 0.95));
    for (auto z : hyperbolicDiskSamples({Complex{0.8, 0.1}, 0.3})) CHECK(inHyperbolicDisk({Complex{0.8, 0.1}, 0.3}, z));
}

TEST_CASE("map JSON round trip") {
    auto maps = shippedMaps();
    maps.emplace_back("theta_1", MapExpr::singularInner(inner::paleyWiener()));
    maps.emplace_back("rational", MapExpr::rational({0.0, 0.3, 0.2}, {2.0, 0.5}));
    for (const auto& [name, m] : maps) {
        const auto j = json::toJson(m);
        const auto back = json::mapFrom(json::Json::parse(j.dump()));
        INFO(name);
        CHECK(json::toJson(back) == j);
        for (auto z : testing::diskPoints(20, 0.9, 9)) CHECK(std::abs(evalMap(back, z).value - evalMap(m, z).value) < 1e-15);
    }
    const auto parsed = json::mapFrom(json::Json::parse(R"({"kind":"moebius","a":[2,0],"b":[0,0],"c":[-1,0],"d":[3,0]})"));
    CHECK(std::abs(evalMap(parsed, 0.5).value - 0.4) < 1e-15);
    try {
        json::mapFrom(json::Json::parse(R"({"kind":"compose","outer":{"kind":"scale"},"inner":{"kind":"identity"}})"));
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        CHECK(std::string(e.what()).find("/outer/c") != std::string::npos);
    }
}
