#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace modelspace;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int runCli(const std::string& args) {
    const std::string cmd = std::string(MODELSPACE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("modelspace_cli_" + name);
    fs::remove_all(p);
    return p;
}

const std::string configDir = MODELSPACE_CONFIG_DIR;

}  // namespace

TEST_CASE("runAnalyze examples") {
    ScenarioConfig c;
    c.phi = MapExpr::scale(0.5);
    c.theta = inner::paleyWiener();
    c.sweep.depth = 12;
    const auto b = runAnalyze(c);
    CHECK(b.verdict.classification == Classification::Compact);
    CHECK(b.exitCode() == 0);

    const auto t = runAnalyze(scenarioConfig("tangent-disk"));
    CHECK(t.verdict.classification == Classification::NonCompact);
    CHECK(t.verdict.trend.level == Approx(1.0 / 3.0).epsilon(0.01));
    REQUIRE(t.clark.size() == 1);
    CHECK(t.clark[0].singularMass == Approx(2.0 / 3.0).epsilon(0.01));

    try {
        loadConfig(configDir + "/bad-rational.json");
        FAIL("expected NotSelfMap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSelfMap);
    }

    ScenarioConfig off;
    off.phi = MapExpr::moebius(1.0, 0.2, 0.0, 2.0);
    try {
        runAnalyze(off);
        FAIL("expected HypothesisViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HypothesisViolated);
    }
}

TEST_CASE("runScenario presets") {
    CHECK(runScenario("paley-wiener-small").verdict.classification == Classification::Compact);
    CHECK(runScenario("tangent-disk").verdict.classification == Classification::NonCompact);
    const auto sp = runScenario("sparse-blaschke");
    CHECK(sp.verdict.classification == Classification::Compact);
    REQUIRE(sp.sparse.has_value());
    CHECK(sp.sparse->ratios.size() == 20);
    CHECK(std::isfinite(sp.sparse->maxRatio));
    CHECK(sp.sparse->tailNonIncreasing);
    CHECK(sp.sparse->separationZeta > 0.0);
    CHECK(sp.sparse->separationLambda > 0.0);
    REQUIRE(sp.oneComponent.has_value());
    CHECK(sp.oneComponent->componentCount >= 2);
    CHECK(sp.verdictJson.contains("sparse_checks"));
    CHECK_THROWS(scenarioConfig("nope"));
}

TEST_CASE("verdicts are stable under finer sweeps") {
    for (const auto& name : scenarioNames()) {
        auto cfg = scenarioConfig(name);
        const auto base = runAnalyze(cfg).verdict.classification;
        cfg.sweep.angles *= 2;
        cfg.sweep.depth += 2;
        const auto fine = runAnalyze(cfg).verdict.classification;
        INFO(name);
        CHECK(base == fine);
    }
}

TEST_CASE("config validation reports JSON pointers") {
    auto err = [](const char* text) {
        try {
            configFrom(json::Json::parse(text));
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err(R"({"theta":{"atoms":[{"xi":[1,0],"omega":1}]}})").find("/phi") != std::string::npos);
    CHECK(err(R"({"phi":{"kind":"identity"},"theta":{"atoms":[{"xi":[1,0],"omega":1}]},"sweep":{"depth":3}})").find("/sweep/depth") !=
          std::string::npos);
    CHECK(err(R"({"phi":{"kind":"identity"},"theta":{"atoms":[{"xi":[1,0]}]}})").find("/theta/atoms/0/omega") != std::string::npos);
    CHECK(err(R"({"phi":{"kind":"identity"},"theta":{"zeros":[[0.5,0]]},"colour":1})").find("/colour") != std::string::npos);
    CHECK(err(R"({"phi":{"kind":"identity"},"theta":{"zeros":[[0.5,0]]},"clark":{"alphas":[[0.5,0]]}})").find("/clark/alphas/0") !=
          std::string::npos);
    CHECK(err(R"({"phi":{"kind":"compose","outer":{"kind":"scale","c":[0.5,0],"d":1},"inner":{"kind":"identity"}},"theta":{"zeros":[]}})")
              .find("/phi/outer/d") != std::string::npos);
    CHECK(err(R"({"phi":{"kind":"shear"},"theta":{"zeros":[[0.5,0]]}})").find("/phi/kind") != std::string::npos);
}

TEST_CASE("shipped configs reload to the preset analyses") {
    for (const auto& name : scenarioNames()) {
        const auto c = loadConfig(configDir + "/" + name + ".json");
        CHECK(toJson(c) == toJson(scenarioConfig(name)));
    }
    const auto custom = loadConfig(configDir + "/squared-blaschke.json");
    CHECK(toJson(configFrom(toJson(custom))) == toJson(custom));
}

TEST_CASE("CLI exit codes and outputs") {
    const auto out = scratch("pw");
    CHECK(runCli("--scenario paley-wiener-small --out " + out.string()) == 0);
    CHECK(fs::exists(out / "verdict.json"));
    CHECK(fs::exists(out / "samples.csv"));
    CHECK(fs::exists(out / "clark.csv"));
    const auto doc = json::Json::parse(slurp(out / "verdict.json"));
    CHECK(doc["classification"] == "COMPACT-evidence");
    for (const char* key : {"scenario", "annulus_suprema", "trend", "criterion_s", "classification", "essential_norm", "caveats", "provenance"})
        CHECK(doc.contains(key));
    CHECK(doc["provenance"]["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    const std::string header = slurp(out / "samples.csv").substr(0, 32);
    CHECK(header == "w_re,w_im,N,theta_mod,Q,annulus\n");

    CHECK(runCli("--config " + configDir + "/bad-rational.json") == 1);
    CHECK(runCli("--scenario tangent-disk --json-only --out " + scratch("td").string()) == 0);
    CHECK_FALSE(fs::exists(scratch("td") / "samples.csv"));
    CHECK(runCli("--scenario nope") == 1);
    CHECK(runCli("") == 1);

    // emitted config reloads to the same analysis
    const auto again = scratch("pw2");
    CHECK(runCli("--config " + (out / "config.json").string() + " --out " + again.string()) == 0);
    CHECK(slurp(out / "samples.csv") == slurp(again / "samples.csv"));
    CHECK(slurp(out / "clark.csv") == slurp(again / "clark.csv"));
}

TEST_CASE("inconclusive analyses exit with 3") {
    // tangent disk rotated off the angle grid: a coarse sweep misses its range
    // near the circle (indicator decays) while criterion (S) fails at the
    // contact point and the singular theta is one-component
    const Complex tau = unimodular(0.05);
    ScenarioConfig c;
    c.name = "inconclusive";
    c.phi = conformalOntoDisk(0.25 * tau, 0.75);
    c.theta = inner::singular({{tau, 1.0}});
    c.sweep = {64, 14};
    const auto b = runAnalyze(c);
    CHECK(b.verdict.trend.trend == Trend::Decaying);
    CHECK_FALSE(b.verdict.criterionSHolds);
    REQUIRE(b.oneComponent.has_value());
    CHECK(b.oneComponent->connected);
    CHECK(b.verdict.classification == Classification::Inconclusive);
    CHECK(b.exitCode() == 3);

    const auto path = scratch("inc.json");
    {
        std::ofstream cfg(path);
        cfg << toJson(c).dump();
    }
    CHECK(runCli("--config " + path.string()) == 3);
    // a finer sweep resolves the range and flips to non-compact evidence
    c.sweep = {4096, 14};
    CHECK(runAnalyze(c).verdict.classification == Classification::NonCompact);
}

TEST_CASE("CSV outputs are deterministic") {
    const auto a = runScenario("tangent-disk");
    setWorkerLimit(1);
    const auto b = runScenario("tangent-disk");
    setWorkerLimit(0);
    CHECK(a.samplesCsv == b.samplesCsv);
    CHECK(a.clarkCsv == b.clarkCsv);
    CHECK(a.provenance == b.provenance);
}
