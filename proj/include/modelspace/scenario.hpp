#pragma once

// Config-driven analysis pipeline and the three preset scenarios:
// spectrum -> sweep -> Clark masses at spectrum centers -> one-component
// probe -> verdict, packaged as a verdict JSON, CSV dumps and provenance.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelspace/analyzer.hpp"
#include "modelspace/clark.hpp"
#include "modelspace/errors.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/serialization.hpp"

namespace modelspace {

inline constexpr const char* kToolVersion = "0.3.0";

struct ScenarioConfig {
    std::string name = "custom";
    MapExpr phi = MapExpr::identity();
    InnerFunction theta = inner::paleyWiener();
    SweepConfig sweep{};
    /// Probed in addition to spectrum centers; only those inside a spectrum
    /// arc enter criterion (S), the rest are reported in the Clark CSV.
    std::vector<Complex> clarkAlphas;
    int boundaryGrid = 4096;
    int spectrumResolution = 64;
    double oneComponentLevel = 0.5;
    int oneComponentGrid = 1024;
    std::string outputDir;
    /// Extra sparse-family checks (kernel ratios, separation constants).
    bool sparseChecks = false;

    /// Doubles every grid (angles, boundary grid, one-component grid).
    void refine() {
        sweep.angles *= 2;
        boundaryGrid *= 2;
        oneComponentGrid *= 2;
    }
};

inline json::Json toJson(const ScenarioConfig& c) {
    json::Json alphas = json::Json::array();
    for (auto a : c.clarkAlphas) alphas.push_back(json::toJson(a));
    json::Json j = {
        {"name", c.name},
        {"phi", json::toJson(c.phi)},
        {"theta", json::toJson(c.theta)},
        {"sweep", {{"angles", c.sweep.angles}, {"depth", c.sweep.depth}}},
        {"clark", {{"alphas", alphas}, {"boundary_grid", c.boundaryGrid}}},
        {"spectrum", {{"resolution", c.spectrumResolution}}},
        {"one_component", {{"level", c.oneComponentLevel}, {"grid", c.oneComponentGrid}}},
        {"sparse_checks", c.sparseChecks},
    };
    if (!c.outputDir.empty()) j["output"] = {{"dir", c.outputDir}};
    return j;
}

namespace detail {

inline void checkKeys(const json::Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) json::fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) json::fail(path + "/" + it.key(), "unknown key");
    }
}

inline int positiveInt(const json::Json& j, const std::string& path, int lo, int hi) {
    const int v = json::intFrom(j, path);
    if (v < lo || v > hi) json::fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

}  // namespace detail

/// Validates and parses a scenario config. Structural problems raise
/// InvalidConfig with a JSON pointer; map/inner-function construction errors
/// (NotSelfMap, ...) keep their own codes.
inline ScenarioConfig configFrom(const json::Json& j) {
    detail::checkKeys(j, "", {"name", "phi", "theta", "sweep", "clark", "spectrum", "one_component", "output", "sparse_checks"});
    ScenarioConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string()) json::fail("/name", "expected a string");
        c.name = j["name"].get<std::string>();
    }
    c.phi = json::mapFrom(json::member(j, "phi", ""), "/phi");
    c.theta = json::innerFrom(json::member(j, "theta", ""), "/theta");
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        detail::checkKeys(s, "/sweep", {"angles", "depth"});
        if (s.contains("angles")) c.sweep.angles = detail::positiveInt(s["angles"], "/sweep/angles", 1, 1 << 16);
        if (s.contains("depth")) c.sweep.depth = detail::positiveInt(s["depth"], "/sweep/depth", 8, 40);
    }
    if (j.contains("clark")) {
        const auto& s = j["clark"];
        detail::checkKeys(s, "/clark", {"alphas", "boundary_grid"});
        if (s.contains("alphas")) {
            if (!s["alphas"].is_array()) json::fail("/clark/alphas", "expected a list");
            for (std::size_t i = 0; i < s["alphas"].size(); ++i) {
                const std::string p = "/clark/alphas/" + std::to_string(i);
                const Complex a = json::complexFrom(s["alphas"][i], p);
                if (std::abs(std::abs(a) - 1.0) > 1e-9) json::fail(p, "alpha must be unimodular");
                c.clarkAlphas.push_back(a / std::abs(a));
            }
        }
        if (s.contains("boundary_grid")) c.boundaryGrid = detail::positiveInt(s["boundary_grid"], "/clark/boundary_grid", 16, 1 << 22);
    }
    if (j.contains("spectrum")) {
        detail::checkKeys(j["spectrum"], "/spectrum", {"resolution"});
        if (j["spectrum"].contains("resolution"))
            c.spectrumResolution = detail::positiveInt(j["spectrum"]["resolution"], "/spectrum/resolution", 4, 1 << 16);
    }
    if (j.contains("one_component")) {
        const auto& s = j["one_component"];
        detail::checkKeys(s, "/one_component", {"level", "grid"});
        if (s.contains("level")) {
            c.oneComponentLevel = json::numberFrom(s["level"], "/one_component/level");
            if (!(c.oneComponentLevel > 0.0 && c.oneComponentLevel < 1.0)) json::fail("/one_component/level", "must lie in (0,1)");
        }
        if (s.contains("grid")) c.oneComponentGrid = detail::positiveInt(s["grid"], "/one_component/grid", 8, 1 << 14);
    }
    if (j.contains("output")) {
        detail::checkKeys(j["output"], "/output", {"dir"});
        if (j["output"].contains("dir")) {
            if (!j["output"]["dir"].is_string()) json::fail("/output/dir", "expected a string");
            c.outputDir = j["output"]["dir"].get<std::string>();
        }
    }
    if (j.contains("sparse_checks")) {
        if (!j["sparse_checks"].is_boolean()) json::fail("/sparse_checks", "expected a boolean");
        c.sparseChecks = j["sparse_checks"].get<bool>();
    }
    return c;
}

inline ScenarioConfig loadConfig(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + file.string());
    json::Json j;
    try {
        j = json::Json::parse(in);
    } catch (const json::Json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
    }
    return configFrom(j);
}

struct SparseChecks {
    std::vector<double> ratios;  // ||C_phi k~_{lambda_m}||^2 / alpha_m, m = 1..count
    double maxRatio = 0.0;
    double minRatio = 0.0;
    bool tailNonIncreasing = false;  // last five ratios non-increasing within 25%
    double separationZeta = 0.0;
    double separationLambda = 0.0;
};

struct ReportBundle {
    ScenarioConfig config;
    SweepResult sweep;
    SpectrumEstimate spectrum;
    std::vector<ClarkReport> clark;
    std::optional<OneComponentReport> oneComponent;
    CompactnessVerdict verdict;
    std::optional<SparseChecks> sparse;

    json::Json verdictJson;
    json::Json provenance;
    std::string samplesCsv;
    std::string clarkCsv;

    int exitCode() const { return verdict.classification == Classification::Inconclusive ? 3 : 0; }

    /// Writes verdict.json, samples.csv, clark.csv and config.json into dir.
    void write(const std::filesystem::path& dir, bool jsonOnly = false) const {
        std::filesystem::create_directories(dir);
        auto put = [&](const char* name, const std::string& text) {
            std::ofstream out(dir / name, std::ios::binary);
            if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
            out << text;
        };
        json::Json doc = verdictJson;
        doc["provenance"] = provenance;
        put("verdict.json", doc.dump(2) + "\n");
        put("config.json", toJson(config).dump(2) + "\n");
        if (jsonOnly) return;
        put("samples.csv", samplesCsv);
        put("clark.csv", clarkCsv);
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace detail {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csvQuote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline SparseChecks sparseChecks(const MapExpr& phi, const InnerFunction& theta) {
    if (!theta.family || theta.family->name != "sparse-tangential")
        throw Error(ErrorCode::InvalidArgument, "sparse checks need a sparse-tangential theta");
    SparseChecks out;
    const auto& fam = *theta.family;
    for (std::size_t i = 0; i < theta.zeros.size(); ++i) {
        const double alpha = std::pow(fam.alphaRatio, static_cast<double>(i + 1));
        const auto& z = theta.zeros[i];
        out.ratios.push_back(kernelCompositionNormSquared(phi, z.point, z.defect) / alpha);
    }
    out.maxRatio = *std::max_element(out.ratios.begin(), out.ratios.end());
    out.minRatio = *std::min_element(out.ratios.begin(), out.ratios.end());
    out.tailNonIncreasing = true;
    const std::size_t n = out.ratios.size();
    for (std::size_t i = n >= 5 ? n - 4 : 1; i < n; ++i)
        if (out.ratios[i] > 1.25 * out.ratios[i - 1]) out.tailNonIncreasing = false;
    out.separationLambda = carlesonSeparation(theta.zeros);
    out.separationZeta = carlesonSeparation(inner::sparseTangential(fam.count, fam.tRatio, 1.0).zeros);
    return out;
}

}  // namespace detail

inline json::Json toJson(const CompactnessVerdict& v, const std::string& scenario) {
    json::Json sup = json::Json::array();
    for (const auto& a : v.annulusSuprema) sup.push_back({{"k", a.k}, {"sup", a.sup}, {"partial", a.partial}});
    json::Json cs = json::Json::array();
    for (const auto& e : v.criterionS)
        cs.push_back({{"alpha", json::toJson(e.alpha)}, {"singular_mass", e.singularMass}, {"uncertainty", e.uncertainty}});
    json::Json trend = {{"kind", to_string(v.trend.trend)}, {"level", v.trend.level}, {"slope", v.trend.slope}};
    json::Json j = {
        {"scenario", scenario},
        {"annulus_suprema", sup},
        {"trend", trend},
        {"criterion_s", cs},
        {"criterion_s_holds", v.criterionSHolds},
        {"classification", to_string(v.classification)},
        {"essential_norm", v.essentialNormEstimate},
        {"caveats", v.caveats},
    };
    if (v.oneComponent)
        j["one_component"] = {{"level", v.oneComponent->level},
                              {"grid", v.oneComponent->gridSize},
                              {"components", v.oneComponent->componentCount},
                              {"connected", v.oneComponent->connected},
                              {"unknown_cells", v.oneComponent->unknownCells}};
    return j;
}

inline ReportBundle runAnalyze(const ScenarioConfig& cfg) {
    const Complex phi0 = evalMap(cfg.phi, Complex{}).value;
    if (std::abs(phi0) > 1e-14) throw Error(ErrorCode::HypothesisViolated, "verdicts require phi(0) = 0");
    ReportBundle b;
    b.config = cfg;
    b.spectrum = spectrumEstimate(cfg.theta, cfg.spectrumResolution);
    b.sweep = sweep(cfg.phi, cfg.theta, cfg.sweep);

    std::vector<Complex> alphas;
    for (const auto& arc : b.spectrum.arcs) alphas.push_back(arc.center);
    for (auto a : cfg.clarkAlphas)
        if (std::none_of(alphas.begin(), alphas.end(), [&](Complex x) { return std::abs(x - a) < 1e-12; })) alphas.push_back(a);
    for (auto a : alphas) b.clark.push_back(clarkMasses(cfg.phi, a, cfg.boundaryGrid, {a}));

    b.oneComponent = oneComponentProbe(cfg.theta, cfg.oneComponentLevel, cfg.oneComponentGrid);
    std::vector<ClarkReport> onSpectrum;
    for (const auto& c : b.clark)
        if (b.spectrum.covers(c.alpha)) onSpectrum.push_back(c);
    b.verdict = verdict(b.sweep, onSpectrum, b.oneComponent, cfg.sweep.depth);
    if (cfg.sparseChecks) b.sparse = detail::sparseChecks(cfg.phi, cfg.theta);

    b.verdictJson = toJson(b.verdict, cfg.name);
    if (b.sparse) {
        b.verdictJson["sparse_checks"] = {{"kernel_ratios", b.sparse->ratios},
                                          {"max_ratio", b.sparse->maxRatio},
                                          {"min_ratio", b.sparse->minRatio},
                                          {"max_over_min", b.sparse->maxRatio / b.sparse->minRatio},
                                          {"tail_non_increasing", b.sparse->tailNonIncreasing},
                                          {"separation_zeta", b.sparse->separationZeta},
                                          {"separation_lambda", b.sparse->separationLambda}};
    }

    std::string csv = "w_re,w_im,N,theta_mod,Q,annulus\n";
    for (const auto& s : b.sweep.samples)
        csv += detail::num(s.w.real()) + "," + detail::num(s.w.imag()) + "," + detail::num(s.N) + "," +
               detail::num(s.thetaModulus) + "," + detail::num(s.Q) + "," + std::to_string(s.annulus) + "\n";
    b.samplesCsv = std::move(csv);

    std::string ccsv = "alpha_re,alpha_im,total_mass,ac_mass,singular_mass,atoms\n";
    for (const auto& c : b.clark) {
        json::Json atoms = json::Json::array();
        for (const auto& a : c.atoms) atoms.push_back({{"zeta", json::toJson(a.zeta)}, {"mass", a.mass}, {"error", a.error}});
        ccsv += detail::num(c.alpha.real()) + "," + detail::num(c.alpha.imag()) + "," + detail::num(c.totalMass) + "," +
                detail::num(c.acMass) + "," + detail::num(c.singularMass) + "," + detail::csvQuote(atoms.dump()) + "\n";
    }
    b.clarkCsv = std::move(ccsv);

    const std::string canonical = toJson(cfg).dump();
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    b.provenance = {
        {"tool", "modelspace"},
        {"version", kToolVersion},
        {"config_hash", std::string("fnv1a64:") + hash},
        {"grids",
         {{"angles", cfg.sweep.angles},
          {"depth", cfg.sweep.depth},
          {"boundary_grid", cfg.boundaryGrid},
          {"spectrum_resolution", cfg.spectrumResolution},
          {"one_component_grid", cfg.oneComponentGrid}}},
        {"tolerances",
         {{"boundary_exclusion", cfg.sweep.fiber.boundaryExclusion},
          {"cluster_tolerance", cfg.sweep.fiber.clusterTolerance},
          {"multiplicity_radius", cfg.sweep.fiber.multiplicityRadius},
          {"decay_ratio", kDecayRatio},
          {"decay_floor", kDecayFloor},
          {"plateau_band", kPlateauBand},
          {"singular_threshold", kSingularThreshold},
          {"atom_report_floor", kAtomReportFloor},
          {"self_map_tolerance", kSelfMapTolerance}}},
    };
    return b;
}

inline const std::vector<std::string>& scenarioNames() {
    static const std::vector<std::string> names{"paley-wiener-small", "tangent-disk", "sparse-blaschke"};
    return names;
}

inline ScenarioConfig scenarioConfig(const std::string& name) {
    ScenarioConfig c;
    c.name = name;
    c.sweep.depth = 14;
    if (name == "paley-wiener-small") {
        c.phi = MapExpr::scale(0.5);
        c.theta = inner::paleyWiener();
        c.sweep.depth = 12;
    } else if (name == "tangent-disk") {
        c.phi = conformalOntoDisk(0.25, 0.75);
        c.theta = inner::paleyWiener();
    } else if (name == "sparse-blaschke") {
        c.phi = conformalOntoDisk(0.25, 0.75);
        c.theta = inner::sparseTangential(20);
        c.oneComponentGrid = 2048;
        c.sparseChecks = true;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
    }
    return c;
}

inline ReportBundle runScenario(const std::string& name) { return runAnalyze(scenarioConfig(name)); }

}  // namespace modelspace
