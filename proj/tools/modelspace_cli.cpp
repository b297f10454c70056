#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "modelspace.hpp"

using namespace modelspace;

int main(int argc, char** argv) {
    CLI::App app{"Compactness analysis for composition operators from K_theta into H^2"};
    std::string configPath, scenario, outDir;
    int depth = 0, angles = 0;
    unsigned threads = 0;
    bool refine = false, jsonOnly = false, list = false;
    auto* cfgOpt = app.add_option("--config", configPath, "scenario config JSON")->check(CLI::ExistingFile);
    app.add_option("--scenario", scenario, "preset: paley-wiener-small | tangent-disk | sparse-blaschke")->excludes(cfgOpt);
    app.add_option("--depth", depth, "sweep depth K (annuli 2..K)")->check(CLI::Range(8, 40));
    app.add_option("--angles", angles, "sweep angles per annulus")->check(CLI::Range(1, 1 << 16));
    app.add_option("--out", outDir, "output directory");
    app.add_flag("--refine", refine, "double every grid");
    app.add_flag("--json-only", jsonOnly, "write verdict.json and config.json only");
    app.add_option("--threads", threads, "worker cap (0 = hardware)");
    app.add_flag("--list", list, "list preset scenarios");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& n : scenarioNames()) std::cout << n << "\n";
        return 0;
    }
    if (threads > 0) setWorkerLimit(threads);
    try {
        ScenarioConfig cfg;
        if (!configPath.empty())
            cfg = loadConfig(configPath);
        else if (!scenario.empty())
            cfg = scenarioConfig(scenario);
        else
            throw Error(ErrorCode::InvalidArgument, "one of --config or --scenario is required");
        if (depth > 0) cfg.sweep.depth = depth;
        if (angles > 0) cfg.sweep.angles = angles;
        if (refine) cfg.refine();
        if (!outDir.empty()) cfg.outputDir = outDir;

        const ReportBundle b = runAnalyze(cfg);
        if (!cfg.outputDir.empty()) b.write(cfg.outputDir, jsonOnly);
        json::Json doc = b.verdictJson;
        doc["provenance"] = b.provenance;
        std::cout << doc.dump(2) << "\n";
        return b.exitCode();
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
