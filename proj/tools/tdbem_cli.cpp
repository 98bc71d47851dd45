// Command-line driver: runs one scenario, or compares two reports.
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tdbem/runner.hpp"

int main(int argc, char** argv) {
    using namespace tdbem;
    CLI::App app{"Time-domain boundary element solver for the scalar wave equation"};

    std::string configPath;
    std::vector<std::string> sets;
    std::vector<std::string> compare;
    bool printConfig = false;
    std::optional<std::string> mesh, bie, algo, out, boundary;
    std::optional<int> order, ps, pt, nt, leaf, threads;
    std::optional<double> dt;

    app.add_option("--config", configPath, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--mesh", mesh, "mesh file (.msh, .obj), sphere:<elements> or hollow-box");
    app.add_option("--bie", bie, "obie or bmbie");
    app.add_option("--boundary", boundary, "neumann or dirichlet");
    app.add_option("--order", order, "B-spline order d");
    app.add_option("--algo", algo, "conv or fast");
    app.add_option("--ps", ps, "spatial interpolation nodes per axis");
    app.add_option("--pt", pt, "temporal interpolation nodes");
    app.add_option("--dt", dt, "time step");
    app.add_option("--nt", nt, "number of time steps");
    app.add_option("--leaf-capacity", leaf, "maximum elements per octree leaf");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--out", out, "output directory");
    app.add_option("--set", sets, "extra key=value overrides");
    app.add_flag("--print-config", printConfig, "print the effective config and exit");
    app.add_option("--compare", compare, "compare two report files")->expected(2);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!compare.empty()) {
            const RunComparison c = compareRuns(loadReport(compare[0]), loadReport(compare[1]));
            std::cout << formatComparison(c);
            return 0;
        }

        RunConfig cfg = configPath.empty() ? RunConfig{} : loadConfig(configPath);
        auto apply = [&](const char* key, const auto& v) {
            if (!v) return;
            if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) setConfigValue(cfg, key, *v);
            else setConfigValue(cfg, key, CLI::detail::to_string(*v));
        };
        apply("mesh", mesh);
        apply("bie", bie);
        apply("boundary", boundary);
        apply("order", order);
        apply("algo", algo);
        apply("ps", ps);
        apply("pt", pt);
        apply("dt", dt);
        apply("nt", nt);
        apply("leaf_capacity", leaf);
        apply("threads", threads);
        apply("out", out);
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
            setConfigValue(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        cfg.validate();
        if (printConfig) {
            std::cout << serializeConfig(cfg);
            return 0;
        }

        const RunResult res = runScenario(cfg);
        writeOutputs(cfg, res);
        std::cout << formatReport(res.report);
        return res.report.status == "stable" ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tdbem: %s\n", e.what());
        return 1;
    }
}
