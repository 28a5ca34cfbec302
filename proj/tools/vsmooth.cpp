#include <cstdio>
#include <future>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsmooth/experiment.hpp"
#include "vsmooth/verify.hpp"

namespace {

int solve(const std::vector<std::string>& configs, const std::optional<std::string>& out_dir) {
    std::vector<vsmooth::ExperimentConfig> parsed;
    std::set<std::string> outputs;
    for (const auto& path : configs) {
        try {
            parsed.push_back(vsmooth::load_config(path));
        } catch (const vsmooth::ConfigError& e) {
            std::cerr << path << ": invalid config: " << e.what() << "\n";
            return 2;
        }
        // concurrent runs must not share output files
        for (auto file : {parsed.back().trace_path, parsed.back().summary_path}) {
            if (out_dir) file = (std::filesystem::path(*out_dir) / std::filesystem::path(file).filename()).string();
            if (!outputs.insert(std::filesystem::absolute(file).lexically_normal().string()).second) {
                std::cerr << path << ": output path " << file << " is shared with another config\n";
                return 2;
            }
        }
    }

    std::vector<std::future<vsmooth::ExperimentOutcome>> runs;
    for (const auto& cfg : parsed)
        runs.push_back(std::async(parsed.size() > 1 ? std::launch::async : std::launch::deferred,
                                  [&cfg, &out_dir] { return vsmooth::run_experiment(cfg, out_dir); }));
    int worst = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        vsmooth::ExperimentOutcome r;
        try {
            r = runs[i].get();
        } catch (const std::exception& e) {
            std::cerr << configs[i] << ": " << e.what() << "\n";
            worst = std::max(worst, 1);
            continue;
        }
        const int code = static_cast<int>(r.code);
        if (code == 0) {
            std::cout << configs[i] << ": " << r.summary.dump() << "\n";
        } else {
            std::cerr << configs[i] << ": " << (code == 2 ? "invalid config: " : "solver failure: ") << r.message << "\n";
        }
        worst = std::max(worst, code);
    }
    return worst;
}

int verify(const std::string& suite) {
    const auto& names = vsmooth::verify::suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) {
        std::cerr << "unknown suite '" << suite << "'; expected one of prox, projections, bounds, penalty, all\n";
        return 2;
    }
    const auto results = vsmooth::verify::run_suite(suite);
    for (const auto& r : results) std::cout << vsmooth::verify::format_result(r) << "\n";
    return vsmooth::verify::all_passed(results) ? 0 : 1;
}

int gen(const std::string& kind, long long n, long long big_n, std::uint64_t seed, const std::string& out) {
    if (n < 1 || big_n < 1) {
        std::cerr << "--n and --N must be positive\n";
        return 2;
    }
    try {
        const auto inst = vsmooth::generate_instance(kind, n, big_n, seed);
        vsmooth::write_text(out, inst.dump(2) + "\n");
    } catch (const vsmooth::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projected variable smoothing experiments"};
    app.require_subcommand(1);

    auto* solve_cmd = app.add_subcommand("solve", "run experiment configs (several run concurrently)");
    std::vector<std::string> configs;
    std::string out_dir;
    solve_cmd->add_option("--config", configs, "config JSON path; repeat for a batch")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--out-dir", out_dir, "directory for trace and summary files");

    auto* verify_cmd = app.add_subcommand("verify", "run an oracle cross-check suite");
    std::string suite;
    verify_cmd->add_option("suite", suite, "prox | projections | bounds | penalty | all")->required();

    auto* gen_cmd = app.add_subcommand("gen", "write a seeded instance");
    std::string kind;
    long long n = 0;
    long long big_n = 0;
    std::uint64_t seed = 0;
    std::string out;
    gen_cmd->add_option("--kind", kind, "max-dispersion | dro | lasso")->required();
    gen_cmd->add_option("--n", n, "dimension")->required();
    gen_cmd->add_option("--N", big_n, "anchors, scenarios or samples")->required();
    gen_cmd->add_option("--seed", seed, "generator seed")->required();
    gen_cmd->add_option("--out", out, "output JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (solve_cmd->parsed()) return solve(configs, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));
    if (verify_cmd->parsed()) return verify(suite);
    return gen(kind, n, big_n, seed, out);
}
