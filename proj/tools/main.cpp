// Command-line front end: run scenarios and parameter sweeps, resume from
// checkpoints, and verify the shipped preset suite.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cylch/experiment.hpp"

namespace {

using namespace cylch;

void print_report(const std::string& scenario, const RunOutcome& out) {
    if (!out.error.empty()) {
        std::printf("[ERROR] %s: %s\n", scenario.c_str(), out.error.c_str());
        return;
    }
    for (const auto& e : out.report.entries)
        std::printf("[%s] %s: %s%s%s\n", e.pass ? "PASS" : "FAIL", scenario.c_str(),
                    e.name.c_str(), e.degenerate ? " (degenerate)" : "",
                    e.notes.empty() ? "" : (" -- " + e.notes).c_str());
    if (out.report.entries.empty()) std::printf("[DONE] %s\n", scenario.c_str());
}

ExperimentConfig load(const std::string& config_arg, long long seed_override) {
    ExperimentConfig cfg = parse_config(load_config_text(config_arg));
    if (seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
        cfg.explicit_keys.insert("scenario.seed");
    }
    return cfg;
}

int dispatch_run(const ExperimentConfig& cfg, const std::string& out_dir, int parallel) {
    if (!cfg.eps_sweep.empty() || !cfg.amplitude_sweep.empty()) {
        SweepOutcome sw = run_sweep(cfg, out_dir, parallel);
        for (std::size_t m = 0; m < sw.runs.size(); ++m)
            print_report(cfg.name + "/run_" + std::to_string(m), sw.runs[m]);
        for (const auto& e : sw.cross_checks.entries)
            std::printf("[%s] %s: %s%s\n", e.pass ? "PASS" : "FAIL", cfg.name.c_str(),
                        e.name.c_str(), e.notes.empty() ? "" : (" -- " + e.notes).c_str());
        if (sw.partial) std::printf("[WARN] %s: sweep completed partially\n", cfg.name.c_str());
        return sw.status;
    }
    RunOutcome out = run_scenario(cfg, out_dir);
    print_report(cfg.name, out);
    return out.status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cahn-Hilliard simulation and verification suite for truncated "
                 "strip/cylinder domains"};
    app.require_subcommand(1);

    std::string config_arg, out_dir = "out", resume_path;
    long long seed_override = -1;
    int parallel = 1;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", config_arg,
                                    "config file path or preset name (" +
                                        [] {
                                            std::string names;
                                            for (const auto& [k, v] : cylch::presets())
                                                names += (names.empty() ? "" : ", ") + k;
                                            return names;
                                        }() +
                                        ")");
        if (need_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "override the scenario seed");
        sub->add_option("--parallel", parallel, "sweep worker threads")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run a scenario (or its sweep) and its checks");
    add_common(run, true);
    auto* probe = app.add_subcommand("probe", "run only the configured diagnostic probes");
    add_common(probe, true);
    auto* verify =
        app.add_subcommand("verify", "run a config (default: every preset) and gate on the checks");
    add_common(verify, false);
    auto* sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
    add_common(sweep, true);
    auto* resume = app.add_subcommand("resume", "continue a checkpointed run to the horizon");
    add_common(resume, true);
    resume->add_option("--resume", resume_path, "checkpoint to continue from")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || sweep->parsed()) {
            return dispatch_run(load(config_arg, seed_override), out_dir, parallel);
        }
        if (probe->parsed()) {
            ExperimentConfig cfg = load(config_arg, seed_override);
            if (cfg.checks.empty()) {
                std::fprintf(stderr, "probe: the configured scenario requests no checks\n");
                return 64;
            }
            return dispatch_run(cfg, out_dir, parallel);
        }
        if (resume->parsed()) {
            ExperimentConfig cfg = load(config_arg, seed_override);
            RunOutcome out = resume_scenario(cfg, resume_path, out_dir);
            print_report(cfg.name + " (resumed)", out);
            if (!out.error.empty()) return 1;
            return out.status;
        }
        if (verify->parsed()) {
            if (!config_arg.empty())
                return dispatch_run(load(config_arg, seed_override), out_dir, parallel);
            int status = 0;
            for (const auto& [name, text] : cylch::presets()) {
                ExperimentConfig cfg = parse_config(text);
                if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
                const int s = dispatch_run(cfg, out_dir + "/" + name, parallel);
                if (s != 0) status = 1;
            }
            std::printf("%s\n", status == 0 ? "verify: all preset checks passed"
                                            : "verify: some preset checks failed");
            return status;
        }
    } catch (const cylch::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
