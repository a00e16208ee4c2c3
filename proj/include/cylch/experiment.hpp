#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cylch/checkpoint.hpp"
#include "cylch/config.hpp"
#include "cylch/diagnostics.hpp"
#include "cylch/dynamics.hpp"

namespace cylch {

inline constexpr const char* kArtifactVersion = "cylch 0.1.0";

// ---------------------------------------------------------------------------
// output writers
// ---------------------------------------------------------------------------

/// 17 significant digits: lossless decimal round trip for 64-bit floats.
inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr const char* kTimeseriesHeader =
    "t,E_phi,E_plus,grad_mu_L2phi,u_H1b,F_L1b,f_u_L2b,f_Linf,min_separation,mass,"
    "boundary_flux,dtu_Hm1phi,energy_residual";

inline void write_timeseries_csv(const SeriesTable& s, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("write_timeseries_csv: cannot open " + path);
    out << kTimeseriesHeader << "\n";
    for (std::size_t m = 0; m < s.rows(); ++m) {
        out << format17(s.t[m]) << ',' << format17(s.E_phi[m]) << ',' << format17(s.E_plus[m])
            << ',' << format17(s.grad_mu_L2phi[m]) << ',' << format17(s.u_H1b[m]) << ','
            << format17(s.F_L1b[m]) << ',' << format17(s.f_u_L2b[m]) << ','
            << format17(s.f_Linf[m]) << ',' << format17(s.min_separation[m]) << ','
            << format17(s.mass[m]) << ',' << format17(s.boundary_flux[m]) << ','
            << format17(s.dtu_Hm1phi[m]) << ',' << format17(s.energy_residual[m]) << "\n";
    }
    if (!out) throw IoError("write_timeseries_csv: write failed for " + path);
}

/// Parse a timeseries CSV back into rows of doubles (header validated).
inline std::vector<std::vector<double>> read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_timeseries_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTimeseriesHeader)
        throw IoError("read_timeseries_csv: unexpected header in " + path);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            row.push_back(std::stod(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json check_entry_json(const CheckEntry& e) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["pass"] = e.pass;
    j["degenerate"] = e.degenerate;
    j["measured"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.measured) {
        if (std::isfinite(v))
            j["measured"][k] = v;
        else
            j["measured"][k] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
    j["tolerance_used"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.tolerance_used) j["tolerance_used"][k] = v;
    j["notes"] = e.notes;
    return j;
}

inline nlohmann::ordered_json report_json(const DiagnosticsReport& rep,
                                          const std::string& scenario) {
    nlohmann::ordered_json j;
    j["artifact"] = kArtifactVersion;
    j["scenario"] = scenario;
    j["all_pass"] = rep.all_pass();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& e : rep.entries) j["checks"].push_back(check_entry_json(e));
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

inline void write_manifest(const ExperimentConfig& cfg, const std::string& out_dir) {
    static const std::vector<std::string> all_keys = {
        "grid.L",                     "grid.nx",
        "grid.ny",                    "grid.nz",
        "grid.mode",                  "potential.family",
        "potential.coefficients",     "potential.K",
        "potential.gamma",            "solver.dt",
        "solver.scheme",              "solver.newton_tol",
        "solver.newton_max_iters",    "solver.admissibility_margin",
        "solver.record_every",        "solver.snapshot_every",
        "weights.eps",                "weights.s",
        "weights.uniform",            "weights.eps_sweep",
        "scenario.name",              "scenario.initial",
        "scenario.amplitude",         "scenario.seed",
        "scenario.T",                 "scenario.forcing",
        "scenario.forcing_amplitude", "scenario.checks",
        "scenario.amplitude_sweep",   "scenario.probe_delta",
        "scenario.absorbing_radius"};
    nlohmann::ordered_json j;
    j["artifact"] = kArtifactVersion;
    j["seed"] = cfg.seed;
    j["config"] = render_config(cfg);
    j["defaulted_keys"] = nlohmann::ordered_json::array();
    for (const auto& k : all_keys)
        if (!cfg.explicit_keys.count(k)) j["defaulted_keys"].push_back(k);
    write_text(out_dir + "/manifest.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// per-scenario checks
// ---------------------------------------------------------------------------

namespace detail {

inline CheckEntry mass_balance_entry(const TrajectoryRecord& rec) {
    CheckEntry e;
    e.name = "mass_flux_balance";
    const MassBalance mb = mass_balance_check(rec);
    double scale = 1.0;
    for (double m : rec.series.mass) scale = std::max(scale, std::abs(m));
    // the identity telescopes up to the accepted step residual r:
    // |dmass - dt*flux| = |sum r|*vol <= N*vol*||r||_inf, so the bound
    // combines the 1e-12 contract with the solver's own residual floor
    const double residual_term = static_cast<double>(rec.grid.interior_count()) *
                                 rec.grid.cell_volume() * rec.max_newton_residual;
    const double tol =
        std::max((rec.scheme == Scheme::ConvexSplitting ? 1e-12 : 1e-8) * scale, residual_term);
    e.measured["max_violation"] = mb.max_violation;
    e.measured["pairs_checked"] = static_cast<double>(mb.pairs_checked);
    e.measured["max_newton_residual"] = rec.max_newton_residual;
    e.tolerance_used["max_violation"] = tol;
    e.tolerance_used["residual_term"] = residual_term;
    e.pass = mb.pairs_checked > 0 && mb.max_violation <= tol;
    if (mb.pairs_checked == 0) e.notes = "no adjacent records one step apart";
    return e;
}

inline CheckEntry f_half_entry(const TrajectoryRecord& rec) {
    CheckEntry e;
    e.name = "f_half_identity";
    const auto r = f_half_identity_check(rec.snapshots.back(), rec.potential, rec.weight);
    e.measured["lhs"] = r.lhs;
    e.measured["rhs"] = r.rhs;
    e.measured["gap"] = r.gap;
    const double tol = 0.1 * 0.5 * (std::abs(r.lhs) + std::abs(r.rhs)) + 1e-12;
    e.tolerance_used["gap"] = tol;
    e.pass = r.gap <= tol;
    return e;
}

inline CheckEntry absorbing_entry(const TrajectoryRecord& rec, double radius) {
    CheckEntry e;
    e.name = "absorbing_entry";
    const auto times = absorbing_entry_time({rec}, radius);
    e.measured["entry_time"] = times.front();
    e.tolerance_used["radius"] = radius;
    e.pass = true; // entry times are reported, not gated
    if (std::isinf(times.front())) e.notes = "never entered the ball on this horizon";
    return e;
}

inline CheckEntry energy_identity_entry(const ExperimentConfig& cfg, const PotentialSpec& spec,
                                        const ScalarField& g, const Weight& weight,
                                        const WindowSet& windows, const ScalarField& u0,
                                        const TrajectoryRecord& base) {
    CheckEntry e;
    e.name = "energy_identity_convergence";
    e.tolerance_used["halving_factor_min"] = 1.5;
    e.tolerance_used["halving_factor_max"] = 2.5;
    std::vector<double> integrated{energy_identity_residual(base).integrated_abs};
    for (int lev = 1; lev <= 2; ++lev) {
        SolverConfig fine = cfg.solver;
        fine.dt = cfg.solver.dt / (1 << lev);
        fine.record_every = 1;
        fine.snapshot_every = 1;
        TrajectoryRecord rec = integrate(u0, cfg.T, spec, g, fine, windows, weight);
        integrated.push_back(energy_identity_residual(rec).integrated_abs);
    }
    e.measured["integrated_abs_dt"] = integrated[0];
    e.measured["integrated_abs_dt_half"] = integrated[1];
    e.measured["integrated_abs_dt_quarter"] = integrated[2];
    const double f1 = integrated[0] / integrated[1];
    const double f2 = integrated[1] / integrated[2];
    e.measured["halving_factor_1"] = f1;
    e.measured["halving_factor_2"] = f2;
    e.pass = f1 >= 1.5 && f1 <= 2.5 && f2 >= 1.5 && f2 <= 2.5;
    return e;
}

} // namespace detail

// ---------------------------------------------------------------------------
// scenario runner
// ---------------------------------------------------------------------------

struct RunOutcome {
    int status = 1;
    DiagnosticsReport report;
    std::string error;
    std::shared_ptr<TrajectoryRecord> record;
};

/// Build the scenario, integrate, run the requested diagnostics and write
/// timeseries.csv, report.json, final.ckpt and manifest.json into out_dir.
/// Status 0 only if the run completed and every requested check passed.
inline RunOutcome run_scenario(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunOutcome out;
    std::filesystem::create_directories(out_dir);
    cfg.validate();
    write_manifest(cfg, out_dir);
    try {
        const GridSpec grid = cfg.make_grid();
        const PotentialSpec spec = cfg.make_potential();
        const Weight weight = cfg.make_weight();
        const ScalarField g = cfg.make_forcing(grid);
        const ScalarField u0 = cfg.make_initial(grid);
        if (spec.singular() && u0.max_abs() > 1.0 - cfg.solver.admissibility_margin)
            throw DomainViolation("initial data violates the admissibility margin");
        const WindowSet windows = WindowSet::make(grid);

        out.record = std::make_shared<TrajectoryRecord>(
            integrate(u0, cfg.T, spec, g, cfg.solver, windows, weight));
        const TrajectoryRecord& rec = *out.record;

        for (const auto& check : cfg.checks) {
            if (check == "mass_balance") {
                out.report.entries.push_back(detail::mass_balance_entry(rec));
            } else if (check == "f_half") {
                out.report.entries.push_back(detail::f_half_entry(rec));
            } else if (check == "separation") {
                out.report.entries.push_back(separation_probe(rec, spec));
            } else if (check == "smoothing") {
                out.report.entries.push_back(smoothing_probe(u0, spec, g, cfg.solver, weight));
            } else if (check == "uniqueness") {
                const ScalarField dir = make_initial_data(InitialKind::Eigenmode, 1.0, 0, grid);
                out.report.entries.push_back(uniqueness_probe(
                    u0, cfg.probe_delta, dir, std::min(cfg.T, 1.0), spec, g, cfg.solver, weight));
            } else if (check == "energy_identity") {
                out.report.entries.push_back(detail::energy_identity_entry(
                    cfg, spec, g, weight, windows, u0, rec));
            } else if (check == "absorbing") {
                out.report.entries.push_back(detail::absorbing_entry(rec, cfg.absorbing_radius));
            }
        }

        write_timeseries_csv(rec.series, out_dir + "/timeseries.csv");
        save_checkpoint({rec.series.t.back(), rec.snapshots.back()}, out_dir + "/final.ckpt");
        write_text(out_dir + "/report.json", report_json(out.report, cfg.name).dump(2) + "\n");
        out.status = out.report.all_pass() ? 0 : 2;
    } catch (const Error& e) {
        out.error = e.what();
        nlohmann::ordered_json j;
        j["artifact"] = kArtifactVersion;
        j["scenario"] = cfg.name;
        j["all_pass"] = false;
        j["error"] = out.error;
        j["checks"] = nlohmann::ordered_json::array();
        write_text(out_dir + "/report.json", j.dump(2) + "\n");
        out.status = 1;
    }
    return out;
}

/// Continue a checkpointed run to the configured horizon. Writes the same
/// artifact set as run_scenario; configured checks are not re-run.
inline RunOutcome resume_scenario(const ExperimentConfig& cfg, const std::string& ckpt_path,
                                  const std::string& out_dir) {
    RunOutcome out;
    std::filesystem::create_directories(out_dir);
    cfg.validate();
    write_manifest(cfg, out_dir);
    try {
        const GridSpec grid = cfg.make_grid();
        const PotentialSpec spec = cfg.make_potential();
        const Weight weight = cfg.make_weight();
        const ScalarField g = cfg.make_forcing(grid);
        const State s0 = load_checkpoint(ckpt_path, grid);
        const double remaining = cfg.T - s0.t;
        if (remaining < cfg.solver.dt)
            throw ValidationError("resume: checkpoint is already at or past the horizon");
        const WindowSet windows = WindowSet::make(grid);
        out.record = std::make_shared<TrajectoryRecord>(
            integrate(s0.u, remaining, spec, g, cfg.solver, windows, weight, s0.t));
        write_timeseries_csv(out.record->series, out_dir + "/timeseries.csv");
        save_checkpoint({out.record->series.t.back(), out.record->snapshots.back()},
                        out_dir + "/final.ckpt");
        write_text(out_dir + "/report.json",
                   report_json(out.report, cfg.name + " (resumed)").dump(2) + "\n");
        out.status = 0;
    } catch (const Error& e) {
        out.error = e.what();
        out.status = 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// sweep runner
// ---------------------------------------------------------------------------

struct SweepOutcome {
    int status = 1;
    bool partial = false;
    std::vector<RunOutcome> runs;
    DiagnosticsReport cross_checks;
};

/// Run the cross product of eps_sweep x amplitude_sweep, each deterministic
/// and written to its own subdirectory, then aggregate a comparison table.
/// Worker scheduling never reorders results; parallelism only changes timing.
inline SweepOutcome run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                              int parallelism = 1) {
    if (parallelism < 1) throw ValidationError("run_sweep: parallelism must be >= 1");
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    const std::vector<double> eps_list = cfg.eps_sweep.empty()
                                             ? std::vector<double>{cfg.eps}
                                             : cfg.eps_sweep;
    const std::vector<double> amp_list = cfg.amplitude_sweep.empty()
                                             ? std::vector<double>{cfg.amplitude}
                                             : cfg.amplitude_sweep;
    struct Combo {
        double eps;
        double amplitude;
    };
    std::vector<Combo> combos;
    for (double e : eps_list)
        for (double a : amp_list) combos.push_back({e, a});

    SweepOutcome out;
    out.runs.resize(combos.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t m = next.fetch_add(1);
            if (m >= combos.size()) break;
            ExperimentConfig sub = cfg;
            sub.eps = combos[m].eps;
            sub.amplitude = combos[m].amplitude;
            sub.eps_sweep.clear();
            sub.amplitude_sweep.clear();
            // cross-run checks are computed at aggregate time
            std::vector<std::string> own_checks;
            for (const auto& c : sub.checks)
                if (c != "dissipativity") own_checks.push_back(c);
            sub.checks = own_checks;
            char dir[32];
            std::snprintf(dir, sizeof(dir), "run_%03zu", m);
            try {
                out.runs[m] = run_scenario(sub, out_dir + "/" + dir);
            } catch (const Error& e) {
                out.runs[m].status = 1;
                out.runs[m].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(parallelism, combos.size());
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (const auto& r : out.runs)
        if (!r.error.empty()) out.partial = true;

    // cross-run dissipativity per eps group (amplitude-varied records)
    std::map<std::string, double> alpha_by_eps;
    if (cfg.has_check("dissipativity") && amp_list.size() >= 2) {
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            std::vector<TrajectoryRecord> group;
            bool complete = true;
            for (std::size_t a = 0; a < amp_list.size(); ++a) {
                const auto& r = out.runs[e * amp_list.size() + a];
                if (!r.record || !r.error.empty()) complete = false;
                else group.push_back(*r.record);
            }
            if (!complete) {
                out.partial = true;
                continue;
            }
            const GridSpec grid = cfg.make_grid();
            ScalarField g = cfg.make_forcing(grid);
            CheckEntry entry = dissipativity_report(group, g);
            entry.notes += (entry.notes.empty() ? "" : "; ") +
                           std::string("eps = ") + format17(eps_list[e]);
            if (entry.measured.count("alpha_hat"))
                alpha_by_eps[format17(eps_list[e])] = entry.measured.at("alpha_hat");
            out.cross_checks.entries.push_back(std::move(entry));
        }
    }

    // aggregate comparison table: plateaus and fitted constants per run
    std::ofstream csv(out_dir + "/aggregate.csv", std::ios::trunc);
    csv << "run,eps,amplitude,seed,status,plateau,alpha_hat,khat,delta_hat,smoothing_slope\n";
    for (std::size_t m = 0; m < out.runs.size(); ++m) {
        const auto& r = out.runs[m];
        double plateau = std::numeric_limits<double>::quiet_NaN();
        if (r.record && !r.record->series.t.empty()) {
            const auto n = detail::phi_b_series(*r.record);
            const auto& t = r.record->series.t;
            const double t_tail = t.back() - 0.2 * (t.back() - t.front());
            plateau = 0.0;
            for (std::size_t q = 0; q < n.size(); ++q)
                if (t[q] >= t_tail) plateau = std::max(plateau, n[q]);
        }
        auto measured_of = [&](const char* check, const char* key) {
            for (const auto& e : r.report.entries)
                if (e.name == check && e.measured.count(key)) return e.measured.at(key);
            return std::numeric_limits<double>::quiet_NaN();
        };
        const std::string eps_key = format17(combos[m].eps);
        const double alpha = alpha_by_eps.count(eps_key)
                                 ? alpha_by_eps.at(eps_key)
                                 : std::numeric_limits<double>::quiet_NaN();
        csv << m << ',' << format17(combos[m].eps) << ',' << format17(combos[m].amplitude) << ','
            << cfg.seed << ',' << r.status << ',' << format17(plateau) << ',' << format17(alpha)
            << ',' << format17(measured_of("lipschitz_hminus1", "khat")) << ','
            << format17(measured_of("separation", "delta_hat")) << ','
            << format17(measured_of("smoothing_rate", "slope")) << "\n";
    }
    csv.close();

    nlohmann::ordered_json j;
    j["artifact"] = kArtifactVersion;
    j["partial"] = out.partial;
    j["runs"] = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < out.runs.size(); ++m) {
        nlohmann::ordered_json rj;
        rj["index"] = m;
        rj["eps"] = combos[m].eps;
        rj["amplitude"] = combos[m].amplitude;
        rj["status"] = out.runs[m].status;
        if (!out.runs[m].error.empty()) rj["error"] = out.runs[m].error;
        j["runs"].push_back(rj);
    }
    j["cross_checks"] = nlohmann::ordered_json::array();
    for (const auto& e : out.cross_checks.entries) j["cross_checks"].push_back(check_entry_json(e));
    write_text(out_dir + "/aggregate.json", j.dump(2) + "\n");

    bool ok = !out.partial && out.cross_checks.all_pass();
    for (const auto& r : out.runs) ok = ok && r.status == 0;
    out.status = ok ? 0 : 1;
    return out;
}

// ---------------------------------------------------------------------------
// shipped presets: one per headline verification scenario
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> p = {
        {"cubic-dissipativity", R"(
[grid]
L = 16
nx = 256
ny = 16

[potential]
family = polynomial
coefficients = 0,0,0,1
K = 1

[solver]
dt = 0.02
record_every = 1
snapshot_every = 10

[weights]
eps = 0.1
s = 0

[scenario]
name = cubic-dissipativity
initial = spinodal_noise
amplitude = 0.1
amplitude_sweep = 0.1,3.0
seed = 7
T = 50
forcing = sin_cross
forcing_amplitude = 0.5
checks = dissipativity,absorbing
)"},
        {"powerlaw-uniqueness", R"(
[grid]
L = 16
nx = 256
ny = 16

[potential]
family = powerlaw
gamma = 1.6666666666666667
K = 10

[solver]
dt = 0.002
record_every = 5
snapshot_every = 1

[weights]
eps = 0.1
s = 0

[scenario]
name = powerlaw-uniqueness
initial = spinodal_noise
amplitude = 0.3
seed = 21
T = 1
forcing = none
probe_delta = 0.001
checks = uniqueness
)"},
        {"log-separation", R"(
[grid]
L = 16
nx = 256
ny = 16

[potential]
family = logarithmic
K = 1

[solver]
dt = 0.002
record_every = 1
snapshot_every = 250

[weights]
eps = 0.1
s = 0

[scenario]
name = log-separation
initial = spinodal_noise
amplitude = 0.5
seed = 13
T = 20
forcing = sin_cross
forcing_amplitude = 11
checks = separation,mass_balance
)"},
        {"rough-smoothing", R"(
[grid]
L = 16
nx = 256
ny = 16

[potential]
family = polynomial
coefficients = 0,0,0,1
K = 1

[solver]
dt = 0.00002
record_every = 1
snapshot_every = 1000000

[weights]
eps = 0.1
s = 0

[scenario]
name = rough-smoothing
initial = rough_hminus1
amplitude = 0.3
seed = 31
T = 0.0105
forcing = none
checks = smoothing
)"},
        {"energy-identity", R"(
[grid]
L = 16
nx = 256
ny = 16

[potential]
family = logarithmic
K = 1

[solver]
dt = 0.004
record_every = 1
snapshot_every = 1

[weights]
eps = 0.1
s = 0

[scenario]
name = energy-identity
initial = eigenmode
amplitude = 0.5
seed = 0
T = 1
forcing = gauss_axial
forcing_amplitude = 0.2
checks = energy_identity,mass_balance,f_half
)"}};
    return p;
}

/// Resolve --config arguments: a filesystem path wins; otherwise the name of
/// a shipped preset.
inline std::string load_config_text(const std::string& path_or_preset) {
    if (std::filesystem::exists(path_or_preset)) {
        std::ifstream in(path_or_preset);
        if (!in) throw IoError("cannot open config " + path_or_preset);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    const auto& p = presets();
    const auto it = p.find(path_or_preset);
    if (it == p.end())
        throw IoError("config '" + path_or_preset + "' is neither a file nor a preset name");
    return it->second;
}

} // namespace cylch
