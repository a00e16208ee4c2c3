#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cylch/checkpoint.hpp"
#include "cylch/dynamics.hpp"
#include "cylch/field.hpp"
#include "cylch/potentials.hpp"
#include "cylch/weights.hpp"

namespace cylch {

enum class ForcingKind { None, SinCross, GaussAxial, File };

inline const std::set<std::string>& known_checks() {
    static const std::set<std::string> c = {"dissipativity", "uniqueness", "smoothing",
                                            "separation",    "energy_identity", "mass_balance",
                                            "f_half",        "absorbing"};
    return c;
}

/// Fully resolved experiment description: grid, potential, solver, weights
/// plus the scenario (initial data, horizon, forcing, requested checks).
struct ExperimentConfig {
    // [grid]
    double L = 16.0;
    int nx = 256;
    int ny = 16;
    int nz = 16;
    DomainMode mode = DomainMode::Strip;

    // [potential]
    PotentialFamily family = PotentialFamily::Polynomial;
    std::vector<double> coefficients = {0.0, 0.0, 0.0, 1.0}; // f0 = u^3
    double K = 1.0;
    double gamma = 5.0 / 3.0;

    // [solver]
    SolverConfig solver;

    // [weights]
    double eps = 0.1;
    double s = 0.0;
    bool uniform_weight = false;
    std::vector<double> eps_sweep;

    // [scenario]
    std::string name = "run";
    InitialKind initial = InitialKind::SpinodalNoise;
    double amplitude = 0.5;
    std::uint64_t seed = 1;
    double T = 1.0;
    ForcingKind forcing = ForcingKind::None;
    double forcing_amplitude = 0.0;
    std::string forcing_file;
    std::vector<std::string> checks;
    std::vector<double> amplitude_sweep;
    double probe_delta = 1e-3;
    double absorbing_radius = 10.0;

    std::set<std::string> explicit_keys; // "section.key" entries present in the text

    GridSpec make_grid() const { return GridSpec(L, nx, ny, mode, nz); }

    PotentialSpec make_potential() const {
        switch (family) {
        case PotentialFamily::Polynomial: return PotentialSpec::polynomial(coefficients, K);
        case PotentialFamily::PowerLawSingular: return PotentialSpec::power_law(gamma, K);
        case PotentialFamily::Logarithmic: return PotentialSpec::logarithmic(K);
        }
        return PotentialSpec::polynomial(coefficients, K);
    }

    Weight make_weight() const {
        if (uniform_weight) return std::nullopt;
        return WeightSpec(eps, s);
    }

    ScalarField make_forcing(const GridSpec& g) const {
        const double pi = std::acos(-1.0);
        const double A = forcing_amplitude;
        switch (forcing) {
        case ForcingKind::None: return ScalarField(g);
        case ForcingKind::SinCross:
            return sample_field(g, [&](double, double y, double z) {
                double v = A * std::sin(pi * y);
                if (g.dims() == 3) v *= std::sin(pi * z);
                return v;
            });
        case ForcingKind::GaussAxial:
            return sample_field(g, [&](double x, double y, double z) {
                double v = A * std::exp(-x * x / 16.0) * std::sin(pi * y);
                if (g.dims() == 3) v *= std::sin(pi * z);
                return v;
            });
        case ForcingKind::File: return load_checkpoint(forcing_file, g).u;
        }
        return ScalarField(g);
    }

    ScalarField make_initial(const GridSpec& g) const {
        return make_initial_data(initial, amplitude, seed, g);
    }

    bool has_check(const std::string& c) const {
        for (const auto& k : checks)
            if (k == c) return true;
        return false;
    }

    /// Cross-field constraints, applied before any run.
    void validate() const {
        const GridSpec grid = make_grid(); // construction validates
        const PotentialSpec spec = make_potential();
        solver.validate();
        if (!uniform_weight) {
            WeightSpec check_eps(eps, s);
            for (double e : eps_sweep) WeightSpec check_sweep(e, s);
        }
        if (!(T >= solver.dt))
            throw ValidationError("scenario: T must be at least one time step");
        for (const auto& c : checks)
            if (!known_checks().count(c))
                throw ValidationError("scenario: unknown check '" + c + "'");
        if (spec.singular()) {
            double max_amp = std::abs(amplitude);
            for (double a : amplitude_sweep) max_amp = std::max(max_amp, std::abs(a));
            if (initial != InitialKind::RoughHminus1 &&
                max_amp > 1.0 - solver.admissibility_margin)
                throw ValidationError(
                    "scenario: amplitude exceeds the admissible interval of a singular potential");
        }
        if (has_check("uniqueness") && family == PotentialFamily::PowerLawSingular &&
            gamma < kUniquenessGammaThreshold - 1e-12)
            throw ValidationError(
                "scenario: the uniqueness probe requires gamma >= 5/3 for power-law potentials");
        if (has_check("separation") && !spec.singular())
            throw ValidationError("scenario: the separation check requires a singular potential");
        if (has_check("smoothing") && solver.dt > 2.5e-5)
            throw ValidationError("scenario: the smoothing check requires dt <= 2.5e-5");
        if (has_check("mass_balance") && solver.record_every != 1)
            throw ValidationError(
                "scenario: the mass_balance check is a per-step identity and needs record_every = 1");
        if (has_check("energy_identity") &&
            (solver.record_every != 1 || solver.snapshot_every != 1))
            throw ValidationError(
                "scenario: the energy_identity check needs record_every = 1 and snapshot_every = 1");
        if (has_check("dissipativity")) {
            if (amplitude_sweep.size() < 2)
                throw ValidationError(
                    "scenario: the dissipativity check needs an amplitude_sweep of >= 2 values");
            if (T < 10.0)
                throw ValidationError("scenario: the dissipativity check needs a horizon T >= 10");
        }
        if (forcing == ForcingKind::File) {
            (void)grid;
            if (!std::filesystem::exists(forcing_file))
                throw ValidationError("scenario: forcing file does not exist: " + forcing_file);
        }
        if (!(probe_delta > 0.0)) throw ValidationError("scenario: probe_delta must be positive");
        if (!(absorbing_radius > 0.0))
            throw ValidationError("scenario: absorbing_radius must be positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& v, int line) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected a real number, got '" + v + "'", line);
    }
    if (pos != v.size()) throw ParseError("trailing characters after number '" + v + "'", line);
    return x;
}

inline long long parse_int(const std::string& v, int line) {
    std::size_t pos = 0;
    long long x;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected an integer, got '" + v + "'", line);
    }
    if (pos != v.size()) throw ParseError("trailing characters after integer '" + v + "'", line);
    return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<double> parse_real_list(const std::string& v, int line) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_real(item, line));
    return out;
}

} // namespace detail

/// Parse the sectioned key = value format. Unknown sections and keys are
/// rejected with the offending line number; cross-field constraints are
/// validated before returning.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", line);
            section = s.substr(1, s.size() - 2);
            if (section != "grid" && section != "potential" && section != "solver" &&
                section != "weights" && section != "scenario")
                throw ParseError("unknown section [" + section + "]", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line);
        if (val.find('=') != std::string::npos)
            throw ParseError("unexpected '=' in value", line);
        if (section.empty()) throw ParseError("key before any [section]", line);
        cfg.explicit_keys.insert(section + "." + key);

        auto real = [&] { return detail::parse_real(val, line); };
        auto integer = [&] { return detail::parse_int(val, line); };

        if (section == "grid") {
            if (key == "L") cfg.L = real();
            else if (key == "nx") cfg.nx = static_cast<int>(integer());
            else if (key == "ny") cfg.ny = static_cast<int>(integer());
            else if (key == "nz") cfg.nz = static_cast<int>(integer());
            else if (key == "mode") {
                if (val == "strip") cfg.mode = DomainMode::Strip;
                else if (val == "cylinder") cfg.mode = DomainMode::Cylinder;
                else throw ParseError("mode must be strip or cylinder", line);
            } else throw ParseError("unknown key '" + key + "' in [grid]", line);
        } else if (section == "potential") {
            if (key == "family") {
                if (val == "polynomial") cfg.family = PotentialFamily::Polynomial;
                else if (val == "powerlaw") cfg.family = PotentialFamily::PowerLawSingular;
                else if (val == "logarithmic") cfg.family = PotentialFamily::Logarithmic;
                else throw ParseError("family must be polynomial, powerlaw or logarithmic", line);
            } else if (key == "coefficients") cfg.coefficients = detail::parse_real_list(val, line);
            else if (key == "K") cfg.K = real();
            else if (key == "gamma") cfg.gamma = real();
            else throw ParseError("unknown key '" + key + "' in [potential]", line);
        } else if (section == "solver") {
            if (key == "dt") cfg.solver.dt = real();
            else if (key == "scheme") {
                if (val == "convex_splitting") cfg.solver.scheme = Scheme::ConvexSplitting;
                else if (val == "explicit_rk4") cfg.solver.scheme = Scheme::ExplicitRK4;
                else throw ParseError("scheme must be convex_splitting or explicit_rk4", line);
            } else if (key == "newton_tol") cfg.solver.newton_tol = real();
            else if (key == "newton_max_iters") cfg.solver.newton_max_iters = static_cast<int>(integer());
            else if (key == "admissibility_margin") cfg.solver.admissibility_margin = real();
            else if (key == "record_every") cfg.solver.record_every = static_cast<int>(integer());
            else if (key == "snapshot_every") cfg.solver.snapshot_every = static_cast<int>(integer());
            else throw ParseError("unknown key '" + key + "' in [solver]", line);
        } else if (section == "weights") {
            if (key == "eps") cfg.eps = real();
            else if (key == "s") cfg.s = real();
            else if (key == "uniform") {
                if (val == "true") cfg.uniform_weight = true;
                else if (val == "false") cfg.uniform_weight = false;
                else throw ParseError("uniform must be true or false", line);
            } else if (key == "eps_sweep") cfg.eps_sweep = detail::parse_real_list(val, line);
            else throw ParseError("unknown key '" + key + "' in [weights]", line);
        } else if (section == "scenario") {
            if (key == "name") cfg.name = val;
            else if (key == "initial") {
                if (val == "tanh_interface") cfg.initial = InitialKind::TanhInterface;
                else if (val == "spinodal_noise") cfg.initial = InitialKind::SpinodalNoise;
                else if (val == "rough_hminus1") cfg.initial = InitialKind::RoughHminus1;
                else if (val == "eigenmode") cfg.initial = InitialKind::Eigenmode;
                else throw ParseError("unknown initial data kind '" + val + "'", line);
            } else if (key == "amplitude") cfg.amplitude = real();
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
            else if (key == "T") cfg.T = real();
            else if (key == "forcing") {
                if (val == "none") cfg.forcing = ForcingKind::None;
                else if (val == "sin_cross") cfg.forcing = ForcingKind::SinCross;
                else if (val == "gauss_axial") cfg.forcing = ForcingKind::GaussAxial;
                else if (val.rfind("file:", 0) == 0) {
                    cfg.forcing = ForcingKind::File;
                    cfg.forcing_file = val.substr(5);
                } else throw ParseError("unknown forcing '" + val + "'", line);
            } else if (key == "forcing_amplitude") cfg.forcing_amplitude = real();
            else if (key == "checks") cfg.checks = detail::split_list(val);
            else if (key == "amplitude_sweep") cfg.amplitude_sweep = detail::parse_real_list(val, line);
            else if (key == "probe_delta") cfg.probe_delta = real();
            else if (key == "absorbing_radius") cfg.absorbing_radius = real();
            else throw ParseError("unknown key '" + key + "' in [scenario]", line);
        }
    }
    cfg.validate();
    return cfg;
}

/// Render the resolved config back to config text (every key explicit).
inline std::string render_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "[grid]\n";
    os << "L = " << c.L << "\n";
    os << "nx = " << c.nx << "\n";
    os << "ny = " << c.ny << "\n";
    os << "mode = " << (c.mode == DomainMode::Cylinder ? "cylinder" : "strip") << "\n";
    if (c.mode == DomainMode::Cylinder) os << "nz = " << c.nz << "\n";
    os << "\n[potential]\n";
    os << "family = " << family_name(c.family) << "\n";
    if (c.family == PotentialFamily::Polynomial) {
        os << "coefficients = ";
        for (std::size_t m = 0; m < c.coefficients.size(); ++m)
            os << (m ? "," : "") << c.coefficients[m];
        os << "\n";
    }
    if (c.family == PotentialFamily::PowerLawSingular) os << "gamma = " << c.gamma << "\n";
    os << "K = " << c.K << "\n";
    os << "\n[solver]\n";
    os << "dt = " << c.solver.dt << "\n";
    os << "scheme = "
       << (c.solver.scheme == Scheme::ConvexSplitting ? "convex_splitting" : "explicit_rk4")
       << "\n";
    os << "newton_tol = " << c.solver.newton_tol << "\n";
    os << "newton_max_iters = " << c.solver.newton_max_iters << "\n";
    os << "admissibility_margin = " << c.solver.admissibility_margin << "\n";
    os << "record_every = " << c.solver.record_every << "\n";
    os << "snapshot_every = " << c.solver.snapshot_every << "\n";
    os << "\n[weights]\n";
    os << "eps = " << c.eps << "\n";
    os << "s = " << c.s << "\n";
    os << "uniform = " << (c.uniform_weight ? "true" : "false") << "\n";
    if (!c.eps_sweep.empty()) {
        os << "eps_sweep = ";
        for (std::size_t m = 0; m < c.eps_sweep.size(); ++m)
            os << (m ? "," : "") << c.eps_sweep[m];
        os << "\n";
    }
    os << "\n[scenario]\n";
    os << "name = " << c.name << "\n";
    const char* init = "spinodal_noise";
    if (c.initial == InitialKind::TanhInterface) init = "tanh_interface";
    if (c.initial == InitialKind::RoughHminus1) init = "rough_hminus1";
    if (c.initial == InitialKind::Eigenmode) init = "eigenmode";
    os << "initial = " << init << "\n";
    os << "amplitude = " << c.amplitude << "\n";
    os << "seed = " << c.seed << "\n";
    os << "T = " << c.T << "\n";
    const char* forcing = "none";
    if (c.forcing == ForcingKind::SinCross) forcing = "sin_cross";
    if (c.forcing == ForcingKind::GaussAxial) forcing = "gauss_axial";
    if (c.forcing == ForcingKind::File) {
        os << "forcing = file:" << c.forcing_file << "\n";
    } else {
        os << "forcing = " << forcing << "\n";
    }
    os << "forcing_amplitude = " << c.forcing_amplitude << "\n";
    if (!c.checks.empty()) {
        os << "checks = ";
        for (std::size_t m = 0; m < c.checks.size(); ++m) os << (m ? "," : "") << c.checks[m];
        os << "\n";
    }
    if (!c.amplitude_sweep.empty()) {
        os << "amplitude_sweep = ";
        for (std::size_t m = 0; m < c.amplitude_sweep.size(); ++m)
            os << (m ? "," : "") << c.amplitude_sweep[m];
        os << "\n";
    }
    os << "probe_delta = " << c.probe_delta << "\n";
    os << "absorbing_radius = " << c.absorbing_radius << "\n";
    return os.str();
}

} // namespace cylch
