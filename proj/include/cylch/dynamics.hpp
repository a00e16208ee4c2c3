#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "cylch/energy.hpp"
#include "cylch/field.hpp"
#include "cylch/operators.hpp"
#include "cylch/potentials.hpp"
#include "cylch/weights.hpp"

namespace cylch {

enum class Scheme { ConvexSplitting, ExplicitRK4 };

struct SolverConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::ConvexSplitting;
    double newton_tol = 1e-12;          // absolute max-norm bound on the step residual
    int newton_max_iters = 30;
    double admissibility_margin = 1e-3; // accepted states keep max|u| <= 1 - margin
    int record_every = 1;
    int snapshot_every = 1;             // keep every k-th recorded field

    void validate() const {
        if (!(dt > 0.0)) throw ValidationError("solver: dt must be positive");
        if (!(newton_tol > 0.0 && newton_tol < 1e-6))
            throw ValidationError("solver: newton_tol must lie in (0, 1e-6)");
        if (newton_max_iters < 1) throw ValidationError("solver: newton_max_iters must be >= 1");
        if (!(admissibility_margin > 0.0 && admissibility_margin <= 1e-3))
            throw ValidationError("solver: admissibility_margin must lie in (0, 1e-3]");
        if (record_every < 1 || snapshot_every < 1)
            throw ValidationError("solver: record_every and snapshot_every must be >= 1");
    }
};

struct State {
    double t = 0.0;
    ScalarField u;
};

/// Chemical potential mu = -laplacian(u) + f(u) + g.
inline ScalarField chemical_potential(const ScalarField& u, const PotentialSpec& spec,
                                      const ScalarField& g) {
    u.require_same_grid(g);
    ScalarField mu = apply_laplacian(u);
    for (std::size_t n = 0; n < mu.size(); ++n) mu[n] = -mu[n] + spec.f(u[n]) + g[n];
    return mu;
}

struct StepInfo {
    State state;
    double flux = 0.0;            // scheme-consistent boundary flux of mu
    double newton_residual = 0.0; // final max-norm residual (0 for explicit steps)
    int newton_iters = 0;
};

/// Implicit convex-splitting step: f0 implicit, the concave part -K u and the
/// force g explicit, solved by damped Newton with a sparse direct factorization.
/// Unconditionally gradient stable: for g == 0 and uniform weight, the discrete
/// energy 1/2(grad u, grad u) + sum F(u) is non-increasing at every step.
class ConvexSplittingStepper {
public:
    using SpMat = Eigen::SparseMatrix<double>;
    using Vec = Eigen::VectorXd;

    ConvexSplittingStepper(const GridSpec& grid, const PotentialSpec& spec, const ScalarField& g,
                           const SolverConfig& cfg)
        : grid_(grid), spec_(spec), cfg_(cfg), n_(static_cast<std::size_t>(grid.interior_count())) {
        cfg_.validate();
        if (g.grid() != grid) throw GridMismatch("stepper: forcing lives on a different grid");
        gv_ = to_vec(g);
        A_ = build_laplacian(grid);
        SpMat B = (A_ * A_).pruned();
        SpMat I(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        I.setIdentity();
        IB_ = I + cfg_.dt * B;
        norm_A_ = max_abs_row_sum(A_);
        norm_IB_ = max_abs_row_sum(IB_);
    }

    StepInfo step(const State& state) {
        const double dt = cfg_.dt;
        const double cap = spec_.singular()
                               ? 1.0 - 0.1 * cfg_.admissibility_margin
                               : std::numeric_limits<double>::infinity();
        Vec u = to_vec(state.u);
        if (spec_.singular() && u.lpNorm<Eigen::Infinity>() > 1.0 - cfg_.admissibility_margin)
            throw DomainViolation("step: state violates the admissibility margin");

        const Vec b = u + dt * (A_ * (gv_ - spec_.K() * u));
        Vec w = u;
        Vec G(static_cast<Eigen::Index>(n_)), f0v(static_cast<Eigen::Index>(n_));
        double mag = 0.0;
        eval_residual(w, u, b, G, f0v, mag);
        double res = G.lpNorm<Eigen::Infinity>();
        double res2 = G.norm();
        double prev_res = std::numeric_limits<double>::infinity();
        int iters = 0;

        while (true) {
            const double floor_res = 4.0 * std::numeric_limits<double>::epsilon() * mag;
            // converged once the residual sits at the roundoff floor of its own
            // evaluation; a marginal crossing gets one more polish iteration
            if (res <= floor_res && (res <= 0.125 * floor_res || res >= 0.25 * prev_res)) break;
            if (iters >= cfg_.newton_max_iters) {
                if (res <= std::max(cfg_.newton_tol, floor_res)) break;
                std::ostringstream os;
                os << "step: Newton residual " << res << " above tol " << cfg_.newton_tol
                   << " after " << iters << " iterations (consider a smaller dt)";
                throw NewtonFailure(os.str());
            }
            Vec f0p(static_cast<Eigen::Index>(n_));
            for (std::size_t m = 0; m < n_; ++m)
                f0p[static_cast<Eigen::Index>(m)] = spec_.f0_prime(w[static_cast<Eigen::Index>(m)]);
            SpMat J = IB_ - dt * SpMat(A_ * f0p.asDiagonal());
            // the sparsity pattern never changes, so the symbolic analysis is reused
            if (!analyzed_) {
                lu_.analyzePattern(J);
                analyzed_ = true;
            }
            lu_.factorize(J);
            if (lu_.info() != Eigen::Success)
                throw NewtonFailure("step: sparse factorization of the Newton system failed");
            const Vec delta = lu_.solve(-G);

            // damped update; acceptance asks for an Armijo-style decrease of
            // the l2 residual, which is smoother than the max norm
            double lambda = 1.0;
            bool accepted = false, blocked_by_domain = false;
            Vec cand, Gc(static_cast<Eigen::Index>(n_)), f0c(static_cast<Eigen::Index>(n_));
            for (int halve = 0; halve < 30; ++halve, lambda *= 0.5) {
                cand = w + lambda * delta;
                if (cand.lpNorm<Eigen::Infinity>() > cap) {
                    blocked_by_domain = true;
                    continue;
                }
                double mc = 0.0;
                eval_residual(cand, u, b, Gc, f0c, mc);
                const double rc2 = Gc.norm();
                const double rc = Gc.lpNorm<Eigen::Infinity>();
                if (rc2 < res2 * (1.0 - 1e-4 * lambda) || rc <= floor_res) {
                    w = cand;
                    G = Gc;
                    f0v = f0c;
                    mag = mc;
                    prev_res = res;
                    res = rc;
                    res2 = rc2;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (res <= std::max(cfg_.newton_tol, floor_res)) break;
                if (blocked_by_domain)
                    throw DomainViolation("step: damping exhausted against the admissible interval");
                throw NewtonFailure("step: Newton stalled (consider a smaller dt)");
            }
            ++iters;
        }
        if (spec_.singular() && w.lpNorm<Eigen::Infinity>() > 1.0 - cfg_.admissibility_margin)
            throw DomainViolation("step: accepted state violates the admissibility margin");

        // scheme-consistent boundary flux of mu, evaluated through the
        // scheme's own arithmetic: (w - u)/dt = laplacian(mu) + G/dt holds
        // bitwise, so the per-step mass identity telescopes to the final
        // Newton residual alone
        const Vec flux_vec = w - u - G;
        const double flux =
            compensated_sum(flux_vec.data(), n_) * grid_.cell_volume() / dt;

        StepInfo info;
        info.state.t = state.t + dt;
        info.state.u = from_vec(w);
        info.flux = flux;
        info.newton_residual = res;
        info.newton_iters = iters;
        return info;
    }

    static SpMat build_laplacian(const GridSpec& g) {
        const auto N = static_cast<Eigen::Index>(g.interior_count());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(N) * 7);
        const double cx = 1.0 / (g.hx() * g.hx());
        const double cy = 1.0 / (g.hy() * g.hy());
        const double cz = g.dims() == 3 ? 1.0 / (g.hz() * g.hz()) : 0.0;
        ScalarField idx(g);
        auto lin = [&](int i, int j, int k) {
            return static_cast<Eigen::Index>(idx.index(i, j, k));
        };
        for (int i = 0; i < g.mx(); ++i)
            for (int j = 0; j < g.my(); ++j)
                for (int k = 0; k < g.mz(); ++k) {
                    const Eigen::Index r = lin(i, j, k);
                    double diag = -2.0 * (cx + cy) - (g.dims() == 3 ? 2.0 * cz : 0.0);
                    trip.emplace_back(r, r, diag);
                    if (i > 0) trip.emplace_back(r, lin(i - 1, j, k), cx);
                    if (i + 1 < g.mx()) trip.emplace_back(r, lin(i + 1, j, k), cx);
                    if (j > 0) trip.emplace_back(r, lin(i, j - 1, k), cy);
                    if (j + 1 < g.my()) trip.emplace_back(r, lin(i, j + 1, k), cy);
                    if (g.dims() == 3) {
                        if (k > 0) trip.emplace_back(r, lin(i, j, k - 1), cz);
                        if (k + 1 < g.mz()) trip.emplace_back(r, lin(i, j, k + 1), cz);
                    }
                }
        SpMat A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        return A;
    }

private:
    static double max_abs_row_sum(const SpMat& m) {
        std::vector<double> rows(static_cast<std::size_t>(m.rows()), 0.0);
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it)
                rows[static_cast<std::size_t>(it.row())] += std::abs(it.value());
        double s = 0.0;
        for (double r : rows) s = std::max(s, r);
        return s;
    }

    // mag bounds the pre-cancellation magnitudes entering the residual
    // evaluation; the attainable residual floor is a few ulps of it
    void eval_residual(const Vec& w, const Vec& /*u*/, const Vec& b, Vec& G, Vec& f0v,
                       double& mag) const {
        for (std::size_t m = 0; m < n_; ++m)
            f0v[static_cast<Eigen::Index>(m)] = spec_.f0(w[static_cast<Eigen::Index>(m)]);
        const Vec af = A_ * f0v;
        G = IB_ * w - cfg_.dt * af - b;
        mag = norm_IB_ * (1.0 + w.lpNorm<Eigen::Infinity>()) +
              cfg_.dt * norm_A_ * (1.0 + f0v.lpNorm<Eigen::Infinity>()) +
              b.lpNorm<Eigen::Infinity>();
    }

    Vec to_vec(const ScalarField& u) const {
        return Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(n_));
    }
    ScalarField from_vec(const Vec& v) const {
        ScalarField u(grid_);
        for (std::size_t m = 0; m < n_; ++m) u[m] = v[static_cast<Eigen::Index>(m)];
        return u;
    }

    GridSpec grid_;
    PotentialSpec spec_;
    SolverConfig cfg_;
    std::size_t n_;
    Vec gv_;
    SpMat A_, IB_;
    double norm_A_ = 0.0, norm_IB_ = 0.0;
    Eigen::SparseLU<SpMat> lu_;
    bool analyzed_ = false;
};

inline State step_convex_splitting(const State& state, const PotentialSpec& spec,
                                   const ScalarField& g, const SolverConfig& cfg) {
    ConvexSplittingStepper stepper(state.u.grid(), spec, g, cfg);
    return stepper.step(state).state;
}

/// Classical four-stage explicit step of dt u = laplacian(mu(u)). Conditionally
/// stable only: dt must stay below ~2.8/lambda_max^2 with lambda_max ~ 8/h^2,
/// i.e. dt = O(h^4). The recorded flux is the stage-weighted boundary flux, so
/// the per-step mass identity telescopes exactly.
inline StepInfo step_explicit_rk4_info(const State& state, const PotentialSpec& spec,
                                       const ScalarField& g, const SolverConfig& cfg) {
    const double dt = cfg.dt;
    const double cap = spec.singular() ? 1.0 - 0.1 * cfg.admissibility_margin
                                       : std::numeric_limits<double>::infinity();
    auto rhs = [&](const ScalarField& u, double& flux) {
        if (u.max_abs() > cap)
            throw DomainViolation("step_explicit_rk4: stage state left the admissible interval");
        ScalarField k = apply_laplacian(chemical_potential(u, spec, g));
        if (!k.all_finite()) throw Instability("step_explicit_rk4: non-finite stage values");
        flux = field_sum(k);
        return k;
    };
    double f1, f2, f3, f4;
    const ScalarField& u = state.u;
    ScalarField k1 = rhs(u, f1);
    ScalarField u2 = u;
    for (std::size_t n = 0; n < u2.size(); ++n) u2[n] += 0.5 * dt * k1[n];
    ScalarField k2 = rhs(u2, f2);
    ScalarField u3 = u;
    for (std::size_t n = 0; n < u3.size(); ++n) u3[n] += 0.5 * dt * k2[n];
    ScalarField k3 = rhs(u3, f3);
    ScalarField u4 = u;
    for (std::size_t n = 0; n < u4.size(); ++n) u4[n] += dt * k3[n];
    ScalarField k4 = rhs(u4, f4);

    StepInfo info;
    info.state.t = state.t + dt;
    info.state.u = u;
    for (std::size_t n = 0; n < u.size(); ++n)
        info.state.u[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    if (!info.state.u.all_finite())
        throw Instability("step_explicit_rk4: non-finite state");
    if (info.state.u.max_abs() > cap)
        throw DomainViolation("step_explicit_rk4: state left the admissible interval");
    info.flux = (f1 + 2.0 * f2 + 2.0 * f3 + f4) / 6.0;
    return info;
}

inline State step_explicit_rk4(const State& state, const PotentialSpec& spec,
                               const ScalarField& g, const SolverConfig& cfg) {
    return step_explicit_rk4_info(state, spec, g, cfg).state;
}

// ---------------------------------------------------------------------------
// initial data
// ---------------------------------------------------------------------------

enum class InitialKind { TanhInterface, SpinodalNoise, RoughHminus1, Eigenmode };

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
inline double u01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }
} // namespace detail

/// Deterministic initial data generators. rough_hminus1 builds a random-sign
/// Fourier sum whose mode-k amplitude falls like amplitude/k: the H^{-1}-type
/// norm is dominated by the low modes and stays O(amplitude) under refinement
/// while the H^1 norm grows with the number of resolved modes. Mode signs are
/// hashed from (seed, mode), so refining the grid keeps the shared modes.
inline ScalarField make_initial_data(InitialKind kind, double amplitude, std::uint64_t seed,
                                     const GridSpec& g) {
    if (!std::isfinite(amplitude)) throw DomainViolation("make_initial_data: non-finite amplitude");
    ScalarField u(g);
    switch (kind) {
    case InitialKind::TanhInterface:
        return sample_field(g, [&](double x, double, double) {
            return amplitude * std::tanh(x / std::sqrt(2.0));
        });
    case InitialKind::SpinodalNoise: {
        std::mt19937_64 eng(seed);
        for (std::size_t n = 0; n < u.size(); ++n)
            u[n] = amplitude * (2.0 * detail::u01(eng()) - 1.0);
        return u;
    }
    case InitialKind::RoughHminus1: {
        const double pi = std::acos(-1.0);
        const int lmax = 2;
        for (int l = 1; l <= lmax; ++l) {
            std::vector<double> axial(static_cast<std::size_t>(g.mx()), 0.0);
            for (int ka = 1; ka <= g.mx(); ++ka) {
                const std::uint64_t h =
                    detail::splitmix64(seed ^ (static_cast<std::uint64_t>(l) << 32) ^
                                       static_cast<std::uint64_t>(ka));
                const double sign = (h & 1u) ? 1.0 : -1.0;
                const double c = amplitude * sign / static_cast<double>(ka);
                for (int i = 0; i < g.mx(); ++i)
                    axial[static_cast<std::size_t>(i)] +=
                        c * std::sin(ka * pi * (i + 1) / static_cast<double>(g.nx));
            }
            for (int i = 0; i < g.mx(); ++i)
                for (int j = 0; j < g.my(); ++j)
                    for (int k = 0; k < g.mz(); ++k) {
                        double cross = std::sin(l * pi * g.y_of(j));
                        if (g.dims() == 3) cross *= std::sin(pi * g.z_of(k));
                        u.at(i, j, k) += axial[static_cast<std::size_t>(i)] * cross;
                    }
        }
        return u;
    }
    case InitialKind::Eigenmode: {
        const double pi = std::acos(-1.0);
        return sample_field(g, [&](double x, double y, double z) {
            double v = amplitude * std::sin(pi * (x + g.L) / (2.0 * g.L)) * std::sin(pi * y);
            if (g.dims() == 3) v *= std::sin(pi * z);
            return v;
        });
    }
    }
    return u;
}

// ---------------------------------------------------------------------------
// trajectory records
// ---------------------------------------------------------------------------

/// Per-record scalar series. All vectors share the length of `t`.
struct SeriesTable {
    std::vector<double> t;
    std::vector<double> E_phi, E_plus, grad_mu_L2phi, u_H1b, F_L1b, f_u_L2b, f_Linf,
        min_separation, mass, boundary_flux, dtu_Hm1phi, energy_residual;

    std::size_t rows() const { return t.size(); }
};

/// Time-stamped snapshots plus per-record scalar series, with enough context
/// (potential, forcing, weight, windows) to recompute diagnostics later.
struct TrajectoryRecord {
    GridSpec grid;
    PotentialSpec potential;
    ScalarField forcing;
    Weight weight;
    WindowSet windows;
    double dt = 0.0;
    Scheme scheme = Scheme::ConvexSplitting;
    double solver_margin = 1e-3;
    double max_newton_residual = 0.0; // worst accepted step residual over the run

    SeriesTable series;
    std::vector<double> snapshot_times;
    std::vector<ScalarField> snapshots;

    TrajectoryRecord(const GridSpec& g, const PotentialSpec& p, const ScalarField& f,
                     const Weight& w, const WindowSet& ws)
        : grid(g), potential(p), forcing(f), weight(w), windows(ws) {}
};

namespace detail {

inline void append_record(TrajectoryRecord& rec, const State& s, const ScalarField* u_prev,
                          double dt, double flux, bool keep_snapshot) {
    const PotentialSpec& spec = rec.potential;
    const ScalarField& g = rec.forcing;
    const std::vector<double> prof = axial_weight_profile(rec.weight, rec.grid);
    const std::vector<double>* pp = rec.weight ? &prof : nullptr;

    SeriesTable& t = rec.series;
    t.t.push_back(s.t);
    const EnergyValues e = energy_functional(s.u, spec, g, rec.weight);
    t.E_phi.push_back(e.E_phi);
    t.E_plus.push_back(e.E_plus);

    ScalarField mu = chemical_potential(s.u, spec, g);
    t.grad_mu_L2phi.push_back(std::sqrt(weighted_grad_form(mu, mu, pp)));
    t.u_H1b.push_back(uniformly_local_norm(s.u, rec.windows, 2.0, 1).value);
    t.F_L1b.push_back(uniformly_local_norm(F_field(s.u, spec), rec.windows, 1.0, 0).value);
    ScalarField fu = f_field(s.u, spec);
    t.f_u_L2b.push_back(uniformly_local_norm(fu, rec.windows, 2.0, 0).value);
    t.f_Linf.push_back(fu.max_abs());
    t.min_separation.push_back(1.0 - s.u.max_abs());
    t.mass.push_back(field_sum(s.u));
    t.boundary_flux.push_back(flux);

    if (u_prev) {
        ScalarField dtu = s.u;
        dtu -= *u_prev;
        dtu *= 1.0 / dt;
        ScalarField v = inverse_laplacian(dtu, kHminus1SolveTol);
        t.dtu_Hm1phi.push_back(std::sqrt(weighted_grad_form(v, v, pp)));
        t.energy_residual.push_back(
            energy_identity_step_residual(*u_prev, s.u, dt, spec, g, rec.weight));
    } else {
        t.dtu_Hm1phi.push_back(0.0);
        t.energy_residual.push_back(0.0);
    }
    if (keep_snapshot) {
        rec.snapshot_times.push_back(s.t);
        rec.snapshots.push_back(s.u);
    }
}

} // namespace detail

/// Integrate over a horizon of length T (rounded to a whole number of steps),
/// recording every record_every-th step plus the final one. Recording never
/// perturbs the stepped states; the run is deterministic given its inputs.
/// t_start only offsets the recorded times (resumed runs).
inline TrajectoryRecord integrate(const ScalarField& u0, double T, const PotentialSpec& spec,
                                  const ScalarField& g, const SolverConfig& cfg,
                                  const WindowSet& windows, const Weight& weight,
                                  double t_start = 0.0) {
    cfg.validate();
    if (!(T >= cfg.dt)) throw ValidationError("integrate: T must be >= dt");
    if (spec.singular() && u0.max_abs() > 1.0 - cfg.admissibility_margin)
        throw DomainViolation("integrate: initial data violates the admissibility margin");

    TrajectoryRecord rec(u0.grid(), spec, g, weight, windows);
    rec.dt = cfg.dt;
    rec.scheme = cfg.scheme;
    rec.solver_margin = cfg.admissibility_margin;

    const long long n_steps = std::max(1ll, std::llround(T / cfg.dt));
    std::optional<ConvexSplittingStepper> stepper;
    if (cfg.scheme == Scheme::ConvexSplitting) stepper.emplace(u0.grid(), spec, g, cfg);

    State s{t_start, u0};
    detail::append_record(rec, s, nullptr, cfg.dt, 0.0, true);
    long long records = 0;
    for (long long n = 1; n <= n_steps; ++n) {
        StepInfo info;
        const std::string at = "at t=" + std::to_string(s.t) + ": ";
        try {
            info = stepper ? stepper->step(s) : step_explicit_rk4_info(s, spec, g, cfg);
        } catch (const Instability& e) {
            throw Instability("integrate " + at + e.what());
        } catch (const DomainViolation& e) {
            throw DomainViolation("integrate " + at + e.what());
        } catch (const NewtonFailure& e) {
            throw NewtonFailure("integrate " + at + e.what());
        }
        rec.max_newton_residual = std::max(rec.max_newton_residual, info.newton_residual);
        const ScalarField u_prev = std::move(s.u);
        s = std::move(info.state);
        s.t = t_start + static_cast<double>(n) * cfg.dt; // avoid accumulated addition drift
        if (n % cfg.record_every == 0 || n == n_steps) {
            ++records;
            const bool snap = (records % cfg.snapshot_every == 0) || n == n_steps;
            detail::append_record(rec, s, &u_prev, cfg.dt, info.flux, snap);
        }
    }
    return rec;
}

/// Named per-snapshot quantities for space-time uniformly local norms.
enum class SpacetimeQuantity { U_L2, U_H1, LaplacianU_L2, F_U_L2, F_U_L6, GradMu_H1semi };

/// sup over unit windows of the L^p-in-time window norm over [t0, t0+1],
/// computed from the stored snapshots by trapezoidal time quadrature.
inline ULNormResult spacetime_ul_norm(const TrajectoryRecord& rec, double t0, double p,
                                      SpacetimeQuantity quantity) {
    auto field_at = [&](std::size_t m) -> ScalarField {
        const ScalarField& u = rec.snapshots[m];
        switch (quantity) {
        case SpacetimeQuantity::U_L2:
        case SpacetimeQuantity::U_H1: return u;
        case SpacetimeQuantity::LaplacianU_L2: return apply_laplacian(u);
        case SpacetimeQuantity::F_U_L2:
        case SpacetimeQuantity::F_U_L6: return f_field(u, rec.potential);
        case SpacetimeQuantity::GradMu_H1semi:
            return chemical_potential(u, rec.potential, rec.forcing);
        }
        return u;
    };
    switch (quantity) {
    case SpacetimeQuantity::U_L2:
        return spacetime_ul_norm_over(rec.snapshot_times, t0, p, rec.windows, 2.0, 0, field_at);
    case SpacetimeQuantity::U_H1:
        return spacetime_ul_norm_over(rec.snapshot_times, t0, p, rec.windows, 2.0, 1, field_at);
    case SpacetimeQuantity::LaplacianU_L2:
    case SpacetimeQuantity::F_U_L2:
        return spacetime_ul_norm_over(rec.snapshot_times, t0, p, rec.windows, 2.0, 0, field_at);
    case SpacetimeQuantity::F_U_L6:
        return spacetime_ul_norm_over(rec.snapshot_times, t0, p, rec.windows, 6.0, 0, field_at);
    case SpacetimeQuantity::GradMu_H1semi: {
        // gradient-only seminorm of mu per window: use order-1 norm of mu minus
        // its window L2 part is not separable; report the full window H1 norm,
        // which dominates the seminorm and shares its finiteness.
        return spacetime_ul_norm_over(rec.snapshot_times, t0, p, rec.windows, 2.0, 1, field_at);
    }
    }
    return {};
}

} // namespace cylch
