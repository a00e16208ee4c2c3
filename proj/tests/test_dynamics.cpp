#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cylch/dynamics.hpp"
#include "cylch/semilinear.hpp"

using namespace cylch;

namespace {

const double kPi = std::acos(-1.0);

ScalarField sine_mode(const GridSpec& g, int kx, int ky) {
    return sample_field(g, [&](double x, double y, double) {
        return std::sin(kx * kPi * (x + g.L) / (2.0 * g.L)) * std::sin(ky * kPi * y);
    });
}

double discrete_eigenvalue(const GridSpec& g, int kx, int ky) {
    return (2.0 - 2.0 * std::cos(kx * kPi / g.nx)) / (g.hx() * g.hx()) +
           (2.0 - 2.0 * std::cos(ky * kPi / g.ny)) / (g.hy() * g.hy());
}

PotentialSpec cubic() { return PotentialSpec::polynomial({0.0, 0.0, 0.0, 1.0}, 1.0); }
PotentialSpec zero_potential() { return PotentialSpec::polynomial({0.0}, 0.0); }

SolverConfig quick_cfg(double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    return cfg;
}

} // namespace

TEST_CASE("chemical potential basics") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    auto spec = cubic();
    CHECK(l2_norm(chemical_potential(zero, spec, zero)) == 0.0);

    // f == 0: mu reduces to -laplacian(u)
    auto zf = PotentialSpec::polynomial({0.0, 1.0}, 1.0);
    ScalarField u = sine_mode(g, 3, 2);
    ScalarField mu = chemical_potential(u, zf, zero);
    ScalarField lap = apply_laplacian(u);
    for (std::size_t n = 0; n < u.size(); ++n)
        CHECK(mu[n] == Catch::Approx(-lap[n]).margin(1e-12));

    // equilibrium of the elliptic solve has zero chemical potential
    auto log_spec = PotentialSpec::logarithmic(1.0);
    ScalarField gf = sample_field(g, [](double x, double y, double) {
        return 0.3 * std::sin(kPi * y) * std::exp(-x * x);
    });
    ScalarField ueq = solve_semilinear_elliptic(gf, log_spec, 1e-12);
    CHECK(l2_norm(chemical_potential(ueq, log_spec, gf)) < 1e-9);
}

TEST_CASE("convex splitting fixed point at zero") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    State s{0.0, zero};
    State next = step_convex_splitting(s, cubic(), zero, quick_cfg(1e-3));
    CHECK(next.u.max_abs() <= 1e-14);
    CHECK(next.t == Catch::Approx(1e-3));
}

TEST_CASE("implicit biharmonic step damps eigenmodes by 1/(1+dt*lambda^2)") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    ScalarField u = sine_mode(g, 2, 1);
    const double lam = discrete_eigenvalue(g, 2, 1);
    const double dt = 1e-3;
    State next = step_convex_splitting({0.0, u}, zero_potential(), zero, quick_cfg(dt));
    const double factor = 1.0 / (1.0 + dt * lam * lam);
    for (std::size_t n = 0; n < u.size(); ++n)
        CHECK(next.u[n] == Catch::Approx(factor * u[n]).margin(1e-12));
}

TEST_CASE("per-step mass change telescopes to the boundary flux") {
    const GridSpec g(2.0, 32, 8);
    auto spec = PotentialSpec::logarithmic(1.0);
    ScalarField gf = sample_field(g, [](double x, double y, double) {
        return 0.2 * std::sin(kPi * y) * std::cos(0.3 * x);
    });
    ScalarField u0 = sine_mode(g, 1, 1);
    u0 *= 0.4;
    SolverConfig cfg = quick_cfg(1e-3);
    ConvexSplittingStepper stepper(g, spec, gf, cfg);
    State s{0.0, u0};
    for (int n = 0; n < 20; ++n) {
        StepInfo info = stepper.step(s);
        const double dmass = field_sum(info.state.u) - field_sum(s.u);
        CHECK(std::abs(dmass - cfg.dt * info.flux) < 1e-12);
        s = info.state;
    }
}

TEST_CASE("rk4 basics") {
    const GridSpec g(1.0, 16, 8);
    ScalarField zero(g);
    SolverConfig cfg = quick_cfg(1e-3);
    cfg.scheme = Scheme::ExplicitRK4;
    State z = step_explicit_rk4({0.0, zero}, cubic(), zero, cfg);
    CHECK(z.u.max_abs() == 0.0);

    // linear decay rate matches exp(-lambda^2 dt) to O(dt^5) per step
    ScalarField u = sine_mode(g, 1, 1);
    const double lam = discrete_eigenvalue(g, 1, 1);
    State next = step_explicit_rk4({0.0, u}, zero_potential(), zero, cfg);
    const double x = lam * lam * cfg.dt;
    REQUIRE(x < 1.0);
    std::size_t peak = 0;
    for (std::size_t n = 0; n < u.size(); ++n)
        if (std::abs(u[n]) > std::abs(u[peak])) peak = n;
    const double ratio = next.u[peak] / u[peak];
    CHECK(std::abs(ratio - std::exp(-x)) < std::pow(x, 5));
}

TEST_CASE("deliberately unstable explicit run raises Instability") {
    const GridSpec g(2.0, 64, 16);
    ScalarField zero(g);
    SolverConfig cfg = quick_cfg(1e-2); // far beyond the h^4 stability bound
    cfg.scheme = Scheme::ExplicitRK4;
    ScalarField u0 = make_initial_data(InitialKind::SpinodalNoise, 0.5, 7, g);
    WindowSet ws = WindowSet::make(g, 1.0);
    CHECK_THROWS_AS(integrate(u0, 0.05, cubic(), zero, cfg, ws, std::nullopt), Instability);
}

TEST_CASE("cross-scheme agreement on a short horizon") {
    const GridSpec g(1.0, 16, 8);
    ScalarField zero(g);
    ScalarField u0 = sine_mode(g, 1, 1);
    u0 *= 0.2;
    auto spec = cubic();
    SolverConfig a = quick_cfg(1e-6);
    SolverConfig b = a;
    b.scheme = Scheme::ExplicitRK4;
    State sa{0.0, u0}, sb{0.0, u0};
    ConvexSplittingStepper stepper(g, spec, zero, a);
    for (int n = 0; n < 200; ++n) {
        sa = stepper.step(sa).state;
        sb = step_explicit_rk4(sb, spec, zero, b);
    }
    ScalarField diff = sa.u;
    diff -= sb.u;
    CHECK(l2_norm(diff) / l2_norm(sb.u) < 1e-5);
}

TEST_CASE("initial data generators") {
    const GridSpec g(4.0, 64, 8);
    CHECK(make_initial_data(InitialKind::TanhInterface, 0.0, 1, g).max_abs() == 0.0);
    ScalarField a = make_initial_data(InitialKind::SpinodalNoise, 0.5, 42, g);
    ScalarField b = make_initial_data(InitialKind::SpinodalNoise, 0.5, 42, g);
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == b[n]);
    CHECK(a.max_abs() <= 0.5);
    ScalarField c = make_initial_data(InitialKind::SpinodalNoise, 0.5, 43, g);
    bool same = true;
    for (std::size_t n = 0; n < a.size(); ++n)
        if (a[n] != c[n]) same = false;
    CHECK_FALSE(same);

    ScalarField t = make_initial_data(InitialKind::TanhInterface, 0.8, 1, g);
    CHECK(t.at(g.mx() - 1, 3) > 0.79);
    CHECK(t.at(0, 3) < -0.79);
}

TEST_CASE("rough data keeps its H^{-1} size under refinement while H^1 grows") {
    std::vector<double> hm, h1;
    for (auto [nx, ny] : {std::pair{64, 8}, {128, 16}, {256, 32}}) {
        const GridSpec g(4.0, nx, ny);
        ScalarField u = make_initial_data(InitialKind::RoughHminus1, 0.3, 9, g);
        hm.push_back(weighted_norm(u, std::nullopt, 2.0, -1));
        h1.push_back(weighted_norm(u, std::nullopt, 2.0, 1));
    }
    CHECK(hm[1] == Catch::Approx(hm[0]).epsilon(0.2));
    CHECK(hm[2] == Catch::Approx(hm[0]).epsilon(0.2));
    CHECK(h1[1] > h1[0]);
    CHECK(h1[2] > h1[1]);
    CHECK(h1[2] > 1.2 * h1[0]); // the resolved high modes keep feeding the H^1 norm
}

TEST_CASE("discrete energy is non-increasing for every family") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    SolverConfig cfg = quick_cfg(1e-3);
    for (const auto& spec :
         {cubic(), PotentialSpec::power_law(5.0 / 3.0, 1.0), PotentialSpec::logarithmic(1.0)}) {
        ScalarField u0 = make_initial_data(InitialKind::SpinodalNoise, 0.5, 3, g);
        TrajectoryRecord rec = integrate(u0, 0.2, spec, zero, cfg, ws, std::nullopt);
        for (std::size_t n = 1; n < rec.series.rows(); ++n)
            CHECK(rec.series.E_phi[n] <= rec.series.E_phi[n - 1] + 1e-10);
    }
}

TEST_CASE("integrate keeps singular states separated by the margin") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    SolverConfig cfg = quick_cfg(2e-3);
    ScalarField u0 = make_initial_data(InitialKind::SpinodalNoise, 0.8, 5, g);
    TrajectoryRecord rec =
        integrate(u0, 0.1, PotentialSpec::logarithmic(1.0), zero, cfg, ws, std::nullopt);
    for (double sep : rec.series.min_separation) CHECK(sep >= cfg.admissibility_margin);
}

TEST_CASE("zero scenario yields identically zero series") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    TrajectoryRecord rec =
        integrate(zero, 0.01, cubic(), zero, quick_cfg(1e-3), ws, WeightSpec(0.1, 0.0));
    for (std::size_t n = 0; n < rec.series.rows(); ++n) {
        CHECK(rec.series.E_phi[n] == 0.0);
        CHECK(rec.series.u_H1b[n] == 0.0);
        CHECK(rec.series.mass[n] == 0.0);
        CHECK(std::abs(rec.series.boundary_flux[n]) <= 1e-14);
    }
}

TEST_CASE("recording cadence does not perturb the dynamics") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    ScalarField u0 = make_initial_data(InitialKind::SpinodalNoise, 0.4, 2, g);
    SolverConfig c1 = quick_cfg(1e-3);
    SolverConfig c2 = c1;
    c2.record_every = 2;
    TrajectoryRecord r1 = integrate(u0, 0.02, cubic(), zero, c1, ws, std::nullopt);
    TrajectoryRecord r2 = integrate(u0, 0.02, cubic(), zero, c2, ws, std::nullopt);
    const ScalarField& a = r1.snapshots.back();
    const ScalarField& b = r2.snapshots.back();
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == b[n]);
    // identical run is bit-identical
    TrajectoryRecord r3 = integrate(u0, 0.02, cubic(), zero, c1, ws, std::nullopt);
    for (std::size_t n = 0; n < r1.series.rows(); ++n) {
        CHECK(r1.series.E_phi[n] == r3.series.E_phi[n]);
        CHECK(r1.series.dtu_Hm1phi[n] == r3.series.dtu_Hm1phi[n]);
    }
}

TEST_CASE("integrate validates inputs") {
    const GridSpec g(2.0, 32, 8);
    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    SolverConfig cfg = quick_cfg(1e-3);
    CHECK_THROWS_AS(integrate(zero, 1e-5, cubic(), zero, cfg, ws, std::nullopt), ValidationError);
    ScalarField too_big = make_initial_data(InitialKind::SpinodalNoise, 0.9995, 1, g);
    too_big *= 1.001;
    CHECK_THROWS_AS(
        integrate(too_big, 0.01, PotentialSpec::logarithmic(1.0), zero, cfg, ws, std::nullopt),
        DomainViolation);
}

TEST_CASE("cylinder mode: operators and energy decay in 3D") {
    const GridSpec g(2.0, 16, 8, DomainMode::Cylinder, 8);
    CHECK(g.dims() == 3);
    CHECK(g.interior_count() == 15 * 7 * 7);

    ScalarField u = make_initial_data(InitialKind::SpinodalNoise, 0.4, 19, g);
    ScalarField v = make_initial_data(InitialKind::SpinodalNoise, 0.4, 23, g);
    CHECK(inner_product(apply_laplacian(u), v) ==
          Catch::Approx(inner_product(u, apply_laplacian(v))).margin(1e-12));
    CHECK(-inner_product(apply_laplacian(u), v) ==
          Catch::Approx(weighted_grad_form(u, v)).margin(1e-12));

    // discrete eigenmode of the 7-point stencil
    ScalarField mode = make_initial_data(InitialKind::Eigenmode, 1.0, 0, g);
    const double lam = (2.0 - 2.0 * std::cos(kPi / g.nx)) / (g.hx() * g.hx()) +
                       (2.0 - 2.0 * std::cos(kPi / g.ny)) / (g.hy() * g.hy()) +
                       (2.0 - 2.0 * std::cos(kPi / g.nz)) / (g.hz() * g.hz());
    ScalarField lap = apply_laplacian(mode);
    for (std::size_t n = 0; n < mode.size(); ++n)
        CHECK(lap[n] == Catch::Approx(-lam * mode[n]).margin(1e-10));

    ScalarField zero(g);
    WindowSet ws = WindowSet::make(g, 1.0);
    SolverConfig cfg = quick_cfg(1e-3);
    ScalarField u0 = make_initial_data(InitialKind::SpinodalNoise, 0.5, 29, g);
    TrajectoryRecord rec =
        integrate(u0, 0.05, PotentialSpec::logarithmic(1.0), zero, cfg, ws, std::nullopt);
    for (std::size_t n = 1; n < rec.series.rows(); ++n) {
        CHECK(rec.series.E_phi[n] <= rec.series.E_phi[n - 1] + 1e-10);
        const double viol = std::abs(rec.series.mass[n] - rec.series.mass[n - 1] -
                                     cfg.dt * rec.series.boundary_flux[n]);
        CHECK(viol <= 1e-12);
    }
}

TEST_CASE("solver config validation") {
    SolverConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = SolverConfig{};
    bad.newton_tol = 1e-5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = SolverConfig{};
    bad.admissibility_margin = 0.01;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = SolverConfig{};
    bad.record_every = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
