#pragma once

#include <cmath>

#include "cylch/field.hpp"
#include "cylch/operators.hpp"
#include "cylch/potentials.hpp"
#include "cylch/weights.hpp"

namespace cylch {

/// Nodewise images of a field under the potential maps.
inline ScalarField f_field(const ScalarField& u, const PotentialSpec& spec) {
    ScalarField out(u.grid());
    for (std::size_t n = 0; n < u.size(); ++n) out[n] = spec.f(u[n]);
    return out;
}
inline ScalarField f0_field(const ScalarField& u, const PotentialSpec& spec) {
    ScalarField out(u.grid());
    for (std::size_t n = 0; n < u.size(); ++n) out[n] = spec.f0(u[n]);
    return out;
}
inline ScalarField F_field(const ScalarField& u, const PotentialSpec& spec) {
    ScalarField out(u.grid());
    for (std::size_t n = 0; n < u.size(); ++n) out[n] = spec.F(u[n]);
    return out;
}
inline ScalarField F_half_field(const ScalarField& u, const PotentialSpec& spec) {
    ScalarField out(u.grid());
    for (std::size_t n = 0; n < u.size(); ++n) out[n] = spec.F_half(u[n]);
    return out;
}

struct EnergyValues {
    double E_phi = 0.0;  // 1/2 (phi, |grad u|^2) + (F(u), phi)
    double E_plus = 0.0; // E_phi + (u phi, g)
};

/// Weighted energy. The gradient part uses the face-based Dirichlet form, so
/// with phi == 1 it coincides exactly with -(u, laplacian u)/2 and the
/// convex-splitting scheme dissipates it to roundoff.
inline EnergyValues energy_functional(const ScalarField& u, const PotentialSpec& spec,
                                      const ScalarField& g, const Weight& weight) {
    const GridSpec& grid = u.grid();
    const std::vector<double> prof = axial_weight_profile(weight, grid);
    const std::vector<double>* pp = weight ? &prof : nullptr;
    EnergyValues e;
    e.E_phi = 0.5 * weighted_grad_form(u, u, pp);
    double fsum = 0.0, gsum = 0.0;
    for (int i = 0; i < grid.mx(); ++i) {
        const double w = pp ? (*pp)[static_cast<std::size_t>(i) + 1] : 1.0;
        double fa = 0.0, ga = 0.0;
        for (int j = 0; j < grid.my(); ++j)
            for (int k = 0; k < grid.mz(); ++k) {
                const double uv = u.at(i, j, k);
                fa += spec.F(uv);
                ga += uv * g.at(i, j, k);
            }
        fsum += w * fa;
        gsum += w * ga;
    }
    e.E_phi += fsum * grid.cell_volume();
    e.E_plus = e.E_phi + gsum * grid.cell_volume();
    return e;
}

/// Phase-space functional N(u) = (uniformly local H1 norm)^2 + uniformly
/// local L1 norm of F(u); the squared-size stand-in for membership in the
/// energy phase space.
inline double phi_b_functional(const ScalarField& u, const PotentialSpec& spec,
                               const WindowSet& ws) {
    const double h1 = uniformly_local_norm(u, ws, 2.0, 1).value;
    const double fl1 = uniformly_local_norm(F_field(u, spec), ws, 1.0, 0).value;
    return h1 * h1 + fl1;
}

/// One-step backward-difference residual of the weighted energy identity
///   d/dt(E_phi + (u phi, g)) + (phi, |grad mu|^2)
///     + (dt u, phi' dx1 u) + (dx1 mu, phi' mu) = 0
/// evaluated with the scheme-consistent chemical potential
/// mu = -lap(u_next) + f0(u_next) - K u_prev + g and face-based forms. The
/// spatial pairings then cancel algebraically and the residual measures the
/// time discretization alone.
inline double energy_identity_step_residual(const ScalarField& u_prev, const ScalarField& u_next,
                                            double dt, const PotentialSpec& spec,
                                            const ScalarField& g, const Weight& weight) {
    const GridSpec& grid = u_prev.grid();
    const std::vector<double> prof = axial_weight_profile(weight, grid);
    const std::vector<double>* pp = weight ? &prof : nullptr;

    ScalarField mu = apply_laplacian(u_next);
    mu *= -1.0;
    for (std::size_t n = 0; n < mu.size(); ++n)
        mu[n] += spec.f0(u_next[n]) - spec.K() * u_prev[n] + g[n];

    const EnergyValues e0 = energy_functional(u_prev, spec, g, weight);
    const EnergyValues e1 = energy_functional(u_next, spec, g, weight);
    ScalarField dtu = u_next;
    dtu -= u_prev;
    dtu *= 1.0 / dt;

    return (e1.E_plus - e0.E_plus) / dt + weighted_grad_form(mu, mu, pp) +
           axial_weight_form(mu, mu, pp) + axial_weight_form(u_next, dtu, pp);
}

} // namespace cylch
