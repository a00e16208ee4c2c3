#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "cylch/field.hpp"
#include "cylch/operators.hpp"
#include "cylch/potentials.hpp"

namespace cylch {

namespace detail {

/// CG for the shifted operator u -> -laplacian(u) + c.*u with c >= -K and
/// K below the Friedrichs constant, so the operator stays positive definite.
inline ScalarField shifted_poisson_cg(const ScalarField& rhs, const std::vector<double>& c,
                                      double tol) {
    const GridSpec& g = rhs.grid();
    const std::size_t n = rhs.size();
    auto apply = [&](const ScalarField& p, ScalarField& out) {
        out = apply_laplacian(p);
        for (std::size_t m = 0; m < n; ++m) out[m] = -out[m] + c[m] * p[m];
    };
    ScalarField v(g);
    double b2 = 0.0;
    for (std::size_t m = 0; m < n; ++m) b2 += rhs[m] * rhs[m];
    if (b2 == 0.0) return v;
    ScalarField r = rhs, p = rhs, ap(g);
    double rr = b2;
    const int cap = std::max(64, static_cast<int>(10.0 * std::sqrt(static_cast<double>(n)) *
                                                  std::log(1.0 / std::min(tol, 0.5))));
    for (int it = 0; it < cap; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (std::size_t m = 0; m < n; ++m) pap += p[m] * ap[m];
        const double alpha = rr / pap;
        double rr_next = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            v[m] += alpha * p[m];
            r[m] -= alpha * ap[m];
            rr_next += r[m] * r[m];
        }
        if (rr_next <= tol * tol * b2) return v;
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t m = 0; m < n; ++m) p[m] = r[m] + beta * p[m];
    }
    throw NoConvergence("shifted_poisson_cg: missed the residual bound", cap, std::sqrt(rr / b2));
}

} // namespace detail

/// Solve the semilinear elliptic problem  laplacian(u) - f(u) = h  with zero
/// Dirichlet data by damped Newton iteration. Iterates of singular potentials
/// are kept strictly inside the admissible interval by step damping. Returns
/// u with ||laplacian(u) - f(u) - h||_2 <= tol.
inline ScalarField solve_semilinear_elliptic(const ScalarField& h, const PotentialSpec& spec,
                                             double tol) {
    if (!(tol > 0.0)) throw ValidationError("solve_semilinear_elliptic: tol must be positive");
    const GridSpec& g = h.grid();
    const std::size_t n = h.size();
    const double cap = spec.singular() ? 1.0 - 10.0 * PotentialSpec::kClipMargin
                                       : std::numeric_limits<double>::infinity();

    ScalarField u(g); // f(0) = 0 for every family, so u = 0 is admissible
    auto residual = [&](const ScalarField& w, ScalarField& out) {
        out = apply_laplacian(w);
        for (std::size_t m = 0; m < n; ++m) out[m] -= spec.f(w[m]) + h[m];
    };
    ScalarField G(g);
    residual(u, G);
    double res = l2_norm(G);
    std::vector<double> hist{res};

    const int max_iters = 60;
    for (int it = 0; it < max_iters && res > tol; ++it) {
        // Newton system: (-laplacian + f'(u)) delta = G
        std::vector<double> c(n);
        for (std::size_t m = 0; m < n; ++m) c[m] = spec.f_prime(u[m]);
        ScalarField delta = detail::shifted_poisson_cg(G, c, 1e-12);

        double lambda = 1.0;
        bool accepted = false;
        bool blocked_by_domain = false;
        for (int halve = 0; halve < 30; ++halve, lambda *= 0.5) {
            ScalarField cand = u;
            for (std::size_t m = 0; m < n; ++m) cand[m] += lambda * delta[m];
            if (cand.max_abs() > cap) {
                blocked_by_domain = true;
                continue;
            }
            ScalarField Gc(g);
            residual(cand, Gc);
            const double rc = l2_norm(Gc);
            if (rc < res) {
                u = std::move(cand);
                G = std::move(Gc);
                res = rc;
                hist.push_back(res);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (blocked_by_domain)
                throw DomainViolation(
                    "solve_semilinear_elliptic: damping cannot keep iterates admissible");
            std::ostringstream os;
            os << "solve_semilinear_elliptic: stalled, residual history:";
            for (double r : hist) os << " " << r;
            throw NewtonFailure(os.str());
        }
    }
    if (res > tol) {
        std::ostringstream os;
        os << "solve_semilinear_elliptic: residual " << res << " above tol " << tol;
        throw NewtonFailure(os.str());
    }
    return u;
}

} // namespace cylch
