#pragma once

#include <cmath>
#include <vector>

#include "cylch/field.hpp"

namespace cylch {

/// Second-order centered Dirichlet Laplacian (5-point in 2D, 7-point in 3D);
/// neighbors outside the interior contribute the boundary value 0.
inline ScalarField apply_laplacian(const ScalarField& u) {
    const GridSpec& g = u.grid();
    ScalarField out(g);
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = 1.0 / (g.hy() * g.hy());
    const double cz = g.dims() == 3 ? 1.0 / (g.hz() * g.hz()) : 0.0;
    for (int i = 0; i < g.mx(); ++i)
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) {
                const double c = u.at(i, j, k);
                double s = cx * (u.at_or_zero(i - 1, j, k) - 2.0 * c + u.at_or_zero(i + 1, j, k)) +
                           cy * (u.at_or_zero(i, j - 1, k) - 2.0 * c + u.at_or_zero(i, j + 1, k));
                if (g.dims() == 3)
                    s += cz * (u.at_or_zero(i, j, k - 1) - 2.0 * c + u.at_or_zero(i, j, k + 1));
                out.at(i, j, k) = s;
            }
    return out;
}

/// Per-axis centered differences; the stencil reaches into the boundary where
/// it carries the known Dirichlet value 0, so no special casing is needed at
/// boundary-adjacent nodes.
inline std::vector<ScalarField> apply_gradient(const ScalarField& u) {
    const GridSpec& g = u.grid();
    std::vector<ScalarField> grad(g.dims(), ScalarField(g));
    const double ax = 0.5 / g.hx();
    const double ay = 0.5 / g.hy();
    const double az = g.dims() == 3 ? 0.5 / g.hz() : 0.0;
    for (int i = 0; i < g.mx(); ++i)
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) {
                grad[0].at(i, j, k) = ax * (u.at_or_zero(i + 1, j, k) - u.at_or_zero(i - 1, j, k));
                grad[1].at(i, j, k) = ay * (u.at_or_zero(i, j + 1, k) - u.at_or_zero(i, j - 1, k));
                if (g.dims() == 3)
                    grad[2].at(i, j, k) = az * (u.at_or_zero(i, j, k + 1) - u.at_or_zero(i, j, k - 1));
            }
    return grad;
}

/// Node quadrature sum u*v*(weight)*cellvolume. Exact discrete dual of the
/// stencil operators: (apply_laplacian(u), v) = (u, apply_laplacian(v)).
inline double inner_product(const ScalarField& u, const ScalarField& v) {
    u.require_same_grid(v);
    double s = 0.0;
    const double* a = u.data();
    const double* b = v.data();
    for (std::size_t n = 0; n < u.size(); ++n) s += a[n] * b[n];
    return s * u.grid().cell_volume();
}

inline double inner_product(const ScalarField& u, const ScalarField& v, const ScalarField& w) {
    u.require_same_grid(v);
    u.require_same_grid(w);
    double s = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) s += u[n] * v[n] * w[n];
    return s * u.grid().cell_volume();
}

inline double l2_norm(const ScalarField& u) { return std::sqrt(inner_product(u, u)); }

/// Axial node profile: one value per global axial node g in [0, nx].
/// A null pointer means the uniform weight 1.
using AxialProfilePtr = const std::vector<double>*;

namespace detail {
inline double prof(AxialProfilePtr phi, int g) { return phi ? (*phi)[static_cast<std::size_t>(g)] : 1.0; }
} // namespace detail

/// Face-based weighted Dirichlet form  sum_faces phibar * Du * Dv * vol,
/// where phibar is the mean of the axial weight at the two face nodes and
/// boundary faces see the Dirichlet value 0. With phi == 1 this equals
/// -(apply_laplacian(u), v) exactly (discrete summation by parts).
inline double weighted_grad_form(const ScalarField& u, const ScalarField& v, AxialProfilePtr phi = nullptr) {
    u.require_same_grid(v);
    const GridSpec& g = u.grid();
    const double vol = g.cell_volume();
    double s = 0.0;
    // axial faces: between global axial nodes ga and ga+1, ga in [0, nx-1]
    for (int ga = 0; ga < g.nx; ++ga) {
        const double pb = 0.5 * (detail::prof(phi, ga) + detail::prof(phi, ga + 1));
        const int il = ga - 1, ir = ga; // interior indices left/right of the face
        double acc = 0.0;
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) {
                const double du = u.at_or_zero(ir, j, k) - u.at_or_zero(il, j, k);
                const double dv = v.at_or_zero(ir, j, k) - v.at_or_zero(il, j, k);
                acc += du * dv;
            }
        s += pb * acc / (g.hx() * g.hx());
    }
    // transverse faces share their column's weight value
    for (int i = 0; i < g.mx(); ++i) {
        const double p = detail::prof(phi, i + 1);
        double acc = 0.0;
        for (int jf = 0; jf < g.ny; ++jf)
            for (int k = 0; k < g.mz(); ++k) {
                const double du = u.at_or_zero(i, jf, k) - u.at_or_zero(i, jf - 1, k);
                const double dv = v.at_or_zero(i, jf, k) - v.at_or_zero(i, jf - 1, k);
                acc += du * dv;
            }
        s += p * acc / (g.hy() * g.hy());
        if (g.dims() == 3) {
            double accz = 0.0;
            for (int j = 0; j < g.my(); ++j)
                for (int kf = 0; kf < g.nz; ++kf) {
                    const double du = u.at_or_zero(i, j, kf) - u.at_or_zero(i, j, kf - 1);
                    const double dv = v.at_or_zero(i, j, kf) - v.at_or_zero(i, j, kf - 1);
                    accz += du * dv;
                }
            s += p * accz / (g.hz() * g.hz());
        }
    }
    return s * vol;
}

/// Face form for the axial weight-derivative pairing (d_x1 a, phi' b):
/// sum over axial faces of Dphi * mean(b) * Da * vol. Together with
/// weighted_grad_form it satisfies, exactly in floating point,
///   (apply_laplacian(a), phi*b) = -weighted_grad_form(a,b,phi) - axial_weight_form(a,b,phi).
inline double axial_weight_form(const ScalarField& a, const ScalarField& b, AxialProfilePtr phi) {
    a.require_same_grid(b);
    if (!phi) return 0.0;
    const GridSpec& g = a.grid();
    const double vol = g.cell_volume();
    double s = 0.0;
    for (int ga = 0; ga < g.nx; ++ga) {
        const double dphi = (detail::prof(phi, ga + 1) - detail::prof(phi, ga)) / g.hx();
        if (dphi == 0.0) continue;
        const int il = ga - 1, ir = ga;
        double acc = 0.0;
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) {
                const double da = (a.at_or_zero(ir, j, k) - a.at_or_zero(il, j, k)) / g.hx();
                const double bm = 0.5 * (b.at_or_zero(ir, j, k) + b.at_or_zero(il, j, k));
                acc += da * bm;
            }
        s += dphi * acc;
    }
    return s * vol;
}

/// Compensated (Neumaier) summation: the mass bookkeeping compares large
/// sums whose difference is near roundoff, so plain accumulation noise
/// would dominate the per-step balance.
inline double compensated_sum(const double* v, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double t = s + v[m];
        c += std::abs(s) >= std::abs(v[m]) ? (s - t) + v[m] : (v[m] - t) + s;
        s = t;
    }
    return s + c;
}

/// Exact discrete quantity sum_interior laplacian(mu) * cellvolume. The
/// interior stencil sums telescope, leaving only boundary-face contributions,
/// so per-step mass change equals dt * boundary_flux exactly.
inline double boundary_flux(const ScalarField& mu) {
    ScalarField lap = apply_laplacian(mu);
    return compensated_sum(lap.data(), lap.size()) * mu.grid().cell_volume();
}

inline double field_sum(const ScalarField& u) {
    return compensated_sum(u.data(), u.size()) * u.grid().cell_volume();
}

/// Solve -laplacian(v) = w, v = 0 on the boundary, by conjugate gradients on
/// the symmetric positive definite stencil. Returns v with
/// ||w + laplacian(v)||_2 <= tol * ||w||_2.
inline ScalarField inverse_laplacian(const ScalarField& w, double tol) {
    if (!(tol > 0.0)) throw ValidationError("inverse_laplacian: tol must be positive");
    const GridSpec& g = w.grid();
    const std::size_t n = w.size();
    ScalarField v(g);
    double wn2 = 0.0;
    for (std::size_t m = 0; m < n; ++m) wn2 += w[m] * w[m];
    if (wn2 == 0.0) return v;
    const double target2 = tol * tol * wn2;

    ScalarField r = w; // r = w - A v with v = 0
    ScalarField p = r;
    ScalarField ap(g);
    double rr = wn2;
    const int cap = std::max(64, static_cast<int>(10.0 * std::sqrt(static_cast<double>(n)) *
                                                  std::log(1.0 / std::min(tol, 0.5))));
    for (int it = 0; it < cap; ++it) {
        ap = apply_laplacian(p);
        ap *= -1.0;
        double pap = 0.0;
        for (std::size_t m = 0; m < n; ++m) pap += p[m] * ap[m];
        const double alpha = rr / pap;
        double rr_next = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            v[m] += alpha * p[m];
            r[m] -= alpha * ap[m];
            rr_next += r[m] * r[m];
        }
        if (rr_next <= target2) return v;
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t m = 0; m < n; ++m) p[m] = r[m] + beta * p[m];
    }
    throw NoConvergence("inverse_laplacian: CG missed the residual bound", cap,
                        std::sqrt(rr / wn2));
}

} // namespace cylch
