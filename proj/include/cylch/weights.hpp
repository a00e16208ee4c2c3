#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cylch/field.hpp"
#include "cylch/operators.hpp"

namespace cylch {

/// Exponential axial weight phi_{eps,s}(x1) = exp(-eps*sqrt((x1-s)^2+1)).
/// Integrable, with |phi'| <= eps*phi and |phi'| + |phi''| <= 2*eps*phi
/// for eps <= 1.
struct WeightSpec {
    double eps = 0.1; // in (0, 1]
    double s = 0.0;   // center

    WeightSpec() = default;
    WeightSpec(double eps_, double s_) : eps(eps_), s(s_) {
        if (!(eps > 0.0 && eps <= 1.0))
            throw ValidationError("weight: eps must lie in (0, 1]");
    }
};

struct WeightValues {
    double phi;
    double dphi;
    double ddphi;
};

inline WeightValues eval_weight(const WeightSpec& w, double x1) {
    const double r = x1 - w.s;
    const double q = std::sqrt(r * r + 1.0);
    const double phi = std::exp(-w.eps * q);
    const double dphi = -w.eps * (r / q) * phi;
    const double ddphi = (w.eps * w.eps * (r * r) / (q * q) - w.eps / (q * q * q)) * phi;
    return {phi, dphi, ddphi};
}

/// Empty optional means the uniform weight 1.
using Weight = std::optional<WeightSpec>;

/// Weight sampled at every global axial node 0..nx (boundary included),
/// the layout consumed by the face-based forms in operators.hpp.
inline std::vector<double> axial_weight_profile(const Weight& w, const GridSpec& g) {
    std::vector<double> prof(static_cast<std::size_t>(g.nx) + 1, 1.0);
    if (w)
        for (int ga = 0; ga <= g.nx; ++ga)
            prof[static_cast<std::size_t>(ga)] = eval_weight(*w, g.x_of_global(ga)).phi;
    return prof;
}

/// Weighted node quadrature of |u|^p; returns the L^p_phi norm.
inline double weighted_lp_norm(const ScalarField& u, const std::vector<double>* phi, double p) {
    const GridSpec& g = u.grid();
    double s = 0.0;
    for (int i = 0; i < g.mx(); ++i) {
        const double w = phi ? (*phi)[static_cast<std::size_t>(i) + 1] : 1.0;
        double acc = 0.0;
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) acc += std::pow(std::abs(u.at(i, j, k)), p);
        s += w * acc;
    }
    return std::pow(s * g.cell_volume(), 1.0 / p);
}

inline constexpr double kHminus1SolveTol = 1e-10;

/// Weighted norms of Sobolev order in {-1, 0, 1, 2}:
///   order  0: (int |u|^p phi)^(1/p);
///   order  1: L2_phi of u and its face differences, root-sum-square;
///   order  2: additionally the weighted L2 norm of the discrete Laplacian
///             (equivalent to the full second-difference energy under
///             Dirichlet conditions);
///   order -1: weighted gradient norm of inverse_laplacian(u), the discrete
///             H^{-1}_phi norm (unweighted solve, then weighted gradient).
/// Orders other than 0 require p = 2.
inline double weighted_norm(const ScalarField& u, const Weight& w, double p, int order) {
    if (!(p >= 1.0)) throw UnsupportedCombination("weighted_norm: p must be >= 1");
    if (order != 0 && p != 2.0)
        throw UnsupportedCombination("weighted_norm: p must equal 2 for order != 0");
    const std::vector<double> prof = axial_weight_profile(w, u.grid());
    const std::vector<double>* pp = w ? &prof : nullptr;
    switch (order) {
    case 0:
        return weighted_lp_norm(u, pp, p);
    case 1: {
        const double l2 = weighted_lp_norm(u, pp, 2.0);
        return std::sqrt(l2 * l2 + weighted_grad_form(u, u, pp));
    }
    case 2: {
        const double l2 = weighted_lp_norm(u, pp, 2.0);
        const double lap = weighted_lp_norm(apply_laplacian(u), pp, 2.0);
        return std::sqrt(l2 * l2 + weighted_grad_form(u, u, pp) + lap * lap);
    }
    case -1: {
        ScalarField v = inverse_laplacian(u, kHminus1SolveTol);
        return std::sqrt(weighted_grad_form(v, v, pp));
    }
    default:
        throw UnsupportedCombination("weighted_norm: order must be in {-1, 0, 1, 2}");
    }
}

/// Unit-width axial windows [s, s+1] whose anchors step by `stride`
/// (a positive integer multiple of the axial spacing; default one cell).
struct WindowSet {
    double stride = 0.0;
    int width_cells = 0;
    std::vector<int> anchor_cells;  // anchor s = -L + cell*hx
    std::vector<double> anchors;

    static WindowSet make(const GridSpec& g, double stride = 0.0) {
        WindowSet ws;
        const double hx = g.hx();
        if (stride <= 0.0) stride = hx;
        const double cells = stride / hx;
        if (std::abs(cells - std::round(cells)) > 1e-9 || std::round(cells) < 1.0)
            throw ValidationError("windows: stride must be a positive multiple of the axial spacing");
        const int step = static_cast<int>(std::round(cells));
        ws.stride = step * hx;
        ws.width_cells = g.cells_per_unit_window();
        for (int c = 0; c + ws.width_cells <= g.nx; c += step) {
            ws.anchor_cells.push_back(c);
            ws.anchors.push_back(g.x_of_global(c));
        }
        if (ws.anchors.empty()) throw ValidationError("windows: no admissible anchors");
        return ws;
    }
};

struct ULNormResult {
    double value = 0.0;
    double argmax_window = 0.0;
};

namespace detail {

/// Per-axial-column reductions used to assemble window norms. Columns are
/// indexed by global axial node 0..nx; boundary columns contribute zero.
struct ColumnSums {
    std::vector<double> lp;        // sum_j |u|^p at the column
    std::vector<double> grad_tr;   // transverse face differences^2 / h^2 at the column
    std::vector<double> lap2;      // sum_j (laplacian u)^2
    std::vector<double> grad_ax;   // axial face (Du/hx)^2, entry f between nodes f, f+1
};

inline ColumnSums column_sums(const ScalarField& u, double p, int order) {
    const GridSpec& g = u.grid();
    ColumnSums cs;
    cs.lp.assign(static_cast<std::size_t>(g.nx) + 1, 0.0);
    for (int i = 0; i < g.mx(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k) acc += std::pow(std::abs(u.at(i, j, k)), p);
        cs.lp[static_cast<std::size_t>(i) + 1] = acc;
    }
    if (order >= 1) {
        cs.grad_tr.assign(static_cast<std::size_t>(g.nx) + 1, 0.0);
        cs.grad_ax.assign(static_cast<std::size_t>(g.nx), 0.0);
        for (int i = 0; i < g.mx(); ++i) {
            double acc = 0.0;
            for (int jf = 0; jf < g.ny; ++jf)
                for (int k = 0; k < g.mz(); ++k) {
                    const double d = u.at_or_zero(i, jf, k) - u.at_or_zero(i, jf - 1, k);
                    acc += d * d;
                }
            acc /= g.hy() * g.hy();
            if (g.dims() == 3) {
                double accz = 0.0;
                for (int j = 0; j < g.my(); ++j)
                    for (int kf = 0; kf < g.nz; ++kf) {
                        const double d = u.at_or_zero(i, j, kf) - u.at_or_zero(i, j, kf - 1);
                        accz += d * d;
                    }
                acc += accz / (g.hz() * g.hz());
            }
            cs.grad_tr[static_cast<std::size_t>(i) + 1] = acc;
        }
        for (int f = 0; f < g.nx; ++f) {
            double acc = 0.0;
            for (int j = 0; j < g.my(); ++j)
                for (int k = 0; k < g.mz(); ++k) {
                    const double d = u.at_or_zero(f, j, k) - u.at_or_zero(f - 1, j, k);
                    acc += d * d;
                }
            cs.grad_ax[static_cast<std::size_t>(f)] = acc / (g.hx() * g.hx());
        }
    }
    if (order >= 2) {
        cs.lap2.assign(static_cast<std::size_t>(g.nx) + 1, 0.0);
        ScalarField lap = apply_laplacian(u);
        for (int i = 0; i < g.mx(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < g.my(); ++j)
                for (int k = 0; k < g.mz(); ++k) {
                    const double d = lap.at(i, j, k);
                    acc += d * d;
                }
            cs.lap2[static_cast<std::size_t>(i) + 1] = acc;
        }
    }
    return cs;
}

/// p-th power of the window norm anchored at cell c. Node columns at the two
/// window edges carry trapezoidal half weight; axial faces are assigned to
/// the window containing their midpoint.
inline double window_power(const ColumnSums& cs, const GridSpec& g, int c, int width,
                           int order) {
    double node = 0.0;
    for (int q = 0; q <= width; ++q) {
        const double w = (q == 0 || q == width) ? 0.5 : 1.0;
        node += w * cs.lp[static_cast<std::size_t>(c + q)];
    }
    double total = node * g.cell_volume();
    if (order >= 1) {
        double gsum = 0.0;
        for (int q = 0; q <= width; ++q) {
            const double w = (q == 0 || q == width) ? 0.5 : 1.0;
            gsum += w * cs.grad_tr[static_cast<std::size_t>(c + q)];
        }
        for (int f = c; f < c + width; ++f) gsum += cs.grad_ax[static_cast<std::size_t>(f)];
        total += gsum * g.cell_volume();
    }
    if (order >= 2) {
        double lsum = 0.0;
        for (int q = 0; q <= width; ++q) {
            const double w = (q == 0 || q == width) ? 0.5 : 1.0;
            lsum += w * cs.lap2[static_cast<std::size_t>(c + q)];
        }
        total += lsum * g.cell_volume();
    }
    return total;
}

} // namespace detail

/// sup over unit windows of the unweighted window norm; returns the value and
/// the maximizing anchor. Orders 1 and 2 require p = 2.
inline ULNormResult uniformly_local_norm(const ScalarField& u, const WindowSet& ws, double p,
                                         int order) {
    if (!(p >= 1.0)) throw UnsupportedCombination("uniformly_local_norm: p must be >= 1");
    if (order != 0 && p != 2.0)
        throw UnsupportedCombination("uniformly_local_norm: p must equal 2 for order != 0");
    if (order < 0 || order > 2)
        throw UnsupportedCombination("uniformly_local_norm: order must be in {0, 1, 2}");
    const GridSpec& g = u.grid();
    if (ws.anchor_cells.empty() ||
        ws.anchor_cells.back() + ws.width_cells > g.nx)
        throw GridMismatch("uniformly_local_norm: window set does not fit the grid");
    const detail::ColumnSums cs = detail::column_sums(u, order == 0 ? p : 2.0, order);
    ULNormResult best;
    best.argmax_window = ws.anchors.front();
    for (std::size_t m = 0; m < ws.anchor_cells.size(); ++m) {
        const double v = detail::window_power(cs, g, ws.anchor_cells[m], ws.width_cells, order);
        if (v > best.value) {
            best.value = v;
            best.argmax_window = ws.anchors[m];
        }
    }
    best.value = std::pow(best.value, 1.0 / (order == 0 ? p : 2.0));
    return best;
}

/// Space-time uniformly local norm of a snapshot series: per window,
/// (int_{t0}^{t0+1} window_norm(q(t))^p dt)^(1/p) by trapezoidal quadrature
/// over the stored snapshot times, then the sup over windows. `field_at(m)`
/// materializes the spatial quantity for selected snapshot index m.
template <class FieldAt>
ULNormResult spacetime_ul_norm_over(const std::vector<double>& times, double t0, double p_time,
                                    const WindowSet& ws, double p_space, int order,
                                    FieldAt&& field_at) {
    std::vector<std::size_t> sel;
    for (std::size_t m = 0; m < times.size(); ++m)
        if (times[m] >= t0 - 1e-12 && times[m] <= t0 + 1.0 + 1e-12) sel.push_back(m);
    if (sel.size() < 4 || times[sel.back()] - times[sel.front()] < 0.9)
        throw InsufficientSnapshots("spacetime_ul_norm: need >= 4 snapshots covering the unit interval");

    std::vector<double> acc; // per-window time integral of window_norm^p_time
    const double pw = (order == 0 ? p_space : 2.0);
    GridSpec grid;
    std::vector<double> prev_powers;
    double prev_t = 0.0;
    for (std::size_t n = 0; n < sel.size(); ++n) {
        const ScalarField q = field_at(sel[n]);
        grid = q.grid();
        const detail::ColumnSums cs = detail::column_sums(q, pw, order);
        std::vector<double> powers(ws.anchor_cells.size());
        for (std::size_t m = 0; m < ws.anchor_cells.size(); ++m) {
            const double wn = std::pow(
                detail::window_power(cs, grid, ws.anchor_cells[m], ws.width_cells, order),
                1.0 / pw);
            powers[m] = std::pow(wn, p_time);
        }
        if (n == 0) {
            acc.assign(powers.size(), 0.0);
        } else {
            const double dt = times[sel[n]] - prev_t;
            for (std::size_t m = 0; m < powers.size(); ++m)
                acc[m] += 0.5 * dt * (powers[m] + prev_powers[m]);
        }
        prev_powers = std::move(powers);
        prev_t = times[sel[n]];
    }
    ULNormResult best;
    best.argmax_window = ws.anchors.front();
    for (std::size_t m = 0; m < acc.size(); ++m)
        if (acc[m] > best.value) {
            best.value = acc[m];
            best.argmax_window = ws.anchors[m];
        }
    best.value = std::pow(best.value, 1.0 / p_time);
    return best;
}

} // namespace cylch
