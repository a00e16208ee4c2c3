#pragma once

#include <cmath>
#include <functional>

#include "cylch/errors.hpp"

namespace cylch {

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class Fn>
inline void gk15(Fn&& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kKronrodW[7] * fc;
    double resg = kGaussW[3] * fc;
    for (int m = 0; m < 7; ++m) {
        const double x = h * kGkNodes[m];
        const double fsum = f(c - x) + f(c + x);
        resk += kKronrodW[m] * fsum;
        if (m % 2 == 1) resg += kGaussW[m / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] (a <= b or a > b) to
/// relative tolerance rel_tol (with absolute floor abs_tol). Bisects the
/// worst panel first via a small fixed-size stack of pending intervals.
template <class Fn>
double integrate_adaptive(Fn&& f, double a, double b, double rel_tol = 1e-10,
                          double abs_tol = 1e-14) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    struct Panel {
        double a, b, val, err;
    };
    constexpr int kMaxPanels = 4096;
    static thread_local std::vector<Panel> stack;
    stack.clear();
    Panel root{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, root.val, root.err);
    stack.push_back(root);
    double total = root.val, toterr = root.err;
    while (!std::isfinite(total) || !std::isfinite(toterr) ||
           toterr > std::max(abs_tol, rel_tol * std::abs(total))) {
        // split the panel with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t m = 1; m < stack.size(); ++m)
            if (stack[m].err > stack[worst].err) worst = m;
        Panel p = stack[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b) || static_cast<int>(stack.size()) >= kMaxPanels)
            throw QuadratureFailure("integrate_adaptive: tolerance not met");
        Panel left{p.a, mid, 0.0, 0.0}, right{mid, p.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.val, left.err);
        detail::gk15(f, right.a, right.b, right.val, right.err);
        total += left.val + right.val - p.val;
        toterr += left.err + right.err - p.err;
        stack[worst] = left;
        stack.push_back(right);
    }
    return sign * total;
}

} // namespace cylch
