#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cylch/errors.hpp"

namespace cylch {

enum class DomainMode { Strip, Cylinder };

/// Uniform tensor grid over the truncated domain [-L, L] x (0,1) (strip) or
/// [-L, L] x (0,1)^2 (cylinder). Boundary nodes carry the Dirichlet value 0
/// and are not stored; fields hold interior nodes only, row-major with the
/// axial index slowest.
struct GridSpec {
    double L = 16.0;          // axial half-length, x1 in [-L, L]
    int nx = 256;             // cells along the axial direction
    int ny = 16;              // cells across the first transverse direction
    int nz = 16;              // cells across the second transverse direction (cylinder only)
    DomainMode mode = DomainMode::Strip;

    GridSpec() = default;
    GridSpec(double L_, int nx_, int ny_, DomainMode mode_ = DomainMode::Strip, int nz_ = 16)
        : L(L_), nx(nx_), ny(ny_), nz(nz_), mode(mode_) {
        validate();
    }

    void validate() const {
        if (!(L > 0.0)) throw ValidationError("grid: L must be positive");
        if (nx < 4 || ny < 4 || (mode == DomainMode::Cylinder && nz < 4))
            throw ValidationError("grid: cell counts must be >= 4 per axis");
        // unit windows [s, s+1] must span an integer number of axial cells
        const double cells_per_unit = 1.0 / hx();
        if (std::abs(cells_per_unit - std::round(cells_per_unit)) > 1e-9 ||
            std::round(cells_per_unit) < 1.0)
            throw ValidationError("grid: 1/h_axial = nx/(2L) must be a positive integer");
        if (2.0 * L < 1.0)
            throw ValidationError("grid: axial extent must contain at least one unit window");
    }

    int dims() const { return mode == DomainMode::Cylinder ? 3 : 2; }
    double hx() const { return 2.0 * L / nx; }
    double hy() const { return 1.0 / ny; }
    double hz() const { return 1.0 / nz; }
    double cell_volume() const { return dims() == 3 ? hx() * hy() * hz() : hx() * hy(); }
    int cells_per_unit_window() const { return static_cast<int>(std::round(1.0 / hx())); }

    // interior node counts per axis
    int mx() const { return nx - 1; }
    int my() const { return ny - 1; }
    int mz() const { return dims() == 3 ? nz - 1 : 1; }
    std::int64_t interior_count() const {
        return static_cast<std::int64_t>(mx()) * my() * mz();
    }

    // coordinates of interior node (i, j, k), 0-based interior indices
    double x_of(int i) const { return -L + (i + 1) * hx(); }
    double y_of(int j) const { return (j + 1) * hy(); }
    double z_of(int k) const { return (k + 1) * hz(); }
    // coordinate of a global axial node g in [0, nx] (g=0 and g=nx are boundary)
    double x_of_global(int g) const { return -L + g * hx(); }

    bool operator==(const GridSpec& o) const {
        return L == o.L && nx == o.nx && ny == o.ny && mode == o.mode &&
               (mode == DomainMode::Strip || nz == o.nz);
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Real-valued function sampled on the interior nodes of a GridSpec.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid)
        : grid_(grid), v_(static_cast<std::size_t>(grid.interior_count()), 0.0) {}

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    double& operator[](std::size_t n) { return v_[n]; }
    double operator[](std::size_t n) const { return v_[n]; }

    std::size_t index(int i, int j, int k = 0) const {
        return (static_cast<std::size_t>(i) * grid_.my() + j) * grid_.mz() + k;
    }
    double& at(int i, int j, int k = 0) { return v_[index(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return v_[index(i, j, k)]; }

    /// Interior value, or the Dirichlet 0 outside the interior index range.
    double at_or_zero(int i, int j, int k = 0) const {
        if (i < 0 || i >= grid_.mx() || j < 0 || j >= grid_.my() || k < 0 || k >= grid_.mz())
            return 0.0;
        return v_[index(i, j, k)];
    }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    ScalarField& operator+=(const ScalarField& o) {
        require_same_grid(o);
        for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same_grid(o);
        for (std::size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n];
        return *this;
    }
    ScalarField& operator*=(double a) {
        for (double& x : v_) x *= a;
        return *this;
    }

    void require_same_grid(const ScalarField& o) const {
        if (grid_ != o.grid_) throw GridMismatch("fields live on different grids");
    }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double a, ScalarField u) { return u *= a; }

/// Sample fn(x, y[, z]) at every interior node.
template <class Fn>
ScalarField sample_field(const GridSpec& g, Fn&& fn) {
    ScalarField u(g);
    for (int i = 0; i < g.mx(); ++i)
        for (int j = 0; j < g.my(); ++j)
            for (int k = 0; k < g.mz(); ++k)
                u.at(i, j, k) = g.dims() == 3 ? fn(g.x_of(i), g.y_of(j), g.z_of(k))
                                              : fn(g.x_of(i), g.y_of(j), 0.0);
    return u;
}

} // namespace cylch
