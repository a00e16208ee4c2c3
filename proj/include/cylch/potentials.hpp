#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cylch/errors.hpp"
#include "cylch/quadrature.hpp"

namespace cylch {

enum class PotentialFamily { Polynomial, PowerLawSingular, Logarithmic };

/// Values of the nonlinearity and its derived quantities at one point.
struct PotentialValues {
    double f;       // f(u) = f0(u) - K*u
    double f_prime; // f'(u)
    double F;       // antiderivative of f with F(0) = 0
    double f0;      // monotone part f0(u) = f(u) + K*u
    double F_half;  // int_0^u sqrt(f0'(v)) dv
};

/// One of the three nonlinearity families with its monotone-split constant K.
/// The stored data describe the monotone part f0; the physical nonlinearity
/// is f(u) = f0(u) - K*u. Immutable after construction; evaluation is pure.
class PotentialSpec {
public:
    /// Evaluation guard for the singular families: |u| <= 1 - kClipMargin.
    static constexpr double kClipMargin = 1e-9;
    /// Relative tolerance of the adaptive quadrature used for F_half.
    static constexpr double kQuadTol = 1e-10;

    /// Polynomial family: f0 given by ascending coefficients c0..cp.
    static PotentialSpec polynomial(std::vector<double> f0_coefficients, double K) {
        PotentialSpec s;
        s.family_ = PotentialFamily::Polynomial;
        s.coeff_ = std::move(f0_coefficients);
        s.K_ = K;
        s.validate();
        return s;
    }
    /// Power-law singular family: f0(u) = u / (1 - u^2)^gamma, gamma > 0.
    static PotentialSpec power_law(double gamma, double K) {
        PotentialSpec s;
        s.family_ = PotentialFamily::PowerLawSingular;
        s.gamma_ = gamma;
        s.K_ = K;
        s.validate();
        return s;
    }
    /// Logarithmic family: f0(u) = log((1+u)/(1-u)).
    static PotentialSpec logarithmic(double K) {
        PotentialSpec s;
        s.family_ = PotentialFamily::Logarithmic;
        s.K_ = K;
        s.validate();
        return s;
    }

    PotentialFamily family() const { return family_; }
    double K() const { return K_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& coefficients() const { return coeff_; }
    bool singular() const { return family_ != PotentialFamily::Polynomial; }
    int leading_degree() const { return static_cast<int>(coeff_.size()) - 1; }

    /// (-1, 1) for the singular families, all of R for Polynomial.
    std::pair<double, double> admissible_interval() const {
        if (singular()) return {-1.0, 1.0};
        return {-std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
    }

    void check_admissible(double u) const {
        if (!std::isfinite(u)) throw DomainViolation("potential: non-finite argument");
        if (singular() && std::abs(u) > 1.0 - kClipMargin)
            throw DomainViolation("potential: |u| exceeds the singular clip margin");
    }

    double f0(double u) const {
        check_admissible(u);
        switch (family_) {
        case PotentialFamily::Polynomial: {
            double s = 0.0;
            for (std::size_t m = coeff_.size(); m-- > 0;) s = s * u + coeff_[m];
            return s;
        }
        case PotentialFamily::PowerLawSingular:
            return u * std::pow(1.0 - u * u, -gamma_);
        case PotentialFamily::Logarithmic:
            return std::log((1.0 + u) / (1.0 - u));
        }
        return 0.0;
    }

    double f0_prime(double u) const {
        check_admissible(u);
        switch (family_) {
        case PotentialFamily::Polynomial: {
            double s = 0.0;
            for (std::size_t m = coeff_.size(); m-- > 1;)
                s = s * u + coeff_[m] * static_cast<double>(m);
            return s;
        }
        case PotentialFamily::PowerLawSingular: {
            const double q = 1.0 - u * u;
            return (1.0 + (2.0 * gamma_ - 1.0) * u * u) * std::pow(q, -gamma_ - 1.0);
        }
        case PotentialFamily::Logarithmic:
            return 2.0 / (1.0 - u * u);
        }
        return 0.0;
    }

    double f(double u) const { return f0(u) - K_ * u; }
    double f_prime(double u) const { return f0_prime(u) - K_; }

    /// Antiderivative of f, normalized to F(0) = 0. Closed forms throughout.
    double F(double u) const {
        check_admissible(u);
        double F0;
        switch (family_) {
        case PotentialFamily::Polynomial: {
            double s = 0.0;
            for (std::size_t m = coeff_.size(); m-- > 0;)
                s = s * u + coeff_[m] / static_cast<double>(m + 1);
            F0 = s * u;
            break;
        }
        case PotentialFamily::PowerLawSingular: {
            const double q = 1.0 - u * u;
            F0 = gamma_ == 1.0 ? -0.5 * std::log(q)
                               : (std::pow(q, 1.0 - gamma_) - 1.0) / (2.0 * (gamma_ - 1.0));
            break;
        }
        case PotentialFamily::Logarithmic:
            // (1+u)log(1+u) + (1-u)log(1-u); u = +-1 excluded by the clip margin
            F0 = (1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u);
            break;
        }
        return F0 - 0.5 * K_ * u * u;
    }

    /// F_half(u) = int_0^u sqrt(f0'(v)) dv; odd, F_half(0) = 0. Closed form for
    /// the logarithmic family and for affine f0, adaptive quadrature otherwise.
    /// sqrt(max(f0', 0)) guards roundoff-negative values of f0'.
    double F_half(double u) const {
        check_admissible(u);
        switch (family_) {
        case PotentialFamily::Logarithmic:
            return std::sqrt(2.0) * std::asin(u);
        case PotentialFamily::Polynomial:
            if (coeff_.size() <= 2) {
                const double c1 = coeff_.size() == 2 ? coeff_[1] : 0.0;
                return std::sqrt(std::max(c1, 0.0)) * u;
            }
            [[fallthrough]];
        case PotentialFamily::PowerLawSingular:
            return integrate_adaptive(
                [this](double v) { return std::sqrt(std::max(f0_prime(v), 0.0)); }, 0.0, u,
                kQuadTol);
        }
        return 0.0;
    }

    PotentialValues evaluate(double u) const {
        return {f(u), f_prime(u), F(u), f0(u), F_half(u)};
    }

private:
    PotentialSpec() = default;

    void validate() const {
        if (!(K_ >= 0.0)) throw ValidationError("potential: K must be nonnegative");
        switch (family_) {
        case PotentialFamily::Polynomial: {
            if (coeff_.empty()) throw ValidationError("potential: empty coefficient list");
            bool all_zero = true;
            for (double c : coeff_)
                if (c != 0.0) all_zero = false;
            if (all_zero) {
                // the zero nonlinearity: admissible only with K = 0, otherwise
                // f(u)u = -K u^2 is unbounded below
                if (K_ != 0.0)
                    throw ValidationError("potential: zero polynomial requires K = 0");
                break;
            }
            const int p = leading_degree();
            if (p % 2 == 0)
                throw ValidationError("potential: leading degree of f0 must be odd");
            if (!(coeff_.back() > 0.0))
                throw ValidationError("potential: leading coefficient of f0 must be positive");
            // monotone split: dense sampling of f0' >= 0 on a wide interval;
            // the positive odd leading term handles |u| beyond it
            for (int m = 0; m <= 2000; ++m) {
                const double u = -10.0 + 20.0 * m / 2000.0;
                double s = 0.0;
                for (std::size_t q = coeff_.size(); q-- > 1;)
                    s = s * u + coeff_[q] * static_cast<double>(q);
                if (s < -1e-12)
                    throw ValidationError("potential: f0 is not nondecreasing for the stored K");
            }
            break;
        }
        case PotentialFamily::PowerLawSingular:
            if (!(gamma_ > 0.0)) throw ValidationError("potential: gamma must be positive");
            break;
        case PotentialFamily::Logarithmic:
            break;
        }
    }

    PotentialFamily family_ = PotentialFamily::Polynomial;
    std::vector<double> coeff_;
    double gamma_ = 0.0;
    double K_ = 0.0;
};

inline PotentialValues evaluate_potential(const PotentialSpec& spec, double u) {
    return spec.evaluate(u);
}

inline std::pair<double, double> admissible_interval(const PotentialSpec& spec) {
    return spec.admissible_interval();
}

/// Pass/fail per structural clause plus the smallest constants consistent
/// with the sampled inequalities. Report-only; never mutates its input.
struct ValidationReport {
    std::map<std::string, bool> regular_conditions;
    std::map<std::string, bool> singular_conditions;
    std::map<std::string, double> measured_constants;

    bool all_pass() const {
        for (const auto& [k, v] : regular_conditions)
            if (!v) return false;
        for (const auto& [k, v] : singular_conditions)
            if (!v) return false;
        return true;
    }
};

/// The uniqueness theory covers power-law singularities with gamma >= 5/3;
/// it is open for the logarithmic family.
inline constexpr double kUniquenessGammaThreshold = 5.0 / 3.0;

inline bool uniqueness_established(const PotentialSpec& spec) {
    switch (spec.family()) {
    case PotentialFamily::Polynomial: return true;
    case PotentialFamily::PowerLawSingular:
        return spec.gamma() >= kUniquenessGammaThreshold - 1e-12;
    case PotentialFamily::Logarithmic: return false;
    }
    return false;
}

inline ValidationReport validate_spec(const PotentialSpec& spec, int samples) {
    if (samples < 100) throw ValidationError("validate_spec: samples must be >= 100");
    ValidationReport rep;
    auto& meas = rep.measured_constants;

    if (!spec.singular()) {
        const double R = 10.0;
        double minfu = 0.0, minfp = 0.0, minf0p = 0.0, minF = 0.0;
        double c1_growth = std::numeric_limits<double>::infinity();
        double c1_freg = 0.0;
        const int p = spec.leading_degree();
        for (int m = 0; m <= samples; ++m) {
            const double u = -R + 2.0 * R * m / samples;
            const double fv = spec.f(u);
            const double Fv = spec.F(u);
            minfu = std::min(minfu, fv * u);
            minfp = std::min(minfp, spec.f_prime(u));
            minf0p = std::min(minf0p, spec.f0_prime(u));
            minF = std::min(minF, Fv);
            c1_freg = std::max(c1_freg, std::abs(spec.f_prime(u)) / (std::max(Fv, 0.0) + 1.0));
        }
        const double C = std::max(0.0, -minfu);
        for (int m = 0; m <= samples; ++m) {
            const double u = -R + 2.0 * R * m / samples;
            if (std::abs(u) < 1.0) continue;
            c1_growth = std::min(c1_growth,
                                 (spec.f(u) * u + C) / std::pow(std::abs(u), p + 1));
        }
        meas["C"] = C;
        meas["K_fit"] = std::max(0.0, -minfp);
        meas["p"] = static_cast<double>(p);
        meas["C1_growth"] = c1_growth;
        meas["C1_freg"] = c1_freg;
        meas["C2_freg"] = c1_freg * (1.0 + std::max(0.0, -minF));
        rep.regular_conditions["sign_condition"] = std::isfinite(C);
        rep.regular_conditions["slope_lower_bound"] = meas["K_fit"] <= spec.K() + 1e-9;
        rep.regular_conditions["polynomial_growth"] = c1_growth > 0.0;
        rep.regular_conditions["fprime_dominated_by_F"] =
            std::isfinite(c1_freg) && std::isfinite(meas["C2_freg"]);
        rep.regular_conditions["monotone_split"] = minf0p >= -1e-12;
    } else {
        // dense interior sampling plus a geometric ladder toward the endpoints
        const double edge = 1.0 - 1e-6;
        double minf0p = std::numeric_limits<double>::infinity();
        for (int m = 0; m <= samples; ++m) {
            const double u = -edge + 2.0 * edge * m / samples;
            minf0p = std::min(minf0p, spec.f0_prime(u));
        }
        std::vector<double> ladder;
        for (int k = 1; k <= 8; ++k) ladder.push_back(1.0 - std::pow(10.0, -k));
        bool blowup = true, fprime_blowup = true;
        for (std::size_t m = 1; m < ladder.size(); ++m) {
            if (!(spec.f(ladder[m]) > spec.f(ladder[m - 1]))) blowup = false;
            if (!(spec.f_prime(ladder[m]) > spec.f_prime(ladder[m - 1]))) fprime_blowup = false;
        }
        // divergence may be slow (logarithmic), so ask for sustained growth
        // along the geometric ladder rather than a fixed magnitude
        blowup = blowup && spec.f(ladder.back()) > 10.0 &&
                 spec.f(ladder.back()) > 1.5 * spec.f(ladder[2]) &&
                 spec.f(-ladder.back()) < -10.0;
        fprime_blowup = fprime_blowup && spec.f_prime(ladder.back()) > 1e2;

        // growth of f' against |f|^{8/5}: the fitted prefactor stays bounded
        // along the ladder exactly when the singularity is strong enough
        const double C3 = std::abs(spec.f_prime(0.0)) + 1.0;
        double alpha3_prev = 0.0, alpha3 = 0.0;
        for (std::size_t m = 0; m < ladder.size(); ++m) {
            const double u = ladder[m];
            const double a =
                std::max(0.0, (std::abs(spec.f_prime(u)) - C3) /
                                  std::pow(std::max(std::abs(spec.f(u)), 1.0), 1.6));
            alpha3_prev = alpha3;
            alpha3 = std::max(alpha3, a);
        }
        const bool growth_ok = alpha3 <= alpha3_prev * 1.2 + 1e-12;

        meas["min_f0_prime"] = minf0p;
        meas["f_at_edge"] = spec.f(ladder.back());
        meas["alpha3"] = alpha3;
        if (spec.family() == PotentialFamily::PowerLawSingular)
            meas["gamma"] = spec.gamma();
        rep.singular_conditions["blowup"] = blowup;
        rep.singular_conditions["fprime_blowup"] = fprime_blowup;
        rep.singular_conditions["monotone_split"] = minf0p >= -1e-12;
        rep.singular_conditions["fprime_growth_exponent"] = growth_ok;
        rep.singular_conditions["uniqueness_threshold"] = uniqueness_established(spec);
    }
    return rep;
}

inline std::string family_name(PotentialFamily f) {
    switch (f) {
    case PotentialFamily::Polynomial: return "polynomial";
    case PotentialFamily::PowerLawSingular: return "powerlaw";
    case PotentialFamily::Logarithmic: return "logarithmic";
    }
    return "?";
}

} // namespace cylch
