#pragma once

// Closed-form speed fields lambda(t, x) for the boundary-coupled transport
// problem, with analytic range and slope bounds.

#include <cmath>
#include <variant>
#include <vector>

#include "delaydiff/common.hpp"

namespace delaydiff {

/// One scalar factor f(s) = offset + amp * sin(freq * s + phase).
struct WaveFactor {
    double offset = 1.0;
    double amp = 0.0;
    double freq = 1.0;
    double phase = 0.0;

    double operator()(double s) const { return offset + amp * std::sin(freq * s + phase); }
    double derivative(double s) const { return amp * freq * std::cos(freq * s + phase); }
    double lo() const { return offset - std::abs(amp); }
    double hi() const { return offset + std::abs(amp); }
    double max_abs() const { return std::max(std::abs(lo()), std::abs(hi())); }
    double max_abs_derivative() const { return std::abs(amp * freq); }
};

struct ConstantSpeed {
    double value = 1.0;
};

/// lambda(t, x) = a(t) * b(x).
struct SeparableSpeed {
    WaveFactor time_factor;
    WaveFactor space_factor;
};

/// lambda(t, x) = sum_k a_k(t) * b_k(x).
struct AdditiveSeparableSpeed {
    std::vector<SeparableSpeed> terms;
};

/// Speed field with certified bounds 0 < lambda_min <= lambda <= lambda_max
/// and |d lambda / dx| <= L.
struct TransportField {
    std::variant<ConstantSpeed, SeparableSpeed, AdditiveSeparableSpeed> form;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double slope_bound = 0.0;  ///< L

    double operator()(double t, double x) const {
        return std::visit(
            [&](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, ConstantSpeed>) {
                    return f.value;
                } else if constexpr (std::is_same_v<F, SeparableSpeed>) {
                    return f.time_factor(t) * f.space_factor(x);
                } else {
                    double s = 0.0;
                    for (const auto& term : f.terms) s += term.time_factor(t) * term.space_factor(x);
                    return s;
                }
            },
            form);
    }

    double dx(double t, double x) const {
        return std::visit(
            [&](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, ConstantSpeed>) {
                    (void)t;
                    (void)x;
                    return 0.0;
                } else if constexpr (std::is_same_v<F, SeparableSpeed>) {
                    return f.time_factor(t) * f.space_factor.derivative(x);
                } else {
                    double s = 0.0;
                    for (const auto& term : f.terms) s += term.time_factor(t) * term.space_factor.derivative(x);
                    return s;
                }
            },
            form);
    }
};

inline TransportField make_constant_field(double lambda0) {
    if (!(lambda0 > 0)) throw ConstructionError("transport field: constant speed must be positive");
    TransportField f;
    f.form = ConstantSpeed{lambda0};
    f.lambda_min = f.lambda_max = lambda0;
    f.slope_bound = 0.0;
    return f;
}

/// Conservative interval bounds for a product of two wave factors; both
/// factors must stay positive so the product bounds factorize.
inline TransportField make_separable_field(const WaveFactor& a, const WaveFactor& b) {
    if (!(a.lo() > 0) || !(b.lo() > 0))
        throw ConstructionError("transport field: separable factors must be positive over their full range");
    TransportField f;
    f.form = SeparableSpeed{a, b};
    f.lambda_min = a.lo() * b.lo();
    f.lambda_max = a.hi() * b.hi();
    f.slope_bound = a.max_abs() * b.max_abs_derivative();
    return f;
}

inline TransportField make_additive_field(const std::vector<SeparableSpeed>& terms) {
    if (terms.empty()) throw ConstructionError("transport field: need at least one term");
    double lo = 0.0, hi = 0.0, L = 0.0;
    for (const auto& term : terms) {
        // term-wise interval arithmetic; factors may change sign as long as
        // the certified total stays positive.
        const double alo = term.time_factor.lo(), ahi = term.time_factor.hi();
        const double blo = term.space_factor.lo(), bhi = term.space_factor.hi();
        const double c1 = alo * blo, c2 = alo * bhi, c3 = ahi * blo, c4 = ahi * bhi;
        lo += std::min(std::min(c1, c2), std::min(c3, c4));
        hi += std::max(std::max(c1, c2), std::max(c3, c4));
        L += term.time_factor.max_abs() * term.space_factor.max_abs_derivative();
    }
    if (!(lo > 0)) throw ConstructionError("transport field: certified lower speed bound must be positive");
    TransportField f;
    f.form = AdditiveSeparableSpeed{terms};
    f.lambda_min = lo;
    f.lambda_max = hi;
    f.slope_bound = L;
    return f;
}

}  // namespace delaydiff
