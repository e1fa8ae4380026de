#pragma once

// Shared domain types: system matrices with cached spectral data, delay
// descriptors closed under the library's example families, initial-condition
// signals, scenario records, and the hypothesis auditor.

#include <algorithm>
#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "delaydiff/common.hpp"
#include "delaydiff/spectral.hpp"
#include "delaydiff/transport_field.hpp"

namespace delaydiff {

// ---------------------------------------------------------------------------
// SystemMatrix
// ---------------------------------------------------------------------------

/// Square real matrix with eagerly cached spectral radius and Schur form.
/// Immutable after construction; matrix powers reuse the cached factorization.
struct SystemMatrix {
    Mat entries;
    std::optional<double> cached_spectral_radius;
    std::optional<AdaptedNorm> cached_adapted_norm;
    Mat schur_u;  ///< orthogonal factor of the real Schur form
    Mat schur_t;  ///< quasi-triangular factor

    int dim() const { return static_cast<int>(entries.rows()); }

    double rho() const { return *cached_spectral_radius; }

    /// A^n through the cached Schur form: U T^n U^T with T^n by squaring.
    Mat power(long n) const {
        const Eigen::Index d = entries.rows();
        if (n < 0) throw DomainError("SystemMatrix::power: negative exponent");
        Mat result = Mat::Identity(d, d);
        Mat base = schur_t;
        long e = n;
        while (e > 0) {
            if (e & 1) result = result * base;
            base = base * base;
            e >>= 1;
        }
        return schur_u * result * schur_u.transpose();
    }
};

inline SystemMatrix make_system_matrix(const Mat& entries) {
    if (entries.rows() == 0 || entries.rows() != entries.cols())
        throw ConstructionError("SystemMatrix: entries must be square and nonempty");
    if (!entries.allFinite()) throw ConstructionError("SystemMatrix: entries must be finite");
    SystemMatrix m;
    m.entries = entries;
    m.cached_spectral_radius = spectral_radius(entries);
    if (entries.rows() == 1) {
        m.schur_u = Mat::Identity(1, 1);
        m.schur_t = entries;
    } else {
        Eigen::RealSchur<Mat> schur(entries);
        if (schur.info() != Eigen::Success) throw NumericError("SystemMatrix: Schur decomposition failed");
        m.schur_u = schur.matrixU();
        m.schur_t = schur.matrixT();
    }
    return m;
}

inline SystemMatrix make_system_matrix_scalar(double a) {
    Mat m(1, 1);
    m(0, 0) = a;
    return make_system_matrix(m);
}

// ---------------------------------------------------------------------------
// DelaySpec
// ---------------------------------------------------------------------------

enum class Monotonicity { Nondecreasing, NotMonotone, Unknown };
enum class Interp { Linear, LeftConstant };

struct ConstantDelay {
    double c;
};

/// tau(t) = a t + b.
struct AffineDelay {
    double a, b;
};

struct AffinePiece {
    double a, b;
};

/// Piece i applies on [breakpoints[i], breakpoints[i+1]); the last piece
/// extends to +inf. point_values[i], when set, overrides the value exactly at
/// breakpoints[i] (isolated point redefinitions).
struct PiecewiseAffineDelay {
    std::vector<double> breakpoints;
    std::vector<AffinePiece> segments;
    std::vector<std::optional<double>> point_values;
};

/// tau(t) = k on [2^k, 2^k + 1) for positive integers k, and 1 elsewhere.
struct DyadicSpikeDelay {};

struct TabulatedDelay {
    std::vector<double> grid;
    std::vector<double> values;
    Interp interpolation = Interp::Linear;
};

/// Delay induced by a transport speed field through its boundary hitting map.
/// The evaluator is type-erased here; the characteristic machinery that
/// produces it lives in transport.hpp.
struct TransportInducedDelay {
    std::function<double(double)> tau;
    double tau_min = 0.0;     ///< 1 / lambda_max
    double tau_max = 0.0;     ///< 1 / lambda_min
    double alpha_bound = 0.0; ///< certified sup of tau'
    std::shared_ptr<const TransportField> field;
    double ode_step = 0.0;
    double root_tol = 0.0;
};

struct DelaySpec {
    std::variant<ConstantDelay, AffineDelay, PiecewiseAffineDelay, DyadicSpikeDelay, TabulatedDelay,
                 TransportInducedDelay>
        kind;
    std::optional<double> declared_tau_min;
    std::optional<double> declared_tau_max;
    Monotonicity sigma1_monotone = Monotonicity::Unknown;

    double operator()(double t) const;
};

namespace detail {

inline double eval_piecewise_affine(const PiecewiseAffineDelay& pw, double t) {
    const auto& bp = pw.breakpoints;
    auto it = std::upper_bound(bp.begin(), bp.end(), t);
    std::size_t i = (it == bp.begin()) ? 0 : static_cast<std::size_t>(std::distance(bp.begin(), it) - 1);
    if (!pw.point_values.empty() && t == bp[i] && pw.point_values[i].has_value()) return *pw.point_values[i];
    const AffinePiece& s = pw.segments[i];
    return s.a * t + s.b;
}

inline double eval_dyadic(double t) {
    if (t >= 2.0) {
        const int k = static_cast<int>(std::floor(std::log2(t)));
        if (k >= 1 && t < std::ldexp(1.0, k) + 1.0) return static_cast<double>(k);
    }
    return 1.0;
}

inline double eval_tabulated(const TabulatedDelay& tab, double t) {
    const auto& g = tab.grid;
    if (t <= g.front()) return tab.values.front();
    if (t >= g.back()) return tab.values.back();
    auto it = std::upper_bound(g.begin(), g.end(), t);
    const std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it) - 1);
    if (tab.interpolation == Interp::LeftConstant) return tab.values[i];
    const double w = (t - g[i]) / (g[i + 1] - g[i]);
    return (1.0 - w) * tab.values[i] + w * tab.values[i + 1];
}

}  // namespace detail

inline double DelaySpec::operator()(double t) const {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) return k.c;
            else if constexpr (std::is_same_v<K, AffineDelay>) return k.a * t + k.b;
            else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) return detail::eval_piecewise_affine(k, t);
            else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) return detail::eval_dyadic(t);
            else if constexpr (std::is_same_v<K, TabulatedDelay>) return detail::eval_tabulated(k, t);
            else return k.tau(t);
        },
        kind);
}

/// tau(t); requires t >= 0 and a positive value.
inline double eval_delay(const DelaySpec& delay, double t) {
    if (t < 0.0) throw DomainError("eval_delay: delay functions are defined for t >= 0");
    const double v = delay(t);
    if (!(v > 0.0)) throw Error("eval_delay: delay evaluated to a non-positive value");
    return v;
}

/// t - tau(t); requires t >= 0.
inline double sigma1(const DelaySpec& delay, double t) { return t - eval_delay(delay, t); }

// --- factories -------------------------------------------------------------

inline DelaySpec make_constant_delay(double c) {
    if (!(c > 0)) throw ConstructionError("constant delay must be positive");
    DelaySpec d;
    d.kind = ConstantDelay{c};
    d.declared_tau_min = c;
    d.declared_tau_max = c;
    d.sigma1_monotone = Monotonicity::Nondecreasing;
    return d;
}

inline DelaySpec make_affine_delay(double a, double b) {
    if (a < 0) throw ConstructionError("affine delay: slope must be nonnegative to stay positive on [0, inf)");
    if (!(b > 0)) throw ConstructionError("affine delay: value at t = 0 must be positive");
    DelaySpec d;
    d.kind = AffineDelay{a, b};
    d.declared_tau_min = b;
    if (a == 0.0) d.declared_tau_max = b;
    d.sigma1_monotone = (a <= 1.0) ? Monotonicity::Nondecreasing : Monotonicity::NotMonotone;
    return d;
}

inline DelaySpec make_piecewise_affine_delay(std::vector<double> breakpoints, std::vector<AffinePiece> segments,
                                             std::vector<std::optional<double>> point_values = {}) {
    if (breakpoints.empty() || segments.size() != breakpoints.size())
        throw ConstructionError("piecewise delay: need one segment per breakpoint");
    if (breakpoints.front() != 0.0) throw ConstructionError("piecewise delay: first breakpoint must be 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1])) throw ConstructionError("piecewise delay: breakpoints must increase");
    if (!point_values.empty() && point_values.size() != breakpoints.size())
        throw ConstructionError("piecewise delay: point overrides must align with breakpoints");

    const std::size_t n = breakpoints.size();
    for (std::size_t i = 0; i < n; ++i) {
        const AffinePiece& s = segments[i];
        const double l = breakpoints[i];
        const bool last = (i + 1 == n);
        const double vl = s.a * l + s.b;
        const double attained = (!point_values.empty() && point_values[i].has_value()) ? *point_values[i] : vl;
        if (!(attained > 0)) throw ConstructionError("piecewise delay: value at a breakpoint is not positive");
        if (last) {
            if (s.a < 0) throw ConstructionError("piecewise delay: final piece must not decrease forever");
            if (s.a == 0 && !(s.b > 0)) throw ConstructionError("piecewise delay: final piece must stay positive");
            if (vl < 0) throw ConstructionError("piecewise delay: final piece dips below zero");
            if (vl == 0 && s.a <= 0) throw ConstructionError("piecewise delay: final piece touches zero");
        } else {
            const double r = breakpoints[i + 1];
            const double vr = s.a * r + s.b;
            if (vl < 0 || vr < 0) throw ConstructionError("piecewise delay: a piece goes negative inside its interval");
            if (vl == 0 && s.a <= 0) throw ConstructionError("piecewise delay: a piece touches zero from inside");
            if (vr == 0 && s.a >= 0 && vl == 0) throw ConstructionError("piecewise delay: a piece vanishes identically");
        }
    }

    DelaySpec d;
    PiecewiseAffineDelay pw{std::move(breakpoints), std::move(segments), std::move(point_values)};

    // sigma1 monotone iff every piece has slope <= 1 and the attained values
    // at breakpoints do not move backwards.
    bool nondecr = true;
    for (const auto& s : pw.segments)
        if (s.a > 1.0) nondecr = false;
    if (nondecr) {
        for (std::size_t i = 1; i < pw.breakpoints.size() && nondecr; ++i) {
            const double t0 = pw.breakpoints[i];
            const AffinePiece& prev = pw.segments[i - 1];
            const double left_lim = t0 - (prev.a * t0 + prev.b);
            const double at = t0 - detail::eval_piecewise_affine(pw, t0);
            const AffinePiece& cur = pw.segments[i];
            const double right_lim = t0 - (cur.a * t0 + cur.b);
            if (left_lim > at + 1e-15 || at > right_lim + 1e-15) nondecr = false;
        }
        // interior point overrides must also sit between the lateral limits
        if (nondecr && !pw.point_values.empty() && pw.point_values[0].has_value()) {
            const double at0 = 0.0 - *pw.point_values[0];
            const double right0 = 0.0 - pw.segments[0].b;
            if (at0 > right0 + 1e-15) nondecr = false;
        }
    }
    d.sigma1_monotone = nondecr ? Monotonicity::Nondecreasing : Monotonicity::NotMonotone;
    d.kind = std::move(pw);
    return d;
}

inline DelaySpec make_dyadic_spike_delay() {
    DelaySpec d;
    d.kind = DyadicSpikeDelay{};
    d.declared_tau_min = 1.0;
    d.sigma1_monotone = Monotonicity::NotMonotone;
    return d;
}

inline DelaySpec make_tabulated_delay(std::vector<double> grid, std::vector<double> values,
                                      Interp interpolation = Interp::Linear,
                                      std::optional<double> declared_min = std::nullopt,
                                      std::optional<double> declared_max = std::nullopt) {
    if (grid.size() < 2 || grid.size() != values.size())
        throw ConstructionError("tabulated delay: need matching grid/values with at least two nodes");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConstructionError("tabulated delay: grid must be strictly increasing");
    double vmin = kInf, vmax = -kInf;
    for (double v : values) {
        if (!(v > 0) || !std::isfinite(v)) throw ConstructionError("tabulated delay: values must be finite and positive");
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (declared_min && *declared_min > vmin + 1e-15)
        throw ConstructionError("tabulated delay: declared lower bound contradicts the table");
    if (declared_max && *declared_max < vmax - 1e-15)
        throw ConstructionError("tabulated delay: declared upper bound contradicts the table");

    DelaySpec d;
    TabulatedDelay tab{std::move(grid), std::move(values), interpolation};

    bool nondecr = true;
    if (interpolation == Interp::Linear) {
        for (std::size_t i = 1; i < tab.grid.size() && nondecr; ++i) {
            const double s0 = tab.grid[i - 1] - tab.values[i - 1];
            const double s1 = tab.grid[i] - tab.values[i];
            if (s1 < s0 - 1e-15) nondecr = false;
        }
    } else {
        for (std::size_t i = 1; i < tab.grid.size() && nondecr; ++i)
            if (tab.values[i] > tab.values[i - 1] + 1e-15) nondecr = false;
    }
    d.sigma1_monotone = nondecr ? Monotonicity::Nondecreasing : Monotonicity::NotMonotone;
    d.declared_tau_min = declared_min ? declared_min : std::optional<double>(vmin);
    d.declared_tau_max = declared_max ? declared_max : std::optional<double>(vmax);
    d.kind = std::move(tab);
    return d;
}

// ---------------------------------------------------------------------------
// Signal
// ---------------------------------------------------------------------------

enum class Regularity { Continuous, Regulated, Lp, Linf };

struct ConstantForm {
    Vec value;
};

/// s -> |s|^{-beta} * direction; unbounded near s = 0 when beta > 0.
struct PowerForm {
    double beta;
    Vec direction;
};

/// t -> Re(rho * exp(alpha * ln t) * direction) for t > 0, and 0 otherwise.
/// With exp(alpha) an eigenvalue of A this solves x(t) = A x(t/e) for t > 0.
struct ScalarFamilyForm {
    std::complex<double> rho;
    std::complex<double> alpha;
    Eigen::VectorXcd direction;
};

struct SampledForm {
    std::vector<double> grid;
    std::vector<Vec> values;
    Interp interpolation = Interp::Linear;
};

struct Signal {
    double support_left = -1.0;   ///< may be -inf (constant / power forms only)
    double support_right = 0.0;
    bool right_open = true;
    std::variant<ConstantForm, PowerForm, ScalarFamilyForm, SampledForm> form;
    Regularity regularity = Regularity::Continuous;
    double p = 2.0;  ///< exponent when regularity == Lp

    int dim() const {
        return std::visit(
            [](const auto& f) -> int {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, ConstantForm>) return static_cast<int>(f.value.size());
                else if constexpr (std::is_same_v<F, PowerForm>) return static_cast<int>(f.direction.size());
                else if constexpr (std::is_same_v<F, ScalarFamilyForm>) return static_cast<int>(f.direction.size());
                else return static_cast<int>(f.values.front().size());
            },
            form);
    }

    bool contains(double s) const {
        if (s < support_left) return false;
        return right_open ? (s < support_right) : (s <= support_right);
    }

    Vec eval(double s) const {
        if (!contains(s)) throw HistoryError("signal evaluated outside its support");
        return std::visit(
            [&](const auto& f) -> Vec {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, ConstantForm>) {
                    return f.value;
                } else if constexpr (std::is_same_v<F, PowerForm>) {
                    return std::pow(std::abs(s), -f.beta) * f.direction;
                } else if constexpr (std::is_same_v<F, ScalarFamilyForm>) {
                    if (s <= 0.0) return Vec::Zero(f.direction.size());
                    const std::complex<double> w = f.rho * std::exp(f.alpha * std::log(s));
                    return (w * f.direction).real();
                } else {
                    const auto& g = f.grid;
                    if (s <= g.front()) return f.values.front();
                    if (s >= g.back()) return f.values.back();
                    auto it = std::upper_bound(g.begin(), g.end(), s);
                    const std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it) - 1);
                    if (f.interpolation == Interp::LeftConstant) return f.values[i];
                    const double w = (s - g[i]) / (g[i + 1] - g[i]);
                    return (1.0 - w) * f.values[i] + w * f.values[i + 1];
                }
            },
            form);
    }
};

namespace detail {

inline void validate_signal(const Signal& s) {
    if (!(s.support_left < s.support_right)) throw ConstructionError("signal: empty support");
    const bool unbounded_left = !std::isfinite(s.support_left);
    if (unbounded_left && !std::holds_alternative<ConstantForm>(s.form) && !std::holds_alternative<PowerForm>(s.form))
        throw ConstructionError("signal: infinite history is supported only for constant and power forms");
    if (const auto* pf = std::get_if<PowerForm>(&s.form)) {
        const bool touches_zero = (s.support_left <= 0.0 && s.support_right >= 0.0);
        if (pf->beta > 0 && touches_zero) {
            if (s.regularity != Regularity::Lp)
                throw ConstructionError("signal: unbounded power form requires the Lp regularity tag");
            if (!(pf->beta * s.p < 1.0))
                throw ConstructionError("signal: power form with beta * p >= 1 is not p-integrable near 0");
        }
    }
    if (const auto* sf = std::get_if<SampledForm>(&s.form)) {
        if (sf->grid.size() < 2 || sf->grid.size() != sf->values.size())
            throw ConstructionError("signal: sampled form needs matching grid/values, at least two nodes");
        for (std::size_t i = 1; i < sf->grid.size(); ++i)
            if (!(sf->grid[i] > sf->grid[i - 1])) throw ConstructionError("signal: sampled grid must increase strictly");
        const Eigen::Index d = sf->values.front().size();
        for (const Vec& v : sf->values) {
            if (v.size() != d) throw ConstructionError("signal: sampled values must share one dimension");
            if (!v.allFinite()) throw ConstructionError("signal: sampled values must be finite");
        }
        if (s.regularity == Regularity::Continuous && sf->interpolation == Interp::LeftConstant) {
            for (std::size_t i = 1; i < sf->values.size(); ++i)
                if ((sf->values[i] - sf->values[i - 1]).cwiseAbs().maxCoeff() > 1e-12)
                    throw ConstructionError("signal: tagged continuous but the sampled data jumps at an interior node");
        }
    }
}

}  // namespace detail

inline Signal make_constant_signal(const Vec& value, double left, double right = 0.0,
                                   Regularity reg = Regularity::Continuous) {
    Signal s;
    s.support_left = left;
    s.support_right = right;
    s.form = ConstantForm{value};
    s.regularity = reg;
    detail::validate_signal(s);
    return s;
}

inline Signal make_constant_signal_scalar(double value, double left, double right = 0.0,
                                          Regularity reg = Regularity::Continuous) {
    Vec v(1);
    v(0) = value;
    return make_constant_signal(v, left, right, reg);
}

inline Signal make_power_signal(double beta, const Vec& direction, double left, double right, double p) {
    Signal s;
    s.support_left = left;
    s.support_right = right;
    s.form = PowerForm{beta, direction};
    s.regularity = Regularity::Lp;
    s.p = p;
    detail::validate_signal(s);
    return s;
}

inline Signal make_scalar_family_signal(std::complex<double> rho, std::complex<double> alpha,
                                        const Eigen::VectorXcd& direction, double left, double right,
                                        Regularity reg = Regularity::Regulated) {
    Signal s;
    s.support_left = left;
    s.support_right = right;
    s.form = ScalarFamilyForm{rho, alpha, direction};
    s.regularity = reg;
    detail::validate_signal(s);
    return s;
}

inline Signal make_sampled_signal(std::vector<double> grid, std::vector<Vec> values,
                                  Interp interpolation = Interp::Linear, Regularity reg = Regularity::Continuous,
                                  double p = 2.0) {
    Signal s;
    s.support_left = grid.front();
    s.support_right = grid.back();
    s.form = SampledForm{std::move(grid), std::move(values), interpolation};
    s.regularity = reg;
    s.p = p;
    detail::validate_signal(s);
    return s;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/// Norm request: exponent p in [1, inf]; window either the largest-delay
/// window h(t) (fixed_window empty) or a fixed width.
struct NormRequest {
    double p = kInf;
    std::optional<double> fixed_window;
};

struct Scenario {
    SystemMatrix matrix;
    DelaySpec delay;
    Signal initial;
    double horizon_T = 1.0;
    std::vector<double> output_grid;
    std::vector<NormRequest> norm_requests;
};

inline Scenario make_scenario(SystemMatrix matrix, DelaySpec delay, Signal initial, double horizon_T,
                              std::vector<double> output_grid, std::vector<NormRequest> norms = {}) {
    if (!(horizon_T > 0)) throw ConstructionError("scenario: horizon must be positive");
    if (output_grid.empty()) throw ConstructionError("scenario: output grid must not be empty");
    for (std::size_t i = 1; i < output_grid.size(); ++i)
        if (!(output_grid[i] > output_grid[i - 1])) throw ConstructionError("scenario: output grid must increase strictly");
    if (output_grid.back() > horizon_T + 1e-12) throw ConstructionError("scenario: output grid exceeds the horizon");
    if (initial.support_right != 0.0) throw ConstructionError("scenario: initial condition must end at t = 0");
    if (initial.dim() != matrix.dim()) throw ConstructionError("scenario: matrix and initial condition dimensions differ");
    Scenario s;
    s.matrix = std::move(matrix);
    s.delay = std::move(delay);
    s.initial = std::move(initial);
    s.horizon_T = horizon_T;
    s.output_grid = std::move(output_grid);
    s.norm_requests = std::move(norms);
    return s;
}

// ---------------------------------------------------------------------------
// Delay structure analysis (analytic for closed forms, grid for tabulated)
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::size_t kAuditPoints = 10000;

/// Structural breakpoints of the delay inside [lo, hi].
inline std::vector<double> delay_breakpoints(const DelaySpec& d, double lo, double hi) {
    std::vector<double> out;
    if (const auto* pw = std::get_if<PiecewiseAffineDelay>(&d.kind)) {
        for (double b : pw->breakpoints)
            if (b >= lo && b <= hi) out.push_back(b);
    } else if (std::holds_alternative<DyadicSpikeDelay>(d.kind)) {
        for (int k = 1;; ++k) {
            const double a = std::ldexp(1.0, k);
            if (a > hi) break;
            if (a >= lo) out.push_back(a);
            if (a + 1.0 >= lo && a + 1.0 <= hi) out.push_back(a + 1.0);
        }
    } else if (const auto* tab = std::get_if<TabulatedDelay>(&d.kind)) {
        for (double g : tab->grid)
            if (g >= lo && g <= hi) out.push_back(g);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct InfResult {
    double value = kInf;
    double witness_arg = 0.0;
    bool grid_level = false;
};

/// Infimum of tau over [lo, hi] (the value, whether or not it is attained).
inline InfResult inf_tau_on(const DelaySpec& d, double lo, double hi) {
    InfResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) {
                r = {k.c, lo, false};
            } else if constexpr (std::is_same_v<K, AffineDelay>) {
                r = {k.a * lo + k.b, lo, false};
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                r.value = kInf;
                const auto& bp = k.breakpoints;
                for (std::size_t i = 0; i < bp.size(); ++i) {
                    const double l = bp[i];
                    const double rr = (i + 1 < bp.size()) ? bp[i + 1] : kInf;
                    const double a = std::max(lo, l), b = std::min(hi, rr);
                    if (a > b) continue;
                    const AffinePiece& s = k.segments[i];
                    for (double e : {a, std::isfinite(b) ? b : a}) {
                        const double v = s.a * e + s.b;
                        if (v < r.value) { r.value = v; r.witness_arg = e; }
                    }
                    if (!k.point_values.empty() && k.point_values[i].has_value() && l >= lo && l <= hi) {
                        if (*k.point_values[i] < r.value) { r.value = *k.point_values[i]; r.witness_arg = l; }
                    }
                }
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                // tau >= 1 everywhere, equal to 1 off the spikes.
                int inside_k = 0;
                if (lo >= 2.0) {
                    const int kk = static_cast<int>(std::floor(std::log2(lo)));
                    if (kk >= 1 && hi < std::ldexp(1.0, kk) + 1.0 && lo >= std::ldexp(1.0, kk)) inside_k = kk;
                }
                r = {inside_k >= 2 ? static_cast<double>(inside_k) : 1.0, lo, false};
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                r.grid_level = true;
                r.value = kInf;
                auto probe = [&](double t) {
                    const double v = eval_tabulated(k, t);
                    if (v < r.value) { r.value = v; r.witness_arg = t; }
                };
                for (std::size_t i = 0; i < kAuditPoints; ++i)
                    probe(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kAuditPoints - 1));
                for (double g : k.grid)
                    if (g >= lo && g <= hi) probe(g);
            } else {
                r = {k.tau_min, lo, false};
            }
        },
        d.kind);
    return r;
}

struct ContinuityResult {
    bool continuous = true;
    double witness = 0.0;
    bool grid_level = false;
};

inline ContinuityResult tau_continuity(const DelaySpec& d) {
    ContinuityResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                for (std::size_t i = 0; i < k.breakpoints.size(); ++i) {
                    const double t0 = k.breakpoints[i];
                    const double at = eval_piecewise_affine(k, t0);
                    const double right = k.segments[i].a * t0 + k.segments[i].b;
                    if (std::abs(at - right) > 1e-12) { r = {false, t0, false}; return; }
                    if (i > 0) {
                        const double left = k.segments[i - 1].a * t0 + k.segments[i - 1].b;
                        if (std::abs(left - at) > 1e-12) { r = {false, t0, false}; return; }
                    }
                }
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                r = {false, 4.0, false};  // first genuine jump: tau(4^-) = 1, tau(4) = 2
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                r.grid_level = true;
                if (k.interpolation == Interp::LeftConstant) {
                    for (std::size_t i = 1; i < k.values.size(); ++i)
                        if (std::abs(k.values[i] - k.values[i - 1]) > 1e-12) { r.continuous = false; r.witness = k.grid[i]; return; }
                }
            }
        },
        d.kind);
    return r;
}

struct FlatResult {
    bool has_flat = false;
    double witness = 0.0;
};

/// Detects intervals of positive length on which sigma1 is constant
/// (tau slope exactly 1), which concentrate mass on a single point.
inline FlatResult sigma1_flat(const DelaySpec& d) {
    FlatResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, AffineDelay>) {
                if (k.a == 1.0) r = {true, 0.0};
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                for (std::size_t i = 0; i < k.segments.size(); ++i)
                    if (k.segments[i].a == 1.0) { r = {true, k.breakpoints[i]}; return; }
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                if (k.interpolation == Interp::Linear) {
                    for (std::size_t i = 1; i < k.grid.size(); ++i) {
                        const double slope = (k.values[i] - k.values[i - 1]) / (k.grid[i] - k.grid[i - 1]);
                        if (slope == 1.0) { r = {true, k.grid[i - 1]}; return; }
                    }
                }
            }
        },
        d.kind);
    return r;
}

struct PhiResult {
    bool decided = false;      ///< false for tabulated data (sampling estimator applies)
    bool bounded = false;
    bool sigma_finite = true;
    double sup = kInf;
    double witness = 0.0;      ///< location where the bound is attained / breaks
};

/// Global analytic bound on the density of the image of Lebesgue measure
/// under sigma1 (branch-wise 1/|slope| sums for the affine families).
inline PhiResult phi_sup_analytic(const DelaySpec& d) {
    PhiResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) {
                r = {true, true, true, 1.0, -k.c};
            } else if constexpr (std::is_same_v<K, AffineDelay>) {
                if (k.a == 1.0) {
                    r = {true, false, false, kInf, -k.b};
                } else {
                    r = {true, true, true, 1.0 / std::abs(1.0 - k.a), -k.b};
                }
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                const FlatResult flat = sigma1_flat(d);
                if (flat.has_flat) { r = {true, false, false, kInf, flat.witness}; return; }
                // sweep the branch images, summing 1/|sigma1'| on overlaps
                struct Ev { double y; double w; };
                std::vector<Ev> events;
                double base = 0.0;  // weight of branches whose image is unbounded below
                for (std::size_t i = 0; i < k.segments.size(); ++i) {
                    const double l = k.breakpoints[i];
                    const bool last = (i + 1 == k.segments.size());
                    const double slope = 1.0 - k.segments[i].a;
                    const double w = 1.0 / std::abs(slope);
                    const double yl = l - (k.segments[i].a * l + k.segments[i].b);
                    if (last) {
                        if (slope > 0) events.push_back({yl, w});           // [yl, inf)
                        else { base += w; events.push_back({yl, -w}); }      // (-inf, yl]
                    } else {
                        const double rr = k.breakpoints[i + 1];
                        const double yr = rr - (k.segments[i].a * rr + k.segments[i].b);
                        events.push_back({std::min(yl, yr), w});
                        events.push_back({std::max(yl, yr), -w});
                    }
                }
                std::sort(events.begin(), events.end(), [](const Ev& a, const Ev& b) { return a.y < b.y; });
                double cur = base, best = base, at = events.empty() ? 0.0 : events.front().y;
                for (const Ev& e : events) {
                    cur += e.w;
                    if (cur > best + 1e-15) { best = cur; at = e.y; }
                }
                r = {true, true, true, best, at};
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                // unit-slope off-spike branch plus at most one spike branch
                r = {true, true, true, 2.0, 2.0};
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                r.decided = false;
            } else {
                const double phi = 1.0 / (1.0 - k.alpha_bound);
                r = {true, true, true, phi, 0.0};
            }
        },
        d.kind);
    return r;
}

struct TrendResult {
    bool holds = false;
    bool decided = true;
    double witness = 0.0;
};

/// Does sigma1(t) -> +inf?
inline TrendResult sigma1_to_infinity(const DelaySpec& d) {
    TrendResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) {
                r.holds = true;
            } else if constexpr (std::is_same_v<K, AffineDelay>) {
                r.holds = (k.a < 1.0);
                r.witness = k.a;
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                r.holds = (k.segments.back().a < 1.0);
                r.witness = k.breakpoints.back();
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                r.holds = true;  // sigma1(t) >= t - log2(t+1) - 1
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                r.holds = true;  // the table extends by its last value
            } else {
                r.holds = true;  // tau <= 1/lambda_min
            }
        },
        d.kind);
    return r;
}

struct BoundResult {
    bool bounded = false;
    double bound = kInf;
    double witness = 0.0;
};

inline BoundResult tau_bound(const DelaySpec& d) {
    BoundResult r;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) {
                r = {true, k.c, 0.0};
            } else if constexpr (std::is_same_v<K, AffineDelay>) {
                if (k.a == 0.0) r = {true, k.b, 0.0};
                else r = {false, kInf, k.a};
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                if (k.segments.back().a > 0.0) { r = {false, kInf, k.breakpoints.back()}; return; }
                double m = 0.0;
                for (std::size_t i = 0; i < k.segments.size(); ++i) {
                    const double l = k.breakpoints[i];
                    const double rr = (i + 1 < k.breakpoints.size()) ? k.breakpoints[i + 1] : l;
                    m = std::max(m, k.segments[i].a * l + k.segments[i].b);
                    m = std::max(m, k.segments[i].a * rr + k.segments[i].b);
                    if (!k.point_values.empty() && k.point_values[i].has_value()) m = std::max(m, *k.point_values[i]);
                }
                r = {true, m, 0.0};
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                r = {false, kInf, 0.0};
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                r = {true, *std::max_element(k.values.begin(), k.values.end()), 0.0};
            } else {
                r = {true, k.tau_max, 0.0};
            }
        },
        d.kind);
    return r;
}

inline bool is_tabulated(const DelaySpec& d) { return std::holds_alternative<TabulatedDelay>(d.kind); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Hypothesis audit
// ---------------------------------------------------------------------------

enum class Verdict { Holds, Fails, Undecidable };

struct HypothesisFinding {
    Verdict verdict = Verdict::Undecidable;
    std::optional<double> witness;
    std::string detail;
};

/// One finding per hypothesis H1..H10:
///  H1  positive infimum of tau on compact time ranges
///  H2  tau continuous
///  H3  t - tau(t) well-regulated
///  H4  tau measurable
///  H5  preimages of null sets under t - tau(t) are null
///  H6  bounded density of the pushforward of Lebesgue measure on [0, T]
///  H7  spectral radius of A below one
///  H8  t - tau(t) tends to +inf
///  H9  density bound times rho(A)^p below one (p finite)
///  H10 tau bounded
struct HypothesisReport {
    double T = 0.0;
    std::optional<double> p;
    std::array<HypothesisFinding, 10> findings;

    const HypothesisFinding& operator[](int h) const { return findings.at(static_cast<std::size_t>(h - 1)); }
    HypothesisFinding& at(int h) { return findings.at(static_cast<std::size_t>(h - 1)); }
};

/// Guard band around 1 inside which sampled H9 products are reported as
/// undecidable rather than forced to a verdict.
inline constexpr double kH9GuardBand = 0.05;

inline HypothesisReport audit_hypotheses(const DelaySpec& delay, const SystemMatrix& matrix, double T,
                                         std::optional<double> p = std::nullopt) {
    if (!(T > 0)) throw DomainError("audit_hypotheses: T must be positive");
    HypothesisReport rep;
    rep.T = T;
    rep.p = p;

    const bool tabulated = detail::is_tabulated(delay);

    {  // H1
        const auto inf = detail::inf_tau_on(delay, 0.0, T);
        auto& f = rep.at(1);
        f.verdict = (inf.value > 0) ? Verdict::Holds : Verdict::Fails;
        f.witness = (inf.value > 0) ? inf.value : inf.witness_arg;
        f.detail = (inf.value > 0) ? "infimum of tau on [0, T]" : "tau infimum vanishes near the witness point";
        if (inf.grid_level) f.detail += " (grid-level)";
    }
    {  // H2
        const auto c = detail::tau_continuity(delay);
        auto& f = rep.at(2);
        f.verdict = c.continuous ? Verdict::Holds : Verdict::Fails;
        if (!c.continuous) f.witness = c.witness;
        f.detail = c.continuous ? "tau continuous" : "jump at the witness point";
        if (c.grid_level) f.detail += " (grid-level)";
    }
    {  // H3
        auto& f = rep.at(3);
        f.verdict = Verdict::Holds;
        f.detail = "t - tau(t) is piecewise monotone for every representable family";
    }
    {  // H4 / H5
        auto& f4 = rep.at(4);
        auto& f5 = rep.at(5);
        if (tabulated) {
            f4.verdict = Verdict::Undecidable;
            f4.detail = "tabulated data: measurability is not certified from samples";
            f5.verdict = Verdict::Undecidable;
            f5.detail = "tabulated data: null-set preservation is not certified from samples";
        } else {
            f4.verdict = Verdict::Holds;
            f4.detail = "closed-form family, piecewise C^1";
            const auto flat = detail::sigma1_flat(delay);
            f5.verdict = flat.has_flat ? Verdict::Fails : Verdict::Holds;
            if (flat.has_flat) {
                f5.witness = flat.witness;
                f5.detail = "t - tau(t) is constant on an interval starting at the witness";
            } else {
                f5.detail = "slopes of t - tau(t) bounded away from zero on every piece";
            }
        }
    }
    {  // H6
        auto& f = rep.at(6);
        if (tabulated) {
            f.verdict = Verdict::Undecidable;
            f.detail = "tabulated data: use the pushforward density estimator";
        } else {
            const auto phi = detail::phi_sup_analytic(delay);
            if (!phi.sigma_finite || !phi.bounded) {
                f.verdict = Verdict::Fails;
                f.witness = phi.witness;
                f.detail = "pushforward density unbounded (mass concentrates)";
            } else {
                f.verdict = Verdict::Holds;
                f.witness = phi.sup;
                f.detail = "analytic density bound";
            }
        }
    }
    {  // H7
        auto& f = rep.at(7);
        const double rho = matrix.rho();
        f.verdict = (rho < 1.0) ? Verdict::Holds : Verdict::Fails;
        f.witness = rho;
        f.detail = "spectral radius of A";
    }
    {  // H8
        const auto trend = detail::sigma1_to_infinity(delay);
        auto& f = rep.at(8);
        f.verdict = trend.holds ? Verdict::Holds : Verdict::Fails;
        f.detail = trend.holds ? "t - tau(t) diverges" : "t - tau(t) stays bounded above";
        if (!trend.holds) f.witness = trend.witness;
    }
    {  // H9
        auto& f = rep.at(9);
        if (!p.has_value()) {
            f.verdict = Verdict::Undecidable;
            f.detail = "no exponent p requested";
        } else if (!std::isfinite(*p)) {
            f.verdict = Verdict::Undecidable;
            f.detail = "p = inf is outside the scope of this hypothesis";
        } else if (tabulated) {
            f.verdict = Verdict::Undecidable;
            f.detail = "tabulated data: use the sampled density estimator";
        } else {
            const auto phi = detail::phi_sup_analytic(delay);
            if (!phi.sigma_finite) {
                f.verdict = Verdict::Fails;
                f.detail = "pushforward not sigma-finite";
            } else {
                const double product = phi.sup * std::pow(matrix.rho(), *p);
                f.witness = product;
                f.verdict = (product < 1.0) ? Verdict::Holds : Verdict::Fails;
                f.detail = "density bound times rho(A)^p";
            }
        }
    }
    {  // H10
        const auto b = detail::tau_bound(delay);
        auto& f = rep.at(10);
        f.verdict = b.bounded ? Verdict::Holds : Verdict::Fails;
        if (b.bounded) f.witness = b.bound;
        f.detail = b.bounded ? "upper bound on tau" : "tau unbounded";
    }
    return rep;
}

}  // namespace delaydiff
