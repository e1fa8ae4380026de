#pragma once

// Classification of piecewise closed-form functions as regulated /
// well-regulated, and numerical probing of one-sided limits of compositions.
//
// A function is regulated when both one-sided limits exist at every point;
// well-regulated when, in addition, near every point it stays strictly above,
// strictly below, or exactly at each one-sided limit.  Classification here is
// analytic over an enumerated family; sampling is only a secondary witness,
// since neither property is decidable from finitely many evaluations.

#include <optional>
#include <variant>
#include <vector>

#include "delaydiff/common.hpp"

namespace delaydiff::regulated {

struct AffinePieceF {
    double slope = 0.0, intercept = 0.0;
};

struct ConstantPieceF {
    double value = 0.0;
};

/// coeff * sign(s - center) * |s - center|^exponent  (monotone for coeff != 0)
struct MonotonePowerPiece {
    double coeff = 1.0, exponent = 1.0, center = 0.0;
};

struct SignPiece {
    double center = 0.0;  ///< sign(s - center)
};

/// lin*(s-c) + amp*(s-c)*sin(inner/(s-c)), value 0 at s = c.
/// Crosses its limit at c infinitely often iff |lin| <= |amp|, amp != 0.
struct EnvelopeSinPiece {
    double lin = 0.0, amp = 1.0, center = 0.0, inner = 1.0;
};

/// exp(-width/(s-c)^2) * sin(inner/(s-c)), value 0 at s = c; smooth, flat at
/// c, and oscillating through its limit there.
struct GaussSinPiece {
    double center = 0.0, width = 1.0, inner = 1.0;
};

/// sign of an EnvelopeSinPiece; no one-sided limits at c when the envelope
/// oscillates through zero.
struct SignEnvelopeSinPiece {
    double lin = 0.0, amp = 1.0, center = 0.0, inner = 1.0;
};

using Piece = std::variant<AffinePieceF, ConstantPieceF, MonotonePowerPiece, SignPiece, EnvelopeSinPiece,
                           GaussSinPiece, SignEnvelopeSinPiece>;

namespace detail {

inline double envelope_val(double lin, double amp, double inner, double s) {
    if (s == 0.0) return 0.0;
    return lin * s + amp * s * std::sin(inner / s);
}

inline double eval_piece(const Piece& piece, double s) {
    return std::visit(
        [&](const auto& q) -> double {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, AffinePieceF>) return q.slope * s + q.intercept;
            else if constexpr (std::is_same_v<Q, ConstantPieceF>) return q.value;
            else if constexpr (std::is_same_v<Q, MonotonePowerPiece>) {
                const double u = s - q.center;
                return q.coeff * (u >= 0 ? 1.0 : -1.0) * std::pow(std::abs(u), q.exponent);
            } else if constexpr (std::is_same_v<Q, SignPiece>) {
                const double u = s - q.center;
                return (u > 0) - (u < 0);
            } else if constexpr (std::is_same_v<Q, EnvelopeSinPiece>) {
                return envelope_val(q.lin, q.amp, q.inner, s - q.center);
            } else if constexpr (std::is_same_v<Q, GaussSinPiece>) {
                const double u = s - q.center;
                if (u == 0.0) return 0.0;
                return std::exp(-q.width / (u * u)) * std::sin(q.inner / u);
            } else {
                const double v = envelope_val(q.lin, q.amp, q.inner, s - q.center);
                return (v > 0) - (v < 0);
            }
        },
        piece);
}

}  // namespace detail

/// Piecewise function on a compact interval [a, b]; piece i applies on
/// [breakpoints[i], breakpoints[i+1]) with breakpoints[0] == a, and the last
/// piece is closed at b.
struct PiecewiseFunction {
    double a = 0.0, b = 1.0;
    std::vector<double> breakpoints;
    std::vector<Piece> pieces;

    double eval(double s) const {
        if (s < a - 1e-12 || s > b + 1e-12) throw DomainError("PiecewiseFunction: point outside the domain");
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
        std::size_t i = (it == breakpoints.begin()) ? 0 : static_cast<std::size_t>(std::distance(breakpoints.begin(), it) - 1);
        if (i >= pieces.size()) i = pieces.size() - 1;
        return detail::eval_piece(pieces[i], s);
    }

    double range_lo() const;
    double range_hi() const;
};

inline PiecewiseFunction make_piecewise(double a, double b, std::vector<double> breakpoints,
                                        std::vector<Piece> pieces) {
    if (breakpoints.empty() || breakpoints.size() != pieces.size())
        throw ConstructionError("piecewise function: one piece per breakpoint");
    if (breakpoints.front() != a) throw ConstructionError("piecewise function: first breakpoint must equal a");
    if (!(a < b)) throw ConstructionError("piecewise function: empty domain");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw ConstructionError("piecewise function: breakpoints must increase strictly");
    if (breakpoints.back() > b) throw ConstructionError("piecewise function: breakpoints exceed the domain");
    PiecewiseFunction f;
    f.a = a;
    f.b = b;
    f.breakpoints = std::move(breakpoints);
    f.pieces = std::move(pieces);
    return f;
}

/// Single-piece convenience constructor.
inline PiecewiseFunction make_single(double a, double b, Piece piece) {
    return make_piecewise(a, b, {a}, {std::move(piece)});
}

inline double PiecewiseFunction::range_lo() const {
    double lo = kInf;
    for (int i = 0; i <= 2048; ++i) lo = std::min(lo, eval(a + (b - a) * i / 2048.0));
    return lo;
}

inline double PiecewiseFunction::range_hi() const {
    double hi = -kInf;
    for (int i = 0; i <= 2048; ++i) hi = std::max(hi, eval(a + (b - a) * i / 2048.0));
    return hi;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct Classification {
    bool regulated = true;
    bool well_regulated = true;
    std::optional<double> witness;
};

namespace detail {

/// Analyzes one piece on the closed interval [lo, hi] that it governs.
inline void classify_piece(const Piece& piece, double lo, double hi, Classification& out) {
    std::visit(
        [&](const auto& q) {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, EnvelopeSinPiece>) {
                const bool oscillates = (q.amp != 0.0) && (std::abs(q.lin) <= std::abs(q.amp));
                if (oscillates && q.center >= lo && q.center <= hi) {
                    out.well_regulated = false;
                    if (!out.witness) out.witness = q.center;
                }
            } else if constexpr (std::is_same_v<Q, GaussSinPiece>) {
                if (q.center >= lo && q.center <= hi) {
                    out.well_regulated = false;
                    if (!out.witness) out.witness = q.center;
                }
            } else if constexpr (std::is_same_v<Q, SignEnvelopeSinPiece>) {
                const bool oscillates = (q.amp != 0.0) && (std::abs(q.lin) <= std::abs(q.amp));
                if (oscillates && q.center >= lo && q.center <= hi) {
                    out.regulated = false;
                    out.well_regulated = false;
                    if (!out.witness) out.witness = q.center;
                }
                // |lin| > |amp| collapses to a two-valued step: fine
            } else {
                (void)q;  // affine, constant, monotone power, sign: well-regulated
            }
        },
        piece);
}

}  // namespace detail

/// Analytic classification over the enumerated piece families.  The smooth
/// oscillators are regulated but not well-regulated at their accumulation
/// point; the sign-composed oscillator has no one-sided limits there at all;
/// everything else in the family is piecewise monotone.
inline Classification classify(const PiecewiseFunction& f) {
    Classification out;
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
        const double lo = f.breakpoints[i];
        const double hi = (i + 1 < f.breakpoints.size()) ? f.breakpoints[i + 1] : f.b;
        detail::classify_piece(f.pieces[i], lo, hi, out);
    }
    return out;
}

/// Affine domain reparameterization t' = s*t + o (s > 0); classification is
/// invariant under it because every family is closed under the transform.
inline PiecewiseFunction reparameterize(const PiecewiseFunction& f, double s, double o) {
    if (!(s > 0)) throw DomainError("reparameterize: scale must be positive");
    PiecewiseFunction g;
    g.a = s * f.a + o;
    g.b = s * f.b + o;
    for (double bp : f.breakpoints) g.breakpoints.push_back(s * bp + o);
    for (const Piece& piece : f.pieces) {
        g.pieces.push_back(std::visit(
            [&](const auto& q) -> Piece {
                using Q = std::decay_t<decltype(q)>;
                if constexpr (std::is_same_v<Q, AffinePieceF>) {
                    return AffinePieceF{q.slope / s, q.intercept - q.slope * o / s};
                } else if constexpr (std::is_same_v<Q, ConstantPieceF>) {
                    return q;
                } else if constexpr (std::is_same_v<Q, MonotonePowerPiece>) {
                    return MonotonePowerPiece{q.coeff / std::pow(s, q.exponent), q.exponent, s * q.center + o};
                } else if constexpr (std::is_same_v<Q, SignPiece>) {
                    return SignPiece{s * q.center + o};
                } else if constexpr (std::is_same_v<Q, EnvelopeSinPiece>) {
                    return EnvelopeSinPiece{q.lin / s, q.amp / s, s * q.center + o, s * q.inner};
                } else if constexpr (std::is_same_v<Q, GaussSinPiece>) {
                    return GaussSinPiece{s * q.center + o, s * s * q.width, s * q.inner};
                } else {
                    return SignEnvelopeSinPiece{q.lin / s, q.amp / s, s * q.center + o, s * q.inner};
                }
            },
            piece));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Composition probing
// ---------------------------------------------------------------------------

enum class Side { Left, Right };
enum class LimitVerdict { Exists, DivergesOscillating, Inconclusive };

struct ProbeResult {
    LimitVerdict verdict = LimitVerdict::Inconclusive;
    std::vector<double> sampled;
    double tail_oscillation = 0.0;
};

/// Oscillation thresholds separating the example families in double
/// precision at the default refinement depth.
inline constexpr double kProbeExistsTol = 1e-9;
inline constexpr double kProbeOscSep = 1e-3;

/// Samples (f o phi)(t0 +- 2^-k spread) toward t0 and judges the one-sided
/// limit: a Cauchy tail means it exists; two separated accumulation values
/// revisited through the tail mean oscillatory divergence.
inline ProbeResult composition_probe(const PiecewiseFunction& f, const PiecewiseFunction& phi, double t0, Side side,
                                     int refinement_depth = 48) {
    if (refinement_depth < 8) throw DomainError("composition_probe: refinement depth too small");
    ProbeResult out;
    const double spread0 = (side == Side::Right) ? (phi.b - t0) : (t0 - phi.a);
    if (!(spread0 > 0)) throw DomainError("composition_probe: t0 has no room on the requested side");
    const double spread = std::min(spread0, 1.0);
    const double sgn = (side == Side::Right) ? 1.0 : -1.0;

    for (int k = 1; k <= refinement_depth; ++k) {
        const double t = t0 + sgn * std::ldexp(spread, -k);
        const double u = phi.eval(t);
        const double cl = std::min(std::max(u, f.a), f.b);  // guard rounding at the range edge
        out.sampled.push_back(f.eval(cl));
    }

    const std::size_t n = out.sampled.size();
    const std::size_t tail_start = n - std::min<std::size_t>(16, n / 2);
    double tmin = kInf, tmax = -kInf;
    for (std::size_t i = tail_start; i < n; ++i) {
        tmin = std::min(tmin, out.sampled[i]);
        tmax = std::max(tmax, out.sampled[i]);
    }
    out.tail_oscillation = tmax - tmin;
    if (out.tail_oscillation < kProbeExistsTol) {
        out.verdict = LimitVerdict::Exists;
        return out;
    }
    if (out.tail_oscillation > kProbeOscSep) {
        // both extreme clusters must be revisited in the last quarter
        const std::size_t q = n - std::min<std::size_t>(12, n / 4);
        bool near_lo = false, near_hi = false;
        for (std::size_t i = q; i < n; ++i) {
            if (out.sampled[i] < tmin + 0.25 * out.tail_oscillation) near_lo = true;
            if (out.sampled[i] > tmax - 0.25 * out.tail_oscillation) near_hi = true;
        }
        if (near_lo && near_hi) {
            out.verdict = LimitVerdict::DivergesOscillating;
            return out;
        }
    }
    out.verdict = LimitVerdict::Inconclusive;
    return out;
}

}  // namespace delaydiff::regulated
