#pragma once

// Iterated delay maps, their domains, the per-time iteration counter, and
// the largest delay function.
//
// With sigma1(t) = t - tau(t), the k-th iterate sigma_k is defined on the set
// of t whose orbit t, sigma1(t), ..., sigma_{k-1}(t) stays nonnegative.  The
// counter n(t) is the number of iterates needed for the orbit to leave
// [0, inf); it drives the closed-form solution of the difference equation.

#include <optional>
#include <vector>

#include "delaydiff/core.hpp"

namespace delaydiff {

/// Full orbit record for one query time: orbit[k] is the k-th iterate of t,
/// n_of_t is the first index with a negative iterate.
struct IterationTable {
    double query_t = 0.0;
    long n_of_t = 0;
    std::vector<double> orbit;
    bool landed_in_history = false;  ///< orbit.back() < 0
};

/// k-th iterated delay map; returns nothing when t is outside the k-step
/// domain (an ordinary outcome, not an error).  sigma_0 is the identity on
/// all of R; the one-step domain is [0, inf), closed at 0.
inline std::optional<double> iterate_sigma(const DelaySpec& delay, double t, long k) {
    if (k < 0) throw DomainError("iterate_sigma: k must be nonnegative");
    double s = t;
    for (long j = 0; j < k; ++j) {
        if (s < 0.0) return std::nullopt;
        s = s - delay(s);
    }
    return s;
}

/// Iterates sigma1 from t until the orbit turns negative and returns the
/// full record.  Termination is guarded by a step cap derived from the
/// audited infimum of tau on [0, t]; exceeding it signals that the
/// positive-infimum hypothesis fails on this range.
inline IterationTable iteration_count(const DelaySpec& delay, double t) {
    IterationTable table;
    table.query_t = t;
    table.orbit.push_back(t);
    if (t < 0.0) {
        table.n_of_t = 0;
        table.landed_in_history = true;
        return table;
    }
    const auto inf = detail::inf_tau_on(delay, 0.0, std::max(t, 1e-300));
    if (!(inf.value > 0.0))
        throw StepCapError("iteration_count: the delay infimum on [0, t] is not positive; the orbit need not leave [0, inf)");
    const double est = 2.0 * (std::ceil(t / inf.value) + 1.0);
    const long cap = (est < 1e12) ? static_cast<long>(est) : (1L << 40);
    double s = t;
    long n = 0;
    while (s >= 0.0) {
        if (n >= cap)
            throw StepCapError("iteration_count: step cap exceeded; the delay infimum degenerates on [0, t]");
        s = s - delay(s);
        table.orbit.push_back(s);
        ++n;
    }
    table.n_of_t = n;
    table.landed_in_history = true;
    return table;
}

enum class HMethod { MonotoneShortcut, HorizonScan };

/// Value of the largest delay function at one time.  With a nondecreasing
/// sigma1 the infimum over [t, inf) is attained at t and h(t) = tau(t);
/// otherwise the value is a scan-horizon lower bound, never an extrapolation.
struct LargestDelayValue {
    double t = 0.0;
    double h_of_t = 0.0;
    HMethod method = HMethod::MonotoneShortcut;
    double scan_horizon = 0.0;
};

inline LargestDelayValue largest_delay(const DelaySpec& delay, double t, double scan_horizon) {
    if (t < 0.0) throw DomainError("largest_delay: t must be nonnegative");
    if (scan_horizon < t) throw DomainError("largest_delay: scan horizon must reach t");
    LargestDelayValue out;
    out.t = t;
    if (delay.sigma1_monotone == Monotonicity::Nondecreasing) {
        out.h_of_t = eval_delay(delay, t);
        out.method = HMethod::MonotoneShortcut;
        out.scan_horizon = t;
        return out;
    }
    out.method = HMethod::HorizonScan;
    out.scan_horizon = scan_horizon;
    double lo = kInf;
    const std::size_t n = detail::kAuditPoints;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = t + (scan_horizon - t) * static_cast<double>(i) / static_cast<double>(n - 1);
        lo = std::min(lo, s - delay(s));
    }
    for (double b : detail::delay_breakpoints(delay, t, scan_horizon)) {
        lo = std::min(lo, b - delay(b));
        const double just_before = std::nextafter(b, t);
        if (just_before >= t) lo = std::min(lo, just_before - delay(just_before));
    }
    out.h_of_t = t - lo;
    return out;
}

/// History depth needed at time 0: h(0), via the shortcut or a scan.
inline LargestDelayValue history_depth(const DelaySpec& delay, double scan_horizon) {
    return largest_delay(delay, 0.0, scan_horizon);
}

}  // namespace delaydiff
