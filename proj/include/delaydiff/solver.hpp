#pragma once

// Solution construction for x(t) = A x(t - tau(t)).
//
// Two routes are implemented and kept numerically independent so they can
// cross-check each other:
//   * solve_representation evaluates the closed form A^n(t) x0(sigma_n(t))
//     through the cached Schur power of A;
//   * solve_stepping descends the delay orbit one application of A at a
//     time, the computational form of the block-by-block constructive
//     argument (block length delta = T / ceil(T / delta~), delta~ half the
//     audited delay infimum).
// Histories are evaluated exactly for closed-form signals; sampled signals
// interpolate per their declared mode, and that error is the dominant term
// of the reported residual.

#include <bit>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "delaydiff/core.hpp"
#include "delaydiff/delay_kernel.hpp"

namespace delaydiff {

enum class SolveMethod { Representation, Stepping, StateDependent };

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> values;
    SolveMethod method = SolveMethod::Stepping;
    double residual_report = 0.0;
    int dim = 0;

    // stepping metadata
    double block_length = 0.0;
    long block_count = 0;

    // state-dependent runs record the induced time-dependent delay trace
    std::vector<double> trace_times;
    std::vector<double> trace_values;

    /// Exact point evaluator when the construction supports one.
    std::function<Vec(double)> evaluator;

    /// Linear interpolation on the stored samples (exact at sample times).
    Vec interp(double s) const {
        if (times.empty()) throw HistoryError("trajectory is empty");
        if (s < times.front() - 1e-12 || s > times.back() + 1e-12)
            throw HistoryError("trajectory interpolation outside the sampled range");
        auto it = std::lower_bound(times.begin(), times.end(), s);
        if (it == times.end()) return values.back();
        std::size_t i = static_cast<std::size_t>(std::distance(times.begin(), it));
        if (times[i] == s || i == 0) return values[i];
        const double w = (s - times[i - 1]) / (times[i] - times[i - 1]);
        return (1.0 - w) * values[i - 1] + w * values[i];
    }
};

namespace detail {

inline std::uint64_t key_of(double t) { return std::bit_cast<std::uint64_t>(t); }

/// Orbit-descent evaluator for x(t) = A x(t - tau(t)) with an arbitrary
/// exact history on [hist_left, 0).  Values at already-computed times are
/// reused, so ascending sweeps build each block from the previous ones.
class SteppingCore {
public:
    SteppingCore(Mat A, DelaySpec delay, std::function<Vec(double)> history, double T, double guard_delta,
                 long step_cap)
        : A_(std::move(A)),
          delay_(std::move(delay)),
          history_(std::move(history)),
          T_(T),
          guard_delta_(guard_delta),
          step_cap_(step_cap) {}

    Vec operator()(double t) {
        if (t < 0.0) return history_(t);
        if (auto it = memo_.find(key_of(t)); it != memo_.end()) return it->second;

        std::vector<double> stack;
        double s = t;
        long steps = 0;
        while (s >= 0.0) {
            if (auto it = memo_.find(key_of(s)); it != memo_.end()) {
                Vec x = it->second;
                return unwind(stack, x);
            }
            stack.push_back(s);
            const double tau = delay_(s);
            if (s <= T_ + 1e-12 && !(tau > guard_delta_))
                throw Error("solve_stepping: delayed argument does not clear the block (delay infimum inconsistency)");
            if (++steps > step_cap_)
                throw StepCapError("solve_stepping: step cap exceeded while descending the delay orbit");
            s = s - tau;
        }
        Vec x = history_(s);
        return unwind(stack, x);
    }

private:
    Vec unwind(const std::vector<double>& stack, Vec x) {
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            x = A_ * x;
            memo_.emplace(key_of(*it), x);
        }
        return x;
    }

    Mat A_;
    DelaySpec delay_;
    std::function<Vec(double)> history_;
    double T_;
    double guard_delta_;
    long step_cap_;
    std::unordered_map<std::uint64_t, Vec> memo_;
};

/// Finite left end of the history window a trajectory should cover.
inline double history_left(const Scenario& scn) {
    if (std::isfinite(scn.initial.support_left)) return scn.initial.support_left;
    const double h0 = largest_delay(scn.delay, 0.0, 2.0 * scn.horizon_T).h_of_t;
    return std::isfinite(h0) ? -h0 : -scn.horizon_T;
}

/// Negative-time sample grid merged in front of the requested output grid.
inline std::vector<double> trajectory_times(const Scenario& scn) {
    std::vector<double> times;
    const double left = history_left(scn);
    if (left < 0.0) {
        const int n = 512;
        for (int i = 0; i < n; ++i) {
            const double s = left + (-left) * static_cast<double>(i) / n;
            if (s < 0.0) times.push_back(s);
        }
    }
    for (double t : scn.output_grid)
        if (times.empty() || t > times.back()) times.push_back(t);
    return times;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Representation route
// ---------------------------------------------------------------------------

/// Closed-form evaluation x(t) = A^n(t) x0(sigma_n(t)(t)) for t >= 0 and the
/// plain history value for t < 0.  Errors out when the final iterate falls
/// outside the stored history (truncated support).
inline Vec solve_representation(const Scenario& scn, double t) {
    if (t < 0.0) return scn.initial.eval(t);
    const IterationTable table = iteration_count(scn.delay, t);
    const double landing = table.orbit.back();
    const Vec x0 = scn.initial.eval(landing);
    return scn.matrix.power(table.n_of_t) * x0;
}

/// Trajectory sampled from the representation formula, with a residual that
/// re-derives each value one delay step later and compares.
inline Trajectory solve_representation_trajectory(const Scenario& scn) {
    Trajectory traj;
    traj.method = SolveMethod::Representation;
    traj.dim = scn.matrix.dim();
    traj.times = detail::trajectory_times(scn);
    traj.values.reserve(traj.times.size());
    for (double t : traj.times) traj.values.push_back(solve_representation(scn, t));

    double res = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < 0.0) continue;
        const double y = t - eval_delay(scn.delay, t);
        if (y < scn.initial.support_left) continue;
        const Vec rhs = scn.matrix.entries * solve_representation(scn, y);
        res = std::max(res, (traj.values[i] - rhs).cwiseAbs().maxCoeff());
    }
    traj.residual_report = res;
    auto scn_ptr = std::make_shared<const Scenario>(scn);
    traj.evaluator = [scn_ptr](double t) { return solve_representation(*scn_ptr, t); };
    return traj;
}

// ---------------------------------------------------------------------------
// Stepping route
// ---------------------------------------------------------------------------

inline Trajectory solve_stepping(const Scenario& scn) {
    const double T = scn.horizon_T;
    const auto inf = detail::inf_tau_on(scn.delay, 0.0, T);
    if (!(inf.value > 0.0))
        throw StepCapError("solve_stepping: the audited delay infimum on [0, T] vanishes");
    const double delta_tilde = 0.5 * inf.value;
    const long M = static_cast<long>(std::ceil(T / delta_tilde));
    const double delta = T / static_cast<double>(M);
    const long cap = 2 * (M + 1);

    auto scn_ptr = std::make_shared<const Scenario>(scn);
    auto history = [scn_ptr](double s) { return scn_ptr->initial.eval(s); };
    auto core = std::make_shared<detail::SteppingCore>(scn.matrix.entries, scn.delay, history, T, delta, cap);

    Trajectory traj;
    traj.method = SolveMethod::Stepping;
    traj.dim = scn.matrix.dim();
    traj.block_length = delta;
    traj.block_count = M;
    traj.times = detail::trajectory_times(scn);
    traj.values.reserve(traj.times.size());
    for (double t : traj.times) traj.values.push_back((*core)(t));

    double res = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < 0.0) continue;
        const double y = t - eval_delay(scn.delay, t);
        if (y < scn.initial.support_left) continue;
        const Vec rhs = scn.matrix.entries * (*core)(y);
        res = std::max(res, (traj.values[i] - rhs).cwiseAbs().maxCoeff());
    }
    traj.residual_report = res;
    traj.evaluator = [core](double t) { return (*core)(t); };
    return traj;
}

// ---------------------------------------------------------------------------
// Window norms
// ---------------------------------------------------------------------------

/// Lp norm of the trajectory over [t - window, t]; sup of the sampled values
/// for p = inf, composite midpoint quadrature refined at the sample times
/// (and further subdivided when an exact evaluator is attached) otherwise.
inline double window_norm(const Trajectory& traj, double t, double p, double window) {
    if (!(window > 0)) throw DomainError("window_norm: window must be positive");
    const double a = t - window, b = t;
    if (a < traj.times.front() - 1e-9 || b > traj.times.back() + 1e-9)
        throw HistoryError("window_norm: window exceeds the available history");

    if (!std::isfinite(p)) {
        double sup = 0.0;
        for (std::size_t i = 0; i < traj.times.size(); ++i)
            if (traj.times[i] >= a - 1e-12 && traj.times[i] <= b + 1e-12)
                sup = std::max(sup, traj.values[i].norm());
        return sup;
    }
    if (!(p >= 1.0)) throw DomainError("window_norm: p must lie in [1, inf]");

    std::vector<double> nodes;
    nodes.push_back(a);
    for (double s : traj.times)
        if (s > a && s < b) nodes.push_back(s);
    nodes.push_back(b);

    const bool exact = static_cast<bool>(traj.evaluator);
    const double min_width = window / 4096.0;
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double lo = nodes[i], hi = nodes[i + 1];
        const int sub = exact ? std::max(1, static_cast<int>(std::ceil((hi - lo) / min_width))) : 1;
        for (int j = 0; j < sub; ++j) {
            const double l = lo + (hi - lo) * j / sub;
            const double r = lo + (hi - lo) * (j + 1) / sub;
            const double m = 0.5 * (l + r);
            const Vec v = exact ? traj.evaluator(m) : traj.interp(m);
            integral += std::pow(v.norm(), p) * (r - l);
        }
    }
    return std::pow(integral, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Non-uniqueness family for the vanishing-infimum delay
// ---------------------------------------------------------------------------

/// Member of the solution family x(t) = Re(rho t^alpha v) of x(t) = A x(t/e),
/// where exp(alpha) is a nonzero eigenvalue of A and v an eigenvector.  Any
/// rho gives a solution for t > 0, so the equation with this delay admits
/// infinitely many solutions over one initial condition.
inline Vec nonuniqueness_family(const SystemMatrix& A, std::complex<double> rho, double t) {
    if (!(t > 0)) throw DomainError("nonuniqueness_family: t must be positive");
    const Eigen::Index d = A.entries.rows();
    Eigen::EigenSolver<Mat> es(A.entries, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw NumericError("nonuniqueness_family: eigendecomposition failed");
    Eigen::Index best = -1;
    double best_mod = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double m = std::abs(es.eigenvalues()(i));
        if (m > best_mod) { best_mod = m; best = i; }
    }
    const double scale = std::max(1.0, A.entries.cwiseAbs().maxCoeff());
    if (best < 0 || best_mod <= 1e-14 * scale)
        throw Error("nonuniqueness_family: A is nilpotent (no nonzero eigenvalue)");
    const std::complex<double> lambda = es.eigenvalues()(best);
    const Eigen::VectorXcd v = es.eigenvectors().col(best);
    const std::complex<double> alpha = std::log(lambda);
    const std::complex<double> w = rho * std::exp(alpha * std::log(t));
    return (w * v).real();
}

/// The eigendata used by the family, exposed for residual checks.
struct EigenPair {
    std::complex<double> lambda;
    std::complex<double> alpha;
    Eigen::VectorXcd v;
};

inline EigenPair nonuniqueness_eigenpair(const SystemMatrix& A) {
    Eigen::EigenSolver<Mat> es(A.entries, true);
    if (es.info() != Eigen::Success) throw NumericError("nonuniqueness_eigenpair: eigendecomposition failed");
    Eigen::Index best = -1;
    double best_mod = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double m = std::abs(es.eigenvalues()(i));
        if (m > best_mod) { best_mod = m; best = i; }
    }
    const double scale = std::max(1.0, A.entries.cwiseAbs().maxCoeff());
    if (best < 0 || best_mod <= 1e-14 * scale) throw Error("nonuniqueness_eigenpair: A is nilpotent");
    return {es.eigenvalues()(best), std::log(es.eigenvalues()(best)), es.eigenvectors().col(best)};
}

// ---------------------------------------------------------------------------
// State-dependent delays
// ---------------------------------------------------------------------------

/// Read-only view of the partial solution handed to a state-dependent delay:
/// x_t(s) for s in [-tau_max, 0], with the left-limit value at s = 0.
class HistoryView {
public:
    HistoryView(double t, const Signal* initial, const std::vector<double>* times, const std::vector<Vec>* values)
        : t_(t), initial_(initial), times_(times), values_(values) {}

    double now() const { return t_; }

    Vec at(double s) const {
        if (s > 0.0) throw DomainError("HistoryView: s must be <= 0");
        const double u = t_ + s;
        if (u < 0.0) return initial_->eval(u);
        if (s == 0.0) {  // left limit: latest constructed value
            if (!times_->empty()) return values_->back();
            return initial_->eval(std::nextafter(0.0, -1.0));
        }
        if (times_->empty() || u > times_->back() + 1e-12)
            throw HistoryError("HistoryView: requested time not yet constructed");
        auto it = std::lower_bound(times_->begin(), times_->end(), u);
        std::size_t i = static_cast<std::size_t>(std::distance(times_->begin(), it));
        if (i >= times_->size()) return values_->back();
        if ((*times_)[i] == u || i == 0) return (*values_)[i];
        const double w = (u - (*times_)[i - 1]) / ((*times_)[i] - (*times_)[i - 1]);
        return (1.0 - w) * (*values_)[i - 1] + w * (*values_)[i];
    }

private:
    double t_;
    const Signal* initial_;
    const std::vector<double>* times_;
    const std::vector<Vec>* values_;
};

using StateDelayFn = std::function<double(double t, const HistoryView&)>;

/// Explicit forward construction for x(t) = A x(t - tau(t, x_t)) with the
/// delay confined to [tau_min, tau_max].  The node spacing stays below
/// tau_min so every delayed argument lands in already-constructed history.
/// The induced time-dependent delay trace is recorded for downstream
/// analysis.
inline Trajectory solve_state_dependent(const SystemMatrix& A, const StateDelayFn& tau_sd, double tau_min,
                                        double tau_max, const Signal& x0, double T, double dt = 0.0) {
    if (!(tau_min > 0) || !(tau_max >= tau_min) || !std::isfinite(tau_max))
        throw ConstructionError("solve_state_dependent: need 0 < tau_min <= tau_max < inf");
    if (x0.support_left > -tau_max + 1e-12)
        throw ConstructionError("solve_state_dependent: initial condition must cover [-tau_max, 0)");
    if (dt <= 0.0) dt = tau_min / 8.0;
    if (dt > tau_min) throw ConstructionError("solve_state_dependent: node spacing must stay below tau_min");

    const long N = static_cast<long>(std::ceil(T / dt));
    std::vector<double> times;
    std::vector<Vec> vals;
    std::vector<double> trace_t, trace_v;
    times.reserve(static_cast<std::size_t>(N) + 1);

    auto hist_eval = [&](double u) -> Vec {
        if (u < 0.0) return x0.eval(u);
        auto it = std::lower_bound(times.begin(), times.end(), u);
        std::size_t i = static_cast<std::size_t>(std::distance(times.begin(), it));
        if (i >= times.size()) throw HistoryError("solve_state_dependent: delayed argument beyond constructed range");
        if (times[i] == u || i == 0) return vals[i];
        const double w = (u - times[i - 1]) / (times[i] - times[i - 1]);
        return (1.0 - w) * vals[i - 1] + w * vals[i];
    };

    for (long i = 0; i <= N; ++i) {
        const double t = std::min(static_cast<double>(i) * dt, T);
        const HistoryView view(t, &x0, &times, &vals);
        const double tau = tau_sd(t, view);
        if (!(tau >= tau_min - 1e-12) || !(tau <= tau_max + 1e-12))
            throw Error("solve_state_dependent: delay output left [tau_min, tau_max]");
        const double y = t - tau;
        const Vec x = A.entries * hist_eval(y);
        times.push_back(t);
        vals.push_back(x);
        trace_t.push_back(t);
        trace_v.push_back(tau);
        if (t >= T) break;
    }

    Trajectory traj;
    traj.method = SolveMethod::StateDependent;
    traj.dim = A.dim();
    traj.trace_times = std::move(trace_t);
    traj.trace_values = std::move(trace_v);

    // prepend negative-time samples of the initial condition
    std::vector<double> full_t;
    std::vector<Vec> full_v;
    const int n_neg = 256;
    for (int i = 0; i < n_neg; ++i) {
        const double s = -tau_max + tau_max * static_cast<double>(i) / n_neg;
        if (s < 0.0) {
            full_t.push_back(s);
            full_v.push_back(x0.eval(s));
        }
    }
    full_t.insert(full_t.end(), times.begin(), times.end());
    full_v.insert(full_v.end(), vals.begin(), vals.end());
    traj.times = std::move(full_t);
    traj.values = std::move(full_v);

    double res = 0.0;
    for (std::size_t i = 0; i < traj.trace_times.size(); ++i) {
        const double t = traj.trace_times[i];
        const double y = t - traj.trace_values[i];
        Vec rhs;
        if (y < 0.0) rhs = A.entries * x0.eval(y);
        else rhs = A.entries * traj.interp(y);
        const Vec lhs = traj.interp(t);
        res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    traj.residual_report = res;
    return traj;
}

}  // namespace delaydiff
