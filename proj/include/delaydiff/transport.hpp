#pragma once

// Boundary-coupled transport on the unit interval,
//
//     u_t + lambda(t, x) u_x = 0,   u(t, 0) = A u(t, 1),   u(0, x) = u0(x),
//
// reduced to a scalar-time difference equation along characteristics: the
// boundary trace v(t) = u(t, 0) satisfies v(t) = A v(t - tau(t)) with
// tau(t) = t - R(t, 1), where R(t, x) is the time at which the
// characteristic through (t, x) crosses x = 0.

#include <memory>
#include <vector>

#include "delaydiff/core.hpp"
#include "delaydiff/solver.hpp"
#include "delaydiff/transport_field.hpp"

namespace delaydiff::transport {

/// Characteristic machinery for one speed field: a fixed-step 4th-order
/// integrator for the flow, a bisection root finder for the boundary
/// hitting time, and the crossing time T0 of the backward characteristic
/// from (0, 1).
struct CharacteristicMaps {
    std::shared_ptr<const TransportField> field;
    double ode_step = 0.0;
    double root_tol = 1e-10;
    double T0 = 0.0;
};

namespace detail {

/// One classical 4th-order step of y' = lambda(t, y).
inline double rk4_step(const TransportField& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double integrate_flow(const TransportField& f, double t, double t0, double x0, double step) {
    const double span = t - t0;
    if (span == 0.0) return x0;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / step)));
    const double h = span / static_cast<double>(n);
    double y = x0;
    double s = t0;
    for (long i = 0; i < n; ++i) {
        y = rk4_step(f, s, y, h);
        s = t0 + span * static_cast<double>(i + 1) / static_cast<double>(n);
    }
    return y;
}

/// Augmented integration of the flow together with the accumulated
/// integral of d(lambda)/dx along the characteristic (used by the exact
/// expression for the space derivative of the hitting time).
inline void integrate_flow_with_slope(const TransportField& f, double t, double t0, double x0, double step,
                                      double& y_out, double& integral_out) {
    const double span = t - t0;
    double y = x0, I = 0.0;
    if (span != 0.0) {
        const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / step)));
        const double h = span / static_cast<double>(n);
        double s = t0;
        for (long i = 0; i < n; ++i) {
            // RK4 on the pair (y, I), I' = d(lambda)/dx (s, y)
            const double k1y = f(s, y), k1i = f.dx(s, y);
            const double k2y = f(s + 0.5 * h, y + 0.5 * h * k1y), k2i = f.dx(s + 0.5 * h, y + 0.5 * h * k1y);
            const double k3y = f(s + 0.5 * h, y + 0.5 * h * k2y), k3i = f.dx(s + 0.5 * h, y + 0.5 * h * k2y);
            const double k4y = f(s + h, y + h * k3y), k4i = f.dx(s + h, y + h * k3y);
            y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            I += (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
            s = t0 + span * static_cast<double>(i + 1) / static_cast<double>(n);
        }
    }
    y_out = y;
    integral_out = I;
}

}  // namespace detail

/// Flow value Phi(t, t0, x0) of x' = lambda(t, x).
inline double flow(const CharacteristicMaps& maps, double t, double t0, double x0) {
    return detail::integrate_flow(*maps.field, t, t0, x0, maps.ode_step);
}

/// X0(t, x) = Phi(0, t, x): the foot of the characteristic at time zero.
inline double foot_at_zero(const CharacteristicMaps& maps, double t, double x) { return flow(maps, 0.0, t, x); }

inline CharacteristicMaps make_characteristic_maps(const TransportField& field, double ode_step = 0.0,
                                                   double root_tol = 1e-10) {
    CharacteristicMaps maps;
    maps.field = std::make_shared<TransportField>(field);
    maps.root_tol = root_tol;
    // provisional step from the a priori crossing-time bounds, refined to
    // T0/200 once T0 is known (unless the caller fixed the step)
    const bool auto_step = !(ode_step > 0.0);
    maps.ode_step = auto_step ? (1.0 / field.lambda_max) / 200.0 : ode_step;

    // T0 solves Phi(-s, 0, 1) = 0; bracketed by the speed bounds.
    double lo = 1.0 / field.lambda_max, hi = 1.0 / field.lambda_min;
    auto g = [&](double s) { return flow(maps, -s, 0.0, 1.0); };
    double glo = g(lo), ghi = g(hi);
    // widen marginally if integration error nudges an endpoint past zero
    for (int i = 0; i < 8 && glo < 0.0; ++i) { lo *= 0.95; glo = g(lo); }
    for (int i = 0; i < 8 && ghi > 0.0; ++i) { hi *= 1.05; ghi = g(hi); }
    if (glo < 0.0 || ghi > 0.0) throw NumericError("transport: failed to bracket the crossing time T0");
    while (hi - lo > root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0) lo = mid;
        else hi = mid;
    }
    maps.T0 = 0.5 * (lo + hi);
    if (auto_step) maps.ode_step = maps.T0 / 200.0;
    return maps;
}

/// Hitting time R(t, x): the unique s with Phi(s, t, x) = 0, found by
/// bisection inside the bracket given by the speed bounds.
inline double hitting_time_R(const CharacteristicMaps& maps, double t, double x) {
    if (x == 0.0) return t;
    const TransportField& f = *maps.field;
    double lo, hi;
    if (x > 0.0) {
        lo = t - x / f.lambda_min;
        hi = t - x / f.lambda_max;
    } else {
        lo = t - x / f.lambda_max;  // positive offsets: R > t
        hi = t - x / f.lambda_min;
    }
    auto g = [&](double s) { return flow(maps, s, t, x); };
    double glo = g(lo), ghi = g(hi);
    const double margin = 0.05 * (hi - lo) + 1e-12;
    for (int i = 0; i < 8 && glo > 0.0; ++i) { lo -= margin; glo = g(lo); }
    for (int i = 0; i < 8 && ghi < 0.0; ++i) { hi += margin; ghi = g(hi); }
    if (glo > 0.0 || ghi < 0.0) throw NumericError("transport: hitting-time bracket failure (field bounds violated)");
    while (hi - lo > maps.root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Exact derivative of the hitting time in x along the characteristic:
/// dR/dx (t, x) = -exp(I) / lambda(R, 0), with I the integral of
/// d(lambda)/dx along the characteristic from t to R.
inline double hitting_time_dx(const CharacteristicMaps& maps, double t, double x) {
    const double R = hitting_time_R(maps, t, x);
    double y = 0.0, I = 0.0;
    detail::integrate_flow_with_slope(*maps.field, R, t, x, maps.ode_step, y, I);
    return -std::exp(I) / (*maps.field)(R, 0.0);
}

/// Induced delay tau(t) = t - R(t, 1), confined to [1/lambda_max, 1/lambda_min].
inline double induced_delay(const CharacteristicMaps& maps, double t) { return t - hitting_time_R(maps, t, 1.0); }

/// Wraps the induced delay as a delay descriptor usable by every other
/// module; carries the certified bounds and slope constant of the field.
inline DelaySpec make_transport_delay(const CharacteristicMaps& maps) {
    const TransportField& f = *maps.field;
    TransportInducedDelay k;
    auto maps_copy = std::make_shared<const CharacteristicMaps>(maps);
    k.tau = [maps_copy](double t) { return induced_delay(*maps_copy, t); };
    k.tau_min = 1.0 / f.lambda_max;
    k.tau_max = 1.0 / f.lambda_min;
    k.alpha_bound = 1.0 - (f.lambda_min / f.lambda_max) * std::exp(-f.slope_bound / f.lambda_min);
    k.field = maps.field;
    k.ode_step = maps.ode_step;
    k.root_tol = maps.root_tol;

    DelaySpec d;
    d.kind = std::move(k);
    d.declared_tau_min = 1.0 / f.lambda_max;
    d.declared_tau_max = 1.0 / f.lambda_min;
    d.sigma1_monotone = Monotonicity::Nondecreasing;  // t - tau(t) = R(t, 1) increases in t
    return d;
}

/// Certified slope and hitting-time-derivative constants of the field:
/// beta0 <= |dR/dx| <= beta1 on the strip.
inline double beta0(const TransportField& f) { return std::exp(-f.slope_bound / f.lambda_min) / f.lambda_max; }
inline double beta1(const TransportField& f) { return std::exp(f.slope_bound / f.lambda_min) / f.lambda_min; }

/// Boundary-trace evaluator: v(s) = u0(X0(s, 0)) for s in [-T0, 0) and the
/// difference-equation continuation for s >= 0, evaluated exactly through
/// the orbit-descent core.
class BoundaryTrace {
public:
    BoundaryTrace(const CharacteristicMaps& maps, const SystemMatrix& A, Signal u0, double horizon)
        : maps_(std::make_shared<const CharacteristicMaps>(maps)), u0_(std::move(u0)) {
        const DelaySpec delay = make_transport_delay(*maps_);
        auto m = maps_;
        Signal u0c = u0_;
        auto history = [m, u0c](double s) -> Vec {
            if (s >= 0.0 || s < -m->T0 - 1e-9) throw HistoryError("boundary trace: history point outside [-T0, 0)");
            return u0c.eval(std::clamp(foot_at_zero(*m, s, 0.0), 0.0, 1.0));
        };
        const double tau_min = *delay.declared_tau_min;
        const long cap = 2 * (static_cast<long>(std::ceil(horizon / (0.5 * tau_min))) + 2);
        core_ = std::make_shared<delaydiff::detail::SteppingCore>(A.entries, delay, history, horizon,
                                                                  0.5 * tau_min, cap);
    }

    Vec operator()(double s) const { return (*core_)(s); }

private:
    std::shared_ptr<const CharacteristicMaps> maps_;
    Signal u0_;
    std::shared_ptr<delaydiff::detail::SteppingCore> core_;
};

/// Solution snapshot u(t, x_i) = v(R(t, x_i)).  The initial condition is
/// checked (not enforced) for the boundary compatibility u0(0) = A u0(1)
/// required of classical solutions; the returned flag reports it.
struct TransportSnapshot {
    std::vector<double> x_grid;
    std::vector<Vec> values;
    bool compatible = false;  ///< u0(0) = A u0(1) within 1e-9
};

inline TransportSnapshot solve_transport(const CharacteristicMaps& maps, const SystemMatrix& A, const Signal& u0,
                                         double t, const std::vector<double>& x_grid) {
    if (t < 0.0) throw DomainError("solve_transport: t must be nonnegative");
    if (u0.support_left != 0.0 || u0.support_right != 1.0 || u0.right_open)
        throw ConstructionError("solve_transport: u0 must live on the closed interval [0, 1]");

    TransportSnapshot snap;
    snap.x_grid = x_grid;
    const Vec left = u0.eval(0.0);
    const Vec right = A.entries * u0.eval(1.0);
    snap.compatible = ((left - right).cwiseAbs().maxCoeff() <= 1e-9);

    BoundaryTrace v(maps, A, u0, t + 1.0);
    snap.values.reserve(x_grid.size());
    for (double x : x_grid) {
        if (x < 0.0 || x > 1.0) throw DomainError("solve_transport: x grid must stay in [0, 1]");
        const double r = hitting_time_R(maps, t, x);
        if (r >= 0.0) {
            snap.values.push_back(v(r));
        } else {
            // the characteristic reaches time zero inside the strip
            const double foot = std::clamp(foot_at_zero(maps, t, x), 0.0, 1.0);
            snap.values.push_back(u0.eval(foot));
        }
    }
    return snap;
}

}  // namespace delaydiff::transport
