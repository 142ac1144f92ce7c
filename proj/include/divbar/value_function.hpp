#pragma once

/**
 * @file value_function.hpp
 * @brief Closed-form expected-discounted-dividend functions for the
 *        low-debt regime (CaseI).
 *
 * The barrier strategy with dividend barrier b and the optimal activity
 * profile a(x) yields a return function g(x, b) assembled from four branches
 * that are smooth-pasted at x_alpha (activity leaves its lower bound),
 * x_beta (activity saturates at its upper bound), and b (reflection starts).
 * The unconstrained optimum b0 is the barrier at which g''(b-) vanishes;
 * f(x) = g(x, b0) is the globally optimal value function.
 *
 * Everything here is analytic: derivatives are evaluated per branch, never
 * by finite differencing. Quadrature appears only in tests as an oracle.
 */

#include "divbar/model.hpp"
#include "divbar/numerics.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace divbar {

namespace detail {

/// Parameter bundle shared by every branch formula.
struct CaseIBasics {
    double S;        // slope of the transformed activity profile
    double u;        // drift parameter: a'(x) = S (1 - u/a(x))
    double q;        // tail exponent mu^2 / (mu^2 + 2 c sigma^2)
    double r_pa, r_ma;  // characteristic roots at a = alpha
    double r_pb, r_mb;  // characteristic roots at a = beta
    double G_alpha;  // transform_G(alpha, u)

    explicit CaseIBasics(const ModelParams& p) {
        const double m2 = p.mu * p.mu + 2.0 * p.c * p.sigma2();
        S = m2 / (p.mu * p.sigma2());
        u = 2.0 * p.delta * p.mu / m2;
        q = p.mu * p.mu / m2;
        auto ra = characteristic_roots(p, p.alpha);
        auto rb = characteristic_roots(p, p.beta);
        r_pa = ra.first; r_ma = ra.second;
        r_pb = rb.first; r_mb = rb.second;
        G_alpha = transform_G(p.alpha, u);
    }

    /// Antiderivative (in the activity variable) of the middle-branch
    /// integrand after the change of variables y -> a(y).
    double mid_antiderivative(double a, const ModelParams& p) const {
        const double t = a - u;
        double val = std::pow(t, 1.0 - q) / (1.0 - q);
        if (u > 0.0) val -= (u / q) * std::pow(t, -q);
        return std::pow(p.alpha - u, q) * val / S;
    }
};

}  // namespace detail

/// First threshold: the reserve level where the optimal activity rate
/// starts to rise from its lower bound alpha. Positive in CaseI.
inline double compute_x_alpha(const ModelParams& p) {
    p.validate();
    require_case_i(p, "compute_x_alpha");
    const auto [rp, rm] = characteristic_roots(p, p.alpha);
    const double num = rm * (p.mu + p.alpha * p.sigma2() * rm);
    const double den = rp * (p.mu + p.alpha * p.sigma2() * rp);
    const double arg = num / den;
    if (!(arg > 0.0))
        throw std::domain_error("compute_x_alpha: logarithm argument not positive");
    return std::log(arg) / (rp - rm);
}

/// Second threshold: the reserve level where the optimal activity rate
/// saturates at its upper bound beta.
inline double compute_x_beta(const ModelParams& p) {
    p.validate();
    require_case_i(p, "compute_x_beta");
    const detail::CaseIBasics k(p);
    const double log_term =
        k.u > 0.0 ? k.u * std::log((p.beta - k.u) / (p.alpha - k.u)) : 0.0;
    return compute_x_alpha(p) + (p.beta - p.alpha + log_term) / k.S;
}

/// Optimal activity rate strictly between the bounds, defined on
/// [x_alpha, x_beta] through the increasing transform G.
inline double middle_a(double x, const ModelParams& p) {
    require_case_i(p, "middle_a");
    const detail::CaseIBasics k(p);
    const double xa = compute_x_alpha(p);
    const double xb = compute_x_beta(p);
    if (!(x >= xa - 1e-12 && x <= xb + 1e-12))
        throw std::domain_error("middle_a: x outside [x_alpha, x_beta]");
    const double a = transform_G_inverse(k.S * (x - xa) + k.G_alpha, k.u);
    return std::min(std::max(a, p.alpha), p.beta);
}

/// Smooth-fit constants and piecewise coefficients for barrier b.
struct Coefficients {
    double k1, k2, k3, k4;
    double A, B;      ///< barrier-shape coefficients, anchored at b0
    double xi, eta;   ///< matching value/derivative of g/k2 at x_beta
};

/// Fully assembled closed-form solution. Immutable after construction.
struct ValueFunctionSolution {
    ModelParams params;
    double b = 0.0;       ///< dividend barrier in force (> x_beta)
    double b0 = 0.0;      ///< unconstrained optimal barrier
    double x_alpha = 0.0;
    double x_beta = 0.0;
    double u = 0.0;       ///< activity-profile drift parameter
    double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
    double A = 0, B = 0;
    double xi = 0, eta = 0;

    /// Cached scheme constants (derived, kept for fast evaluation).
    double S = 0, q = 0, G_alpha = 0;
    double r_pa = 0, r_ma = 0, r_pb = 0, r_mb = 0;

    double activity(double x) const {
        if (x <= x_alpha) return params.alpha;
        if (x >= x_beta) return params.beta;
        const double a = transform_G_inverse(S * (x - x_alpha) + G_alpha, u);
        return std::min(std::max(a, params.alpha), params.beta);
    }

    double value(double x) const {
        if (x < 0.0) throw std::domain_error("value: x must be >= 0");
        if (x < x_alpha)
            return k1 * (std::exp(r_pa * x) - std::exp(r_ma * x));
        if (x < x_beta) {
            const detail::CaseIBasics bk = basics();
            const double mid = bk.mid_antiderivative(activity(x), params) -
                               bk.mid_antiderivative(params.alpha, params);
            return k2 * ((params.alpha * params.mu - 2.0 * params.delta) / (2.0 * params.c) + mid);
        }
        if (x < b)
            return k3 * std::exp(r_pb * (x - b0)) + k4 * std::exp(r_mb * (x - b0));
        return barrier_value() + (x - b);
    }

    double derivative(double x) const {
        if (x < 0.0) throw std::domain_error("derivative: x must be >= 0");
        if (x < x_alpha)
            return k1 * (r_pa * std::exp(r_pa * x) - r_ma * std::exp(r_ma * x));
        if (x < x_beta)
            return k2 * std::pow((activity(x) - u) / (params.alpha - u), -q);
        if (x < b)
            return k3 * r_pb * std::exp(r_pb * (x - b0)) + k4 * r_mb * std::exp(r_mb * (x - b0));
        return 1.0;
    }

    /// One-sided from the left at x = b; identically 0 beyond the barrier.
    double second_derivative(double x) const {
        if (x < 0.0) throw std::domain_error("second_derivative: x must be >= 0");
        if (x < x_alpha)
            return k1 * (r_pa * r_pa * std::exp(r_pa * x) - r_ma * r_ma * std::exp(r_ma * x));
        if (x < x_beta)
            return -params.mu / (params.sigma2() * activity(x)) * derivative(x);
        if (x <= b)
            return k3 * r_pb * r_pb * std::exp(r_pb * (x - b0)) +
                   k4 * r_mb * r_mb * std::exp(r_mb * (x - b0));
        return 0.0;
    }

    double barrier_value() const {
        return k3 * std::exp(r_pb * (b - b0)) + k4 * std::exp(r_mb * (b - b0));
    }

    detail::CaseIBasics basics() const {
        detail::CaseIBasics bk(params);
        return bk;
    }
};

namespace detail {

/// Matching constants at x_beta: eta is the (scaled) derivative, xi the
/// (scaled) value of the middle branch there.
inline std::pair<double, double> xi_eta(const ModelParams& p, const CaseIBasics& k) {
    const double eta = std::pow((p.beta - k.u) / (p.alpha - k.u), -k.q);
    const double mid = k.mid_antiderivative(p.beta, p) - k.mid_antiderivative(p.alpha, p);
    const double xi = (p.alpha * p.mu - 2.0 * p.delta) / (2.0 * p.c) + mid;
    return {xi, eta};
}

/// g''(b-)/g'(b-), whose sign change in b locates b0. Expressed with
/// x_beta-anchored exponentials so it is well-defined before b0 is known.
struct BarrierCurvatureRatio {
    double r_p, r_m, A_t, B_t, x_beta;

    BarrierCurvatureRatio(const ModelParams& p, const CaseIBasics& k, double xb) {
        const auto [xi, eta] = xi_eta(p, k);
        r_p = k.r_pb;
        r_m = k.r_mb;
        A_t = (eta - xi * r_m) / (r_p - r_m);
        B_t = (xi * r_p - eta) / (r_p - r_m);
        x_beta = xb;
    }

    double numerator(double bb) const {
        return A_t * r_p * r_p * std::exp(r_p * (bb - x_beta)) +
               B_t * r_m * r_m * std::exp(r_m * (bb - x_beta));
    }
    double denominator(double bb) const {
        return A_t * r_p * std::exp(r_p * (bb - x_beta)) +
               B_t * r_m * std::exp(r_m * (bb - x_beta));
    }
    double ratio(double bb) const { return numerator(bb) / denominator(bb); }
};

}  // namespace detail

/// Unconstrained optimal barrier b0: the unique zero of g''(b-)/g'(b-)
/// beyond x_beta, located by doubling bracket expansion plus Brent.
inline double solve_b0(const ModelParams& p) {
    p.validate();
    require_case_i(p, "solve_b0");
    const detail::CaseIBasics k(p);
    const double xb = compute_x_beta(p);
    detail::BarrierCurvatureRatio l(p, k, xb);
    const double span = std::max(1.0, xb - compute_x_alpha(p));
    const auto [lo, hi] = bracket_upward([&](double bb) { return l.numerator(bb); },
                                         xb, 1.0, xb + 1e6 * span, "b0");
    if (lo == hi) return lo;
    double root = brent_root([&](double bb) { return l.numerator(bb); }, lo, hi, 1e-10);
    // settle on the nonnegative side of the sign change so the one-sided
    // curvature at the returned barrier is never negative by rounding alone
    for (int i = 0; i < 64 && l.numerator(root) < 0.0; ++i)
        root = std::nextafter(root, hi);
    return root;
}

/// Closed-form b0 candidate; defined only when its logarithm argument is
/// positive. The root-finder above is authoritative.
inline std::optional<double> solve_b0_closed_form(const ModelParams& p) {
    require_case_i(p, "solve_b0_closed_form");
    const detail::CaseIBasics k(p);
    const auto [xi, eta] = detail::xi_eta(p, k);
    const double num = k.r_mb * k.r_mb * (eta - xi * k.r_pb);
    const double den = k.r_pb * k.r_pb * (eta - xi * k.r_mb);
    const double arg = num / den;
    if (!(arg > 0.0)) return std::nullopt;
    return compute_x_beta(p) + std::log(arg) / (k.r_pb - k.r_mb);
}

/// Piecewise coefficients for a fixed barrier b > x_beta. For b >= b0 these
/// define the optimal constrained value function; for x_beta < b < b0 they
/// define the (suboptimal) fixed-barrier return function.
inline Coefficients coefficients(const ModelParams& p, double b) {
    p.validate();
    require_case_i(p, "coefficients");
    const detail::CaseIBasics k(p);
    const double xa = compute_x_alpha(p);
    const double xb = compute_x_beta(p);
    if (!(b > xb))
        throw std::invalid_argument("coefficients: barrier must exceed x_beta");

    const auto [xi, eta] = detail::xi_eta(p, k);
    const double b0 = solve_b0(p);

    Coefficients out;
    out.xi = xi;
    out.eta = eta;
    out.A = (eta - xi * k.r_mb) / ((k.r_pb - k.r_mb) * std::exp(k.r_pb * (xb - b0)));
    out.B = (xi * k.r_pb - eta) / ((k.r_pb - k.r_mb) * std::exp(k.r_mb * (xb - b0)));
    const double den = out.A * k.r_pb * std::exp(k.r_pb * (b - b0)) +
                       out.B * k.r_mb * std::exp(k.r_mb * (b - b0));
    if (!(std::abs(den) > 1e-300) || !std::isfinite(den))
        throw NumericError("coefficients: degenerate barrier-slope denominator");
    out.k2 = 1.0 / den;
    out.k3 = out.A * out.k2;
    out.k4 = out.B * out.k2;
    out.k1 = out.k2 * (p.alpha * p.mu - 2.0 * p.delta) /
             (2.0 * p.c * (std::exp(k.r_pa * xa) - std::exp(k.r_ma * xa)));
    return out;
}

/// Builds the full solution for barrier b (defaults to b0 when omitted).
inline ValueFunctionSolution solve(const ModelParams& p, std::optional<double> barrier = {}) {
    p.validate();
    require_case_i(p, "solve");
    ValueFunctionSolution sol;
    sol.params = p;
    const detail::CaseIBasics k(p);
    sol.S = k.S;
    sol.u = k.u;
    sol.q = k.q;
    sol.G_alpha = k.G_alpha;
    sol.r_pa = k.r_pa; sol.r_ma = k.r_ma;
    sol.r_pb = k.r_pb; sol.r_mb = k.r_mb;
    sol.x_alpha = compute_x_alpha(p);
    sol.x_beta = compute_x_beta(p);
    sol.b0 = solve_b0(p);
    sol.b = barrier.value_or(sol.b0);
    const Coefficients co = coefficients(p, sol.b);
    sol.k1 = co.k1; sol.k2 = co.k2; sol.k3 = co.k3; sol.k4 = co.k4;
    sol.A = co.A; sol.B = co.B;
    sol.xi = co.xi; sol.eta = co.eta;
    return sol;
}

/// Return function value for barrier b at reserve x.
inline double g(double x, const ValueFunctionSolution& sol) { return sol.value(x); }

/// Sensitivity of the return function to the barrier. Collapses to
/// -g''(b-)/g'(b-) * g(x,b) because the barrier enters every branch only
/// through the common factor k2(b). Nonpositive for b >= b0.
inline double dg_db(double x, const ModelParams& p, double b) {
    const detail::CaseIBasics k(p);
    const double xb = compute_x_beta(p);
    detail::BarrierCurvatureRatio l(p, k, xb);
    const ValueFunctionSolution sol = solve(p, b);
    return -l.ratio(b) * sol.value(std::min(x, b));
}

/// Optimal (unconstrained) value function f = g(., b0).
inline double f(double x, const ModelParams& p) {
    return solve(p).value(x);
}

/// Value function for a requested barrier: reflecting below b0 is always
/// dominated, so the effective barrier is max(b_request, b0).
inline ValueFunctionSolution value_function(const ModelParams& p, double b_request) {
    const double b0 = solve_b0(p);
    return solve(p, std::max(b_request, b0));
}

/// Largest one-sided mismatch of value and first derivative across the
/// pasting points x_alpha, x_beta, and the barrier (where the derivative
/// must reach 1). Zero up to roundoff for a correctly assembled solution.
inline double smooth_fit_mismatch(const ValueFunctionSolution& s) {
    const ModelParams& p = s.params;
    double worst = 0.0;
    auto track = [&](double lhs, double rhs) {
        worst = std::max(worst, std::abs(lhs - rhs));
    };

    const double v1 = s.k1 * (std::exp(s.r_pa * s.x_alpha) - std::exp(s.r_ma * s.x_alpha));
    const double d1 = s.k1 * (s.r_pa * std::exp(s.r_pa * s.x_alpha) -
                              s.r_ma * std::exp(s.r_ma * s.x_alpha));
    track(v1, s.k2 * (p.alpha * p.mu - 2.0 * p.delta) / (2.0 * p.c));
    track(d1, s.k2);

    const double e_p = std::exp(s.r_pb * (s.x_beta - s.b0));
    const double e_m = std::exp(s.r_mb * (s.x_beta - s.b0));
    track(s.k2 * s.xi, s.k3 * e_p + s.k4 * e_m);
    track(s.k2 * s.eta, s.k3 * s.r_pb * e_p + s.k4 * s.r_mb * e_m);

    const double f_p = std::exp(s.r_pb * (s.b - s.b0));
    const double f_m = std::exp(s.r_mb * (s.b - s.b0));
    track(s.k3 * s.r_pb * f_p + s.k4 * s.r_mb * f_m, 1.0);
    return worst;
}

/// Residual of the stationary equation under the achieved control,
///   1/2 a(x)^2 sigma^2 g'' + (a(x) mu - delta) g' - c g,
/// which the closed form satisfies identically below the barrier.
inline double hjb_residual(const ValueFunctionSolution& s, double x) {
    const ModelParams& p = s.params;
    const double a = s.activity(x);
    return 0.5 * a * a * p.sigma2() * s.second_derivative(x) +
           (a * p.mu - p.delta) * s.derivative(x) - p.c * s.value(x);
}

}  // namespace divbar
