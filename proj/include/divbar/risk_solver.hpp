#pragma once

/**
 * @file risk_solver.hpp
 * @brief Constrained barrier selection, risk-based capital, and the
 *        analytic lower bound on the achievable ruin probability.
 *
 * The constrained problem keeps the barrier strategy but requires the ruin
 * probability over [0,T], started at the barrier, to stay at or below a
 * target epsilon. Raising the barrier lowers that probability toward zero,
 * so the binding case is solved by bracketing and bisection on the PDE
 * estimate of psi(T,b). Monte Carlo never enters these loops: the PDE is
 * deterministic, which keeps every result reproducible.
 */

#include "divbar/model.hpp"
#include "divbar/numerics.hpp"
#include "divbar/survival_pde.hpp"
#include "divbar/value_function.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace divbar {

/// Raised when the requested risk level cannot be met within the search cap.
class UnattainableError : public NumericError {
public:
    using NumericError::NumericError;
};

struct ConstrainedOptimum {
    double b_star = 0.0;       ///< selected barrier (= b0 when unconstrained)
    bool constrained = false;  ///< whether psi(T,b0) exceeded epsilon
    ValueFunctionSolution value_fn;  ///< closed-form solution at b_star
    double epsilon0 = 0.0;     ///< analytic lower bound on achievable epsilon
    double cost_of_safety = 0.0;  ///< g(x,b0) - g(x,b_star) at the query point
    double psi_b_star = 0.0;   ///< PDE ruin probability at the selected barrier
};

/// Analytic lower bound on the ruin probability of any barrier strategy
/// with barrier b0 over [0,T]:
///
///   eps0 = 4 [1 - Phi(b0 / (alpha sigma sqrt(T)))]^2
///          / exp{ (T/sigma^2) max(mu - delta/beta, |mu - delta/alpha|)^2 }.
///
/// Evaluated in log space so deep tails do not underflow prematurely.
inline double lower_bound_epsilon0(double b0, const ModelParams& p, double T) {
    p.validate();
    if (!(b0 > 0.0)) throw std::invalid_argument("lower_bound_epsilon0: b0 must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("lower_bound_epsilon0: T must be positive");
    const double z = b0 / (p.alpha * p.sigma * std::sqrt(T));
    const double m = std::max(p.mu - p.delta / p.beta, std::abs(p.mu - p.delta / p.alpha));
    // 1 - Phi(z) = erfc(z / sqrt(2)) / 2
    const double log_tail = log_erfc(z / 1.4142135623730951) - 0.6931471805599453;
    const double log_eps0 = 1.3862943611198906 + 2.0 * log_tail - T * m * m / p.sigma2();
    return std::exp(log_eps0);
}

namespace detail {

/// psi(T, b) started at the barrier itself, the quantity the constraint set
/// is defined through.
inline double psi_at_barrier(double b, const ModelParams& p, double T) {
    return ruin_probability(b, b, T, p);
}

}  // namespace detail

/// Smallest barrier meeting the risk constraint. Unconstrained when b0
/// already does; otherwise bracketed by doubling (psi(T,b) -> 0 as b grows)
/// and refined by bisection, returning the admissible right endpoint.
inline ConstrainedOptimum solve_b_star(const ModelParams& p, double T, double epsilon) {
    p.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("solve_b_star: epsilon must lie in (0,1)");
    if (!(T > 0.0)) throw std::invalid_argument("solve_b_star: T must be positive");

    ConstrainedOptimum out;
    const double b0 = solve_b0(p);
    out.epsilon0 = lower_bound_epsilon0(b0, p, T);

    const double psi0 = detail::psi_at_barrier(b0, p, T);
    if (psi0 <= epsilon) {
        out.b_star = b0;
        out.constrained = false;
        out.value_fn = solve(p);
        out.psi_b_star = psi0;
        return out;
    }

    const double cap = b0 * 1048576.0;  // 2^20 doublings of b0
    double lo = b0;
    double hi = 2.0 * b0;
    double psi_hi = detail::psi_at_barrier(hi, p, T);
    while (psi_hi > epsilon) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap)
            throw UnattainableError("solve_b_star: risk level " + std::to_string(epsilon) +
                                    " unattainable at search cap " + std::to_string(cap));
        psi_hi = detail::psi_at_barrier(hi, p, T);
    }

    const double width_tol = 1e-6 * b0;
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        const double psi_mid = detail::psi_at_barrier(mid, p, T);
        if (psi_mid > epsilon) {
            lo = mid;
        } else {
            hi = mid;
            psi_hi = psi_mid;
        }
    }

    out.b_star = hi;
    out.constrained = true;
    out.value_fn = solve(p, hi);
    out.psi_b_star = psi_hi;
    return out;
}

/// Risk-based capital: the smallest initial reserve whose ruin probability
/// under barrier b stays at or below epsilon. Scans the monotone final row
/// of one PDE solve and interpolates the crossing.
inline double risk_capital(double b, const ModelParams& p, double T, double epsilon) {
    p.validate();
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("risk_capital: epsilon must lie in (0,1]");
    if (!(b > 0.0)) throw std::invalid_argument("risk_capital: b must be positive");

    const auto [nx, nt] = detail::survival_resolution(b, T);
    const auto [xs, row] = detail::survival_final_row(b, p, T, nx, nt);

    const double psi_b = 1.0 - row.back();
    if (psi_b > epsilon)
        throw UnattainableError("risk_capital: psi(T,b) = " + std::to_string(psi_b) +
                                " exceeds epsilon even at x = b");

    double x_prev = xs[0];
    double psi_prev = 1.0 - row[0];
    if (psi_prev <= epsilon) return 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double psi_i = 1.0 - row[i];
        if (psi_i <= epsilon) {
            const double denom = psi_prev - psi_i;
            if (denom <= 0.0) return xs[i];
            return x_prev + (psi_prev - epsilon) * (xs[i] - x_prev) / denom;
        }
        x_prev = xs[i];
        psi_prev = psi_i;
    }
    return b;  // unreachable given the psi_b check, kept for safety
}

/// Constrained optimal value at reserve x, together with the decision
/// record. cost_of_safety is the value given up relative to the
/// unconstrained optimum at the same x.
inline std::pair<ConstrainedOptimum, double> optimal_value(double x, const ModelParams& p,
                                                           double T, double epsilon) {
    if (!(x >= 0.0)) throw std::invalid_argument("optimal_value: x must be >= 0");
    ConstrainedOptimum co = solve_b_star(p, T, epsilon);
    const double v = co.value_fn.value(x);
    co.cost_of_safety = co.constrained ? solve(p).value(x) - v : 0.0;
    return {std::move(co), v};
}

}  // namespace divbar
