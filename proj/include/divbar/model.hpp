#pragma once

/**
 * @file model.hpp
 * @brief Model parameters, regime classification, and the elementary
 *        closed-form building blocks shared by every solver layer.
 *
 * The company reserve follows
 *     dR = (a(t)mu - delta) dt + a(t) sigma dW - dL,   a(t) in [alpha, beta],
 * where L is the cumulative dividend stream and ruin is the first time R
 * hits 0. Dividends are valued as E[ integral e^{-c t} dL ].
 */

#include "divbar/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace divbar {

/// Thrown by solvers whose closed forms cover only the low-debt regime.
class UnsupportedCaseError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Market/diffusion constants. Immutable value type.
struct ModelParams {
    double mu = 0.0;     ///< profit rate per unit of business activity (> 0)
    double sigma = 0.0;  ///< volatility rate per unit of business activity (> 0)
    double delta = 0.0;  ///< debt service rate, paid regardless of activity (>= 0)
    double c = 0.0;      ///< dividend discount rate (> 0)
    double alpha = 0.0;  ///< lower bound on the business activity rate (> 0)
    double beta = 0.0;   ///< upper bound on the business activity rate

    double sigma2() const { return sigma * sigma; }

    /// Throws std::invalid_argument unless every parameter constraint holds.
    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("ModelParams: mu must be > 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("ModelParams: sigma must be > 0");
        if (!(delta >= 0.0)) throw std::invalid_argument("ModelParams: delta must be >= 0");
        if (!(c > 0.0)) throw std::invalid_argument("ModelParams: c must be > 0");
        if (!(0.0 < alpha && alpha < beta))
            throw std::invalid_argument("ModelParams: need 0 < alpha < beta");
        if (!std::isfinite(beta))
            throw std::invalid_argument("ModelParams: beta must be finite");
        if (!(beta * mu > delta))
            throw std::invalid_argument("ModelParams: need beta*mu > delta");
    }
};

/// Bankruptcy-probability constraint: ruin within horizon T must have
/// probability at most epsilon.
struct RiskConstraint {
    double T = 0.0;        ///< horizon (> 0)
    double epsilon = 0.0;  ///< admissible ruin probability, in (0,1)

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("RiskConstraint: T must be > 0");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("RiskConstraint: epsilon must lie in (0,1)");
    }
};

/// Debt-load regime, determined by where 2*delta/mu falls relative to the
/// control bounds. Only CaseI admits the closed-form construction below.
enum class CaseLabel { CaseI, CaseII, CaseIII };

inline const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::CaseI: return "CaseI";
        case CaseLabel::CaseII: return "CaseII";
        case CaseLabel::CaseIII: return "CaseIII";
    }
    return "?";
}

/// CaseI iff 2delta/mu < alpha; CaseII iff alpha <= 2delta/mu < beta;
/// CaseIII otherwise. Invariant under joint scaling of (mu, delta).
inline CaseLabel classify_case(const ModelParams& p) {
    const double ratio = 2.0 * p.delta / p.mu;
    if (ratio < p.alpha) return CaseLabel::CaseI;
    if (ratio < p.beta) return CaseLabel::CaseII;
    return CaseLabel::CaseIII;
}

/// Throws UnsupportedCaseError unless params fall in CaseI.
inline void require_case_i(const ModelParams& p, const char* who) {
    const CaseLabel label = classify_case(p);
    if (label != CaseLabel::CaseI)
        throw UnsupportedCaseError(std::string(who) + ": closed forms require CaseI "
                                   "(2*delta/mu < alpha); classified as " + to_string(label));
}

/// Roots of (sigma^2 a^2 / 2) r^2 + (mu a - delta) r - c = 0, the
/// characteristic equation of the discounted-value ODE at activity level a.
/// Always r_plus > 0 > r_minus. Evaluated in a cancellation-free form.
inline std::pair<double, double> characteristic_roots(const ModelParams& p, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("characteristic_roots: a must be > 0");
    const double s2a2 = p.sigma2() * a * a;
    const double drift = p.mu * a - p.delta;
    const double disc = std::sqrt(drift * drift + 2.0 * s2a2 * p.c);
    double r_plus, r_minus;
    if (drift >= 0.0) {
        r_plus = 2.0 * p.c / (disc + drift);
        r_minus = -(disc + drift) / s2a2;
    } else {
        r_plus = (disc - drift) / s2a2;
        r_minus = -2.0 * p.c / (disc - drift);
    }
    return {r_plus, r_minus};
}

/// The activity-profile transform G(z) = z + u log(z - u), strictly
/// increasing from -inf to +inf on (u, inf). For u = 0 it is the identity.
inline double transform_G(double z, double u) {
    if (!(u >= 0.0)) throw std::domain_error("transform_G: u must be >= 0");
    if (!(z > u)) throw std::domain_error("transform_G: require z > u");
    if (u == 0.0) return z;
    return z + u * std::log(z - u);
}

/// Inverse of transform_G: the unique z > u with G(z) = y, via Newton
/// iterations bracketed by bisection. |G(result) - y| <= ~1e-12.
inline double transform_G_inverse(double y, double u) {
    if (!(u >= 0.0)) throw std::domain_error("transform_G_inverse: u must be >= 0");
    if (u == 0.0) return y;

    // G(z) >= z for z >= u + 1, so a linear cap bounds the root from above
    double lo = u + 1e-12;
    double hi = std::max(u + 1.0, y);
    while (transform_G(hi, u) < y) hi = u + 2.0 * (hi - u);
    while (transform_G(lo, u) > y) lo = u + 0.5 * (lo - u);

    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = transform_G(z, u) - y;
        if (g > 0.0) hi = z; else lo = z;
        const double slope = z / (z - u);  // G'(z) = 1 + u/(z-u)
        double next = z - g / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 1e-13 * std::max(1.0, std::abs(z)) + 5e-13) {
            z = next;
            break;
        }
        z = next;
    }
    return z;
}

}  // namespace divbar
