#pragma once

/**
 * @file policy.hpp
 * @brief Optimal feedback activity rate a*(x) and its regularity bounds.
 *
 * The optimal control is a continuous, nondecreasing three-piece profile:
 * pinned at alpha for small reserves, strictly increasing through the
 * transform G on [x_alpha, x_beta], and saturated at beta above x_beta.
 */

#include "divbar/model.hpp"
#include "divbar/value_function.hpp"

#include <algorithm>
#include <cmath>

namespace divbar {

/// Precomputed feedback policy. Evaluation never root-finds below x_alpha
/// or above x_beta; between the thresholds it inverts G once per call.
struct FeedbackPolicy {
    ModelParams params;
    double x_alpha = 0.0;
    double x_beta = 0.0;
    double S = 0.0;        ///< slope of G(a*(x)) in x
    double u = 0.0;        ///< lower pole of the transform
    double G_alpha = 0.0;

    explicit FeedbackPolicy(const ModelParams& p) : params(p) {
        p.validate();
        require_case_i(p, "FeedbackPolicy");
        const detail::CaseIBasics k(p);
        S = k.S;
        u = k.u;
        G_alpha = k.G_alpha;
        x_alpha = compute_x_alpha(p);
        x_beta = compute_x_beta(p);
    }

    double operator()(double x) const {
        if (x <= x_alpha) return params.alpha;
        if (x >= x_beta) return params.beta;
        const double a = transform_G_inverse(S * (x - x_alpha) + G_alpha, u);
        return std::clamp(a, params.alpha, params.beta);
    }

    /// da*/dx, one-sided at the thresholds (0 from outside the band).
    double slope(double x) const {
        if (x <= x_alpha || x >= x_beta) return 0.0;
        const double a = (*this)(x);
        return S * (a - u) / a;
    }
};

/// Optimal activity rate at reserve x.
inline double a_star(double x, const ModelParams& p) {
    return FeedbackPolicy(p)(x);
}

/// Supremum of |da*/dx|: the profile slope S (a - u)/a is increasing in a,
/// so the bound is attained as a -> beta.
inline double lipschitz_bound(const ModelParams& p) {
    p.validate();
    require_case_i(p, "lipschitz_bound");
    const detail::CaseIBasics k(p);
    return k.S * (p.beta - k.u) / p.beta;
}

}  // namespace divbar
