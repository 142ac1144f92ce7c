#pragma once

/**
 * @file numerics.hpp
 * @brief Shared numeric kernels: root bracketing/refinement, adaptive
 *        quadrature, the standard normal CDF, and a reusable tridiagonal
 *        (Thomas) factorization.
 */

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace divbar {

/// Raised when an iterative numeric procedure cannot deliver its contract
/// (failed bracket, non-converging series, degenerate denominator, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a series does not reach its term floor within the allowed
/// number of terms.
class TruncationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Standard normal CDF via erfc; accurate to ~1e-15 over the full range.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / 1.4142135623730951);
}

inline double normal_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}

/// log(erfc(z)) without premature underflow: direct below z=20, the
/// asymptotic expansion erfc(z) ~ e^{-z^2}/(z sqrt(pi)) (1 - 1/(2z^2) + ...)
/// above it.
inline double log_erfc(double z) {
    if (z < 20.0) return std::log(std::erfc(z));
    const double iz2 = 1.0 / (z * z);
    const double series = 1.0 + iz2 * (-0.5 + iz2 * (0.75 + iz2 * (-1.875 + iz2 * 6.5625)));
    return -z * z - std::log(z * 1.7724538509055160) + std::log(series);
}

/// Expands [lo, lo+step] rightwards by doubling until f changes sign.
/// Returns the bracketing interval. Throws NumericError when the sign
/// change is not found before hi_cap.
template <class F>
std::pair<double, double> bracket_upward(F&& f, double lo, double step, double hi_cap,
                                         const char* what = "root") {
    double flo = f(lo);
    if (flo == 0.0) return {lo, lo};
    double hi = lo + step;
    while (hi <= hi_cap) {
        double fhi = f(hi);
        if (fhi == 0.0) return {hi, hi};
        if ((flo < 0.0) != (fhi < 0.0)) return {lo, hi};
        lo = hi;
        flo = fhi;
        hi += step;
        step *= 2.0;
    }
    throw NumericError(std::string("bracket_upward: no sign change found for ") + what +
                       " below cap " + std::to_string(hi_cap));
}

/// Brent-style root refinement on a bracketing interval: inverse-quadratic /
/// secant steps guarded by bisection. Converges to |interval| <= xtol.
template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-12, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0))
        throw NumericError("brent_root: endpoints do not bracket a sign change");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = e = m;  // bisection
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {  // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {  // inverse quadratic
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if ((fb < 0.0) == (fc < 0.0)) {
            c = a; fc = fa;
            d = e = b - a;
        }
    }
    throw NumericError("brent_root: iteration limit reached");
}

/// Adaptive Gauss-Kronrod integration with an absolute error target.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
    if (a == b) return 0.0;
    double err = 0.0;
    // gauss_kronrod's tol is relative to the integral's own scale; feed it an
    // aggressive target and verify the reported error estimate afterwards.
    double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, /*max_depth=*/18, /*tol=*/1e-13, &err);
    if (err > abs_tol && err > 1e-11 * std::abs(val))
        throw NumericError("integrate: requested accuracy not reached");
    return val;
}

/// Tridiagonal system solver with reusable forward-elimination factors.
/// Factor once, then solve(rhs) any number of times; the matrix rows are
/// (lower[i], diag[i], upper[i]) with lower[0] and upper[n-1] ignored.
class TridiagonalSolver {
public:
    TridiagonalSolver() = default;

    TridiagonalSolver(std::vector<double> lower, std::vector<double> diag,
                      std::vector<double> upper) {
        factor(std::move(lower), std::move(diag), std::move(upper));
    }

    /// Precomputes the LU sweep for the given bands. lower[0] and
    /// upper[n-1] are ignored.
    void factor(std::vector<double> lower, std::vector<double> diag,
                std::vector<double> upper) {
        lower_ = std::move(lower);
        upper_ = std::move(upper);
        const std::size_t n = diag.size();
        if (lower_.size() != n || upper_.size() != n)
            throw std::invalid_argument("TridiagonalSolver: band size mismatch");
        inv_diag_.assign(n, 0.0);
        double piv = diag[0];
        for (std::size_t i = 0;;) {
            if (piv == 0.0) throw NumericError("TridiagonalSolver: zero pivot");
            inv_diag_[i] = 1.0 / piv;
            if (++i == n) break;
            piv = diag[i] - lower_[i] * upper_[i - 1] * inv_diag_[i - 1];
        }
    }

    std::size_t size() const { return inv_diag_.size(); }

    /// Solves in place. rhs.size() must equal size().
    void solve(std::vector<double>& rhs) const {
        const std::size_t n = inv_diag_.size();
        for (std::size_t i = 1; i < n; ++i)
            rhs[i] -= lower_[i] * inv_diag_[i - 1] * rhs[i - 1];
        rhs[n - 1] *= inv_diag_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) * inv_diag_[i];
    }

private:
    std::vector<double> lower_, upper_, inv_diag_;
};

/// y(xq) by linear interpolation on a sorted grid; clamps outside the range.
inline double lerp_on_grid(const std::vector<double>& xs, const double* ys, std::size_t n,
                           double xq) {
    if (xq <= xs.front()) return ys[0];
    if (xq >= xs.back()) return ys[n - 1];
    const auto it = std::upper_bound(xs.begin(), xs.end(), xq);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double w = (xq - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

inline double lerp_on_grid(const std::vector<double>& xs, const std::vector<double>& ys,
                           double xq) {
    return lerp_on_grid(xs, ys.data(), ys.size(), xq);
}

}  // namespace divbar
