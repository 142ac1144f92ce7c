#pragma once

/**
 * @file survival_pde.hpp
 * @brief Finite-difference solver for the survival probability of the
 *        reflected controlled reserve.
 *
 * phi(t,x) = P[no ruin by t | R_0 = x] solves the parabolic problem
 *
 *   phi_t = 1/2 a*(x)^2 sigma^2 phi_xx + (a*(x) mu - delta) phi_x
 *
 * on (0,b) with phi(0,x)=1, absorbing phi(t,0)=0 and reflecting
 * phi_x(t,b)=0. The scheme is Crank-Nicolson with two fully implicit
 * start-up steps to damp the t=0 corner incompatibility at x=0. The
 * control enters only through x, so both time-stepping operators are
 * assembled and factored once.
 */

#include "divbar/model.hpp"
#include "divbar/numerics.hpp"
#include "divbar/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace divbar {

/// Dense solution record. `values` holds phi on the full (t,x) lattice,
/// row-major by time level: values[it * (nx+1) + ix].
struct SurvivalGrid {
    double b = 0.0;
    double T = 0.0;
    int nx = 0;   ///< number of spatial cells (nx+1 nodes)
    int nt = 0;   ///< number of time steps (nt+1 stored levels)
    std::vector<double> x;       ///< nodes, x[0]=0, x[nx]=b
    std::vector<double> values;  ///< (nt+1)*(nx+1) lattice values

    double phi(int it, int ix) const {
        return values[static_cast<std::size_t>(it) * (nx + 1) + ix];
    }

    /// Survival probability at the final time, linear in x between nodes.
    double phi_final(double xq) const {
        const std::size_t off = static_cast<std::size_t>(nt) * (nx + 1);
        return lerp_on_grid(x, values.data() + off, nx + 1, xq);
    }
};

namespace detail {

/// Spatial mesh on [0,b] with nodes placed exactly at the control
/// thresholds and geometric grading toward the absorbing end, where the
/// solution has a boundary layer.
inline std::vector<double> survival_mesh(double b, const ModelParams& p, int nx) {
    std::vector<double> breaks{0.0};
    const double xa = compute_x_alpha(p);
    const double xb = compute_x_beta(p);
    if (xa > 0.0 && xa < b) breaks.push_back(xa);
    if (xb > breaks.back() && xb < b) breaks.push_back(xb);
    breaks.push_back(b);

    const int n_seg = static_cast<int>(breaks.size()) - 1;
    std::vector<int> cells(n_seg, 0);
    int assigned = 0;
    for (int s = 0; s < n_seg; ++s) {
        const double frac = (breaks[s + 1] - breaks[s]) / b;
        cells[s] = std::max(4, static_cast<int>(std::lround(frac * nx)));
        assigned += cells[s];
    }
    cells[n_seg - 1] += nx - assigned;  // absorb rounding in the last segment
    if (cells[n_seg - 1] < 4) {
        const int deficit = 4 - cells[n_seg - 1];
        cells[n_seg - 1] = 4;
        cells[0] = std::max(4, cells[0] - deficit);
    }

    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(nx) + n_seg + 8);
    xs.push_back(0.0);
    for (int s = 0; s < n_seg; ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        const int n = cells[s];
        const bool grade = (s == 0 && n >= 12);
        const double gamma = 2.5;
        for (int j = 1; j <= n; ++j) {
            const double t = static_cast<double>(j) / n;
            const double w = grade ? std::expm1(gamma * t) / std::expm1(gamma) : t;
            xs.push_back(j == n ? hi : lo + w * (hi - lo));
        }
    }
    return xs;
}

/// Tridiagonal rows of the spatial operator L (three-point stencil on a
/// non-uniform mesh; ghost-node mirror for the reflecting end).
struct SpatialOperator {
    std::vector<double> lower, diag, upper;  // lower[0] and upper[n] unused
    double max_peclet = 0.0;

    SpatialOperator(const std::vector<double>& xs, const FeedbackPolicy& pol,
                    const ModelParams& p) {
        const int n = static_cast<int>(xs.size()) - 1;
        lower.assign(xs.size(), 0.0);
        diag.assign(xs.size(), 0.0);
        upper.assign(xs.size(), 0.0);
        for (int i = 1; i < n; ++i) {
            const double hm = xs[i] - xs[i - 1];
            const double hp = xs[i + 1] - xs[i];
            const double a = pol(xs[i]);
            const double D = 0.5 * a * a * p.sigma2();
            const double V = a * p.mu - p.delta;
            lower[i] = (2.0 * D - V * hp) / (hm * (hm + hp));
            diag[i] = -2.0 * D / (hm * hp) + V * (hp - hm) / (hm * hp);
            upper[i] = (2.0 * D + V * hm) / (hp * (hm + hp));
            max_peclet = std::max(max_peclet, std::abs(V) * std::max(hm, hp) / D);
        }
        const double h = xs[n] - xs[n - 1];
        const double a = pol(xs[n]);
        const double D = 0.5 * a * a * p.sigma2();
        lower[n] = 2.0 * D / (h * h);
        diag[n] = -2.0 * D / (h * h);
        // row 0 stays zero: the absorbing value is pinned by the identity part
    }
};

/// One factored theta-step: solve (I - theta dt L) v = (I + (1-theta) dt L) v.
class ThetaStep {
  public:
    ThetaStep(const SpatialOperator& L, double dt, double theta) {
        const std::size_t n = L.diag.size();
        el_.resize(n); ed_.resize(n); eu_.resize(n);
        std::vector<double> il(n), id(n), iu(n);
        for (std::size_t i = 0; i < n; ++i) {
            el_[i] = (1.0 - theta) * dt * L.lower[i];
            ed_[i] = 1.0 + (1.0 - theta) * dt * L.diag[i];
            eu_[i] = (1.0 - theta) * dt * L.upper[i];
            il[i] = -theta * dt * L.lower[i];
            id[i] = 1.0 - theta * dt * L.diag[i];
            iu[i] = -theta * dt * L.upper[i];
        }
        solver_.factor(il, id, iu);
    }

    void advance(std::vector<double>& v, std::vector<double>& scratch) const {
        const std::size_t n = v.size();
        scratch[0] = ed_[0] * v[0];
        for (std::size_t i = 1; i + 1 < n; ++i)
            scratch[i] = el_[i] * v[i - 1] + ed_[i] * v[i] + eu_[i] * v[i + 1];
        scratch[n - 1] = el_[n - 1] * v[n - 2] + ed_[n - 1] * v[n - 1];
        solver_.solve(scratch);
        v.swap(scratch);
    }

  private:
    std::vector<double> el_, ed_, eu_;  // explicit-side rows
    TridiagonalSolver solver_;
};

/// Shared stepping core. `sink(it, v)` is called at every stored level,
/// including the initial one.
template <class Sink>
void run_survival(double b, const ModelParams& p, double T, int nx, int nt, Sink&& sink) {
    p.validate();
    if (!(b > 0.0)) throw std::invalid_argument("solve_survival: b must be positive");
    if (nx < 100 || nt < 100)
        throw std::invalid_argument("solve_survival: need nx >= 100 and nt >= 100");
    if (!(T > 0.0)) throw std::invalid_argument("solve_survival: T must be positive");

    const FeedbackPolicy pol(p);
    std::vector<double> xs;
    SpatialOperator* op = nullptr;
    std::vector<SpatialOperator> op_store;
    for (int attempt = 0;; ++attempt) {
        xs = survival_mesh(b, p, nx << attempt);
        op_store.clear();
        op_store.emplace_back(xs, pol, p);
        if (op_store.back().max_peclet <= 2.0) {
            op = &op_store.back();
            break;
        }
        if (attempt >= 6)
            throw NumericError("solve_survival: advection-dominated at affordable resolution");
    }

    const double dt = T / nt;
    const ThetaStep implicit_step(*op, dt, 1.0);
    const ThetaStep cn_step(*op, dt, 0.5);

    std::vector<double> v(xs.size(), 1.0);
    v[0] = 0.0;
    std::vector<double> scratch(xs.size());
    sink(0, xs, v);
    for (int it = 1; it <= nt; ++it) {
        if (it <= 2)
            implicit_step.advance(v, scratch);
        else
            cn_step.advance(v, scratch);
        sink(it, xs, v);
    }
}

/// Final-row-only variant for callers that never need the history
/// (root-finding loops at large nt, where the lattice would not fit).
inline std::pair<std::vector<double>, std::vector<double>> survival_final_row(
    double b, const ModelParams& p, double T, int nx, int nt) {
    std::vector<double> xs_out, row;
    run_survival(b, p, T, nx, nt,
                 [&](int it, const std::vector<double>& xs, const std::vector<double>& v) {
                     if (it == nt) { xs_out = xs; row = v; }
                 });
    return {std::move(xs_out), std::move(row)};
}

/// Resolution targets: dx about 0.05 (capped) and dt about 2.5e-3.
inline std::pair<int, int> survival_resolution(double b, double T) {
    const int nx = std::clamp(static_cast<int>(std::lround(b / 0.05)), 2000, 32000);
    const int nt = std::clamp(static_cast<int>(std::lround(T / 0.0025)), 4000, 120000);
    return {nx, nt};
}

}  // namespace detail

/// Solves the survival problem and returns the full lattice.
inline SurvivalGrid solve_survival(double b, const ModelParams& p, double T,
                                   int nx = 2000, int nt = 4000) {
    SurvivalGrid grid;
    grid.b = b;
    grid.T = T;
    grid.nt = nt;
    detail::run_survival(
        b, p, T, nx, nt,
        [&](int it, const std::vector<double>& xs, const std::vector<double>& v) {
            if (it == 0) {
                grid.x = xs;
                grid.nx = static_cast<int>(xs.size()) - 1;
                grid.values.reserve(static_cast<std::size_t>(nt + 1) * xs.size());
            }
            grid.values.insert(grid.values.end(), v.begin(), v.end());
        });
    return grid;
}

/// Ruin probability psi(T,x) = 1 - phi(T,x) for barrier b, at solver-chosen
/// resolution, linear interpolation in x.
inline double ruin_probability(double b, double x, double T, const ModelParams& p) {
    if (!(x >= 0.0 && x <= b))
        throw std::invalid_argument("ruin_probability: x outside [0,b]");
    if (x == 0.0) return 1.0;
    const auto [nx, nt] = detail::survival_resolution(b, T);
    const auto [xs, row] = detail::survival_final_row(b, p, T, nx, nt);
    const double phi = lerp_on_grid(xs, row.data(), row.size(), x);
    return std::min(1.0, std::max(0.0, 1.0 - phi));
}

}  // namespace divbar
