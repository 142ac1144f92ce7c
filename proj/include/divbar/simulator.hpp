#pragma once

/**
 * @file simulator.hpp
 * @brief Monte Carlo engine for the reflected controlled reserve, plus the
 *        analytic band-survival series used to validate it.
 *
 * Paths follow Euler-Maruyama under the feedback control a*(x) with
 * Skorokhod projection at the dividend barrier: any overshoot above b is
 * paid out immediately and the state is projected back to b, so the
 * cumulative dividend process increases only when the pre-projection state
 * exceeds the barrier. Ruin is declared at grid times when the state is at
 * or below zero; no intra-step crossing correction is applied, and the
 * resulting bias is bounded by the dt-refinement checks in the test suite.
 *
 * Reproducibility: each sample (a path, or an antithetic pair) owns a
 * counter-based substream keyed by (seed, sample index). Samples are
 * processed in fixed blocks whose partial sums are merged in block order,
 * so results are bitwise identical for a given seed at any thread count.
 */

#include "divbar/model.hpp"
#include "divbar/numerics.hpp"
#include "divbar/policy.hpp"
#include "divbar/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace divbar {

struct SimConfig {
    double dt = 1e-3;
    std::int64_t n_paths = 100000;
    std::uint64_t seed = 0;
    bool antithetic = false;
    bool record_paths = false;  ///< keep per-path ruin times and dividends

    void validate(double T) const {
        if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
        if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
        if (!(dt <= T)) throw std::invalid_argument("SimConfig: dt must not exceed T");
        if (antithetic && (n_paths % 2) != 0)
            throw std::invalid_argument("SimConfig: antithetic runs need an even n_paths");
    }
};

/// Per-path outcome; ruin_time < 0 means the path survived the horizon.
struct PathRecord {
    double ruin_time = -1.0;
    double dividends = 0.0;
};

struct SimBatch {
    std::int64_t n_paths = 0;
    std::int64_t n_samples = 0;  ///< independent samples: paths, or pairs when antithetic
    double ruin_fraction = 0.0;
    double ruin_se = 0.0;
    double discounted_dividends = 0.0;
    double dividends_se = 0.0;
    std::vector<double> ruin_times;      ///< ruined paths only, deterministic order; only if recorded
    std::vector<PathRecord> paths;       ///< all paths in deterministic order; only if recorded
};

namespace detail {

/// Tabulated per-step drift and volatility increments for the feedback
/// control on [0, x_beta]; above x_beta both are constant. Linear
/// interpolation keeps the activity error below lipschitz_bound * dx.
struct SteppingTable {
    double x_beta = 0.0;
    double inv_dx = 0.0;
    int n = 0;
    std::vector<double> drift_dt;   // (a mu - delta) dt at the nodes
    std::vector<double> vol_sqdt;   // a sigma sqrt(dt) at the nodes
    double drift_hi = 0.0, vol_hi = 0.0;

    SteppingTable(const ModelParams& p, double dt) {
        const FeedbackPolicy pol(p);
        x_beta = pol.x_beta;
        n = std::clamp(static_cast<int>(std::lround(x_beta / 0.01)), 256, 1 << 16);
        inv_dx = n / x_beta;
        drift_dt.resize(n + 1);
        vol_sqdt.resize(n + 1);
        const double sqdt = std::sqrt(dt);
        for (int i = 0; i <= n; ++i) {
            const double a = pol(x_beta * i / n);
            drift_dt[i] = (a * p.mu - p.delta) * dt;
            vol_sqdt[i] = a * p.sigma * sqdt;
        }
        drift_hi = (p.beta * p.mu - p.delta) * dt;
        vol_hi = p.beta * p.sigma * sqdt;
    }
};

/// Advances one path to ruin or the horizon. `decay` is e^{-c dt}.
inline PathRecord run_path(double x0, double b, const SteppingTable& tab, long n_steps,
                           double dt, double decay, PhiloxStream& rng, double z_sign) {
    PathRecord res;
    double R = x0;
    double disc = 1.0;
    for (long k = 0; k < n_steps; ++k) {
        const double z = z_sign * sample_normal(rng);
        double drift, vol;
        if (R >= tab.x_beta) {
            drift = tab.drift_hi;
            vol = tab.vol_hi;
        } else {
            const double s = R * tab.inv_dx;
            int i = static_cast<int>(s);
            if (i >= tab.n) i = tab.n - 1;
            const double w = s - i;
            drift = tab.drift_dt[i] + w * (tab.drift_dt[i + 1] - tab.drift_dt[i]);
            vol = tab.vol_sqdt[i] + w * (tab.vol_sqdt[i + 1] - tab.vol_sqdt[i]);
        }
        R += drift + vol * z;
        disc *= decay;
        if (R <= 0.0) {
            res.ruin_time = (k + 1) * dt;
            return res;
        }
        if (R > b) {
            res.dividends += disc * (R - b);
            R = b;
        }
    }
    return res;
}

/// Antithetic twin of run_path: both legs share one normal stream, the
/// second leg negates every draw. Legs ruin independently, so draws keep
/// flowing to a leg after its twin has stopped.
inline std::pair<PathRecord, PathRecord> run_pair(double x0, double b,
                                                  const SteppingTable& tab, long n_steps,
                                                  double dt, double decay,
                                                  PhiloxStream& rng) {
    std::pair<PathRecord, PathRecord> res;
    double R1 = x0, R2 = x0;
    bool alive1 = true, alive2 = true;
    double disc = 1.0;
    for (long k = 0; k < n_steps && (alive1 || alive2); ++k) {
        const double z = sample_normal(rng);
        disc *= decay;
        for (int leg = 0; leg < 2; ++leg) {
            bool& alive = leg ? alive2 : alive1;
            if (!alive) continue;
            double& R = leg ? R2 : R1;
            PathRecord& out = leg ? res.second : res.first;
            const double zz = leg ? -z : z;
            double drift, vol;
            if (R >= tab.x_beta) {
                drift = tab.drift_hi;
                vol = tab.vol_hi;
            } else {
                const double s = R * tab.inv_dx;
                int i = static_cast<int>(s);
                if (i >= tab.n) i = tab.n - 1;
                const double w = s - i;
                drift = tab.drift_dt[i] + w * (tab.drift_dt[i + 1] - tab.drift_dt[i]);
                vol = tab.vol_sqdt[i] + w * (tab.vol_sqdt[i + 1] - tab.vol_sqdt[i]);
            }
            R += drift + vol * zz;
            if (R <= 0.0) {
                out.ruin_time = (k + 1) * dt;
                alive = false;
            } else if (R > b) {
                out.dividends += disc * (R - b);
                R = b;
            }
        }
    }
    return res;
}

struct BlockStats {
    double ruin_sum = 0.0, ruin_sq = 0.0;
    double div_sum = 0.0, div_sq = 0.0;
    std::vector<double> ruin_times;
    std::vector<PathRecord> paths;
};

}  // namespace detail

/// Simulates the reflected reserve from x under barrier b up to horizon T.
inline SimBatch simulate_reflected(double x, double b, const ModelParams& p, double T,
                                   const SimConfig& cfg) {
    p.validate();
    cfg.validate(T);
    if (!(x >= 0.0 && x <= b))
        throw std::invalid_argument("simulate_reflected: x outside [0,b]");

    SimBatch out;
    out.n_paths = cfg.n_paths;
    out.n_samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;

    if (x == 0.0) {
        out.ruin_fraction = 1.0;
        if (cfg.record_paths) {
            out.ruin_times.assign(cfg.n_paths, 0.0);
            out.paths.assign(cfg.n_paths, PathRecord{0.0, 0.0});
        }
        return out;
    }

    const detail::SteppingTable tab(p, cfg.dt);
    const long n_steps = std::max<long>(1, std::lround(T / cfg.dt));
    const double decay = std::exp(-p.c * cfg.dt);

    constexpr std::int64_t kBlock = 4096;
    const std::int64_t n_blocks = (out.n_samples + kBlock - 1) / kBlock;
    std::vector<detail::BlockStats> partials(n_blocks);

    auto run_block = [&](std::int64_t blk) {
        detail::BlockStats& st = partials[blk];
        const std::int64_t s_lo = blk * kBlock;
        const std::int64_t s_hi = std::min(out.n_samples, s_lo + kBlock);
        for (std::int64_t s = s_lo; s < s_hi; ++s) {
            PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(s));
            double y_ruin, y_div;
            if (cfg.antithetic) {
                const auto [r1, r2] =
                    detail::run_pair(x, b, tab, n_steps, cfg.dt, decay, rng);
                y_ruin = 0.5 * ((r1.ruin_time >= 0.0) + (r2.ruin_time >= 0.0));
                y_div = 0.5 * (r1.dividends + r2.dividends);
                if (cfg.record_paths) {
                    if (r1.ruin_time >= 0.0) st.ruin_times.push_back(r1.ruin_time);
                    if (r2.ruin_time >= 0.0) st.ruin_times.push_back(r2.ruin_time);
                    st.paths.push_back(r1);
                    st.paths.push_back(r2);
                }
            } else {
                const auto r =
                    detail::run_path(x, b, tab, n_steps, cfg.dt, decay, rng, 1.0);
                y_ruin = (r.ruin_time >= 0.0) ? 1.0 : 0.0;
                y_div = r.dividends;
                if (cfg.record_paths) {
                    if (r.ruin_time >= 0.0) st.ruin_times.push_back(r.ruin_time);
                    st.paths.push_back(r);
                }
            }
            st.ruin_sum += y_ruin;
            st.ruin_sq += y_ruin * y_ruin;
            st.div_sum += y_div;
            st.div_sq += y_div * y_div;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::int64_t>(hw, n_blocks));
    if (n_workers <= 1) {
        for (std::int64_t blk = 0; blk < n_blocks; ++blk) run_block(blk);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (std::int64_t blk = next.fetch_add(1); blk < n_blocks;
                     blk = next.fetch_add(1))
                    run_block(blk);
            });
        for (auto& t : pool) t.join();
    }

    double ruin_sum = 0.0, ruin_sq = 0.0, div_sum = 0.0, div_sq = 0.0;
    for (const auto& st : partials) {
        ruin_sum += st.ruin_sum;
        ruin_sq += st.ruin_sq;
        div_sum += st.div_sum;
        div_sq += st.div_sq;
    }
    if (cfg.record_paths)
        for (auto& st : partials) {
            out.ruin_times.insert(out.ruin_times.end(), st.ruin_times.begin(),
                                  st.ruin_times.end());
            out.paths.insert(out.paths.end(), st.paths.begin(), st.paths.end());
        }

    const double n = static_cast<double>(out.n_samples);
    out.ruin_fraction = ruin_sum / n;
    out.discounted_dividends = div_sum / n;
    if (out.n_samples > 1) {
        const double vr = std::max(0.0, (ruin_sq - ruin_sum * ruin_sum / n) / (n - 1.0));
        const double vd = std::max(0.0, (div_sq - div_sum * div_sum / n) / (n - 1.0));
        out.ruin_se = std::sqrt(vr / n);
        out.dividends_se = std::sqrt(vd / n);
    }
    return out;
}

/// Infinite-horizon dividend value by truncation: requires the discount
/// weight beyond T_long to be negligible.
inline SimBatch estimate_J(double x, double b, const ModelParams& p, double T_long,
                           const SimConfig& cfg) {
    if (!(std::exp(-p.c * T_long) < 1e-4))
        throw std::invalid_argument("estimate_J: T_long too short for the discount rate");
    return simulate_reflected(x, b, p, T_long, cfg);
}

/// Probability that a constant-activity (a = beta) reserve started at
/// `start` stays strictly inside the band (b1, b2) up to time T, by the
/// reflected-image series for Brownian motion with drift between two
/// absorbing lines. Terms are added in rings k = 0, 1, 2, ... until a ring
/// falls below 1e-12 in absolute contribution.
inline double bm_band_stay_probability(double b1, double b2, double start,
                                       const ModelParams& p, double T, int K = 200) {
    p.validate();
    if (!(b1 < b2)) throw std::invalid_argument("bm_band_stay_probability: need b1 < b2");
    if (K < 1) throw std::invalid_argument("bm_band_stay_probability: need K >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("bm_band_stay_probability: need T > 0");
    if (!(start > b1 && start < b2))
        throw std::domain_error("bm_band_stay_probability: start outside (b1, b2)");

    const double scale = p.sigma * p.beta;
    const double m = (p.beta * p.mu - p.delta) / scale;
    const double L = (b2 - b1) / scale;
    const double x0 = (start - b1) / scale;
    const double rt = std::sqrt(T);

    auto term = [&](long k) {
        const double shift = 2.0 * k * L;
        const double t1 =
            std::exp(2.0 * m * k * L) * (normal_cdf((L - x0 - shift - m * T) / rt) -
                                         normal_cdf((-x0 - shift - m * T) / rt));
        const double t2 =
            std::exp(2.0 * m * (k * L - x0)) * (normal_cdf((L + x0 - shift - m * T) / rt) -
                                                normal_cdf((x0 - shift - m * T) / rt));
        return std::pair<double, double>{t1 - t2, std::abs(t1) + std::abs(t2)};
    };

    auto [sum, ring] = term(0);
    bool converged = ring < 1e-12;
    for (long k = 1; k <= K && !converged; ++k) {
        const auto [tp, rp] = term(k);
        const auto [tm, rm] = term(-k);
        sum += tp + tm;
        converged = (rp + rm) < 1e-12;
    }
    if (!converged)
        throw TruncationError("bm_band_stay_probability: series not converged at K terms");
    if (sum < -1e-9 || sum > 1.0 + 1e-9)
        throw NumericError("bm_band_stay_probability: series outside [0,1]");
    return std::min(1.0, std::max(0.0, sum));
}

struct MCEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// Monte Carlo estimate of the band-stay probability under constant
/// activity beta, used as the independent cross-check of the series above.
/// Each step applies the Brownian-bridge survival factor for both barriers,
/// so the estimator has no grid-monitoring bias at leading order; the
/// weight of a path that exits on the grid is zero.
inline MCEstimate mc_band_stay_probability(double b1, double b2, double start,
                                           const ModelParams& p, double T, double dt,
                                           std::int64_t n_paths, std::uint64_t seed) {
    p.validate();
    if (!(b1 < start && start < b2))
        throw std::domain_error("mc_band_stay_probability: start outside (b1, b2)");
    if (!(dt > 0.0 && dt <= T) || n_paths < 2)
        throw std::invalid_argument("mc_band_stay_probability: bad dt or n_paths");

    const double drift = (p.beta * p.mu - p.delta) * dt;
    const double vol = p.beta * p.sigma * std::sqrt(dt);
    const double inv_var = 1.0 / (vol * vol);
    const long n_steps = std::max<long>(1, std::lround(T / dt));

    double sum = 0.0, sq = 0.0;
    for (std::int64_t path = 0; path < n_paths; ++path) {
        PhiloxStream rng(seed, static_cast<std::uint64_t>(path));
        double X = start;
        double w = 1.0;
        for (long k = 0; k < n_steps; ++k) {
            const double Xn = X + drift + vol * sample_normal(rng);
            if (Xn <= b1 || Xn >= b2) {
                w = 0.0;
                break;
            }
            // exponents above ~40 leave the factor equal to 1 in double
            // precision, so only near-barrier steps pay for the expm1
            const double e_lo = 2.0 * (X - b1) * (Xn - b1) * inv_var;
            const double e_hi = 2.0 * (b2 - X) * (b2 - Xn) * inv_var;
            if (e_lo < 40.0) w *= -std::expm1(-e_lo);
            if (e_hi < 40.0) w *= -std::expm1(-e_hi);
            X = Xn;
        }
        sum += w;
        sq += w * w;
    }
    const double n = static_cast<double>(n_paths);
    MCEstimate est;
    est.value = sum / n;
    const double var = std::max(0.0, (sq - sum * sum / n) / (n - 1.0));
    est.se = std::sqrt(var / n);
    return est;
}

}  // namespace divbar
