#pragma once

/**
 * @file rng.hpp
 * @brief Counter-based random numbers for reproducible parallel Monte Carlo.
 *
 * Philox4x32-10 keyed by (seed, path id) gives every simulated path its own
 * substream: results for a given seed are identical regardless of how paths
 * are sharded across threads. Normals come from a 256-layer ziggurat whose
 * tables are solved at startup from the layer-area equations, so the sampler
 * is exact (up to the f(x) = exp(-x^2/2) evaluations) rather than tabulated.
 */

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace divbar {

/// One 10-round Philox4x32 block: 128 bits of counter, 64 bits of key,
/// 128 bits out. Passes the published known-answer vectors (see tests).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0;;) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        if (++round == 10) break;
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// A single path's substream: 64-bit words drawn from Philox blocks whose
/// counter encodes (block index, path id) and whose key is the user seed.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t path_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path_id)),
          path_hi_(static_cast<std::uint32_t>(path_id >> 32)) {}

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        return buf_[--avail_];
    }

    /// Uniform double in the open interval (0,1); 53 significant bits.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        const auto out = philox4x32_10(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             path_lo_, path_hi_},
            key_);
        ++block_;
        buf_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        avail_ = 2;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_lo_, path_hi_;
    std::uint64_t block_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int avail_ = 0;
};

namespace detail {

/// Ziggurat layer tables for the standard normal, solved once at startup.
/// 256 equal-area layers over the half-density f(x) = exp(-x^2/2); the base
/// layer also carries the tail mass beyond x = r.
struct ZigguratTables {
    static constexpr int kLayers = 256;
    double x[kLayers + 1];  // layer widths; x[0] is the virtual base width
    double f[kLayers + 1];  // f at the layer edges; f[kLayers] = 1
    double r;               // tail threshold
    double inv_r;

    ZigguratTables() {
        // Solve for the tail threshold r so that 256 equal-area layers tile
        // the half-density exactly: bisect on the top-layer closure residual.
        double lo = 3.0, hi = 4.5;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (residual(mid) > 0.0) lo = mid; else hi = mid;
        }
        r = 0.5 * (lo + hi);
        const double res = build(r);
        assert(std::abs(res) < 1e-9);
        (void)res;
        inv_r = 1.0 / r;
    }

private:
    static double density(double z) { return std::exp(-0.5 * z * z); }

    /// Fills the tables for threshold rr; returns the closure residual
    /// f(x[255]) + v/x[255] - 1 (zero iff the top layer closes exactly).
    double build(double rr) {
        const double tail_mass = 1.2533141373155003 * std::erfc(rr / 1.4142135623730951);
        const double v = rr * density(rr) + tail_mass;  // common layer area
        x[1] = rr;
        x[0] = v / density(rr);
        f[1] = density(rr);
        f[0] = f[1];
        for (int i = 1; i < kLayers - 1; ++i) {
            const double fy = f[i] + v / x[i];
            if (!(fy < 1.0)) return 1.0;  // area exhausted early: rr too small
            x[i + 1] = std::sqrt(-2.0 * std::log(fy));
            f[i + 1] = fy;
        }
        x[kLayers] = 0.0;
        f[kLayers] = 1.0;
        return f[kLayers - 1] + v / x[kLayers - 1] - 1.0;
    }

    double residual(double rr) { return build(rr); }
};

inline const ZigguratTables& ziggurat_tables() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace detail

/// Draws one standard normal from the stream via the ziggurat method.
/// Consumes a variable number of 64-bit words (one on the ~99% fast path).
inline double sample_normal(PhiloxStream& rng) {
    const auto& t = detail::ziggurat_tables();
    for (;;) {
        const std::uint64_t w = rng.next_u64();
        const int i = static_cast<int>(w & 255u);
        const double u = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
        const double mag = u * t.x[i];
        const double z = (w & 256u) ? -mag : mag;
        if (mag < t.x[i + 1]) return z;  // strictly inside the next layer
        if (i == 0) {
            // Tail beyond r: exact exponential-rejection sampler.
            for (;;) {
                const double e1 = -std::log(rng.next_uniform()) * t.inv_r;
                const double e2 = -std::log(rng.next_uniform());
                if (e2 + e2 >= e1 * e1) return (w & 256u) ? -(t.r + e1) : (t.r + e1);
            }
        }
        const double y = t.f[i] + rng.next_uniform() * (t.f[i + 1] - t.f[i]);
        if (y < std::exp(-0.5 * mag * mag)) return z;
    }
}

}  // namespace divbar
