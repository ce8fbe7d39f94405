#pragma once

// Deterministic random number generation. xoshiro256** with splitmix64 seeding.
// We avoid std:: distributions on purpose: their outputs differ across standard
// library implementations, and experiment CSVs must be byte-identical given
// (config, root seed). Everything here is fully specified arithmetic.

#include <cstdint>
#include <cmath>

namespace plantedcsp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    // Independent child stream: mixes the stream index through splitmix64 so
    // adjacent indices do not produce correlated states.
    Rng derive(std::uint64_t stream_index) const {
        std::uint64_t sm = s_[0] ^ (s_[2] * 0x9e3779b97f4a7c15ull);
        sm ^= splitmix64(stream_index);
        Rng child;
        for (auto& word : child.s_) word = splitmix64(sm);
        return child;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    std::uint64_t operator()() { return next_u64(); }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ull; }

    // Unbiased integer in [0, bound) via Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Fair +-1 coin.
    int coin_pm1() { return (next_u64() >> 63) ? 1 : -1; }

    // Binomial(count, p) sample. Exact inversion for small means, otherwise a
    // simple bit-by-bit fallback is too slow, so we use the BTRS rejection
    // sampler for the large regime. Deterministic given the stream.
    std::uint64_t binomial(std::uint64_t count, double p) {
        if (count == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return count;
        bool flipped = false;
        if (p > 0.5) { p = 1.0 - p; flipped = true; }
        const double mean = static_cast<double>(count) * p;
        std::uint64_t draw = (mean < 30.0) ? binomial_inversion(count, p)
                                           : binomial_btrs(count, p);
        return flipped ? count - draw : draw;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    // Waiting-time ("geometric gaps") inversion; O(mean) expected work.
    std::uint64_t binomial_inversion(std::uint64_t count, double p) {
        const double log1mp = std::log1p(-p);
        std::uint64_t successes = 0;
        double skipped = 0;
        while (true) {
            const double u = 1.0 - uniform01();  // in (0, 1]
            const double gap = std::floor(std::log(u) / log1mp);
            skipped += gap + 1.0;
            if (skipped > static_cast<double>(count)) return successes;
            ++successes;
        }
    }

    // Hormann's BTRS transformed-rejection sampler for Binomial(count, p), p <= 1/2.
    std::uint64_t binomial_btrs(std::uint64_t count, double p) {
        const double n = static_cast<double>(count);
        const double q = 1.0 - p;
        const double spq = std::sqrt(n * p * q);
        const double b = 1.15 + 2.53 * spq;
        const double a = -0.0873 + 0.0248 * b + 0.01 * p;
        const double c = n * p + 0.5;
        const double v_r = 0.92 - 4.2 / b;
        const double r = p / q;
        const double alpha = (2.83 + 5.1 / b) * spq;
        const double m = std::floor((n + 1.0) * p);
        while (true) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + c);
            if (kf < 0.0 || kf > n) continue;
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            const double log_accept =
                (m + 0.5) * std::log((m + 1.0) / (r * (n - m + 1.0))) +
                (n + 1.0) * std::log((n - m + 1.0) / (n - kf + 1.0)) +
                (kf + 0.5) * std::log(r * (n - kf + 1.0) / (kf + 1.0)) +
                stirling_correction(m) + stirling_correction(n - m) -
                stirling_correction(kf) - stirling_correction(n - kf);
            if (std::log(v * alpha / (a / (us * us) + b)) <= log_accept)
                return static_cast<std::uint64_t>(kf);
        }
    }

    static double stirling_correction(double k) {
        // log(k!) - [k log k - k + 0.5 log(2 pi k)] via the standard series.
        static const double table[10] = {
            0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
            0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
            0.01189670994589177, 0.01041126526197209, 0.00925546218271273,
            0.00833056343336287};
        if (k < 10.0) return table[static_cast<int>(k)];
        const double kk = (k + 1.0) * (k + 1.0);
        return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * kk)) / kk) / (k + 1.0);
    }

    std::uint64_t s_[4]{};
};

}  // namespace plantedcsp
