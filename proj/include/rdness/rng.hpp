#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace rdness {

/**
 * Counter-based generator: output i is a bijective 64-bit mix of
 * key + i * golden-ratio (the SplitMix64 finalizer). Streams with different
 * keys are independent for practical purposes, and any position can be
 * reached in O(1) by setting the counter.
 *
 * Satisfies UniformRandomBitGenerator, so <random> distributions work on it.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr CounterRng() noexcept = default;
    constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    /// Stream for replica `replica` of a run with base seed `seed`.
    static constexpr CounterRng for_replica(std::uint64_t seed, std::uint64_t replica) noexcept {
        return CounterRng(mix(mix(seed) ^ (replica * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return mix(key_ + (counter_++) * kGolden); }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }
    constexpr void set_counter(std::uint64_t c) noexcept { counter_ = c; }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0,1].
    double uniform_pos() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) noexcept {
        __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Exp(rate) waiting time.
    double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

    /// Standard normal via the Marsaglia polar method (no cached second value, so
    /// the stream position depends only on the number of calls).
    double normal() noexcept {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    std::uint64_t key_ = 0x853C49E6748FEA9Bull;
    std::uint64_t counter_ = 0;
};

/// Kahan-compensated accumulator for long sums of small increments (model time).
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double v) : sum_(v) {}

    void add(double x) noexcept {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    void reset(double v) noexcept {
        sum_ = v;
        comp_ = 0.0;
    }
    [[nodiscard]] double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace rdness
