#pragma once

#include <cmath>
#include <cstdint>

namespace modcs {

namespace detail {
// SplitMix64 finalizer; also used to derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// SplitMix64 stream. Streams for (master, realization, time, tag) tuples are
/// derived by hashing, so every realization/frame owns an independent,
/// reproducible substream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// uniform integer in [0, n)
    std::size_t uniform_index(std::size_t n) {
        // n is tiny compared to 2^64 here; modulo bias is negligible but we
        // reject anyway to keep the stream well-defined
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    int sign() { return (next_u64() & 1u) ? 1 : -1; }

    /// standard normal via Box-Muller (cached second value)
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // offset keeps u1 strictly positive for the log
        const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// Deterministic stream derivation: distinct (master, realization, time, tag)
/// tuples give independent streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization,
                                 std::uint64_t time, std::uint64_t tag) {
    std::uint64_t h = detail::mix64(master ^ 0xA5A5A5A5A5A5A5A5ULL);
    h = detail::mix64(h ^ realization);
    h = detail::mix64(h ^ time);
    h = detail::mix64(h ^ tag);
    return h;
}

// stream tags
enum class StreamTag : std::uint64_t {
    matrix = 1,
    noise = 2,
    signal = 3,
};

} // namespace modcs
