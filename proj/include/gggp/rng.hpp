#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace gggp {

// Bounded draws are done here rather than through <random> distributions so
// that a seed produces the same stream with every standard library.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) { }

    static constexpr auto min() -> result_type { return 0; }
    static constexpr auto max() -> result_type { return std::numeric_limits<result_type>::max(); }
    auto operator()() -> result_type { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    auto index(std::size_t n) -> std::size_t
    {
        constexpr auto top = std::numeric_limits<std::uint64_t>::max();
        auto const limit = top - (top % n);
        std::uint64_t r = engine_();
        while (r >= limit) { r = engine_(); }
        return static_cast<std::size_t>(r % n);
    }

    /// Uniform real in [0, 1).
    auto uniform() -> double
    {
        return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
    }

    auto bernoulli(double p) -> bool { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

inline auto splitmix64(std::uint64_t x) -> std::uint64_t
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// FNV-1a; stable across platforms and runs.
inline auto stable_hash(std::string_view text) -> std::uint64_t
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace gggp
