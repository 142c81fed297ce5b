#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace dialectkit {

/// FNV-1a 64-bit over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Derives a child seed from a parent seed and any number of 64-bit parts.
/// Used wherever one configured seed has to fan out into independent
/// deterministic streams (per item, per attempt, per candidate).
inline std::uint64_t mix_seed(std::uint64_t seed) {
    return detail::splitmix64_step(seed);
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t part, Rest... rest) {
    std::uint64_t s = seed ^ (part + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return mix_seed(detail::splitmix64_step(s), rest...);
}

/// splitmix64 generator. Not std::mt19937 on purpose: identical streams on
/// every platform, and single-state reseeding is cheap.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return detail::splitmix64_step(state_); }

    /// Uniform in [0, bound). bound = 0 returns 0.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        // rejection sampling, no modulo bias
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return real() < p;
    }

    /// Inclusive integer range.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

} // namespace dialectkit
