#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fairboost {

/// Deterministic pseudo-random generator used everywhere randomness is
/// needed.  The standard library engines are portable, but the standard
/// *distributions* (uniform_int_distribution etc.) are implementation
/// defined, so identical seeds could give different draws under different
/// toolchains.  Every draw here is spelled out explicitly and therefore
/// bit-stable across platforms and compilers.
///
/// The core is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter
/// advanced by the golden-ratio increment and scrambled by two xor-shift
/// multiplies.  It passes BigCrush, is trivially seedable from any 64-bit
/// value (including 0), and supports cheap stream derivation.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    /// Next raw 64-bit value.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) without modulo bias (Lemire's
    /// multiply-shift rejection method).  bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Fisher-Yates shuffle, high-to-low, using next_below for each swap.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Sample an index proportional to the given nonnegative weights via
    /// inverse-CDF over the running sum.  Total weight must be positive.
    std::size_t next_weighted(const std::vector<double>& cumulative) {
        double u = next_double() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] <= u) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

/// Independent sub-stream derivation.  Seeds for every randomized stage of
/// the harness are derived from (master_seed, seed_index, stage, ...) so a
/// stage's stream never depends on which other stages run around it.  Each
/// component is folded in through a full SplitMix64 scramble, so adjacent
/// inputs map to statistically unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t base) { return Rng(base).next_u64(); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t next, Rest... rest) {
    Rng r(base);
    std::uint64_t mixed = r.next_u64() ^ (next + 0x9E3779B97F4A7C15ULL);
    return derive_seed(mixed, rest...);
}

/// Stage tags for derived streams (documented so result files can be
/// reproduced by external tooling).
namespace stage {
inline constexpr std::uint64_t kSplit = 1;      ///< train/test partition
inline constexpr std::uint64_t kPreprocess = 2; ///< debiasing algorithm fit
inline constexpr std::uint64_t kModel = 3;      ///< classifier fit
inline constexpr std::uint64_t kTransform = 4;  ///< randomized per-row mapping
inline constexpr std::uint64_t kFolds = 5;      ///< stacking fold assignment
inline constexpr std::uint64_t kBagging = 6;    ///< ensemble bootstrap
inline constexpr std::uint64_t kSubsample = 7;  ///< dataset row subsampling
}  // namespace stage

}  // namespace fairboost
