#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace pnash {

/// Counter-based splittable random stream.
///
/// A stream is a (key, counter) pair; the n-th output is a bijective mix of
/// key + n * golden. `split(tag)` derives a child key from the parent key and
/// the tag only, so children never depend on how many draws the parent made.
/// This is what makes replication r of a run independent of replications
/// 0..r-1: every purpose (activation, delays, oracle, learning data) gets its
/// own child stream keyed by name and player.
///
/// Satisfies UniformRandomBitGenerator, so std distributions accept it.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream() = default;
    explicit Stream(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (counter_++) * kGolden); }

    [[nodiscard]] Stream split(std::uint64_t tag) const {
        Stream child;
        child.key_ = mix(key_ ^ mix(tag + kGolden));
        return child;
    }

    [[nodiscard]] Stream split(std::string_view name) const { return split(hash(name)); }

    [[nodiscard]] Stream split(std::string_view name, std::uint64_t index) const {
        return split(name).split(index);
    }

    /// Top 53 bits as a double in [0, 1), scaled to [lo, hi). Cheaper than
    /// std::generate_canonical, which dominates the inner loops otherwise.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    std::uint64_t counter() const { return counter_; }
    std::uint64_t key() const { return key_; }

    // SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // FNV-1a, stable across platforms (std::hash is not).
    static constexpr std::uint64_t hash(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace pnash
