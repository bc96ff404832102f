#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

namespace dsoup {

/// Counter-based PRNG built on the splitmix64 finalizer.
///
/// Word i (1-based) of the stream keyed by `key` is
///     mix64(key + i * 0x9E3779B97F4A7C15)
/// where mix64 is the splitmix64 output function. Substream keys come from
/// derive_stream(). Both formulas are plain 64-bit integer arithmetic, so any
/// implementation (in any language) reproduces the streams bit for bit.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard-normal pair via Box-Muller on two consecutive uniforms.
    std::pair<double, double> normal_pair() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    /// Uniform index in [0, n). Plain modulo; the (negligible) modulo bias is
    /// accepted in exchange for a one-line cross-language definition.
    std::uint64_t index(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Child stream key for (parent key, integer tag).
inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t tag) {
    return CounterRng::mix64(CounterRng::mix64(key ^ 0xA0761D6478BD642Full) +
                             tag * 0xE7037ED1A0B428DBull);
}

/// FNV-1a 64-bit hash of a string tag, for naming substreams.
inline std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t derive_stream(std::uint64_t key, std::string_view name) {
    return derive_stream(key, stream_tag(name));
}

}  // namespace dsoup
