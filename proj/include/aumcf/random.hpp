#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace aumcf {

/// What a random stream is used for; part of the stream key so that adding
/// draws for one purpose never shifts the draws of another.
enum class DrawPurpose : std::uint64_t {
    Covariate = 1,
    Frailty = 2,
    Death = 3,
    Censoring = 4,
    Events = 5,
    Bootstrap = 6,
};

/// Counter-based generator: output k is a SplitMix64 finalization of
/// key + k * golden_gamma. Streams are addressed by a hashed key instead of
/// being advanced, so any stream can be produced independently of the others.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    /// Stream for (seed, replicate, arm, subject, purpose).
    static CounterRng stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t arm, std::uint64_t subject,
                             DrawPurpose purpose) noexcept {
        std::uint64_t k = mix(seed ^ 0x5851F42D4C957F2DULL);
        k = mix(k ^ (replicate + 0x9E3779B97F4A7C15ULL));
        k = mix(k ^ (arm + 0xBF58476D1CE4E5B9ULL));
        k = mix(k ^ (subject + 0x94D049BB133111EBULL));
        k = mix(k ^ static_cast<std::uint64_t>(purpose));
        return CounterRng(k);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Exponential with the given rate; +inf for rate 0.
    double exponential(double rate) noexcept {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform()) / rate;
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace aumcf
