#pragma once

#include <cstdint>

namespace gaslab {

/// SplitMix64 generator. Small state, full 64-bit output, and identical
/// sequences on every platform, which is what the reproducibility contract
/// needs; stdlib distributions are implementation-defined and unusable here.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

/// Derives the seed for one trial of one command stream:
///   mix(base, stream, index) = advance a SplitMix64 whose state is `base`
///   perturbed by the stream tag, then by the trial index.
/// Documented in the README; parallel trials each get an independent stream.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream,
                              std::uint64_t index) {
    SplitMix64 a(base + 0x9E3779B97F4A7C15ULL * (stream + 1));
    SplitMix64 b(a.next() + 0x9E3779B97F4A7C15ULL * (index + 1));
    return b.next();
}

/// Stream tags keep the per-operation substreams disjoint.
namespace stream {
inline constexpr std::uint64_t simulate = 1;
inline constexpr std::uint64_t cost_direct = 2;
inline constexpr std::uint64_t cost_info = 3;
inline constexpr std::uint64_t lemma1 = 4;
inline constexpr std::uint64_t lemma2 = 5;
inline constexpr std::uint64_t theorem1 = 6;
inline constexpr std::uint64_t theorem2 = 7;
inline constexpr std::uint64_t ess = 8;
inline constexpr std::uint64_t zeta = 9;
inline constexpr std::uint64_t objective = 10;
inline constexpr std::uint64_t rollout = 11;
inline constexpr std::uint64_t equilibrium = 12;
}  // namespace stream

}  // namespace gaslab
