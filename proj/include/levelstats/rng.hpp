#pragma once

#include <cstdint>

namespace levelstats {

// Splittable counter-based generator (splitmix64 core). Each realization of
// an ensemble draws from its own stream derived from (base_seed, index), so
// results do not depend on execution order or thread scheduling, and the
// uniform doubles are bit-identical across platforms.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

/// Seed of the independent stream for realization `index` of `base_seed`.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t index) {
    SplitMix64 g(base_seed ^ (0xa3ec647659359acdULL + index * 0x9e3779b97f4a7c15ULL));
    std::uint64_t s = g.next_u64();
    return s ^ g.next_u64() << 1;
}

}  // namespace levelstats
