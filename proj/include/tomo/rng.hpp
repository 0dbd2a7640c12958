#pragma once

#include <cstdint>

namespace tomo {

// SplitMix64: the portable generator fixed by the file-format docs.
// Counter-based (the state advances by a fixed odd constant and the
// output is a bijective mix of the counter), so streams are
// reproducible bit-for-bit across platforms and implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Deterministic per-replica seed derivation for the bootstrap.
inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t k) {
  SplitMix64 g(base_seed ^ (0xD6E8FEB86659FD93ULL * (k + 1)));
  return g.next_u64();
}

}  // namespace tomo
