#pragma once

#include <cstdint>
#include <string_view>

namespace sparsedyn {

// 64-bit FNV-1a; stable across platforms, used for seed derivation and
// dataset fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

// Seeds for independent consumers are derived from one top-level seed:
// derive_seed(seed, label) = splitmix64(seed ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Portable generator. The standard distributions are implementation-defined,
// so uniform/normal draws are computed here to keep outputs identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform on {0, ..., n-1}; n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace sparsedyn
