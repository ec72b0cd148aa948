#pragma once

#include <cstdint>
#include <random>

namespace nnlb {

// Derives an independent stream seed from a master seed and a stream index
// (splitmix64 finalizer). Used to give every sampled pair / candidate its own
// engine, so results do not depend on how work is split across threads.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) built from the top 53 bits of the engine output.
// Bypasses std::uniform_real_distribution, whose output is not pinned by the
// standard; this mapping is bit-reproducible everywhere.
inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(gen);
}

}  // namespace nnlb
