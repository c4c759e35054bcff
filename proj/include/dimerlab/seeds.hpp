// seeds.hpp — splitmix-style seed derivation so every (temperature,
// repetition) task owns an independent deterministic stream and partial
// re-runs reproduce subsets.

#pragma once

#include <cstdint>

namespace dimerlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Per-task seed: two splitmix rounds keyed by the grid index and the
// repetition index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t t_index,
                                 std::uint64_t repetition) {
    return splitmix64(splitmix64(master ^ splitmix64(t_index + 1)) ^ splitmix64(~repetition));
}

}  // namespace dimerlab
