#pragma once

#include <cstdint>
#include <random>

namespace sda {

using Rng = std::mt19937_64;

// Finalizer from the splitmix64 generator. Used to spread user seeds and
// derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic substream derivation. Streams with distinct salts are
// statistically independent, so parallel consumers can seed locally and
// match a sequential run exactly.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace sda
