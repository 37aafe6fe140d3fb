#pragma once

#include <cstdint>

namespace wisq {

/// Counter-based randomness: every draw is a pure hash of
/// (seed, stream, a, b), so replications never share or perturb state and
/// a run is reproducible regardless of how work is scheduled.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t counter_draw(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b) {
    uint64_t h = mix64(seed ^ 0xD1B54A32D192ED03ull);
    h = mix64(h ^ stream);
    h = mix64(h ^ a);
    return mix64(h ^ b);
}

/// Unbiased-enough integer in [0, n): the 2^-64 modulo bias is far below
/// anything a simulation can resolve.
inline uint64_t draw_below(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b, uint64_t n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(counter_draw(seed, stream, a, b)) * n;
    return static_cast<uint64_t>(wide >> 64);
}

inline double draw_unit(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b) {
    return static_cast<double>(counter_draw(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

}  // namespace wisq
