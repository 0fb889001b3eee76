#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace faceforge {

// Project-wide deterministic PRNG.
//
// Every stochastic quantity in the project is derived from a 64-bit seed via
// the scheme below, so a manifest that records seeds can regenerate any
// sample bit-for-bit:
//
//   engine     std::mt19937_64 (the standard fixes its full output sequence)
//   uniform    u = (next() >> 11) * 2^-53            in [0, 1)
//   gaussian   Box-Muller on (u1, u2) with u1 in (0, 1]:
//              r = sqrt(-2 ln u1), phi = 2 pi u2,
//              returns r cos(phi) first, r sin(phi) second.
//
// Two implementations following this recipe agree up to libm rounding of
// ln/cos/sin; on one machine and binary the stream is exact.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double gaussian();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// splitmix64 finalizer; the building block of seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over bytes, used to fold strings into seed material.
std::uint64_t fnv1a64(const std::string& s);

// Combines an ordered list of 64-bit parts into one seed:
// h starts at a fixed salt and absorbs each part through splitmix64.
std::uint64_t seed_mix(std::initializer_list<std::uint64_t> parts);

} // namespace faceforge
