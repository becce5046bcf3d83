#pragma once

#include <cstdint>
#include <string_view>

#include "tdlab/core/types.hpp"

namespace tdlab {

// Deterministic pseudo-random generator (xoshiro256++) with explicit
// Box-Muller normals.  The standard-library distributions are
// implementation-defined, so reproducing byte-identical streams across
// toolchains requires owning both the generator and the transforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();

    // Uniform on (0, 1], safe as a log() argument.
    double uniform01_open();

    // Standard normal via Box-Muller; generates pairs and caches the spare.
    double normal();

    // Circularly symmetric complex normal with total variance `var`
    // (real and imaginary parts each carry var/2).
    Complex circular_normal(double var);

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable 64-bit label hash (FNV-1a), used to derive independent named
// sub-streams from one master seed.
std::uint64_t hash_label(std::string_view label);

// Independent generator for (master, label, index).  Streams with different
// labels or indices are decorrelated by seed mixing; identical triples yield
// identical streams regardless of call order or thread count.
Rng make_stream(std::uint64_t master_seed, std::string_view label, std::uint64_t index = 0);

}  // namespace tdlab
