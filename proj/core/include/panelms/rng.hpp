#pragma once

#include <array>
#include <cstdint>

namespace panelms {

/**
 * @brief Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * A pure function of (key, counter): any draw can be produced independently
 * of every other, which keeps Monte Carlo output independent of thread
 * scheduling.
 */
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter bijection(Counter counter, Key key) noexcept;
};

/// Mixes a 64-bit seed with a stream tag into a Philox key.
Philox4x32::Key derive_key(std::uint64_t seed, std::uint32_t stream) noexcept;

/// Uniform on the open interval (0, 1) from the top 52 random bits.
double uniform_open(std::uint64_t bits) noexcept;

/**
 * Standard normal addressed by (a, b, c, d) under `key`. Each Philox block
 * yields two normals via Box-Muller; coordinates d and d^1 share a block.
 */
double normal_at(const Philox4x32::Key& key, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                 std::uint32_t d) noexcept;

/// Uniform (0, 1) addressed by (a, b, c, d) under `key`.
double uniform_at(const Philox4x32::Key& key, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                  std::uint32_t d) noexcept;

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace panelms
