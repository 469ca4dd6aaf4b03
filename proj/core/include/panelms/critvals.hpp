#pragma once

#include "panelms/grid.hpp"
#include "panelms/kernel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace panelms {

inline constexpr std::size_t kDefaultMonteCarloDraws = 5000;

/**
 * Critical value q_T(alpha): the ceil((1 - alpha) B)-th smallest simulated
 * Gaussian statistic (1-based), so that the empirical CDF at q is at least
 * 1 - alpha.
 */
struct CriticalValue {
    double alpha = 0.05;
    std::size_t B = 0;
    std::uint64_t seed = 0;
    double q = 0.0;
    std::vector<double> phi_draws;
};

/**
 * Simulates B draws of the Gaussian multiscale statistic
 *
 *   Phi = max_{i<j} max_{(u,h)} { || (Th)^{-1/2} sum_t (Z_it - Z_jt) K_{t,u,h} ||_inf - lambda(h) }
 *
 * with Z_it i.i.d. N(0, I_D). Draw b depends only on (seed, b), never on the
 * thread count. Throws PreconditionError unless B >= 100, N >= 2 and the grid
 * was built for T.
 */
std::vector<double> simulate_phi(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                                 const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed,
                                 std::size_t threads = 0);

/// Throws PreconditionError unless 0 < alpha < 1 and B * alpha >= 1.
CriticalValue critical_value(std::span<const double> draws, double alpha, std::uint64_t seed = 0);

/// Hash of every parameter the simulated draws depend on.
std::uint64_t phi_cache_key(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                            const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed);

/**
 * Cache file layout (all little-endian): 8-byte magic "PMSPHI01", u64 key,
 * u64 B, then B IEEE-754 doubles.
 */
void write_phi_cache(const std::filesystem::path& path, std::uint64_t key, std::span<const double> draws);

/// Returns nullopt when the file is missing, malformed, or holds another key.
std::optional<std::vector<double>> read_phi_cache(const std::filesystem::path& path, std::uint64_t key);

/// simulate_phi with an optional cache file consulted first and refreshed on miss.
std::vector<double> simulate_phi_cached(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                                        const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed,
                                        const std::optional<std::filesystem::path>& cache,
                                        std::size_t threads = 0);

}  // namespace panelms
