#include "panelms/critvals.hpp"

#include "panelms/error.hpp"
#include "panelms/parallel.hpp"
#include "panelms/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace panelms {

namespace {

constexpr std::uint32_t kGaussianStream = 1;
constexpr char kCacheMagic[8] = {'P', 'M', 'S', 'P', 'H', 'I', '0', '1'};

struct ScaledWindow {
    std::size_t first;
    std::vector<double> weights;  // K_{t,u,h} / sqrt(Th)
    double lambda;
};

std::vector<ScaledWindow> scaled_windows(const Grid& grid, const SmoothingKernel& kernel) {
    std::vector<ScaledWindow> out;
    out.reserve(grid.size());
    const double Td = static_cast<double>(grid.T());
    for (const auto& p : grid.points()) {
        auto window = kernel_window(kernel, grid.T(), p.u, p.h);
        const double scale = 1.0 / std::sqrt(Td * p.h);
        for (auto& w : window.weights) {
            w *= scale;
        }
        out.push_back(ScaledWindow{window.first, std::move(window.weights), lambda_correction(p.h)});
    }
    return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) {
        bytes[k] = static_cast<unsigned char>(v >> (8 * k));
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        return false;
    }
    v = 0;
    for (int k = 0; k < 8; ++k) {
        v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    }
    return true;
}

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
        h ^= (v >> (8 * k)) & 0xFFU;
        h *= 0x100000001B3ULL;
    }
}

}  // namespace

std::vector<double> simulate_phi(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                                 const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed,
                                 std::size_t threads) {
    if (B < 100) {
        throw PreconditionError("simulate_phi: B must be at least 100, got " + std::to_string(B));
    }
    if (N < 2) {
        throw PreconditionError("simulate_phi: need at least two units");
    }
    if (D < 1) {
        throw PreconditionError("simulate_phi: need at least one covariate");
    }
    if (grid.T() != T) {
        throw PreconditionError("simulate_phi: grid was built for T=" + std::to_string(grid.T()) +
                                ", not T=" + std::to_string(T));
    }
    if (B > std::numeric_limits<std::uint32_t>::max() || N > std::numeric_limits<std::uint32_t>::max() ||
        T > std::numeric_limits<std::uint32_t>::max()) {
        throw PreconditionError("simulate_phi: dimensions exceed the generator's counter range");
    }

    const auto windows = scaled_windows(grid, kernel);
    const auto key = derive_key(seed, kGaussianStream);
    std::vector<double> draws(B);

    parallel_for(B, threads, [&](std::size_t b) {
        // z[(i * T + t) * D + d]
        std::vector<double> z(N * T * D);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t d = 0; d < D; ++d) {
                    z[(i * T + t) * D + d] =
                        normal_at(key, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(d));
                }
            }
        }
        std::vector<double> sums(N * D);
        double phi = -std::numeric_limits<double>::infinity();
        for (const auto& win : windows) {
            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::size_t i = 0; i < N; ++i) {
                double* acc = &sums[i * D];
                for (std::size_t k = 0; k < win.weights.size(); ++k) {
                    const double w = win.weights[k];
                    const double* zt = &z[(i * T + win.first + k) * D];
                    for (std::size_t d = 0; d < D; ++d) {
                        acc[d] += w * zt[d];
                    }
                }
            }
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t j = i + 1; j < N; ++j) {
                    double norm = 0.0;
                    for (std::size_t d = 0; d < D; ++d) {
                        norm = std::max(norm, std::abs(sums[i * D + d] - sums[j * D + d]));
                    }
                    phi = std::max(phi, norm - win.lambda);
                }
            }
        }
        draws[b] = phi;
    });
    return draws;
}

CriticalValue critical_value(std::span<const double> draws, double alpha, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw PreconditionError("critical_value: alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    const std::size_t B = draws.size();
    if (B == 0 || static_cast<double>(B) * alpha < 1.0 - 1e-9) {
        throw PreconditionError("critical_value: B=" + std::to_string(B) +
                                " draws are too few for alpha=" + std::to_string(alpha) +
                                " (need B >= 1/alpha)");
    }
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    // 1-based order statistic ceil((1 - alpha) B); the slack absorbs
    // representation error when (1 - alpha) B is an integer.
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(B) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, B);
    CriticalValue cv;
    cv.alpha = alpha;
    cv.B = B;
    cv.seed = seed;
    cv.q = sorted[rank - 1];
    cv.phi_draws.assign(draws.begin(), draws.end());
    return cv;
}

std::uint64_t phi_cache_key(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                            const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    fnv_mix(h, T);
    fnv_mix(h, N);
    fnv_mix(h, D);
    fnv_mix(h, static_cast<std::uint64_t>(kernel.kind()));
    fnv_mix(h, B);
    fnv_mix(h, seed);
    fnv_mix(h, grid.size());
    for (const auto& p : grid.points()) {
        fnv_mix(h, p.t);
        fnv_mix(h, p.s);
    }
    return h;
}

void write_phi_cache(const std::filesystem::path& path, std::uint64_t key, std::span<const double> draws) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write critical-value cache '" + path.string() + "'");
    }
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put_u64(out, key);
    put_u64(out, draws.size());
    for (const double v : draws) {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) {
        throw InputError("write to critical-value cache '" + path.string() + "' failed");
    }
}

std::optional<std::vector<double>> read_phi_cache(const std::filesystem::path& path, std::uint64_t key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) {
        return std::nullopt;
    }
    std::uint64_t stored_key = 0;
    std::uint64_t B = 0;
    if (!get_u64(in, stored_key) || stored_key != key || !get_u64(in, B)) {
        return std::nullopt;
    }
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(B, 1u << 24)));
    for (std::uint64_t b = 0; b < B; ++b) {
        std::uint64_t bits = 0;
        if (!get_u64(in, bits)) {
            return std::nullopt;
        }
        draws.push_back(std::bit_cast<double>(bits));
    }
    return draws;
}

std::vector<double> simulate_phi_cached(std::size_t T, std::size_t N, std::size_t D, const Grid& grid,
                                        const SmoothingKernel& kernel, std::size_t B, std::uint64_t seed,
                                        const std::optional<std::filesystem::path>& cache,
                                        std::size_t threads) {
    const auto key = phi_cache_key(T, N, D, grid, kernel, B, seed);
    if (cache) {
        if (auto hit = read_phi_cache(*cache, key)) {
            return std::move(*hit);
        }
    }
    auto draws = simulate_phi(T, N, D, grid, kernel, B, seed, threads);
    if (cache) {
        write_phi_cache(*cache, key, draws);
    }
    return draws;
}

}  // namespace panelms
