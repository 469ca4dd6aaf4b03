#include "panelms/rng.hpp"

#include <cmath>
#include <numbers>

namespace panelms {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) noexcept {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

Philox4x32::Counter Philox4x32::bijection(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Philox4x32::Key derive_key(std::uint64_t seed, std::uint32_t stream) noexcept {
    const std::uint64_t k = mix64(seed ^ mix64(0x5DEECE66DULL + stream));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

double uniform_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double uniform_at(const Philox4x32::Key& key, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                  std::uint32_t d) noexcept {
    const auto out = Philox4x32::bijection({a, b, c, d}, key);
    return uniform_open(join(out[0], out[1]));
}

double normal_at(const Philox4x32::Key& key, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                 std::uint32_t d) noexcept {
    const auto out = Philox4x32::bijection({a, b, c, d >> 1}, key);
    const double u1 = uniform_open(join(out[0], out[1]));
    const double u2 = uniform_open(join(out[2], out[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (d & 1U) == 0U ? r * std::cos(angle) : r * std::sin(angle);
}

}  // namespace panelms
