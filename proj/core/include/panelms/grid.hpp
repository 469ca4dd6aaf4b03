#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace panelms {

/// A location-bandwidth pair on the 1/T lattice: u = t/T, h = s/T.
struct GridPoint {
    std::size_t t = 0;
    std::size_t s = 0;
    double u = 0.0;
    double h = 0.0;

    /// Interval [u - h, u + h] in lattice units.
    std::size_t lower_index() const noexcept { return t - s; }
    std::size_t upper_index() const noexcept { return t + s; }
};

inline constexpr double kMaxBandwidth = 0.25;

/**
 * @brief Location-bandwidth set for the multiscale test.
 *
 * Every point satisfies [u - h, u + h] within [0, 1], h_min <= h <= h_max <= 1/4,
 * and lies on the 1/T lattice. Points are distinct and ordered by bandwidth,
 * then location.
 */
class Grid {
public:
    /// Validates every point; throws GridError naming the violated bound.
    Grid(std::size_t T, std::vector<GridPoint> points, double h_min, double h_max = kMaxBandwidth);

    std::size_t T() const noexcept { return T_; }
    double h_min() const noexcept { return h_min_; }
    double h_max() const noexcept { return h_max_; }
    std::span<const GridPoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const GridPoint& operator[](std::size_t k) const noexcept { return points_[k]; }

private:
    std::size_t T_;
    double h_min_;
    double h_max_;
    std::vector<GridPoint> points_;
};

/// Default lower bandwidth bound T^{-1/3}.
double default_h_min(std::size_t T);

/// U_T x H_T with U_T = {5t/T}, H_T = {(5t-3)/T} within [T^{-1/3}, 1/4],
/// restricted to intervals inside [0, 1]. Throws GridError when empty.
Grid build_grid_application(std::size_t T);

/// All (k * u_step / T, h) with [u - h, u + h] inside [0, 1]. Each h must be a
/// multiple of 1/T within [h_min, 1/4]; h_min defaults to T^{-1/3}.
Grid build_grid_custom(std::size_t T, std::size_t u_step, std::span<const double> h_values,
                       std::optional<double> h_min = std::nullopt);

}  // namespace panelms
