#include "panelms/grid.hpp"

#include "panelms/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace panelms {

namespace {

// Bandwidth bound comparisons tolerate representation error on lattice values.
constexpr double kBoundSlack = 1e-12;

}  // namespace

double default_h_min(std::size_t T) {
    return std::pow(static_cast<double>(T), -1.0 / 3.0);
}

Grid::Grid(std::size_t T, std::vector<GridPoint> points, double h_min, double h_max)
    : T_(T), h_min_(h_min), h_max_(h_max), points_(std::move(points)) {
    if (T_ == 0) {
        throw GridError("grid: T must be positive");
    }
    if (!(h_max_ <= kMaxBandwidth + kBoundSlack)) {
        throw GridError("grid: h_max " + std::to_string(h_max_) + " exceeds 1/4");
    }
    if (!(h_min_ > 0.0) || h_min_ > h_max_ + kBoundSlack) {
        throw GridError("grid: invalid bandwidth bounds [" + std::to_string(h_min_) + ", " +
                        std::to_string(h_max_) + "]");
    }
    if (points_.empty()) {
        throw GridError("grid: no location-bandwidth points");
    }
    const double Td = static_cast<double>(T_);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto& p : points_) {
        if (p.s == 0) {
            throw GridError("grid: bandwidth must be positive");
        }
        if (p.s > p.t || p.t + p.s > T_) {
            throw GridError("grid: interval [u-h, u+h] for (u=" + std::to_string(p.t) + "/" +
                            std::to_string(T_) + ", h=" + std::to_string(p.s) + "/" +
                            std::to_string(T_) + ") leaves [0, 1]");
        }
        p.u = static_cast<double>(p.t) / Td;
        p.h = static_cast<double>(p.s) / Td;
        if (p.h < h_min_ - kBoundSlack) {
            throw GridError("grid: bandwidth " + std::to_string(p.h) + " below h_min " +
                            std::to_string(h_min_));
        }
        if (p.h > h_max_ + kBoundSlack) {
            throw GridError("grid: bandwidth " + std::to_string(p.h) + " above h_max " +
                            std::to_string(h_max_));
        }
        if (!seen.emplace(p.t, p.s).second) {
            throw GridError("grid: duplicate point (u=" + std::to_string(p.u) +
                            ", h=" + std::to_string(p.h) + ")");
        }
    }
    std::sort(points_.begin(), points_.end(), [](const GridPoint& a, const GridPoint& b) {
        return a.s != b.s ? a.s < b.s : a.t < b.t;
    });
}

Grid build_grid_application(std::size_t T) {
    if (T < 20) {
        throw GridError("application grid requires T >= 20, got " + std::to_string(T));
    }
    const double h_min = default_h_min(T);
    const double Td = static_cast<double>(T);
    std::vector<std::size_t> bandwidths;
    // (5k - 3)/T <= 1/4  <=>  4(5k - 3) <= T
    for (std::size_t k = 1; 4 * (5 * k - 3) <= T; ++k) {
        const std::size_t s = 5 * k - 3;
        if (static_cast<double>(s) / Td >= h_min) {
            bandwidths.push_back(s);
        }
    }
    if (bandwidths.empty()) {
        throw GridError("application grid is empty for T=" + std::to_string(T) + ": T^{-1/3}=" +
                        std::to_string(h_min) + " leaves no bandwidth (5k-3)/T below 1/4");
    }
    std::vector<GridPoint> points;
    for (const auto s : bandwidths) {
        for (std::size_t t = 5; t <= T; t += 5) {
            if (t >= s && t + s <= T) {
                points.push_back(GridPoint{t, s, 0.0, 0.0});
            }
        }
    }
    if (points.empty()) {
        throw GridError("application grid is empty for T=" + std::to_string(T));
    }
    return Grid(T, std::move(points), h_min);
}

Grid build_grid_custom(std::size_t T, std::size_t u_step, std::span<const double> h_values,
                       std::optional<double> h_min) {
    if (T == 0) {
        throw GridError("custom grid: T must be positive");
    }
    if (u_step == 0) {
        throw GridError("custom grid: u-step must be positive");
    }
    if (h_values.empty()) {
        throw GridError("custom grid: at least one bandwidth is required");
    }
    const double lower = h_min.value_or(default_h_min(T));
    const double Td = static_cast<double>(T);
    std::vector<std::size_t> widths;
    for (const double h : h_values) {
        if (!(h > 0.0)) {
            throw GridError("custom grid: bandwidth must be positive, got " + std::to_string(h));
        }
        if (h > kMaxBandwidth + kBoundSlack) {
            throw GridError("custom grid: bandwidth " + std::to_string(h) + " exceeds h_max = 1/4");
        }
        if (h < lower - kBoundSlack) {
            throw GridError("custom grid: bandwidth " + std::to_string(h) + " is below h_min = " +
                            std::to_string(lower));
        }
        const double scaled = h * Td;
        const double nearest = std::round(scaled);
        if (std::abs(scaled - nearest) > 1e-9 * std::max(1.0, scaled)) {
            throw GridError("custom grid: bandwidth " + std::to_string(h) +
                            " is not a multiple of 1/T (T=" + std::to_string(T) + ")");
        }
        widths.push_back(static_cast<std::size_t>(nearest));
    }
    std::sort(widths.begin(), widths.end());
    widths.erase(std::unique(widths.begin(), widths.end()), widths.end());

    std::vector<GridPoint> points;
    for (const auto s : widths) {
        for (std::size_t t = u_step; t <= T; t += u_step) {
            if (t >= s && t + s <= T) {
                points.push_back(GridPoint{t, s, 0.0, 0.0});
            }
        }
    }
    if (points.empty()) {
        throw GridError("custom grid: no feasible location for the given bandwidths");
    }
    return Grid(T, std::move(points), lower);
}

}  // namespace panelms
