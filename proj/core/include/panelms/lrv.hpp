#pragma once

#include "panelms/kernel.hpp"
#include "panelms/panel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace panelms {

enum class CovKernel { Bartlett, Parzen, QuadraticSpectral };

CovKernel cov_kernel_from_name(std::string_view name);
std::string_view cov_kernel_name(CovKernel kernel);

/// Covariance-kernel weight kappa(x).
double cov_kernel_weight(CovKernel kernel, double x);

/**
 * Settings for the kernel HAC long-run covariance estimator.
 *
 * `bandwidth` is the truncation parameter chi (>= 1); when unset it resolves
 * to floor(T^{1/3}). `pilot_bandwidth` is the local-constant bandwidth used to
 * extract residuals, snapped down onto the 1/T lattice.
 */
struct HacConfig {
    CovKernel cov_kernel = CovKernel::Bartlett;
    std::optional<double> bandwidth;
    double pilot_bandwidth = 0.25;
    bool pooled = false;

    double resolved_bandwidth(std::size_t T) const;
};

struct LongRunCov {
    std::size_t unit = 0;
    Eigen::MatrixXd sigma;
};

/// Lattice index s of the pilot bandwidth s/T. Throws PreconditionError when
/// the pilot window is infeasible.
std::size_t pilot_lattice_width(std::size_t T, double h_pilot);

/**
 * Row t equals X_t (Y_it - X_t' beta_i(u_t, h_pilot)) with u_t = t/T clamped to
 * [h_pilot, 1 - h_pilot]. Propagates SingularDesignError from the pilot fit.
 */
Eigen::MatrixXd residual_series(const Panel& panel, const SmoothingKernel& kernel, std::size_t unit,
                                double h_pilot);

/// residual_series for every unit, sharing the pilot designs.
std::vector<Eigen::MatrixXd> residual_series_all(const Panel& panel, const SmoothingKernel& kernel,
                                                 double h_pilot);

/**
 * (T/(T-D)) sum_{|l|<T} kappa(l/chi) Gamma(l) with Gamma(l) = T^{-1} sum_t v_t v_{t-l}'
 * for l >= 0 and Gamma(-l) = Gamma(l)'. The result is symmetrized.
 */
LongRunCov hac_estimate(const Eigen::MatrixXd& v, const HacConfig& config, std::size_t unit = 0);

/// Per-unit long-run covariances; with config.pooled every entry carries the
/// cross-unit average.
std::vector<LongRunCov> estimate_long_run(const Panel& panel, const SmoothingKernel& kernel,
                                          const HacConfig& config);

/// Symmetric inverse square root of (Sigma_i + Sigma_j)/2 after a relative
/// ridge. Throws DegenerateCovarianceError naming the pair.
Eigen::MatrixXd pair_normalizer(const LongRunCov& sig_i, const LongRunCov& sig_j);

/// Index of pair (i, j), i < j, in row-major upper-triangle order.
constexpr std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

inline constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

/// Normalizers for every unit pair, indexed by pair_index.
struct PairNormalizers {
    std::size_t n_units = 0;
    std::vector<Eigen::MatrixXd> by_pair;

    const Eigen::MatrixXd& operator()(std::size_t i, std::size_t j) const {
        return by_pair[pair_index(i, j, n_units)];
    }
};

PairNormalizers build_normalizers(const std::vector<LongRunCov>& sigmas);

}  // namespace panelms
