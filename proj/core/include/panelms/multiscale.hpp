#pragma once

#include "panelms/critvals.hpp"
#include "panelms/grid.hpp"
#include "panelms/kernel.hpp"
#include "panelms/lrv.hpp"
#include "panelms/panel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace panelms {

/// A grid point where the local design was singular and the statistic fell
/// back to the kernel-sum form.
struct StatDiagnostic {
    std::size_t grid_index = 0;
    double u = 0.0;
    double h = 0.0;
    std::string message;
};

/**
 * @brief Local statistics S_ij(u, h) for every unit pair and grid point.
 *
 * s_hat has one row per pair (ordered by pair_index) and one column per grid
 * point; lambda[p] = lambda_correction(h_p).
 */
struct LocalStatTable {
    Grid grid;
    std::size_t n_units = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    Eigen::MatrixXd s_hat;
    std::vector<double> lambda;
    std::vector<StatDiagnostic> diagnostics;

    double stat(std::size_t i, std::size_t j, std::size_t p) const {
        return i < j ? s_hat(static_cast<Eigen::Index>(pair_index(i, j, n_units)), static_cast<Eigen::Index>(p))
                     : s_hat(static_cast<Eigen::Index>(pair_index(j, i, n_units)), static_cast<Eigen::Index>(p));
    }
};

enum class StatForm {
    /// ||Sigma_ij^{-1/2} M_XKX (beta_i - beta_j)||_inf
    BetaDifference,
    /// ||Sigma_ij^{-1/2} (Th)^{-1/2} sum_t X_t (Y_it - Y_jt) K_{t,u,h}||_inf
    KernelSum,
};

/// Computes the full table. Grid points are processed in parallel; output is
/// identical for every thread count.
LocalStatTable compute_local_stats(const Panel& panel, const SmoothingKernel& kernel, const Grid& grid,
                                   const PairNormalizers& normalizers, std::size_t threads = 0);

/// Single statistic. With BetaDifference a singular design falls back to the
/// kernel-sum form and, if `diagnostic` is given, stores the reason there.
double local_stat(const Panel& panel, const SmoothingKernel& kernel, const PairNormalizers& normalizers,
                  double u, double h, std::size_t i, std::size_t j,
                  StatForm form = StatForm::BetaDifference, std::string* diagnostic = nullptr);

/// max over pairs and grid points of s_hat - lambda.
double aggregate(const LocalStatTable& table);

struct Rejection {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t grid_index = 0;
    double u = 0.0;
    double h = 0.0;
    double stat = 0.0;
    /// stat - lambda(h) - q_alpha; strictly positive for every rejection.
    double exceedance = 0.0;
};

struct TestResult {
    double psi_hat = 0.0;
    double q_alpha = 0.0;
    double alpha = 0.05;
    bool reject_global = false;
    std::vector<Rejection> rejections;
    std::optional<std::vector<Rejection>> minimal_rejections;
};

/**
 * Applies the global rule (reject when psi_hat > q) and the local rule
 * (reject (i, j, u, h) when S_ij(u, h) - lambda(h) > q). Rejections are sorted
 * by descending exceedance, ties broken by (i, j, u, h).
 */
TestResult evaluate_test(const LocalStatTable& table, double q_alpha, double alpha);

/// End-to-end test: long-run covariances, normalizers, statistics, decision.
/// The critical value is re-derived from crit.phi_draws when they are stored,
/// so any alpha can be applied to one simulation.
TestResult run_test(const Panel& panel, const SmoothingKernel& kernel, const Grid& grid,
                    const HacConfig& lrv_config, double alpha, const CriticalValue& crit,
                    std::size_t threads = 0);

/// Keeps, per pair, only rejections whose interval [u-h, u+h] contains no
/// other rejected interval of the same pair. Input order is preserved.
std::vector<Rejection> prune_minimal(const std::vector<Rejection>& rejections, const Grid& grid);

}  // namespace panelms
