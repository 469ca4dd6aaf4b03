#pragma once

#include "panelms/grid.hpp"
#include "panelms/kernel.hpp"
#include "panelms/panel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panelms {

/// Condition-number ceiling above which a local design counts as singular.
inline constexpr double kMaxDesignCondition = 1e12;

/**
 * @brief Kernel-localized cross products at one (u, h).
 *
 * m_xkx = (Th)^{-1/2} sum_t X_t X_t' K_{t,u,h}  (D x D)
 * xky   row i = (Th)^{-1/2} sum_t X_t' Y_it K_{t,u,h}  (N x D)
 *
 * The (Th)^{-1/2} scaling cancels in the coefficient estimate but not in the
 * multiscale statistic, so it is kept here.
 */
struct LocalDesign {
    double u = 0.0;
    double h = 0.0;
    Eigen::MatrixXd m_xkx;
    Eigen::MatrixXd xky;
};

LocalDesign local_design(const Panel& panel, const SmoothingKernel& kernel, double u, double h);

/// Same as above with precomputed kernel weights for the point.
LocalDesign local_design(const Panel& panel, const KernelWindow& window, double u, double h);

/// Solves m_xkx * beta = xky[unit]. Throws SingularDesignError when m_xkx is
/// not positive definite or its condition number exceeds kMaxDesignCondition.
Eigen::VectorXd beta_hat(const LocalDesign& design, std::size_t unit);

/// Row i holds beta_hat(design, i); one factorization shared by all units.
Eigen::MatrixXd beta_hat_all(const LocalDesign& design);

/// Throws SingularDesignError unless m_xkx passes the conditioning guard.
void check_design(const LocalDesign& design);

struct CurveGap {
    std::size_t row = 0;
    std::string reason;
};

/// Nadaraya-Watson estimates of one unit over a list of locations.
/// Rows of `values` at singular locations are NaN and listed in `gaps`.
struct CoefficientCurve {
    std::size_t unit = 0;
    std::vector<double> locations;
    double bandwidth = 0.0;
    Eigen::MatrixXd values;
    std::vector<CurveGap> gaps;
};

/// Throws PreconditionError for infeasible locations and NumericError when
/// every location is singular.
CoefficientCurve coefficient_curve(const Panel& panel, const SmoothingKernel& kernel, std::size_t unit,
                                   std::span<const double> locations, double h);

}  // namespace panelms
