#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace panelms {

/**
 * @brief A balanced panel of N response series sharing T observations of D
 * common covariates.
 *
 * Observation t (1-based) corresponds to rescaled time u = t/T. Rows of y are
 * units, columns are time points; rows of x are time points. The object is
 * immutable after construction and validated on entry.
 */
class Panel {
public:
    /// Validates shapes, finiteness and label uniqueness. Throws
    /// PreconditionError. Empty labels are replaced by "1".."N".
    Panel(Eigen::MatrixXd y, Eigen::MatrixXd x, std::vector<std::string> unit_labels = {});

    std::size_t n_units() const noexcept { return static_cast<std::size_t>(y_.rows()); }
    std::size_t n_time() const noexcept { return static_cast<std::size_t>(y_.cols()); }
    std::size_t n_covariates() const noexcept { return static_cast<std::size_t>(x_.cols()); }

    const Eigen::MatrixXd& y() const noexcept { return y_; }
    const Eigen::MatrixXd& x() const noexcept { return x_; }
    const std::vector<std::string>& unit_labels() const noexcept { return labels_; }

    /// Throws PreconditionError unless N >= 2 (needed for pairwise testing).
    void require_pairwise() const;

private:
    Eigen::MatrixXd y_;
    Eigen::MatrixXd x_;
    std::vector<std::string> labels_;
};

/// Subtracts each unit's time average from its response series.
Panel demean_units(const Panel& panel);

/**
 * @brief Residuals of an OLS regression of series_t on
 * (series_{t-lag}, 1, t, ..., t^trend_degree) for t = lag+1..n.
 *
 * The result has length n - lag; the first `lag` observations are dropped.
 * Residuals are the orthogonal projection onto the complement of the
 * regressor span, so exactly collinear designs (e.g. a noiseless polynomial
 * series) are handled by a minimum-norm solve. RankDeficiencyError is raised
 * when the trend block itself is numerically rank deficient.
 */
std::vector<double> deseasonalize(std::span<const double> series, std::size_t lag,
                                  std::size_t trend_degree);

/// Pairs y_{i,t+lead} with x_t: drops the first `lead` response columns and
/// the last `lead` covariate rows.
Panel lead_responses(const Panel& panel, std::size_t lead);

/// Applies deseasonalize to every unit and drops the first `lag` covariate
/// rows so all series stay aligned.
Panel deseasonalize_units(const Panel& panel, std::size_t lag, std::size_t trend_degree);

}  // namespace panelms
