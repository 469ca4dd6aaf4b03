#include "panelms/panel.hpp"

#include "panelms/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace panelms {

Panel::Panel(Eigen::MatrixXd y, Eigen::MatrixXd x, std::vector<std::string> unit_labels)
    : y_(std::move(y)), x_(std::move(x)), labels_(std::move(unit_labels)) {
    if (y_.rows() < 1 || y_.cols() < 1) {
        throw PreconditionError("panel: response matrix must have at least one unit and one time point");
    }
    if (x_.cols() < 1) {
        throw PreconditionError("panel: at least one covariate is required");
    }
    if (x_.rows() != y_.cols()) {
        throw PreconditionError("panel: covariate rows (" + std::to_string(x_.rows()) +
                                ") must equal number of time points (" + std::to_string(y_.cols()) +
                                ")");
    }
    if (!y_.allFinite()) {
        throw PreconditionError("panel: response matrix contains non-finite entries");
    }
    if (!x_.allFinite()) {
        throw PreconditionError("panel: covariate matrix contains non-finite entries");
    }
    if (labels_.empty()) {
        for (Eigen::Index i = 0; i < y_.rows(); ++i) {
            labels_.push_back(std::to_string(i + 1));
        }
    }
    if (static_cast<Eigen::Index>(labels_.size()) != y_.rows()) {
        throw PreconditionError("panel: expected " + std::to_string(y_.rows()) + " unit labels, got " +
                                std::to_string(labels_.size()));
    }
    std::set<std::string> seen;
    for (const auto& label : labels_) {
        if (!seen.insert(label).second) {
            throw PreconditionError("panel: duplicate unit label '" + label + "'");
        }
    }
}

void Panel::require_pairwise() const {
    if (n_units() < 2) {
        throw PreconditionError("panel: pairwise comparison needs at least two units, got " +
                                std::to_string(n_units()));
    }
}

Panel demean_units(const Panel& panel) {
    Eigen::MatrixXd y = panel.y();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double mean = y.row(i).mean();
        y.row(i).array() -= mean;
    }
    return Panel(std::move(y), panel.x(), panel.unit_labels());
}

std::vector<double> deseasonalize(std::span<const double> series, std::size_t lag,
                                  std::size_t trend_degree) {
    const std::size_t n = series.size();
    if (lag == 0) {
        throw PreconditionError("deseasonalize: lag must be positive");
    }
    if (n <= lag + trend_degree + 1) {
        throw PreconditionError("deseasonalize: series length " + std::to_string(n) +
                                " must exceed lag + trend_degree + 1 = " +
                                std::to_string(lag + trend_degree + 1));
    }
    for (double v : series) {
        if (!std::isfinite(v)) {
            throw PreconditionError("deseasonalize: series contains non-finite values");
        }
    }

    const auto rows = static_cast<Eigen::Index>(n - lag);
    const auto trend_cols = static_cast<Eigen::Index>(trend_degree + 1);
    // Time is rescaled to (0, 1]; the column span (and so the residuals) is
    // unchanged while the polynomial block stays well conditioned.
    Eigen::MatrixXd trend(rows, trend_cols);
    Eigen::VectorXd response(rows);
    Eigen::VectorXd lagged(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = static_cast<std::size_t>(r) + lag;  // 0-based index of series_t
        const double tau = static_cast<double>(t + 1) / static_cast<double>(n);
        double power = 1.0;
        for (Eigen::Index k = 0; k < trend_cols; ++k) {
            trend(r, k) = power;
            power *= tau;
        }
        response(r) = series[t];
        lagged(r) = series[t - lag];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> trend_qr(trend);
    if (trend_qr.rank() < trend_cols) {
        throw RankDeficiencyError("deseasonalize: polynomial trend block of degree " +
                                  std::to_string(trend_degree) + " is rank deficient");
    }

    Eigen::MatrixXd design(rows, trend_cols + 1);
    design.col(0) = lagged;
    design.rightCols(trend_cols) = trend;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::VectorXd coef = cod.solve(response);
    const Eigen::VectorXd resid = response - design * coef;
    return {resid.data(), resid.data() + resid.size()};
}

Panel lead_responses(const Panel& panel, std::size_t lead) {
    if (lead == 0) {
        return panel;
    }
    const auto T = static_cast<Eigen::Index>(panel.n_time());
    const auto shift = static_cast<Eigen::Index>(lead);
    if (shift >= T) {
        throw PreconditionError("lead_responses: lead " + std::to_string(lead) +
                                " leaves no observations");
    }
    Eigen::MatrixXd y = panel.y().rightCols(T - shift);
    Eigen::MatrixXd x = panel.x().topRows(T - shift);
    return Panel(std::move(y), std::move(x), panel.unit_labels());
}

Panel deseasonalize_units(const Panel& panel, std::size_t lag, std::size_t trend_degree) {
    const auto N = static_cast<Eigen::Index>(panel.n_units());
    const auto T = static_cast<Eigen::Index>(panel.n_time());
    const auto out_T = T - static_cast<Eigen::Index>(lag);
    Eigen::MatrixXd y(N, std::max<Eigen::Index>(out_T, 0));
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::VectorXd row = panel.y().row(i).transpose();
        const auto resid = deseasonalize(std::span<const double>(row.data(), row.size()), lag,
                                         trend_degree);
        for (Eigen::Index t = 0; t < out_T; ++t) {
            y(i, t) = resid[static_cast<std::size_t>(t)];
        }
    }
    Eigen::MatrixXd x = panel.x().bottomRows(out_T);
    return Panel(std::move(y), std::move(x), panel.unit_labels());
}

}  // namespace panelms
