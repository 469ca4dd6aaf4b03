#include "panelms/multiscale.hpp"

#include "panelms/error.hpp"
#include "panelms/estimate.hpp"
#include "panelms/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace panelms {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void check_inputs(const Panel& panel, const PairNormalizers& normalizers) {
    panel.require_pairwise();
    if (normalizers.n_units != panel.n_units() ||
        normalizers.by_pair.size() != pair_count(panel.n_units())) {
        throw PreconditionError("normalizers do not cover every unit pair of the panel");
    }
}

}  // namespace

LocalStatTable compute_local_stats(const Panel& panel, const SmoothingKernel& kernel, const Grid& grid,
                                   const PairNormalizers& normalizers, std::size_t threads) {
    check_inputs(panel, normalizers);
    if (grid.T() != panel.n_time()) {
        throw PreconditionError("grid was built for T=" + std::to_string(grid.T()) + " but the panel has T=" +
                                std::to_string(panel.n_time()));
    }
    const std::size_t N = panel.n_units();
    const std::size_t P = grid.size();
    LocalStatTable table{grid, N, {}, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pair_count(N)),
                                                            static_cast<Eigen::Index>(P)),
                         std::vector<double>(P), {}};
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            table.pairs.emplace_back(i, j);
        }
    }
    std::vector<std::optional<StatDiagnostic>> notes(P);

    parallel_for(P, threads, [&](std::size_t p) {
        const auto& point = grid[p];
        table.lambda[p] = lambda_correction(point.h);
        const auto window = kernel_window(kernel, panel.n_time(), point.u, point.h);
        const auto design = local_design(panel, window, point.u, point.h);
        Eigen::MatrixXd fitted;  // row i: M_XKX * beta_i
        try {
            fitted = (design.m_xkx * beta_hat_all(design).transpose()).transpose();
        } catch (const SingularDesignError& e) {
            // M_XKX beta_i equals the kernel-weighted cross product, which
            // needs no inversion.
            fitted = design.xky;
            notes[p] = StatDiagnostic{p, point.u, point.h, e.what()};
        }
        for (std::size_t k = 0; k < table.pairs.size(); ++k) {
            const auto [i, j] = table.pairs[k];
            const Eigen::VectorXd diff =
                (fitted.row(static_cast<Eigen::Index>(i)) - fitted.row(static_cast<Eigen::Index>(j))).transpose();
            table.s_hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) =
                inf_norm(normalizers.by_pair[k] * diff);
        }
    });

    for (auto& note : notes) {
        if (note) {
            table.diagnostics.push_back(std::move(*note));
        }
    }
    return table;
}

double local_stat(const Panel& panel, const SmoothingKernel& kernel, const PairNormalizers& normalizers,
                  double u, double h, std::size_t i, std::size_t j, StatForm form,
                  std::string* diagnostic) {
    check_inputs(panel, normalizers);
    if (i == j || i >= panel.n_units() || j >= panel.n_units()) {
        throw PreconditionError("local_stat: invalid unit pair");
    }
    const auto design = local_design(panel, kernel, u, h);
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    Eigen::VectorXd diff = (design.xky.row(ii) - design.xky.row(jj)).transpose();
    if (form == StatForm::BetaDifference) {
        try {
            diff = design.m_xkx * (beta_hat(design, i) - beta_hat(design, j));
        } catch (const SingularDesignError& e) {
            if (diagnostic != nullptr) {
                *diagnostic = e.what();
            }
        }
    }
    return inf_norm(normalizers(std::min(i, j), std::max(i, j)) * diff);
}

double aggregate(const LocalStatTable& table) {
    if (table.s_hat.size() == 0) {
        throw PreconditionError("aggregate: empty statistic table");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index p = 0; p < table.s_hat.cols(); ++p) {
        const double penalty = table.lambda[static_cast<std::size_t>(p)];
        for (Eigen::Index k = 0; k < table.s_hat.rows(); ++k) {
            best = std::max(best, table.s_hat(k, p) - penalty);
        }
    }
    return best;
}

TestResult evaluate_test(const LocalStatTable& table, double q_alpha, double alpha) {
    TestResult result;
    result.alpha = alpha;
    result.q_alpha = q_alpha;
    result.psi_hat = aggregate(table);
    result.reject_global = result.psi_hat > q_alpha;
    for (std::size_t k = 0; k < table.pairs.size(); ++k) {
        for (std::size_t p = 0; p < table.grid.size(); ++p) {
            const double s = table.s_hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
            const double excess = s - table.lambda[p];
            if (excess > q_alpha) {
                const auto& point = table.grid[p];
                result.rejections.push_back(Rejection{table.pairs[k].first, table.pairs[k].second, p, point.u,
                                                      point.h, s, excess - q_alpha});
            }
        }
    }
    std::sort(result.rejections.begin(), result.rejections.end(), [&](const Rejection& a, const Rejection& b) {
        const double ea = a.stat - table.lambda[a.grid_index];
        const double eb = b.stat - table.lambda[b.grid_index];
        if (ea != eb) {
            return ea > eb;
        }
        const auto& pa = table.grid[a.grid_index];
        const auto& pb = table.grid[b.grid_index];
        return std::tie(a.i, a.j, pa.t, pa.s) < std::tie(b.i, b.j, pb.t, pb.s);
    });
    result.minimal_rejections = prune_minimal(result.rejections, table.grid);
    return result;
}

TestResult run_test(const Panel& panel, const SmoothingKernel& kernel, const Grid& grid,
                    const HacConfig& lrv_config, double alpha, const CriticalValue& crit, std::size_t threads) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw PreconditionError("run_test: alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    double q = crit.q;
    if (!crit.phi_draws.empty()) {
        q = critical_value(crit.phi_draws, alpha, crit.seed).q;
    } else if (crit.alpha != alpha) {
        throw PreconditionError("run_test: critical value was computed for a different alpha");
    }
    const auto sigmas = estimate_long_run(panel, kernel, lrv_config);
    const auto normalizers = build_normalizers(sigmas);
    const auto table = compute_local_stats(panel, kernel, grid, normalizers, threads);
    return evaluate_test(table, q, alpha);
}

std::vector<Rejection> prune_minimal(const std::vector<Rejection>& rejections, const Grid& grid) {
    std::vector<Rejection> kept;
    for (std::size_t a = 0; a < rejections.size(); ++a) {
        const auto& ra = rejections[a];
        const auto& pa = grid[ra.grid_index];
        bool contains_other = false;
        for (std::size_t b = 0; b < rejections.size() && !contains_other; ++b) {
            const auto& rb = rejections[b];
            if (b == a || rb.i != ra.i || rb.j != ra.j) {
                continue;
            }
            const auto& pb = grid[rb.grid_index];
            contains_other = pa.lower_index() <= pb.lower_index() && pb.upper_index() <= pa.upper_index() &&
                             !(pa.t == pb.t && pa.s == pb.s);
        }
        if (!contains_other) {
            kept.push_back(ra);
        }
    }
    return kept;
}

}  // namespace panelms
