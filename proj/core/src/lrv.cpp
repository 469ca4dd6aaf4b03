#include "panelms/lrv.hpp"

#include "panelms/error.hpp"
#include "panelms/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace panelms {

CovKernel cov_kernel_from_name(std::string_view name) {
    if (name == "bartlett") {
        return CovKernel::Bartlett;
    }
    if (name == "parzen") {
        return CovKernel::Parzen;
    }
    if (name == "quadratic_spectral" || name == "qs") {
        return CovKernel::QuadraticSpectral;
    }
    throw InputError("unknown HAC kernel '" + std::string(name) +
                     "' (expected bartlett, parzen or quadratic_spectral)");
}

std::string_view cov_kernel_name(CovKernel kernel) {
    switch (kernel) {
        case CovKernel::Bartlett:
            return "bartlett";
        case CovKernel::Parzen:
            return "parzen";
        case CovKernel::QuadraticSpectral:
            return "quadratic_spectral";
    }
    return "bartlett";
}

double cov_kernel_weight(CovKernel kernel, double x) {
    const double a = std::abs(x);
    switch (kernel) {
        case CovKernel::Bartlett:
            return a <= 1.0 ? 1.0 - a : 0.0;
        case CovKernel::Parzen:
            if (a <= 0.5) {
                return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
            }
            return a <= 1.0 ? 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a) : 0.0;
        case CovKernel::QuadraticSpectral: {
            if (a == 0.0) {
                return 1.0;
            }
            const double z = 6.0 * std::numbers::pi * a / 5.0;
            return 25.0 / (12.0 * std::numbers::pi * std::numbers::pi * a * a) *
                   (std::sin(z) / z - std::cos(z));
        }
    }
    return 0.0;
}

double HacConfig::resolved_bandwidth(std::size_t T) const {
    const double chi = bandwidth.value_or(std::floor(std::cbrt(static_cast<double>(T))));
    if (!(chi >= 1.0) || !std::isfinite(chi)) {
        throw PreconditionError("HAC bandwidth must be >= 1, got " + std::to_string(chi));
    }
    return chi;
}

std::size_t pilot_lattice_width(std::size_t T, double h_pilot) {
    if (!(h_pilot > 0.0)) {
        throw PreconditionError("pilot bandwidth must be positive");
    }
    const auto s = static_cast<std::size_t>(std::floor(h_pilot * static_cast<double>(T) + 1e-9));
    if (s < 1) {
        throw PreconditionError("pilot bandwidth " + std::to_string(h_pilot) +
                                " is below one lattice step 1/T");
    }
    if (2 * s > T) {
        throw PreconditionError("pilot bandwidth " + std::to_string(h_pilot) + " exceeds 1/2");
    }
    return s;
}

std::vector<Eigen::MatrixXd> residual_series_all(const Panel& panel, const SmoothingKernel& kernel,
                                                 double h_pilot) {
    const std::size_t T = panel.n_time();
    const std::size_t N = panel.n_units();
    const auto D = static_cast<Eigen::Index>(panel.n_covariates());
    const std::size_t s = pilot_lattice_width(T, h_pilot);
    const double Td = static_cast<double>(T);
    const double h = static_cast<double>(s) / Td;

    // Clamped centres c in [s, T - s]; each distinct centre needs one fit.
    const std::size_t lo = s;
    const std::size_t hi = T - s;
    std::vector<Eigen::MatrixXd> betas(hi - lo + 1);
    for (std::size_t c = lo; c <= hi; ++c) {
        const double u = static_cast<double>(c) / Td;
        betas[c - lo] = beta_hat_all(local_design(panel, kernel_window(kernel, T, u, h), u, h));
    }

    std::vector<Eigen::MatrixXd> out(N, Eigen::MatrixXd(static_cast<Eigen::Index>(T), D));
    const auto& x = panel.x();
    const auto& y = panel.y();
    for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t c = std::clamp(t, lo, hi);
        const auto& beta = betas[c - lo];
        const auto row = static_cast<Eigen::Index>(t - 1);
        for (std::size_t i = 0; i < N; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double fitted = x.row(row).dot(beta.row(ii));
            const double resid = y(ii, row) - fitted;
            out[i].row(row) = x.row(row) * resid;
        }
    }
    return out;
}

Eigen::MatrixXd residual_series(const Panel& panel, const SmoothingKernel& kernel, std::size_t unit,
                                double h_pilot) {
    if (unit >= panel.n_units()) {
        throw PreconditionError("residual_series: unit index out of range");
    }
    return residual_series_all(panel, kernel, h_pilot)[unit];
}

LongRunCov hac_estimate(const Eigen::MatrixXd& v, const HacConfig& config, std::size_t unit) {
    const auto T = v.rows();
    const auto D = v.cols();
    if (D < 1 || T <= D) {
        throw PreconditionError("hac_estimate: need T > D, got T=" + std::to_string(T) +
                                ", D=" + std::to_string(D));
    }
    if (!v.allFinite()) {
        throw PreconditionError("hac_estimate: input contains non-finite values");
    }
    const double chi = config.resolved_bandwidth(static_cast<std::size_t>(T));
    const double Td = static_cast<double>(T);

    Eigen::MatrixXd sigma = (v.transpose() * v) / Td;
    for (Eigen::Index lag = 1; lag < T; ++lag) {
        const double weight = cov_kernel_weight(config.cov_kernel, static_cast<double>(lag) / chi);
        if (weight == 0.0) {
            if (config.cov_kernel != CovKernel::QuadraticSpectral) {
                break;  // truncated kernels vanish beyond chi
            }
            continue;
        }
        // Gamma(l) = T^{-1} sum_{t=l+1}^{T} v_t v_{t-l}'
        const Eigen::MatrixXd gamma =
            (v.bottomRows(T - lag).transpose() * v.topRows(T - lag)) / Td;
        sigma += weight * (gamma + gamma.transpose());
    }
    sigma *= Td / (Td - static_cast<double>(D));
    const Eigen::MatrixXd symmetric = 0.5 * (sigma + sigma.transpose());
    return LongRunCov{unit, symmetric};
}

std::vector<LongRunCov> estimate_long_run(const Panel& panel, const SmoothingKernel& kernel,
                                          const HacConfig& config) {
    const auto residuals = residual_series_all(panel, kernel, config.pilot_bandwidth);
    std::vector<LongRunCov> out;
    out.reserve(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        out.push_back(hac_estimate(residuals[i], config, i));
    }
    if (config.pooled) {
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(out.front().sigma.rows(), out.front().sigma.cols());
        for (const auto& s : out) {
            pooled += s.sigma;
        }
        pooled /= static_cast<double>(out.size());
        for (auto& s : out) {
            s.sigma = pooled;
        }
    }
    return out;
}

namespace {

constexpr double kRidgeFactor = 1e-10;
constexpr double kEigenFloor = 1e-8;

void check_nondegenerate(const LongRunCov& s, const std::string& pair) {
    const auto D = static_cast<double>(s.sigma.rows());
    const double trace = s.sigma.trace();
    if (!s.sigma.allFinite() || !(trace > 0.0)) {
        throw DegenerateCovarianceError("degenerate long-run covariance for unit " +
                                        std::to_string(s.unit + 1) + " in pair " + pair +
                                        ": non-positive trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.sigma, Eigen::EigenvaluesOnly);
    const double ridge = kRidgeFactor * trace / D;
    if (eig.eigenvalues().minCoeff() + ridge < kEigenFloor * trace / D) {
        throw DegenerateCovarianceError("degenerate long-run covariance for unit " +
                                        std::to_string(s.unit + 1) + " in pair " + pair +
                                        ": smallest eigenvalue below floor");
    }
}

}  // namespace

Eigen::MatrixXd pair_normalizer(const LongRunCov& sig_i, const LongRunCov& sig_j) {
    const std::string pair =
        "(" + std::to_string(sig_i.unit + 1) + ", " + std::to_string(sig_j.unit + 1) + ")";
    if (sig_i.sigma.rows() != sig_j.sigma.rows() || sig_i.sigma.rows() != sig_i.sigma.cols() ||
        sig_j.sigma.rows() != sig_j.sigma.cols()) {
        throw PreconditionError("pair_normalizer: dimension mismatch in pair " + pair);
    }
    check_nondegenerate(sig_i, pair);
    check_nondegenerate(sig_j, pair);

    const auto D = sig_i.sigma.rows();
    Eigen::MatrixXd avg = 0.5 * (sig_i.sigma + sig_j.sigma);
    avg = 0.5 * (avg + avg.transpose()).eval();
    const double trace = avg.trace();
    const double ridge = kRidgeFactor * trace / static_cast<double>(D);
    avg.diagonal().array() += ridge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(avg);
    if (eig.info() != Eigen::Success) {
        throw DegenerateCovarianceError("eigendecomposition failed for pair " + pair);
    }
    const auto& values = eig.eigenvalues();
    if (values.minCoeff() < kEigenFloor * trace / static_cast<double>(D)) {
        throw DegenerateCovarianceError("degenerate pooled covariance for pair " + pair);
    }
    const auto& vectors = eig.eigenvectors();
    Eigen::MatrixXd inv_sqrt = vectors * values.cwiseSqrt().cwiseInverse().asDiagonal() * vectors.transpose();
    inv_sqrt = 0.5 * (inv_sqrt + inv_sqrt.transpose()).eval();

    const Eigen::MatrixXd check = inv_sqrt * avg * inv_sqrt;
    const double err = (check - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff();
    if (!(err <= 1e-8)) {
        throw DegenerateCovarianceError("inverse square root inaccurate for pair " + pair +
                                        " (residual " + std::to_string(err) + ")");
    }
    return inv_sqrt;
}

PairNormalizers build_normalizers(const std::vector<LongRunCov>& sigmas) {
    PairNormalizers out;
    out.n_units = sigmas.size();
    out.by_pair.reserve(pair_count(sigmas.size()));
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        for (std::size_t j = i + 1; j < sigmas.size(); ++j) {
            out.by_pair.push_back(pair_normalizer(sigmas[i], sigmas[j]));
        }
    }
    return out;
}

}  // namespace panelms
