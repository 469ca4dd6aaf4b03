#include "panelms/estimate.hpp"

#include "panelms/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace panelms {

LocalDesign local_design(const Panel& panel, const KernelWindow& window, double u, double h) {
    const auto N = static_cast<Eigen::Index>(panel.n_units());
    const auto D = static_cast<Eigen::Index>(panel.n_covariates());
    const auto T = static_cast<double>(panel.n_time());
    LocalDesign design{u, h, Eigen::MatrixXd::Zero(D, D), Eigen::MatrixXd::Zero(N, D)};
    if (window.empty()) {
        return design;
    }
    const auto first = static_cast<Eigen::Index>(window.first);
    const auto len = static_cast<Eigen::Index>(window.weights.size());
    const Eigen::Map<const Eigen::VectorXd> w(window.weights.data(), len);
    const auto x = panel.x().middleRows(first, len);  // len x D
    const double scale = 1.0 / std::sqrt(T * h);

    // Accumulate entrywise in time order; symmetry holds exactly because
    // both triangles see the same products in the same order.
    for (Eigen::Index a = 0; a < D; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            double acc = 0.0;
            for (Eigen::Index t = 0; t < len; ++t) {
                acc += x(t, a) * x(t, b) * w(t);
            }
            design.m_xkx(a, b) = acc * scale;
            design.m_xkx(b, a) = acc * scale;
        }
    }
    const auto y = panel.y().middleCols(first, len);  // N x len
    const Eigen::MatrixXd xw = x.array().colwise() * w.array();  // len x D
    design.xky = (y * xw) * scale;
    return design;
}

LocalDesign local_design(const Panel& panel, const SmoothingKernel& kernel, double u, double h) {
    if (!(h > 0.0) || u - h < -1e-12 || u + h > 1.0 + 1e-12) {
        throw PreconditionError("local_design: (u=" + std::to_string(u) + ", h=" + std::to_string(h) +
                                ") is not feasible: [u-h, u+h] must lie in [0, 1]");
    }
    return local_design(panel, kernel_window(kernel, panel.n_time(), u, h), u, h);
}

namespace {

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
};

Factorization factorize(const LocalDesign& design) {
    const auto& m = design.m_xkx;
    if (!m.allFinite()) {
        throw SingularDesignError(design.u, design.h, "non-finite design matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0)) {
        throw SingularDesignError(design.u, design.h, "empty local window");
    }
    if (!(lo > 0.0) || hi / lo > kMaxDesignCondition) {
        throw SingularDesignError(design.u, design.h,
                                  "condition number " + (lo > 0.0 ? std::to_string(hi / lo) : std::string("inf")) +
                                      " exceeds 1e12");
    }
    Factorization f{Eigen::LLT<Eigen::MatrixXd>(m)};
    if (f.llt.info() != Eigen::Success) {
        throw SingularDesignError(design.u, design.h, "Cholesky factorization failed");
    }
    return f;
}

}  // namespace

void check_design(const LocalDesign& design) {
    factorize(design);
}

Eigen::VectorXd beta_hat(const LocalDesign& design, std::size_t unit) {
    if (unit >= static_cast<std::size_t>(design.xky.rows())) {
        throw PreconditionError("beta_hat: unit index out of range");
    }
    const auto f = factorize(design);
    return f.llt.solve(design.xky.row(static_cast<Eigen::Index>(unit)).transpose());
}

Eigen::MatrixXd beta_hat_all(const LocalDesign& design) {
    const auto f = factorize(design);
    return f.llt.solve(design.xky.transpose()).transpose();
}

CoefficientCurve coefficient_curve(const Panel& panel, const SmoothingKernel& kernel, std::size_t unit,
                                   std::span<const double> locations, double h) {
    if (unit >= panel.n_units()) {
        throw PreconditionError("coefficient_curve: unit index out of range");
    }
    const auto D = static_cast<Eigen::Index>(panel.n_covariates());
    CoefficientCurve curve;
    curve.unit = unit;
    curve.bandwidth = h;
    curve.locations.assign(locations.begin(), locations.end());
    curve.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(locations.size()), D,
                                             std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < locations.size(); ++r) {
        const auto design = local_design(panel, kernel, locations[r], h);
        try {
            curve.values.row(static_cast<Eigen::Index>(r)) = beta_hat(design, unit).transpose();
        } catch (const SingularDesignError& e) {
            curve.gaps.push_back(CurveGap{r, e.what()});
        }
    }
    if (!locations.empty() && curve.gaps.size() == locations.size()) {
        throw NumericError("coefficient_curve: every location has a singular design");
    }
    return curve;
}

}  // namespace panelms
