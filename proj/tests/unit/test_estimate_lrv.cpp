#include "helpers.hpp"
#include "oracles.hpp"
#include "panelms/error.hpp"
#include "panelms/estimate.hpp"
#include "panelms/lrv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace panelms;
using testing_helpers::max_rel_diff;
using testing_helpers::random_matrix;
using testing_helpers::random_panel;
using testing_helpers::to_mat;

namespace {

Eigen::MatrixXd local_oracle_m(const Panel& p, std::size_t t, std::size_t s) {
    const auto loc = oracle::local(to_mat(p.y()), to_mat(p.x()), "epanechnikov", t, s);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(loc.m.size()), static_cast<Eigen::Index>(loc.m.size()));
    for (std::size_t a = 0; a < loc.m.size(); ++a) {
        for (std::size_t b = 0; b < loc.m.size(); ++b) {
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = loc.m[a][b];
        }
    }
    return m;
}

double wls_criterion(const Panel& p, std::size_t unit, double u, double h, const Eigen::VectorXd& beta) {
    const SmoothingKernel k;
    const double T = static_cast<double>(p.n_time());
    double acc = 0.0;
    for (Eigen::Index t = 0; t < p.y().cols(); ++t) {
        const double w = k((static_cast<double>(t + 1) / T - u) / h);
        const double e = p.y()(static_cast<Eigen::Index>(unit), t) - p.x().row(t).dot(beta);
        acc += w * e * e;
    }
    return acc;
}

LongRunCov cov(const Eigen::MatrixXd& m, std::size_t unit = 0) { return LongRunCov{unit, m}; }

}  // namespace

TEST(LocalDesign, MatchesNaiveOracle) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t T = 40;
        const Panel p = random_panel(rng, 3, T, 3);
        for (const auto& [t, s] : {std::pair<std::size_t, std::size_t>{20, 8}, {10, 10}, {25, 13}, {30, 5}}) {
            const auto design = local_design(p, SmoothingKernel{}, static_cast<double>(t) / T,
                                             static_cast<double>(s) / T);
            const auto loc = oracle::local(to_mat(p.y()), to_mat(p.x()), "epanechnikov", t, s);
            EXPECT_LT(max_rel_diff(design.m_xkx, loc.m), 1e-12);
            EXPECT_LT(max_rel_diff(design.xky, loc.xky), 1e-12);
            const auto betas = beta_hat_all(design);
            for (std::size_t i = 0; i < 3; ++i) {
                const auto ref = oracle::beta(loc, i);
                for (std::size_t d = 0; d < 3; ++d) {
                    EXPECT_NEAR(betas(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)), ref[d],
                                1e-8 * std::max(1.0, std::abs(ref[d])));
                }
            }
        }
    }
}

TEST(BetaHat, RandomT12MatchesWlsOracle) {
    std::mt19937_64 rng(12);
    const Panel p = random_panel(rng, 2, 12, 2);
    const auto design = local_design(p, SmoothingKernel{}, 0.5, 5.0 / 12.0);
    const auto loc = oracle::local(to_mat(p.y()), to_mat(p.x()), "epanechnikov", 6, 5);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto b = beta_hat(design, i);
        const auto ref = oracle::beta(loc, i);
        EXPECT_NEAR(b(0), ref[0], 1e-8);
        EXPECT_NEAR(b(1), ref[1], 1e-8);
    }
}

TEST(BetaHat, ExactInterpolationOfConstantCoefficient) {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd x = random_matrix(rng, 60, 1).array().abs() + 0.5;
    Eigen::MatrixXd y = 2.5 * x.transpose();
    const Panel p(y, x);
    for (const double u : {0.25, 0.5, 0.75}) {
        const auto b = beta_hat(local_design(p, SmoothingKernel{}, u, 0.2), 0);
        EXPECT_NEAR(b(0), 2.5, 1e-12);
    }
}

TEST(BetaHat, InterceptOnlyIsKernelWeightedMean) {
    std::mt19937_64 rng(4);
    const std::size_t T = 50;
    const Eigen::MatrixXd y = random_matrix(rng, 2, T);
    const Panel p(y, Eigen::MatrixXd::Ones(T, 1));
    const auto w = kernel_weights(SmoothingKernel{}, T, 0.4, 0.2);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        num += w[t] * y(1, static_cast<Eigen::Index>(t));
        den += w[t];
    }
    EXPECT_NEAR(beta_hat(local_design(p, SmoothingKernel{}, 0.4, 0.2), 1)(0), num / den, 1e-13);
}

TEST(BetaHat, Equivariance) {
    std::mt19937_64 rng(5);
    const Panel p = random_panel(rng, 2, 80, 3);
    const auto base = beta_hat(local_design(p, SmoothingKernel{}, 0.5, 0.2), 0);

    const Panel doubled(2.0 * p.y(), p.x());
    const auto b2 = beta_hat(local_design(doubled, SmoothingKernel{}, 0.5, 0.2), 0);
    for (Eigen::Index d = 0; d < 3; ++d) {
        EXPECT_EQ(b2(d), 2.0 * base(d));
    }
    const Panel scaled(3.7 * p.y(), p.x());
    const auto b3 = beta_hat(local_design(scaled, SmoothingKernel{}, 0.5, 0.2), 0);
    EXPECT_LT((b3 - 3.7 * base).cwiseAbs().maxCoeff(), 1e-12);

    Eigen::Vector3d shift(0.3, -1.2, 2.0);
    Eigen::MatrixXd y = p.y();
    y.row(0) += (p.x() * shift).transpose();
    const Panel shifted(y, p.x());
    const auto bs = beta_hat(local_design(shifted, SmoothingKernel{}, 0.5, 0.2), 0);
    EXPECT_LT((bs - base - shift).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BetaHat, FirstOrderOptimality) {
    std::mt19937_64 rng(6);
    const Panel p = random_panel(rng, 2, 100, 3);
    for (const double u : {0.3, 0.5, 0.77}) {
        const double h = 0.15;
        const auto b = beta_hat(local_design(p, SmoothingKernel{}, u, h), 1);
        const double at = wls_criterion(p, 1, u, h, b);
        for (Eigen::Index d = 0; d < 3; ++d) {
            for (const double eps : {1e-4, -1e-4}) {
                Eigen::VectorXd moved = b;
                moved(d) += eps;
                EXPECT_LE(at, wls_criterion(p, 1, u, h, moved));
            }
        }
    }
}

TEST(BetaHat, SingularDesignThrows) {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd x = random_matrix(rng, 50, 2);
    x.col(1) = 2.0 * x.col(0);
    const Panel p(random_matrix(rng, 2, 50), x);
    const auto design = local_design(p, SmoothingKernel{}, 0.5, 0.2);
    EXPECT_THROW(beta_hat(design, 0), SingularDesignError);
    EXPECT_THROW(beta_hat_all(design), SingularDesignError);
    EXPECT_THROW(check_design(design), SingularDesignError);
}

TEST(CoefficientCurve, GapsDuplicatesAndErrors) {
    std::mt19937_64 rng(8);
    const std::size_t T = 100;
    Eigen::MatrixXd x = random_matrix(rng, T, 2);
    x.col(0).setOnes();
    x.block(0, 1, 50, 1).setZero();
    const Panel p(random_matrix(rng, 2, T), x);

    const std::vector<double> locs{0.8, 0.2, 0.8};
    const auto curve = coefficient_curve(p, SmoothingKernel{}, 1, locs, 0.1);
    ASSERT_EQ(curve.values.rows(), 3);
    ASSERT_EQ(curve.gaps.size(), 1u);
    EXPECT_EQ(curve.gaps[0].row, 1u);
    EXPECT_FALSE(curve.gaps[0].reason.empty());
    EXPECT_TRUE(std::isnan(curve.values(1, 0)));
    EXPECT_EQ(curve.values.row(0), curve.values.row(2));
    const auto direct = beta_hat(local_design(p, SmoothingKernel{}, 0.8, 0.1), 1);
    EXPECT_EQ(curve.values.row(0).transpose(), direct);

    const std::vector<double> bad{0.2, 0.3};
    EXPECT_THROW(coefficient_curve(p, SmoothingKernel{}, 1, bad, 0.1), NumericError);
    EXPECT_THROW(coefficient_curve(p, SmoothingKernel{}, 5, locs, 0.1), PreconditionError);
}

TEST(ResidualSeries, ZeroNoiseIsZero) {
    std::mt19937_64 rng(9);
    const std::size_t T = 80;
    Eigen::MatrixXd x = random_matrix(rng, T, 2);
    x.col(0).setOnes();
    Eigen::MatrixXd y(1, T);
    y.row(0) = (x * Eigen::Vector2d(1.0, -0.5)).transpose();
    const Panel p(y, x);
    const auto v = residual_series(p, SmoothingKernel{}, 0, 0.25);
    EXPECT_LE(v.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ResidualSeries, InterceptOnlyReduction) {
    std::mt19937_64 rng(10);
    const std::size_t T = 60;
    const Eigen::MatrixXd y = random_matrix(rng, 1, T);
    const Panel p(y, Eigen::MatrixXd::Ones(T, 1));
    const auto v = residual_series(p, SmoothingKernel{}, 0, 0.25);
    const std::size_t s = pilot_lattice_width(T, 0.25);
    for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t c = std::clamp(t, s, T - s);
        const auto w = kernel_weights(SmoothingKernel{}, T, static_cast<double>(c) / T, static_cast<double>(s) / T);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < T; ++k) {
            num += w[k] * y(0, static_cast<Eigen::Index>(k));
            den += w[k];
        }
        EXPECT_NEAR(v(static_cast<Eigen::Index>(t - 1), 0), y(0, static_cast<Eigen::Index>(t - 1)) - num / den, 1e-12);
    }
}

TEST(ResidualSeries, MatchesTwoStepOracle) {
    std::mt19937_64 rng(13);
    const std::size_t T = 47;
    const Panel p = random_panel(rng, 3, T, 2);
    const std::size_t s = pilot_lattice_width(T, 0.25);
    EXPECT_EQ(s, 11u);
    const auto all = residual_series_all(p, SmoothingKernel{}, 0.25);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto ref = oracle::residuals(to_mat(p.y()), to_mat(p.x()), "epanechnikov", i, s);
        EXPECT_LT(max_rel_diff(residual_series(p, SmoothingKernel{}, i, 0.25), ref), 1e-12);
        EXPECT_LT(max_rel_diff(all[i], ref), 1e-12);
    }
}

TEST(Hac, BartlettChiOneIsScaledGammaZero) {
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd v = random_matrix(rng, 200, 3);
    HacConfig cfg;
    cfg.bandwidth = 1.0;
    const auto s = hac_estimate(v, cfg);
    const Eigen::MatrixXd gamma0 = v.transpose() * v / 200.0;
    EXPECT_LT((s.sigma - 200.0 / 197.0 * gamma0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hac, ConstantSeriesClosedForm) {
    const std::size_t T = 30;
    const double c = 1.7;
    const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(T, 1, c);
    for (const char* name : {"bartlett", "parzen", "quadratic_spectral"}) {
        HacConfig cfg;
        cfg.cov_kernel = cov_kernel_from_name(name);
        cfg.bandwidth = 3.0;
        double expected = 0.0;
        for (long l = -static_cast<long>(T) + 1; l < static_cast<long>(T); ++l) {
            expected += oracle::cov_weight(name, static_cast<double>(l) / 3.0) * c * c *
                        static_cast<double>(static_cast<long>(T) - std::abs(l)) / static_cast<double>(T);
        }
        expected *= static_cast<double>(T) / static_cast<double>(T - 1);
        EXPECT_NEAR(hac_estimate(v, cfg).sigma(0, 0), expected, 1e-12 * expected) << name;
    }
}

TEST(Hac, MatchesOracleAllKernels) {
    std::mt19937_64 rng(15);
    const Eigen::MatrixXd v = random_matrix(rng, 64, 2);
    for (const char* name : {"bartlett", "parzen", "quadratic_spectral"}) {
        HacConfig cfg;
        cfg.cov_kernel = cov_kernel_from_name(name);
        EXPECT_EQ(cfg.resolved_bandwidth(64), 4.0);
        const auto ref = oracle::hac(to_mat(v), name, 4.0);
        EXPECT_LT(max_rel_diff(hac_estimate(v, cfg).sigma, ref), 1e-12) << name;
    }
}

TEST(Hac, Ar1LongRunVarianceWithinFifteenPercent) {
    // Population long-run variance of AR(1) with phi = 0.5 and unit innovations.
    const double phi = 0.5;
    const double target = 1.0 / ((1.0 - phi) * (1.0 - phi));
    const std::size_t T = 2000;
    double mean = 0.0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(100 + seed));
        std::normal_distribution<double> normal;
        Eigen::MatrixXd v(T, 1);
        double prev = normal(rng) / std::sqrt(1.0 - phi * phi);
        for (std::size_t t = 0; t < T; ++t) {
            prev = phi * prev + normal(rng);
            v(static_cast<Eigen::Index>(t), 0) = prev;
        }
        mean += hac_estimate(v, HacConfig{}).sigma(0, 0) / seeds;
    }
    EXPECT_NEAR(mean / target, 1.0, 0.15);
}

TEST(Hac, PsdSymmetricAndTimeReversible) {
    std::mt19937_64 rng(16);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd v = random_matrix(rng, 90, 3);
        v.col(1) += 0.8 * v.col(0);
        const auto s = hac_estimate(v, HacConfig{});
        EXPECT_EQ(s.sigma, s.sigma.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.sigma);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
        const Eigen::MatrixXd reversed = v.colwise().reverse();
        const auto r = hac_estimate(reversed, HacConfig{});
        EXPECT_LT((r.sigma - s.sigma).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Hac, Rejections) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(10, 2);
    v(3, 1) = std::nan("");
    EXPECT_THROW(hac_estimate(v, HacConfig{}), InputError);
    EXPECT_THROW(hac_estimate(Eigen::MatrixXd::Ones(2, 2), HacConfig{}), PreconditionError);
    HacConfig bad;
    bad.bandwidth = 0.5;
    EXPECT_THROW(hac_estimate(Eigen::MatrixXd::Ones(10, 1), bad), PreconditionError);
    EXPECT_THROW(cov_kernel_from_name("tukey"), InputError);
}

TEST(EstimateLongRun, MatchesOracleAndPooling) {
    std::mt19937_64 rng(17);
    const std::size_t T = 45;
    const Panel p = random_panel(rng, 3, T, 2);
    const std::size_t s = pilot_lattice_width(T, 0.25);
    for (const bool pooled : {false, true}) {
        HacConfig cfg;
        cfg.pooled = pooled;
        const auto got = estimate_long_run(p, SmoothingKernel{}, cfg);
        const auto ref =
            oracle::sigmas(to_mat(p.y()), to_mat(p.x()), "epanechnikov", s, "bartlett", 3.0, pooled);
        ASSERT_EQ(got.size(), 3u);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(got[i].unit, i);
            EXPECT_LT(max_rel_diff(got[i].sigma, ref[i]), 1e-11);
        }
    }
}

TEST(PairNormalizer, IdentityAndScalarCases) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_LT((pair_normalizer(cov(I), cov(I, 1)) - I).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((pair_normalizer(cov(4 * I), cov(4 * I, 1)) - 0.5 * I).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_THROW(pair_normalizer(cov(4 * I), cov(Eigen::MatrixXd::Zero(3, 3), 1)), DegenerateCovarianceError);
    try {
        pair_normalizer(cov(Eigen::MatrixXd::Zero(3, 3), 4), cov(I, 6));
        FAIL();
    } catch (const DegenerateCovarianceError& e) {
        EXPECT_NE(std::string(e.what()).find("(5, 7)"), std::string::npos);
    }
}

TEST(PairNormalizer, RandomSpdAgainstJacobiOracle) {
    std::mt19937_64 rng(18);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd a0 = random_matrix(rng, 4, 4);
        const Eigen::MatrixXd b0 = random_matrix(rng, 4, 4);
        const Eigen::MatrixXd a = a0 * a0.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4);
        const Eigen::MatrixXd b = b0 * b0.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4);
        const auto n = pair_normalizer(cov(a), cov(b, 1));
        EXPECT_LT(max_rel_diff(n, oracle::normalizer(to_mat(a), to_mat(b))), 1e-8);
        const Eigen::MatrixXd avg = 0.5 * (a + b);
        EXPECT_LT((n * avg * n - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_EQ(n, pair_normalizer(cov(b), cov(a, 1)));
    }
}

TEST(PairNormalizer, BuildAllPairs) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const std::vector<LongRunCov> sig{cov(I, 0), cov(4 * I, 1), cov(9 * I, 2)};
    const auto all = build_normalizers(sig);
    ASSERT_EQ(all.by_pair.size(), 3u);
    EXPECT_NEAR(all(0, 1)(0, 0), 1.0 / std::sqrt(2.5), 1e-10);
    EXPECT_NEAR(all(1, 2)(1, 1), 1.0 / std::sqrt(6.5), 1e-10);
    EXPECT_EQ(pair_index(0, 2, 3), 1u);
    EXPECT_EQ(pair_count(5), 10u);
}
