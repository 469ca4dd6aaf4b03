// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "commands.hpp"
#include "oracles.hpp"
#include "panelms/cluster.hpp"
#include "panelms/critvals.hpp"
#include "panelms/csv.hpp"
#include "panelms/estimate.hpp"
#include "panelms/multiscale.hpp"
#include "panelms/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace panelms;

namespace {

constexpr std::size_t kT = 300;
constexpr std::size_t kN = 5;
constexpr double kAlpha = 0.05;
constexpr std::size_t kB = 2000;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::string rate_text(const RateEstimate& r) { return fmt(r.rate) + " (se " + fmt(r.se, 2) + ")"; }

CoefficientFunction base_function() {
    return CoefficientFunction{{Curve{{CurveTerm::constant(1.0), CurveTerm::sine(0.5, 1.0, 0.0)}},
                                Curve{{CurveTerm::linear(0.5, -0.5)}}}};
}

DgpSpec base_spec(std::uint64_t seed) {
    DgpSpec spec;
    spec.N = kN;
    spec.T = kT;
    spec.D = 2;
    spec.unit_curves.assign(kN, base_function());
    spec.ar = 0.3;
    spec.sigma = 1.0;
    spec.seed = seed;
    return spec;
}

ExperimentOptions options(std::size_t R) {
    ExperimentOptions opt;
    opt.alpha = kAlpha;
    opt.B = kB;
    opt.R = R;
    opt.critical_seed = 99;
    return opt;
}

// Bandwidth of the application grid nearest to 0.19 and the matching
// separation height c sqrt(log T / (T h)) with c = 5.
std::pair<double, double> planted_scale(const Grid& grid) {
    double h = grid[0].h;
    for (const auto& p : grid.points()) {
        if (std::abs(p.h - 0.19) < std::abs(h - 0.19)) {
            h = p.h;
        }
    }
    return {h, separation_scale(kT, h, 5.0)};
}

Verdict size_control(const Grid& grid) {
    const auto report = run_size_experiment(base_spec(1001), grid, options(500));
    const double rate = report.rejection.rate;
    return {std::abs(rate - 0.05) <= 0.025,
            "rejection rate " + rate_text(report.rejection) + ", target 0.05 +/- 0.025, q=" + fmt(report.q_alpha)};
}

Verdict fwer_control(const Grid& grid) {
    DgpSpec spec = base_spec(2002);
    const auto [h, height] = planted_scale(grid);
    spec.unit_curves[3].coords[0] = spec.unit_curves[3].coords[0].plus(CurveTerm::bump(0.3, 0.1, height));
    spec.unit_curves[4].coords[0] = spec.unit_curves[4].coords[0].plus(CurveTerm::bump(0.7, 0.1, -height));
    const auto report = run_fwer_experiment(spec, grid, options(500));
    return {report.fwer->rate <= 0.075,
            "FWER " + rate_text(*report.fwer) + " <= 0.075; global rejection rate " + fmt(report.rejection.rate)};
}

Verdict power(const Grid& grid) {
    const auto [h, height] = planted_scale(grid);
    const PowerDeviation dev{2, 0, CurveTerm::bump(0.5, h, 1.0)};
    const auto report = run_power_experiment(base_spec(3003), grid, dev, {height}, options(200));
    const auto& point = report.power_curve.front();
    return {point.rejection.rate >= 0.90 && point.pair_detection.rate >= 0.70,
            "bump height " + fmt(height) + " on [" + fmt(0.5 - h) + ", " + fmt(0.5 + h) + "]: rejection " +
                rate_text(point.rejection) + " >= 0.90, planted pair listed " + rate_text(point.pair_detection) +
                " >= 0.70"};
}

Verdict cluster_recovery(const Grid& grid) {
    DgpSpec spec = base_spec(4004);
    spec.N = 6;
    spec.unit_curves.assign(6, base_function());
    const auto [h, height] = planted_scale(grid);
    // Centered bump: the group curves differ by `height` on [0.5 - h, 0.5 + h]
    // and both integrate to the same value.
    const double ramp = 0.05;
    const double mean = height * (2.0 * h + ramp);
    for (std::size_t i = 3; i < 6; ++i) {
        spec.unit_curves[i].coords[0] = spec.unit_curves[i]
                                            .coords[0]
                                            .plus(CurveTerm::bump(0.5, h, height, ramp))
                                            .plus(CurveTerm::constant(-mean));
    }
    spec.group_assignment = std::vector<std::size_t>{1, 1, 1, 2, 2, 2};
    const auto report = run_cluster_experiment(spec, grid, options(200));
    return {report.cluster_recovery->rate >= 0.90,
            "exact recovery " + rate_text(*report.cluster_recovery) + " >= 0.90; K_hat = 2 in " +
                rate_text(*report.k_correct)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

oracle::Mat to_mat(const Eigen::MatrixXd& m) {
    oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

Verdict oracle_equivalence() {
    std::mt19937_64 rng(5005);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    std::size_t checks = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t T = std::uniform_int_distribution<std::size_t>(16, 24)(rng);
        const std::size_t N = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
        const std::size_t D = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
        Eigen::MatrixXd x(T, D);
        Eigen::MatrixXd y(N, T);
        for (std::size_t t = 0; t < T; ++t) {
            x(static_cast<Eigen::Index>(t), 0) = 1.0;
            for (std::size_t d = 1; d < D; ++d) {
                x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = normal(rng);
            }
            for (std::size_t i = 0; i < N; ++i) {
                y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = normal(rng);
            }
        }
        const Panel panel(y, x);

        std::vector<GridPoint> candidates;
        for (std::size_t s = 3; 4 * s <= T; ++s) {
            for (std::size_t t = s; t + s <= T; ++t) {
                candidates.push_back(GridPoint{t, s, static_cast<double>(t) / T, static_cast<double>(s) / T});
            }
        }
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const std::size_t G = std::min<std::size_t>(candidates.size(), std::uniform_int_distribution<std::size_t>(1, 6)(rng));
        std::vector<GridPoint> points(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(G));
        std::sort(points.begin(), points.end(),
                  [](const GridPoint& a, const GridPoint& b) { return std::tie(a.s, a.t) < std::tie(b.s, b.t); });
        const Grid grid(T, points, 3.0 / static_cast<double>(T));

        const HacConfig hac;
        const auto sig = estimate_long_run(panel, SmoothingKernel{}, hac);
        const auto table = compute_local_stats(panel, SmoothingKernel{}, grid, build_normalizers(sig), 1);
        const auto d = dissimilarity_matrix(table);
        const auto dendro = hac_cluster(d, Linkage::Complete);

        const auto oy = to_mat(y);
        const auto ox = to_mat(x);
        const double chi = std::floor(std::cbrt(static_cast<double>(T)) + 1e-12);
        const auto osig = oracle::sigmas(oy, ox, "epanechnikov", pilot_lattice_width(T, 0.25), "bartlett", chi, false);
        std::vector<std::pair<std::size_t, std::size_t>> opts;
        for (const auto& p : points) {
            opts.emplace_back(p.t, p.s);
        }
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t a = 0; a < D; ++a) {
                for (std::size_t b = 0; b < D; ++b) {
                    worst = std::max(worst, rel(sig[i].sigma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                                                osig[i][a][b]));
                    ++checks;
                }
            }
        }
        for (std::size_t q = 0; q < G; ++q) {
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t j = i + 1; j < N; ++j) {
                    const auto norm = oracle::normalizer(osig[i], osig[j]);
                    worst = std::max(worst, rel(table.stat(i, j, q),
                                                oracle::stat(oy, ox, "epanechnikov", norm, i, j, points[q].t, points[q].s)));
                    ++checks;
                }
            }
        }
        worst = std::max(worst, rel(aggregate(table), oracle::psi(oy, ox, "epanechnikov", osig, opts)));
        const auto od = oracle::dissimilarity(oy, ox, "epanechnikov", osig, opts);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                worst = std::max(worst, rel(d.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), od[i][j]));
                ++checks;
            }
        }
        const auto heights = oracle::linkage_heights(od, "complete");
        for (std::size_t m = 0; m < heights.size(); ++m) {
            worst = std::max(worst, rel(dendro.merges[m].height, heights[m]));
            ++checks;
        }
    }
    return {worst <= 1e-8, std::to_string(checks) + " comparisons on 50 instances, max relative error " + fmt(worst, 3)};
}

Verdict statistic_identity(const Grid& grid) {
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto panel = generate_panel(base_spec(6006 + seed)).panel;
        const auto norm = build_normalizers(estimate_long_run(panel, SmoothingKernel{}, HacConfig{}));
        for (const auto& p : grid.points()) {
            for (std::size_t i = 0; i < kN; ++i) {
                for (std::size_t j = i + 1; j < kN; ++j) {
                    const double a = local_stat(panel, SmoothingKernel{}, norm, p.u, p.h, i, j, StatForm::BetaDifference);
                    const double b = local_stat(panel, SmoothingKernel{}, norm, p.u, p.h, i, j, StatForm::KernelSum);
                    worst = std::max(worst, rel(a, b));
                    ++checks;
                }
            }
        }
    }
    return {worst <= 1e-8, std::to_string(checks) + " (pair, grid point) checks, max relative gap " + fmt(worst, 3)};
}

Verdict pivot_sanity() {
    const std::vector<double> hs{0.2};
    const Grid full = build_grid_custom(kT, 5, hs);
    const Grid grid(kT, {full[full.size() / 2]}, full.h_min());
    const auto& p = grid[0];
    const auto w = kernel_weights(SmoothingKernel{}, kT, p.u, p.h);
    double sum_sq = 0.0;
    for (double k : w) {
        sum_sq += k * k;
    }
    // Z_1 - Z_2 has variance 2, so the pivot is folded normal with variance v.
    const double v = 2.0 * sum_sq / (static_cast<double>(kT) * p.h);
    const std::size_t B = 20000;
    const auto draws = simulate_phi(kT, 2, 1, grid, SmoothingKernel{}, B, 7007);
    double mean = 0.0;
    double sq = 0.0;
    const double lambda = lambda_correction(p.h);
    for (double d : draws) {
        mean += (d + lambda) / B;
        sq += (d + lambda) * (d + lambda) / B;
    }
    const double se = std::sqrt((sq - mean * mean) / (B - 1));
    const double expected = std::sqrt(2.0 * v / std::numbers::pi);
    return {std::abs(mean - expected) <= 3.0 * se,
            "mean " + fmt(mean, 6) + " vs closed form " + fmt(expected, 6) + " (3 se = " + fmt(3.0 * se, 3) + ")"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / ("panelms_acceptance_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    const auto input = dir / "panel.csv";
    panel_to_csv(generate_panel(base_spec(8008)).panel, input, CsvLayout::Long);
    std::vector<std::string> outputs;
    bool ok = true;
    for (const char* threads : {"1", "1", "8"}) {
        const auto out = dir / ("run" + std::to_string(outputs.size()));
        std::ostringstream sink;
        const int code = cli::run({"test", "--input", input.string(), "--B", "1000", "--seed", "17", "--threads",
                                   threads, "--out", out.string()},
                                  sink, sink);
        ok = ok && code == 0;
        outputs.push_back(slurp(out / "result.json"));
    }
    std::filesystem::remove_all(dir);
    const bool same = ok && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    return {same, "result.json of two single-thread runs and one 8-thread run " +
                      std::string(same ? "byte-identical" : "differ or failed")};
}

Verdict kernel_constants() {
    const SmoothingKernel k;
    const int n = 200001;
    const double step = 2.0 / (n - 1);
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = -1.0 + i * step;
        integral += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * k(z) * k(z);
    }
    integral *= step;
    const double lam = lambda_correction(0.25);
    const double gap = std::abs(lam - std::sqrt(2.0 * std::log(2.0)));
    return {std::abs(integral - 0.6) <= 1e-6 && integral > 0.5 && gap <= 1e-12,
            "int K^2 = " + fmt(integral, 10) + ", |lambda(1/4) - sqrt(2 log 2)| = " + fmt(gap, 3)};
}

}  // namespace

int main() {
    const Grid grid = build_grid_application(kT);
    struct Criterion {
        int id;
        std::string name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "size control", [&] { return size_control(grid); }},
        {2, "FWER control", [&] { return fwer_control(grid); }},
        {3, "power", [&] { return power(grid); }},
        {4, "cluster recovery", [&] { return cluster_recovery(grid); }},
        {5, "oracle equivalence", [] { return oracle_equivalence(); }},
        {6, "statistic identity", [&] { return statistic_identity(grid); }},
        {7, "Gaussian pivot sanity", [] { return pivot_sanity(); }},
        {8, "determinism", [] { return determinism(); }},
        {9, "kernel constants", [] { return kernel_constants(); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.detail
                  << " [" << fmt(secs, 3) << " s]" << std::endl;
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
