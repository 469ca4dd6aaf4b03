#include "commands.hpp"

#include "panelms/cluster.hpp"
#include "panelms/critvals.hpp"
#include "panelms/csv.hpp"
#include "panelms/error.hpp"
#include "panelms/estimate.hpp"
#include "panelms/multiscale.hpp"
#include "panelms/report.hpp"
#include "panelms/sim_config.hpp"
#include "panelms/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

namespace panelms::cli {

namespace fs = std::filesystem;

namespace {

struct AnalysisFlags {
    std::string input;
    std::string layout = "long";
    double alpha = 0.05;
    std::size_t B = kDefaultMonteCarloDraws;
    std::uint64_t seed = 1;
    std::string grid = "app";
    std::size_t u_step = 5;
    std::vector<double> h_values;
    std::optional<double> h_min;
    std::string kernel = "epanechnikov";
    std::string hac_kernel = "bartlett";
    std::optional<double> hac_bandwidth;
    double pilot_h = 0.25;
    bool pooled = false;
    std::string out = ".";
    bool emit_plot_data = false;
    std::size_t threads = 0;
    std::string cache;
    bool demean = false;
    std::size_t lead = 0;
    std::size_t deseason_lag = 0;
    std::size_t trend_degree = 1;
    std::optional<std::size_t> k;
    std::string linkage = "complete";
    std::string output_layout;
    std::string write_panel;
    std::string config;
};

void add_input_flags(CLI::App& cmd, AnalysisFlags& f) {
    cmd.add_option("--input", f.input, "Panel CSV file")->required()->envname("PANELMS_INPUT");
    cmd.add_option("--layout", f.layout, "CSV layout: long or wide")
        ->check(CLI::IsMember({"long", "wide"}))
        ->envname("PANELMS_LAYOUT");
    cmd.add_option("--lead", f.lead, "Pair y_{t+lead} with x_t")->envname("PANELMS_LEAD");
    cmd.add_option("--deseason-lag", f.deseason_lag,
                   "Replace each series by residuals of a lag-L autoregression with polynomial trend (0: off)")
        ->envname("PANELMS_DESEASON_LAG");
    cmd.add_option("--trend-degree", f.trend_degree, "Polynomial trend degree for --deseason-lag")
        ->envname("PANELMS_TREND_DEGREE");
    cmd.add_flag("--demean", f.demean, "Subtract each unit's time average")->envname("PANELMS_DEMEAN");
}

void add_analysis_flags(CLI::App& cmd, AnalysisFlags& f) {
    add_input_flags(cmd, f);
    cmd.add_option("--alpha", f.alpha, "Significance level in (0, 1)")->envname("PANELMS_ALPHA");
    cmd.add_option("--B", f.B, "Monte Carlo draws for the critical value")->envname("PANELMS_B");
    cmd.add_option("--seed", f.seed, "Seed of the Gaussian simulation")->envname("PANELMS_SEED");
    cmd.add_option("--grid", f.grid, "Grid: app or custom")
        ->check(CLI::IsMember({"app", "custom"}))
        ->envname("PANELMS_GRID");
    cmd.add_option("--u-step", f.u_step, "Custom grid: location step in units of 1/T")
        ->check(CLI::PositiveNumber)
        ->envname("PANELMS_U_STEP");
    cmd.add_option("--h", f.h_values, "Custom grid: bandwidths (multiples of 1/T)")
        ->delimiter(',')
        ->envname("PANELMS_H");
    cmd.add_option("--h-min", f.h_min, "Custom grid: lower bandwidth bound (default T^{-1/3})")
        ->envname("PANELMS_H_MIN");
    cmd.add_option("--kernel", f.kernel, "Smoothing kernel: epanechnikov, biweight or triweight")
        ->envname("PANELMS_KERNEL");
    cmd.add_option("--hac-kernel", f.hac_kernel, "Long-run covariance kernel: bartlett, parzen or qs")
        ->envname("PANELMS_HAC_KERNEL");
    cmd.add_option("--hac-bandwidth", f.hac_bandwidth, "Long-run covariance truncation (default floor(T^{1/3}))")
        ->envname("PANELMS_HAC_BANDWIDTH");
    cmd.add_option("--pilot-h", f.pilot_h, "Pilot bandwidth for residuals")->envname("PANELMS_PILOT_H");
    cmd.add_flag("--pooled-lrv", f.pooled, "Use one pooled long-run covariance")->envname("PANELMS_POOLED_LRV");
    cmd.add_option("--out", f.out, "Output directory")->envname("PANELMS_OUT");
    cmd.add_flag("--emit-plot-data", f.emit_plot_data, "Write curves_<i>.csv")->envname("PANELMS_EMIT_PLOT_DATA");
    cmd.add_option("--threads", f.threads, "Worker threads (0: PANELMS_THREADS or all cores)");
    cmd.add_option("--cache", f.cache, "Cache file for simulated Gaussian draws")->envname("PANELMS_CACHE");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << text) || !file.flush()) {
        throw InputError("cannot write '" + path.string() + "'");
    }
}

fs::path output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

Panel load_panel(const AnalysisFlags& f) {
    Panel panel = panel_from_csv(f.input, layout_from_name(f.layout));
    if (f.lead > 0) {
        panel = lead_responses(panel, f.lead);
    }
    if (f.deseason_lag > 0) {
        panel = deseasonalize_units(panel, f.deseason_lag, f.trend_degree);
    }
    if (f.demean) {
        panel = demean_units(panel);
    }
    return panel;
}

struct Analysis {
    Panel panel;
    Grid grid;
    SmoothingKernel kernel;
    HacConfig hac;
    CriticalValue crit;
    LocalStatTable table;
    TestResult result;
};

Analysis analyze(const AnalysisFlags& f) {
    if (!(f.alpha > 0.0 && f.alpha < 1.0)) {
        throw PreconditionError("--alpha must lie in (0, 1)");
    }
    Panel panel = load_panel(f);
    panel.require_pairwise();
    GridSpec spec;
    spec.application = f.grid == "app";
    spec.u_step = f.u_step;
    spec.h_values = f.h_values;
    spec.h_min = f.h_min;
    if (!spec.application && spec.h_values.empty()) {
        throw PreconditionError("--grid custom needs --h");
    }
    Grid grid = spec.build(panel.n_time());
    const SmoothingKernel kernel = kernel_from_name(f.kernel);
    HacConfig hac;
    hac.cov_kernel = cov_kernel_from_name(f.hac_kernel);
    hac.bandwidth = f.hac_bandwidth;
    hac.pilot_bandwidth = f.pilot_h;
    hac.pooled = f.pooled;

    std::optional<fs::path> cache;
    if (!f.cache.empty()) {
        cache = f.cache;
    }
    auto draws = simulate_phi_cached(panel.n_time(), panel.n_units(), panel.n_covariates(), grid, kernel, f.B,
                                     f.seed, cache, f.threads);
    CriticalValue crit = critical_value(draws, f.alpha, f.seed);
    crit.phi_draws = std::move(draws);

    const auto sigmas = estimate_long_run(panel, kernel, hac);
    const auto normalizers = build_normalizers(sigmas);
    LocalStatTable table = compute_local_stats(panel, kernel, grid, normalizers, f.threads);
    TestResult result = evaluate_test(table, crit.q, f.alpha);
    return Analysis{std::move(panel), std::move(grid), kernel, hac, std::move(crit), std::move(table),
                    std::move(result)};
}

RunMetadata metadata(const Analysis& a, const AnalysisFlags& f) {
    RunMetadata meta;
    meta.B = f.B;
    meta.seed = f.seed;
    meta.labels = a.panel.unit_labels();
    meta.T = a.panel.n_time();
    meta.D = a.panel.n_covariates();
    meta.grid_kind = f.grid;
    meta.kernel = a.kernel;
    meta.hac = a.hac;
    meta.diagnostics = a.table.diagnostics;
    return meta;
}

void write_test_artifacts(const Analysis& a, const AnalysisFlags& f, const fs::path& dir) {
    write_text(dir / "result.json", result_json(a.result, a.grid, metadata(a, f)));
    write_text(dir / "rejections.csv", rejections_csv(a.result.rejections));
    if (!f.emit_plot_data) {
        return;
    }
    // Curves at the smallest grid bandwidth over its locations.
    std::size_t s_min = a.grid[0].s;
    std::vector<double> locations;
    double h = a.grid[0].h;
    for (const auto& p : a.grid.points()) {
        if (p.s == s_min) {
            locations.push_back(p.u);
        }
    }
    for (std::size_t i = 0; i < a.panel.n_units(); ++i) {
        const auto curve = coefficient_curve(a.panel, a.kernel, i, locations, h);
        write_text(dir / ("curves_" + std::to_string(i + 1) + ".csv"), curve_csv(curve));
    }
}

int cmd_test(const AnalysisFlags& f, std::ostream& out) {
    const auto a = analyze(f);
    const auto dir = output_dir(f.out);
    write_test_artifacts(a, f, dir);
    out << "psi_hat=" << format_double(a.result.psi_hat) << " q_alpha=" << format_double(a.result.q_alpha)
        << " reject_global=" << (a.result.reject_global ? "true" : "false")
        << " rejections=" << a.result.rejections.size() << '\n';
    for (const auto& d : a.table.diagnostics) {
        out << "note: " << d.message << '\n';
    }
    return kExitOk;
}

int cmd_cluster(const AnalysisFlags& f, std::ostream& out) {
    const auto a = analyze(f);
    const auto dir = output_dir(f.out);
    write_test_artifacts(a, f, dir);
    const auto d = dissimilarity_matrix(a.table);
    const auto dendrogram = hac_cluster(d, linkage_from_name(f.linkage));
    const auto clusters = select_k(dendrogram, d, a.crit.q, f.k);
    const auto intervals = group_difference_intervals(clusters, a.table, a.crit.q);
    const auto& labels = a.panel.unit_labels();
    write_text(dir / "membership.csv", membership_csv(clusters, labels));
    write_text(dir / "dendrogram.json", dendrogram_json(clusters, labels));
    write_text(dir / "group_differences.csv", group_intervals_csv(intervals));
    out << "k_hat=" << clusters.k_hat << " q_alpha=" << format_double(a.crit.q) << '\n';
    return kExitOk;
}

int cmd_simulate(const AnalysisFlags& f, std::ostream& out) {
    auto cfg = load_experiment_config(f.config);
    cfg.options.threads = f.threads;
    const Grid grid = cfg.grid.build(cfg.dgp.T);
    ExperimentReport report;
    switch (cfg.kind) {
        case ExperimentKind::Size:
            report = run_size_experiment(cfg.dgp, grid, cfg.options);
            break;
        case ExperimentKind::Fwer:
            report = run_fwer_experiment(cfg.dgp, grid, cfg.options);
            break;
        case ExperimentKind::Power:
            report = run_power_experiment(cfg.dgp, grid, *cfg.deviation, cfg.scales, cfg.options);
            break;
        case ExperimentKind::Cluster:
            report = run_cluster_experiment(cfg.dgp, grid, cfg.options);
            break;
    }
    const auto dir = output_dir(f.out);
    write_text(dir / "experiment.json", experiment_json(report, cfg));
    write_text(dir / "replications.csv", replications_csv(report));
    if (!report.power_curve.empty()) {
        write_text(dir / "power_curve.csv", power_curve_csv(report));
    }
    out << report.kind << ": R=" << report.replications << " rejection_rate=" << format_double(report.rejection.rate)
        << " (se " << format_double(report.rejection.se) << ")";
    if (report.fwer) {
        out << " fwer=" << format_double(report.fwer->rate);
    }
    if (report.cluster_recovery) {
        out << " cluster_recovery=" << format_double(report.cluster_recovery->rate);
    }
    out << " runtime=" << report.runtime_seconds << "s\n";
    return kExitOk;
}

int cmd_preprocess(const AnalysisFlags& f, std::ostream& out) {
    const Panel panel = load_panel(f);
    const CsvLayout layout = layout_from_name(f.output_layout.empty() ? f.layout : f.output_layout);
    panel_to_csv(panel, fs::path(f.write_panel), layout);
    out << "wrote " << f.write_panel << " (N=" << panel.n_units() << ", T=" << panel.n_time()
        << ", D=" << panel.n_covariates() << ")\n";
    return kExitOk;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) {
        return "ParseError";
    }
    if (dynamic_cast<const GridError*>(&e)) {
        return "GridError";
    }
    if (dynamic_cast<const PreconditionError*>(&e)) {
        return "PreconditionError";
    }
    if (dynamic_cast<const SingularDesignError*>(&e)) {
        return "SingularDesignError";
    }
    if (dynamic_cast<const DegenerateCovarianceError*>(&e)) {
        return "DegenerateCovarianceError";
    }
    if (dynamic_cast<const RankDeficiencyError*>(&e)) {
        return "RankDeficiencyError";
    }
    if (dynamic_cast<const InputError*>(&e)) {
        return "InputError";
    }
    if (dynamic_cast<const NumericError*>(&e)) {
        return "NumericError";
    }
    return "Error";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiscale tests for equality of time-varying panel coefficients", "panelms"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    AnalysisFlags f;

    auto* test = app.add_subcommand("test", "Run the multiscale test and report rejected intervals");
    add_analysis_flags(*test, f);

    auto* cluster = app.add_subcommand("cluster", "Group units by hierarchical clustering of the test statistics");
    add_analysis_flags(*cluster, f);
    cluster->add_option("--k", f.k, "Force exactly K groups")->check(CLI::PositiveNumber)->envname("PANELMS_K");
    cluster->add_option("--linkage", f.linkage, "complete, single or average")
        ->check(CLI::IsMember({"complete", "single", "average"}))
        ->envname("PANELMS_LINKAGE");

    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a config file");
    simulate->add_option("--config", f.config, "Experiment config (key = value)")
        ->required()
        ->envname("PANELMS_CONFIG");
    simulate->add_option("--out", f.out, "Output directory")->envname("PANELMS_OUT");
    simulate->add_option("--threads", f.threads, "Worker threads (0: PANELMS_THREADS or all cores)");

    auto* preprocess = app.add_subcommand("preprocess", "Apply lead, deseasonalization and demeaning");
    add_input_flags(*preprocess, f);
    preprocess->add_option("--write-panel", f.write_panel, "Output CSV path")->required();
    preprocess->add_option("--output-layout", f.output_layout, "Layout of the written CSV (default: --layout)")
        ->check(CLI::IsMember({"long", "wide"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "panelms: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (test->parsed()) {
            return cmd_test(f, out);
        }
        if (cluster->parsed()) {
            return cmd_cluster(f, out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(f, out);
        }
        return cmd_preprocess(f, out);
    } catch (const InputError& e) {
        err << "panelms: " << error_kind(e) << ": " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericError& e) {
        err << "panelms: " << error_kind(e) << ": " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "panelms: " << error_kind(e) << ": " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace panelms::cli
