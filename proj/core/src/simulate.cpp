#include "panelms/simulate.hpp"

#include "panelms/error.hpp"
#include "panelms/multiscale.hpp"
#include "panelms/parallel.hpp"
#include "panelms/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace panelms {

CurveTerm CurveTerm::constant(double c) { return CurveTerm{Kind::Constant, {c, 0.0, 0.0, 0.0}}; }

CurveTerm CurveTerm::linear(double intercept, double slope) {
    return CurveTerm{Kind::Linear, {intercept, slope, 0.0, 0.0}};
}

CurveTerm CurveTerm::sine(double amplitude, double frequency, double phase) {
    return CurveTerm{Kind::Sine, {amplitude, frequency, phase, 0.0}};
}

CurveTerm CurveTerm::bump(double center, double width, double height, double ramp) {
    if (!(width >= 0.0) || !(ramp > 0.0)) {
        throw PreconditionError("bump: need width >= 0 and ramp > 0");
    }
    return CurveTerm{Kind::Bump, {center, width, height, ramp}};
}

double CurveTerm::operator()(double u) const noexcept {
    const auto& p = params;
    switch (kind) {
        case Kind::Constant:
            return p[0];
        case Kind::Linear:
            return p[0] + p[1] * u;
        case Kind::Sine:
            return p[0] * std::sin(2.0 * std::numbers::pi * p[1] * u + p[2]);
        case Kind::Bump: {
            const double dist = std::abs(u - p[0]) - p[1];
            if (dist <= 0.0) {
                return p[2];
            }
            return dist >= p[3] ? 0.0 : p[2] * (1.0 - dist / p[3]);
        }
    }
    return 0.0;
}

double Curve::operator()(double u) const noexcept {
    double v = 0.0;
    for (const auto& term : terms) {
        v += term(u);
    }
    return v;
}

Curve Curve::plus(const CurveTerm& term) const {
    Curve out = *this;
    out.terms.push_back(term);
    return out;
}

namespace {

bool is_zero_term(const CurveTerm& t) {
    switch (t.kind) {
        case CurveTerm::Kind::Constant:
            return t.params[0] == 0.0;
        case CurveTerm::Kind::Linear:
            return t.params[0] == 0.0 && t.params[1] == 0.0;
        case CurveTerm::Kind::Sine:
            return t.params[0] == 0.0;
        case CurveTerm::Kind::Bump:
            return t.params[2] == 0.0;
    }
    return false;
}

// Polynomial part merged into one linear term; remaining terms kept as is.
std::vector<CurveTerm> canonical(const Curve& c) {
    double a = 0.0;
    double b = 0.0;
    std::vector<CurveTerm> rest;
    for (const auto& t : c.terms) {
        if (t.kind == CurveTerm::Kind::Constant) {
            a += t.params[0];
        } else if (t.kind == CurveTerm::Kind::Linear) {
            a += t.params[0];
            b += t.params[1];
        } else if (!is_zero_term(t)) {
            rest.push_back(t);
        }
    }
    rest.push_back(CurveTerm::linear(a, b));
    return rest;
}

bool vanishes_on(const CurveTerm& t, double lo, double hi) {
    if (is_zero_term(t)) {
        return true;
    }
    if (t.kind != CurveTerm::Kind::Bump) {
        return false;
    }
    const double reach = t.params[1] + t.params[3];
    return hi <= t.params[0] - reach || lo >= t.params[0] + reach;
}

}  // namespace

bool curves_equal_on(const Curve& f, const Curve& g, double lo, double hi) {
    auto left = canonical(f);
    auto right = canonical(g);
    // Cancel identical terms pairwise.
    for (auto it = left.begin(); it != left.end();) {
        auto match = std::find(right.begin(), right.end(), *it);
        if (match != right.end()) {
            right.erase(match);
            it = left.erase(it);
        } else {
            ++it;
        }
    }
    const auto zero = [&](const CurveTerm& t) { return vanishes_on(t, lo, hi); };
    if (!std::all_of(left.begin(), left.end(), zero) || !std::all_of(right.begin(), right.end(), zero)) {
        if (lo == hi) {
            return f(lo) == g(lo);
        }
        return false;
    }
    return true;
}

bool functions_equal_on(const CoefficientFunction& f, const CoefficientFunction& g, double lo, double hi) {
    if (f.dimension() != g.dimension()) {
        return false;
    }
    for (std::size_t d = 0; d < f.dimension(); ++d) {
        if (!curves_equal_on(f.coords[d], g.coords[d], lo, hi)) {
            return false;
        }
    }
    return true;
}

CovariateModel covariate_model_from_name(const std::string& name) {
    if (name == "intercept_plus_ar1") {
        return CovariateModel::InterceptPlusAr1;
    }
    if (name == "iid_normal") {
        return CovariateModel::IidNormal;
    }
    throw InputError("unknown covariate model '" + name + "' (expected intercept_plus_ar1 or iid_normal)");
}

std::string covariate_model_name(CovariateModel model) {
    return model == CovariateModel::IidNormal ? "iid_normal" : "intercept_plus_ar1";
}

void DgpSpec::validate() const {
    if (N < 1 || T < 2 || D < 1) {
        throw PreconditionError("DgpSpec: need N >= 1, T >= 2 and D >= 1");
    }
    if (unit_curves.size() != N) {
        throw PreconditionError("DgpSpec: expected " + std::to_string(N) + " unit curves, got " +
                                std::to_string(unit_curves.size()));
    }
    for (std::size_t i = 0; i < N; ++i) {
        if (unit_curves[i].dimension() != D) {
            throw PreconditionError("DgpSpec: unit " + std::to_string(i + 1) + " has " +
                                    std::to_string(unit_curves[i].dimension()) + " coordinates, expected " +
                                    std::to_string(D));
        }
    }
    if (group_assignment && group_assignment->size() != N) {
        throw PreconditionError("DgpSpec: group assignment must have one entry per unit");
    }
    if (!(std::abs(ar) < 1.0)) {
        throw PreconditionError("DgpSpec: AR coefficient must satisfy |a| < 1, got " + std::to_string(ar));
    }
    if (!(std::abs(covariate_ar) < 1.0)) {
        throw PreconditionError("DgpSpec: covariate AR coefficient must satisfy |a| < 1");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw PreconditionError("DgpSpec: innovation sd must be finite and nonnegative");
    }
}

namespace {

constexpr std::uint32_t kCovariateStream = 11;
constexpr std::uint32_t kErrorStream = 12;

std::uint64_t replication_seed(std::uint64_t seed, std::size_t r) {
    return mix64(seed ^ mix64(static_cast<std::uint64_t>(r) + 0x632BE59BD9B4E019ULL));
}

}  // namespace

SimulatedPanel generate_panel(const DgpSpec& spec, std::size_t replication) {
    spec.validate();
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto D = static_cast<Eigen::Index>(spec.D);
    const auto N = static_cast<Eigen::Index>(spec.N);
    const std::uint64_t seed = replication_seed(spec.seed, replication);
    const auto xkey = derive_key(seed, kCovariateStream);
    const auto ekey = derive_key(seed, kErrorStream);

    Eigen::MatrixXd x(T, D);
    if (spec.covariates == CovariateModel::IidNormal) {
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index d = 0; d < D; ++d) {
                x(t, d) = normal_at(xkey, 0, static_cast<std::uint32_t>(t), 0, static_cast<std::uint32_t>(d));
            }
        }
    } else {
        const double phi = spec.covariate_ar;
        const double start_sd = 1.0 / std::sqrt(1.0 - phi * phi);
        x.col(0).setOnes();
        for (Eigen::Index d = 1; d < D; ++d) {
            for (Eigen::Index t = 0; t < T; ++t) {
                const double eta =
                    normal_at(xkey, 0, static_cast<std::uint32_t>(t), 0, static_cast<std::uint32_t>(d));
                x(t, d) = t == 0 ? start_sd * eta : phi * x(t - 1, d) + eta;
            }
        }
    }

    Eigen::MatrixXd y(N, T);
    const double a = spec.ar;
    const double start_sd = spec.sigma / std::sqrt(1.0 - a * a);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto& beta = spec.unit_curves[static_cast<std::size_t>(i)];
        double e = 0.0;
        for (Eigen::Index t = 0; t < T; ++t) {
            const double eta = normal_at(ekey, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(t), 0, 0);
            e = t == 0 ? start_sd * eta : a * e + spec.sigma * eta;
            const double u = static_cast<double>(t + 1) / static_cast<double>(spec.T);
            double mean = 0.0;
            for (Eigen::Index d = 0; d < D; ++d) {
                mean += x(t, d) * beta.coords[static_cast<std::size_t>(d)](u);
            }
            y(i, t) = mean + e;
        }
    }
    return SimulatedPanel{Panel(std::move(y), std::move(x)), spec.unit_curves, spec.group_assignment};
}

bool local_null_holds(const std::vector<CoefficientFunction>& truth, std::size_t i, std::size_t j,
                      const GridPoint& point) {
    return functions_equal_on(truth.at(i), truth.at(j), point.u - point.h, point.u + point.h);
}

double separation_scale(std::size_t T, double h, double c) {
    const double t = static_cast<double>(T);
    return c * std::sqrt(std::log(t) / (t * h));
}

RateEstimate binomial_rate(std::size_t successes, std::size_t n) {
    if (n == 0) {
        return {};
    }
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    return RateEstimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

CriticalValue experiment_critical_value(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options) {
    auto draws = simulate_phi(spec.T, spec.N, spec.D, grid, options.kernel, options.B, options.critical_seed,
                              options.threads);
    auto crit = critical_value(draws, options.alpha, options.critical_seed);
    crit.phi_draws = std::move(draws);
    return crit;
}

namespace {

void check_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options) {
    spec.validate();
    if (spec.N < 2) {
        throw PreconditionError("experiments need N >= 2");
    }
    if (grid.T() != spec.T) {
        throw PreconditionError("experiment grid was built for another T");
    }
    if (options.R < 1) {
        throw PreconditionError("experiments need R >= 1");
    }
}

struct Outcome {
    TestResult result;
    LocalStatTable table;
};

Outcome replicate(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options, double q,
                  std::size_t r) {
    const auto sim = generate_panel(spec, r);
    const auto sigmas = estimate_long_run(sim.panel, options.kernel, options.hac);
    const auto normalizers = build_normalizers(sigmas);
    auto table = compute_local_stats(sim.panel, options.kernel, grid, normalizers, 1);
    auto result = evaluate_test(table, q, options.alpha);
    return Outcome{std::move(result), std::move(table)};
}

bool false_rejection(const TestResult& result, const std::vector<CoefficientFunction>& truth, const Grid& grid) {
    return std::any_of(result.rejections.begin(), result.rejections.end(), [&](const Rejection& rej) {
        return local_null_holds(truth, rej.i, rej.j, grid[rej.grid_index]);
    });
}

ExperimentReport base_report(const std::string& kind, const ExperimentOptions& options, const CriticalValue& crit) {
    ExperimentReport report;
    report.kind = kind;
    report.replications = options.R;
    report.alpha = options.alpha;
    report.B = options.B;
    report.q_alpha = crit.q;
    return report;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<ReplicationRecord> run_replications(const DgpSpec& spec, const Grid& grid,
                                                const ExperimentOptions& options, double q) {
    std::vector<ReplicationRecord> records(options.R);
    parallel_for(options.R, options.threads, [&](std::size_t r) {
        const auto out = replicate(spec, grid, options, q, r);
        auto& rec = records[r];
        rec.replication = r;
        rec.psi_hat = out.result.psi_hat;
        rec.reject_global = out.result.reject_global;
        rec.n_rejections = out.result.rejections.size();
        rec.false_rejection = false_rejection(out.result, spec.unit_curves, grid);
    });
    return records;
}

std::size_t count_if_records(const std::vector<ReplicationRecord>& records, bool ReplicationRecord::*field) {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const ReplicationRecord& r) { return r.*field; }));
}

}  // namespace

ExperimentReport run_size_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options) {
    check_experiment(spec, grid, options);
    for (std::size_t i = 1; i < spec.N; ++i) {
        if (!functions_equal_on(spec.unit_curves[0], spec.unit_curves[i], 0.0, 1.0)) {
            throw PreconditionError("size experiment: every unit must share one coefficient curve");
        }
    }
    const auto start = std::chrono::steady_clock::now();
    const auto crit = experiment_critical_value(spec, grid, options);
    auto report = base_report("size", options, crit);
    report.records = run_replications(spec, grid, options, crit.q);
    report.rejection = binomial_rate(count_if_records(report.records, &ReplicationRecord::reject_global), options.R);
    report.runtime_seconds = seconds_since(start);
    return report;
}

ExperimentReport run_fwer_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options) {
    check_experiment(spec, grid, options);
    const auto start = std::chrono::steady_clock::now();
    const auto crit = experiment_critical_value(spec, grid, options);
    auto report = base_report("fwer", options, crit);
    report.records = run_replications(spec, grid, options, crit.q);
    report.rejection = binomial_rate(count_if_records(report.records, &ReplicationRecord::reject_global), options.R);
    report.fwer = binomial_rate(count_if_records(report.records, &ReplicationRecord::false_rejection), options.R);
    report.runtime_seconds = seconds_since(start);
    return report;
}

ExperimentReport run_power_experiment(const DgpSpec& spec, const Grid& grid, const PowerDeviation& deviation,
                                      const std::vector<double>& scales, const ExperimentOptions& options) {
    check_experiment(spec, grid, options);
    if (deviation.unit >= spec.N || deviation.coordinate >= spec.D) {
        throw PreconditionError("power experiment: deviation unit or coordinate out of range");
    }
    if (deviation.bump.kind != CurveTerm::Kind::Bump) {
        throw PreconditionError("power experiment: the planted deviation must be a bump");
    }
    if (scales.empty()) {
        throw PreconditionError("power experiment: need at least one scale");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto crit = experiment_critical_value(spec, grid, options);
    auto report = base_report("power", options, crit);

    for (const double scale : scales) {
        DgpSpec planted = spec;
        CurveTerm bump = deviation.bump;
        bump.params[2] *= scale;
        auto& coord = planted.unit_curves[deviation.unit].coords[deviation.coordinate];
        coord = coord.plus(bump);

        // Same replication streams for every scale.
        std::vector<ReplicationRecord> records(options.R);
        std::vector<char> detected(options.R, 0);
        parallel_for(options.R, options.threads, [&](std::size_t r) {
            const auto out = replicate(planted, grid, options, crit.q, r);
            auto& rec = records[r];
            rec.replication = r;
            rec.psi_hat = out.result.psi_hat;
            rec.reject_global = out.result.reject_global;
            rec.n_rejections = out.result.rejections.size();
            rec.false_rejection = false_rejection(out.result, planted.unit_curves, grid);
            // A planted pair joins the deviating unit with a unit it now differs from.
            detected[r] = std::any_of(out.result.rejections.begin(), out.result.rejections.end(),
                                      [&](const Rejection& rej) {
                                          return (rej.i == deviation.unit || rej.j == deviation.unit) &&
                                                 !local_null_holds(planted.unit_curves, rej.i, rej.j,
                                                                   grid[rej.grid_index]);
                                      });
        });
        PowerPoint point;
        point.scale = scale;
        point.rejection = binomial_rate(count_if_records(records, &ReplicationRecord::reject_global), options.R);
        point.pair_detection =
            binomial_rate(static_cast<std::size_t>(std::count(detected.begin(), detected.end(), 1)), options.R);
        report.power_curve.push_back(point);
        if (scale == scales.back()) {
            report.records = std::move(records);
            report.rejection = point.rejection;
        }
    }
    report.runtime_seconds = seconds_since(start);
    return report;
}

namespace {

// Same partition up to relabeling.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

ExperimentReport run_cluster_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options) {
    check_experiment(spec, grid, options);
    if (!spec.group_assignment) {
        throw PreconditionError("cluster experiment: the spec needs a group assignment");
    }
    const auto& truth = *spec.group_assignment;
    std::vector<std::size_t> distinct = truth;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t k0 = distinct.size();

    const auto start = std::chrono::steady_clock::now();
    const auto crit = experiment_critical_value(spec, grid, options);
    auto report = base_report("cluster", options, crit);
    report.records.resize(options.R);
    parallel_for(options.R, options.threads, [&](std::size_t r) {
        const auto out = replicate(spec, grid, options, crit.q, r);
        const auto d = dissimilarity_matrix(out.table);
        const auto clusters = select_k(hac_cluster(d, Linkage::Complete), d, crit.q);
        auto& rec = report.records[r];
        rec.replication = r;
        rec.psi_hat = out.result.psi_hat;
        rec.reject_global = out.result.reject_global;
        rec.n_rejections = out.result.rejections.size();
        rec.false_rejection = false_rejection(out.result, spec.unit_curves, grid);
        rec.k_hat = clusters.k_hat;
        rec.partition_recovered = clusters.k_hat == k0 && same_partition(clusters.membership, truth);
    });
    report.rejection = binomial_rate(count_if_records(report.records, &ReplicationRecord::reject_global), options.R);
    report.fwer = binomial_rate(count_if_records(report.records, &ReplicationRecord::false_rejection), options.R);
    report.cluster_recovery =
        binomial_rate(count_if_records(report.records, &ReplicationRecord::partition_recovered), options.R);
    const auto k_right = static_cast<std::size_t>(std::count_if(
        report.records.begin(), report.records.end(), [&](const ReplicationRecord& rec) { return rec.k_hat == k0; }));
    report.k_correct = binomial_rate(k_right, options.R);
    report.runtime_seconds = seconds_since(start);
    return report;
}

}  // namespace panelms
