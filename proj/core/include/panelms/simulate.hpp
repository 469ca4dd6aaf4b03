#pragma once

#include "panelms/cluster.hpp"
#include "panelms/critvals.hpp"
#include "panelms/grid.hpp"
#include "panelms/kernel.hpp"
#include "panelms/lrv.hpp"
#include "panelms/panel.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace panelms {

/**
 * One additive piece of a coefficient curve on [0, 1].
 *
 *   Constant(c)                       c
 *   Linear(a, b)                      a + b u
 *   Sine(amp, freq, phase)            amp sin(2 pi freq u + phase)
 *   Bump(center, width, height, ramp) height on [center - width, center + width],
 *                                     linear ramps to 0 over `ramp` on each side
 */
struct CurveTerm {
    enum class Kind { Constant, Linear, Sine, Bump };
    Kind kind = Kind::Constant;
    std::array<double, 4> params{};

    static CurveTerm constant(double c);
    static CurveTerm linear(double intercept, double slope);
    static CurveTerm sine(double amplitude, double frequency, double phase);
    static CurveTerm bump(double center, double width, double height, double ramp = 0.05);

    double operator()(double u) const noexcept;
    friend bool operator==(const CurveTerm&, const CurveTerm&) = default;
};

/// Sum of terms; Lipschitz by construction.
struct Curve {
    std::vector<CurveTerm> terms;

    double operator()(double u) const noexcept;
    Curve plus(const CurveTerm& term) const;
};

/// One curve per covariate coordinate.
struct CoefficientFunction {
    std::vector<Curve> coords;

    std::size_t dimension() const noexcept { return coords.size(); }
};

/**
 * Whether f and g coincide on [lo, hi], decided analytically from the term
 * lists: constants and linear terms are merged, identical terms cancel, and
 * leftover bumps count as zero when their support misses the interval. Any
 * other leftover term is treated as a difference.
 */
bool curves_equal_on(const Curve& f, const Curve& g, double lo, double hi);
bool functions_equal_on(const CoefficientFunction& f, const CoefficientFunction& g, double lo, double hi);

enum class CovariateModel { InterceptPlusAr1, IidNormal };

CovariateModel covariate_model_from_name(const std::string& name);
std::string covariate_model_name(CovariateModel model);

/**
 * Synthetic panel Y_it = X_t' beta_i(t/T) + e_it with AR(1) errors
 * e_it = a e_i,t-1 + sigma eta_it (stationary start), independent across units.
 *
 * Covariates: InterceptPlusAr1 gives X_t = (1, xi_2t, ..., xi_Dt) with
 * independent stationary AR(1) xi of coefficient covariate_ar and unit
 * innovations; IidNormal draws every coordinate i.i.d. N(0, 1).
 */
struct DgpSpec {
    std::size_t N = 0;
    std::size_t T = 0;
    std::size_t D = 0;
    std::vector<CoefficientFunction> unit_curves;
    std::optional<std::vector<std::size_t>> group_assignment;  // 1-based group per unit
    double ar = 0.0;
    double sigma = 1.0;
    CovariateModel covariates = CovariateModel::InterceptPlusAr1;
    double covariate_ar = 0.3;
    std::uint64_t seed = 0;

    /// Throws PreconditionError on inconsistent sizes or |ar| >= 1.
    void validate() const;
};

struct SimulatedPanel {
    Panel panel;
    std::vector<CoefficientFunction> truth;
    std::optional<std::vector<std::size_t>> groups;
};

/// Replication r draws from streams keyed by (seed, r); identical inputs give
/// bit-identical panels.
SimulatedPanel generate_panel(const DgpSpec& spec, std::size_t replication = 0);

/// True when H0^{[i,j]}(u, h) holds for the analytic curves.
bool local_null_holds(const std::vector<CoefficientFunction>& truth, std::size_t i, std::size_t j,
                      const GridPoint& point);

/// Height c sqrt(log T / (T h)) of the local-alternative separation.
double separation_scale(std::size_t T, double h, double c);

struct ExperimentOptions {
    double alpha = 0.05;
    std::size_t B = kDefaultMonteCarloDraws;
    std::size_t R = 100;
    SmoothingKernel kernel{};
    HacConfig hac{};
    std::uint64_t critical_seed = 0;
    std::size_t threads = 0;
};

struct RateEstimate {
    double rate = 0.0;
    double se = 0.0;
};

/// Binomial proportion and its standard error sqrt(p(1-p)/n).
RateEstimate binomial_rate(std::size_t successes, std::size_t n);

struct PowerPoint {
    double scale = 0.0;
    RateEstimate rejection;
    RateEstimate pair_detection;
};

struct ReplicationRecord {
    std::size_t replication = 0;
    double psi_hat = 0.0;
    bool reject_global = false;
    std::size_t n_rejections = 0;
    bool false_rejection = false;
    std::size_t k_hat = 0;
    bool partition_recovered = false;
};

struct ExperimentReport {
    std::string kind;
    std::size_t replications = 0;
    double alpha = 0.0;
    std::size_t B = 0;
    double q_alpha = 0.0;
    RateEstimate rejection;
    std::optional<RateEstimate> fwer;
    std::optional<RateEstimate> cluster_recovery;
    std::optional<RateEstimate> k_correct;
    std::vector<PowerPoint> power_curve;
    std::vector<ReplicationRecord> records;
    double runtime_seconds = 0.0;
};

/// Planted deviation for power experiments: `unit` gets scale * bump added
/// on coordinate `coordinate` (both 0-based).
struct PowerDeviation {
    std::size_t unit = 0;
    std::size_t coordinate = 0;
    CurveTerm bump;
};

/// Gaussian draws are simulated once and shared by every replication, since
/// their distribution does not depend on the data.
CriticalValue experiment_critical_value(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options);

ExperimentReport run_size_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options);

ExperimentReport run_power_experiment(const DgpSpec& spec, const Grid& grid, const PowerDeviation& deviation,
                                      const std::vector<double>& scales, const ExperimentOptions& options);

ExperimentReport run_fwer_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options);

/// Needs spec.group_assignment; counts replications with K_hat = K0 and the
/// exact partition recovered (complete linkage, no override).
ExperimentReport run_cluster_experiment(const DgpSpec& spec, const Grid& grid, const ExperimentOptions& options);

}  // namespace panelms
