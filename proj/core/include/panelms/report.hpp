#pragma once

#include "panelms/cluster.hpp"
#include "panelms/estimate.hpp"
#include "panelms/multiscale.hpp"
#include "panelms/sim_config.hpp"
#include "panelms/simulate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace panelms {

inline constexpr int kResultSchemaVersion = 1;

/// Run settings echoed into result.json for auditability.
struct RunMetadata {
    std::size_t B = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;
    std::size_t T = 0;
    std::size_t D = 0;
    std::string grid_kind;
    SmoothingKernel kernel{};
    HacConfig hac{};
    std::vector<StatDiagnostic> diagnostics;
};

/// Serialized TestResult. Output depends only on its inputs; no timestamps.
std::string result_json(const TestResult& result, const Grid& grid, const RunMetadata& meta);

/// Columns i,j,u,h,stat,exceedance with 1-based unit indices.
std::string rejections_csv(const std::vector<Rejection>& rejections);

/// Columns u,beta_1..beta_D; empty cells at singular locations.
std::string curve_csv(const CoefficientCurve& curve);

/// Columns unit,label: the unit's name and its group label 1..K.
std::string membership_csv(const ClusterResult& result, const std::vector<std::string>& labels);

/// Merges in scipy linkage order plus K_hat and the membership.
std::string dendrogram_json(const ClusterResult& result, const std::vector<std::string>& labels);

/// Columns group_a,group_b,u,h,lower,upper.
std::string group_intervals_csv(const GroupDifferenceReport& report);

/// Experiment summary; runtime is left out so that fixed seeds reproduce the bytes.
std::string experiment_json(const ExperimentReport& report, const ExperimentConfig& config);

/// One row per replication.
std::string replications_csv(const ExperimentReport& report);

/// Columns scale,rejection_rate,rejection_se,pair_detection_rate,pair_detection_se.
std::string power_curve_csv(const ExperimentReport& report);

}  // namespace panelms
