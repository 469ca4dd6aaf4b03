#pragma once

#include "panelms/multiscale.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace panelms {

/// d(i, j) = max over grid points of S_ij(u, h) - lambda(h); zero diagonal.
/// Entries may be negative.
struct Dissimilarity {
    std::size_t n_units = 0;
    Eigen::MatrixXd d;
};

Dissimilarity dissimilarity_matrix(const LocalStatTable& table);

enum class Linkage { Complete, Single, Average };

Linkage linkage_from_name(std::string_view name);
std::string_view linkage_name(Linkage linkage);

/**
 * One agglomeration step. Clusters 0..N-1 are the units; merge m creates
 * cluster N + m. `left` is the merged cluster with the smaller least member.
 */
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t n_units = 0;
    Linkage linkage = Linkage::Complete;
    std::vector<Merge> merges;
};

/**
 * Agglomerative clustering with Lance-Williams updates. At each step the
 * closest pair of clusters is merged; ties go to the pair whose least
 * members (a, b), a < b, are lexicographically smallest.
 */
Dendrogram hac_cluster(const Dissimilarity& d, Linkage linkage = Linkage::Complete);

/// Labels 1..K after applying the first N - K merges; groups are numbered by
/// their smallest member index.
std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

struct ClusterResult {
    std::size_t k_hat = 1;
    std::vector<std::size_t> membership;
    Dendrogram dendrogram;
    double q_alpha = 0.0;
    /// Largest within-group dissimilarity of the chosen partition.
    double max_within = 0.0;
};

/**
 * Without override: the smallest K whose dendrogram cut keeps every
 * within-group dissimilarity at or below q_alpha. With override: exactly K
 * groups (1 <= K <= N, else PreconditionError).
 */
ClusterResult select_k(const Dendrogram& dendrogram, const Dissimilarity& d, double q_alpha,
                       std::optional<std::size_t> k_override = std::nullopt);

struct GroupInterval {
    std::size_t grid_index = 0;
    double u = 0.0;
    double h = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct GroupPairIntervals {
    std::size_t group_a = 0;  // 1-based labels, group_a < group_b
    std::size_t group_b = 0;
    std::vector<GroupInterval> intervals;
};

struct GroupDifferenceReport {
    std::vector<GroupPairIntervals> pairs;
};

/// For each pair of groups, the grid intervals where S_ij(u, h) > q_alpha
/// (strict) for some i in the first group and j in the second.
GroupDifferenceReport group_difference_intervals(const ClusterResult& result, const LocalStatTable& table,
                                                 double q_alpha);

}  // namespace panelms
