#include "panelms/cluster.hpp"

#include "panelms/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace panelms {

Dissimilarity dissimilarity_matrix(const LocalStatTable& table) {
    const auto N = static_cast<Eigen::Index>(table.n_units);
    Dissimilarity out{table.n_units, Eigen::MatrixXd::Zero(N, N)};
    for (std::size_t k = 0; k < table.pairs.size(); ++k) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < table.grid.size(); ++p) {
            best = std::max(best, table.s_hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) -
                                      table.lambda[p]);
        }
        const auto i = static_cast<Eigen::Index>(table.pairs[k].first);
        const auto j = static_cast<Eigen::Index>(table.pairs[k].second);
        out.d(i, j) = best;
        out.d(j, i) = best;
    }
    return out;
}

Linkage linkage_from_name(std::string_view name) {
    if (name == "complete") {
        return Linkage::Complete;
    }
    if (name == "single") {
        return Linkage::Single;
    }
    if (name == "average") {
        return Linkage::Average;
    }
    throw InputError("unknown linkage '" + std::string(name) + "' (expected complete, single or average)");
}

std::string_view linkage_name(Linkage linkage) {
    switch (linkage) {
        case Linkage::Complete:
            return "complete";
        case Linkage::Single:
            return "single";
        case Linkage::Average:
            return "average";
    }
    return "complete";
}

Dendrogram hac_cluster(const Dissimilarity& d, Linkage linkage) {
    const std::size_t N = d.n_units;
    if (N < 2 || d.d.rows() != static_cast<Eigen::Index>(N) || d.d.cols() != static_cast<Eigen::Index>(N)) {
        throw PreconditionError("hac_cluster: need a square dissimilarity matrix with N >= 2");
    }
    struct Active {
        std::size_t id;
        std::size_t least;
        std::size_t size;
    };
    std::vector<Active> active(N);
    for (std::size_t i = 0; i < N; ++i) {
        active[i] = Active{i, i, 1};
    }
    // dist(a, b) over slots of `active`.
    Eigen::MatrixXd dist = d.d;

    Dendrogram out{N, linkage, {}};
    out.merges.reserve(N - 1);
    while (active.size() > 1) {
        const std::size_t n = active.size();
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_key{N, N};
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const double v = dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const std::pair<std::size_t, std::size_t> key = std::minmax(active[a].least, active[b].least);
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        auto& A = active[best_a];
        auto& B = active[best_b];
        const bool a_first = A.least < B.least;
        out.merges.push_back(Merge{a_first ? A.id : B.id, a_first ? B.id : A.id, best, A.size + B.size});

        // Merged cluster takes slot best_a; slot best_b is removed.
        const auto ia = static_cast<Eigen::Index>(best_a);
        const auto ib = static_cast<Eigen::Index>(best_b);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == best_a || k == best_b) {
                continue;
            }
            const auto ik = static_cast<Eigen::Index>(k);
            const double da = dist(ia, ik);
            const double db = dist(ib, ik);
            double merged = 0.0;
            switch (linkage) {
                case Linkage::Complete:
                    merged = std::max(da, db);
                    break;
                case Linkage::Single:
                    merged = std::min(da, db);
                    break;
                case Linkage::Average:
                    merged = (static_cast<double>(A.size) * da + static_cast<double>(B.size) * db) /
                             static_cast<double>(A.size + B.size);
                    break;
            }
            dist(ia, ik) = merged;
            dist(ik, ia) = merged;
        }
        A = Active{N + out.merges.size() - 1, std::min(A.least, B.least), A.size + B.size};

        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        const Eigen::Index m = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd reduced(m - 1, m - 1);
        for (Eigen::Index r = 0, rr = 0; r < m; ++r) {
            if (r == ib) {
                continue;
            }
            for (Eigen::Index c = 0, cc = 0; c < m; ++c) {
                if (c == ib) {
                    continue;
                }
                reduced(rr, cc++) = dist(r, c);
            }
            ++rr;
        }
        dist = std::move(reduced);
    }
    return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t N = dendrogram.n_units;
    if (k < 1 || k > N) {
        throw PreconditionError("cut_dendrogram: number of groups must lie in [1, " + std::to_string(N) +
                                "], got " + std::to_string(k));
    }
    // Union-find over cluster ids 0..2N-2.
    std::vector<std::size_t> parent(2 * N - 1);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t m = 0; m < N - k; ++m) {
        const auto& merge = dendrogram.merges[m];
        const std::size_t created = N + m;
        parent[find_root(parent, merge.left)] = created;
        parent[find_root(parent, merge.right)] = created;
    }
    std::vector<std::size_t> labels(N, 0);
    std::vector<std::size_t> root_label(2 * N - 1, 0);
    std::size_t next = 1;
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t root = find_root(parent, i);
        if (root_label[root] == 0) {
            root_label[root] = next++;
        }
        labels[i] = root_label[root];
    }
    return labels;
}

namespace {

double max_within(const Dissimilarity& d, const std::vector<std::size_t>& labels) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            if (labels[i] == labels[j]) {
                worst = std::max(worst, d.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
    }
    return worst;
}

}  // namespace

ClusterResult select_k(const Dendrogram& dendrogram, const Dissimilarity& d, double q_alpha,
                       std::optional<std::size_t> k_override) {
    const std::size_t N = dendrogram.n_units;
    if (d.n_units != N) {
        throw PreconditionError("select_k: dissimilarity and dendrogram sizes differ");
    }
    ClusterResult result;
    result.dendrogram = dendrogram;
    result.q_alpha = q_alpha;
    if (k_override) {
        if (*k_override < 1 || *k_override > N) {
            throw PreconditionError("select_k: k override must lie in [1, " + std::to_string(N) + "], got " +
                                    std::to_string(*k_override));
        }
        result.k_hat = *k_override;
        result.membership = cut_dendrogram(dendrogram, result.k_hat);
        result.max_within = max_within(d, result.membership);
        return result;
    }
    for (std::size_t k = 1; k <= N; ++k) {
        auto labels = cut_dendrogram(dendrogram, k);
        const double worst = max_within(d, labels);
        // Singletons have no within-group pairs (worst = -inf).
        if (worst <= q_alpha) {
            result.k_hat = k;
            result.membership = std::move(labels);
            result.max_within = worst;
            return result;
        }
    }
    throw Error("select_k: no feasible partition (unreachable)");
}

GroupDifferenceReport group_difference_intervals(const ClusterResult& result, const LocalStatTable& table,
                                                 double q_alpha) {
    GroupDifferenceReport report;
    const std::size_t K = result.k_hat;
    if (result.membership.size() != table.n_units) {
        throw PreconditionError("group_difference_intervals: membership does not match the table");
    }
    for (std::size_t a = 1; a <= K; ++a) {
        for (std::size_t b = a + 1; b <= K; ++b) {
            GroupPairIntervals entry{a, b, {}};
            for (std::size_t p = 0; p < table.grid.size(); ++p) {
                bool differs = false;
                for (std::size_t i = 0; i < table.n_units && !differs; ++i) {
                    if (result.membership[i] != a) {
                        continue;
                    }
                    for (std::size_t j = 0; j < table.n_units && !differs; ++j) {
                        if (result.membership[j] == b) {
                            differs = table.stat(i, j, p) > q_alpha;
                        }
                    }
                }
                if (differs) {
                    const auto& point = table.grid[p];
                    entry.intervals.push_back(GroupInterval{p, point.u, point.h, point.u - point.h, point.u + point.h});
                }
            }
            report.pairs.push_back(std::move(entry));
        }
    }
    return report;
}

}  // namespace panelms
