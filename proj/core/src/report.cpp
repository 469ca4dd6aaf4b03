#include "panelms/report.hpp"

#include "panelms/csv.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace panelms {

using Json = nlohmann::ordered_json;

namespace {

Json rejection_json(const Rejection& r) {
    return Json{{"i", r.i + 1}, {"j", r.j + 1}, {"u", r.u}, {"h", r.h}, {"stat", r.stat}, {"exceedance", r.exceedance}};
}

Json rejections_json(const std::vector<Rejection>& rejections) {
    Json out = Json::array();
    for (const auto& r : rejections) {
        out.push_back(rejection_json(r));
    }
    return out;
}

Json hac_json(const HacConfig& hac, std::size_t T) {
    return Json{{"kernel", std::string(cov_kernel_name(hac.cov_kernel))},
                {"bandwidth", hac.resolved_bandwidth(T)},
                {"pilot_h", hac.pilot_bandwidth},
                {"pooled", hac.pooled}};
}

Json rate_json(const RateEstimate& r) { return Json{{"rate", r.rate}, {"se", r.se}}; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string result_json(const TestResult& result, const Grid& grid, const RunMetadata& meta) {
    Json j;
    j["schema_version"] = kResultSchemaVersion;
    j["psi_hat"] = result.psi_hat;
    j["q_alpha"] = result.q_alpha;
    j["alpha"] = result.alpha;
    j["B"] = meta.B;
    j["seed"] = meta.seed;
    j["reject_global"] = result.reject_global;
    j["N"] = meta.labels.size();
    j["T"] = meta.T;
    j["D"] = meta.D;
    j["labels"] = meta.labels;
    j["kernel"] = std::string(meta.kernel.name());
    j["hac"] = hac_json(meta.hac, meta.T);
    Json points = Json::array();
    for (const auto& p : grid.points()) {
        points.push_back(Json::array({p.u, p.h}));
    }
    j["grid"] = Json{{"kind", meta.grid_kind}, {"h_min", grid.h_min()}, {"size", grid.size()}, {"points", points}};
    j["rejections"] = rejections_json(result.rejections);
    j["minimal_rejections"] = rejections_json(result.minimal_rejections.value_or(std::vector<Rejection>{}));
    Json diags = Json::array();
    for (const auto& d : meta.diagnostics) {
        diags.push_back(Json{{"u", d.u}, {"h", d.h}, {"message", d.message}});
    }
    j["diagnostics"] = diags;
    return dump(j);
}

std::string rejections_csv(const std::vector<Rejection>& rejections) {
    std::ostringstream out;
    out << "i,j,u,h,stat,exceedance\n";
    for (const auto& r : rejections) {
        out << r.i + 1 << ',' << r.j + 1 << ',' << format_double(r.u) << ',' << format_double(r.h) << ','
            << format_double(r.stat) << ',' << format_double(r.exceedance) << '\n';
    }
    return out.str();
}

std::string curve_csv(const CoefficientCurve& curve) {
    std::ostringstream out;
    out << "u";
    for (Eigen::Index d = 0; d < curve.values.cols(); ++d) {
        out << ",beta_" << d + 1;
    }
    out << '\n';
    for (std::size_t r = 0; r < curve.locations.size(); ++r) {
        out << format_double(curve.locations[r]);
        for (Eigen::Index d = 0; d < curve.values.cols(); ++d) {
            const double v = curve.values(static_cast<Eigen::Index>(r), d);
            out << ',';
            if (std::isfinite(v)) {
                out << format_double(v);
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string membership_csv(const ClusterResult& result, const std::vector<std::string>& labels) {
    std::ostringstream out;
    out << "unit,label\n";
    for (std::size_t i = 0; i < result.membership.size(); ++i) {
        out << labels.at(i) << ',' << result.membership[i] << '\n';
    }
    return out.str();
}

std::string dendrogram_json(const ClusterResult& result, const std::vector<std::string>& labels) {
    Json merges = Json::array();
    for (const auto& m : result.dendrogram.merges) {
        merges.push_back(Json{{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
    }
    Json j;
    j["schema_version"] = kResultSchemaVersion;
    j["linkage"] = std::string(linkage_name(result.dendrogram.linkage));
    j["labels"] = labels;
    j["q_alpha"] = result.q_alpha;
    j["k_hat"] = result.k_hat;
    j["max_within"] = std::isfinite(result.max_within) ? Json(result.max_within) : Json(nullptr);
    j["membership"] = result.membership;
    j["merges"] = merges;
    return dump(j);
}

std::string group_intervals_csv(const GroupDifferenceReport& report) {
    std::ostringstream out;
    out << "group_a,group_b,u,h,lower,upper\n";
    for (const auto& pair : report.pairs) {
        for (const auto& iv : pair.intervals) {
            out << pair.group_a << ',' << pair.group_b << ',' << format_double(iv.u) << ',' << format_double(iv.h)
                << ',' << format_double(iv.lower) << ',' << format_double(iv.upper) << '\n';
        }
    }
    return out.str();
}

std::string experiment_json(const ExperimentReport& report, const ExperimentConfig& config) {
    Json j;
    j["schema_version"] = kResultSchemaVersion;
    j["experiment"] = report.kind;
    j["replications"] = report.replications;
    j["alpha"] = report.alpha;
    j["B"] = report.B;
    j["q_alpha"] = report.q_alpha;
    j["seed"] = config.dgp.seed;
    j["critical_seed"] = config.options.critical_seed;
    j["N"] = config.dgp.N;
    j["T"] = config.dgp.T;
    j["D"] = config.dgp.D;
    j["ar"] = config.dgp.ar;
    j["sigma"] = config.dgp.sigma;
    j["covariates"] = covariate_model_name(config.dgp.covariates);
    j["kernel"] = std::string(config.options.kernel.name());
    j["hac"] = hac_json(config.options.hac, config.dgp.T);
    j["rejection_rate"] = rate_json(report.rejection);
    j["fwer_estimate"] = report.fwer ? rate_json(*report.fwer) : Json(nullptr);
    j["cluster_recovery_rate"] = report.cluster_recovery ? rate_json(*report.cluster_recovery) : Json(nullptr);
    j["k_correct_rate"] = report.k_correct ? rate_json(*report.k_correct) : Json(nullptr);
    Json curve = Json::array();
    for (const auto& p : report.power_curve) {
        curve.push_back(Json{{"scale", p.scale},
                             {"rejection_rate", rate_json(p.rejection)},
                             {"pair_detection_rate", rate_json(p.pair_detection)}});
    }
    j["power_curve"] = curve;
    return dump(j);
}

std::string replications_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "replication,psi_hat,reject_global,n_rejections,false_rejection,k_hat,partition_recovered\n";
    for (const auto& r : report.records) {
        out << r.replication << ',' << format_double(r.psi_hat) << ',' << int{r.reject_global} << ','
            << r.n_rejections << ',' << int{r.false_rejection} << ',' << r.k_hat << ',' << int{r.partition_recovered}
            << '\n';
    }
    return out.str();
}

std::string power_curve_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "scale,rejection_rate,rejection_se,pair_detection_rate,pair_detection_se\n";
    for (const auto& p : report.power_curve) {
        out << format_double(p.scale) << ',' << format_double(p.rejection.rate) << ','
            << format_double(p.rejection.se) << ',' << format_double(p.pair_detection.rate) << ','
            << format_double(p.pair_detection.se) << '\n';
    }
    return out.str();
}

}  // namespace panelms
