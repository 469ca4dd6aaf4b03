#pragma once

#include "oracles.hpp"
#include "panelms/panel.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testing_helpers {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = normal(rng);
        }
    }
    return m;
}

/// Random panel with an intercept column and D - 1 standard normal covariates.
inline panelms::Panel random_panel(std::mt19937_64& rng, std::size_t N, std::size_t T, std::size_t D) {
    Eigen::MatrixXd x = random_matrix(rng, static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(D));
    x.col(0).setOnes();
    return panelms::Panel(random_matrix(rng, static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(T)), x);
}

inline oracle::Mat to_mat(const Eigen::MatrixXd& m) {
    oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

inline double max_rel_diff(const Eigen::MatrixXd& a, const oracle::Mat& b) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            const double o = b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            worst = std::max(worst, std::abs(a(r, c) - o) / std::max(1.0, std::abs(o)));
        }
    }
    return worst;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("panelms_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace testing_helpers
