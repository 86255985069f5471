#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diffwave/diffwave.hpp"

namespace dwtest {

using diffwave::Index;
using diffwave::TriangleMesh;

inline TriangleMesh right_triangle() {
    Eigen::MatrixX3d V(3, 3);
    V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    Eigen::MatrixX3i F(1, 3);
    F << 0, 1, 2;
    return TriangleMesh(V, F);
}

inline TriangleMesh regular_tetrahedron() {
    Eigen::MatrixX3d V(4, 3);
    V << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    Eigen::MatrixX3i F(4, 3);
    F << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
    return TriangleMesh(V, F);
}

/// Unit-width strip of 2 * (len + 1) vertices along x: vertex 2i = (i, 0), 2i+1 = (i, 1).
inline TriangleMesh strip(int len) {
    Eigen::MatrixX3d V(2 * (len + 1), 3);
    for (int i = 0; i <= len; ++i) {
        V.row(2 * i) << i, 0, 0;
        V.row(2 * i + 1) << i, 1, 0;
    }
    Eigen::MatrixX3i F(2 * len, 3);
    for (int i = 0; i < len; ++i) {
        F.row(2 * i) << 2 * i, 2 * i + 2, 2 * i + 3;
        F.row(2 * i + 1) << 2 * i, 2 * i + 3, 2 * i + 1;
    }
    return TriangleMesh(V, F);
}

/// Jittered icosphere scaled to unit area.
inline TriangleMesh unit_sphere(int level, double jitter = 0.2, std::uint64_t seed = 7) {
    auto mesh = diffwave::shapes::icosphere(level);
    if (jitter > 0.0) mesh = diffwave::shapes::jitter(mesh, jitter, seed);
    return diffwave::normalize_unit_area(mesh).first;
}

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
    return m;
}

/// Collects warnings for the lifetime of the object.
class WarningCapture {
public:
    WarningCapture() {
        previous_ = diffwave::set_warning_sink([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningCapture() { diffwave::set_warning_sink(previous_); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::vector<std::string> messages;

private:
    diffwave::WarningSink previous_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() / ("diffwave_test_" + name);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace dwtest
