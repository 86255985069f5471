#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "diffwave/mesh.hpp"

// Synthetic test shapes.

namespace diffwave::shapes {

/// Unit-radius sphere from a subdivided icosahedron: 10 * 4^level + 2 vertices.
inline TriangleMesh icosphere(int level) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
        {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts) v.normalize();
    std::vector<Eigen::Vector3i> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        const auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            verts.push_back((verts[a] + verts[b]).normalized());
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Eigen::Vector3i> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.emplace_back(f[0], a, c);
            next.emplace_back(f[1], b, a);
            next.emplace_back(f[2], c, b);
            next.emplace_back(a, b, c);
        }
        faces = std::move(next);
    }
    Eigen::MatrixX3d V(static_cast<Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Index>(i)) = verts[i].transpose();
    Eigen::MatrixX3i F(static_cast<Index>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) F.row(static_cast<Index>(i)) = faces[i].transpose();
    return TriangleMesh(std::move(V), std::move(F));
}

inline double mean_edge_length(const TriangleMesh& mesh) {
    double total = 0.0;
    const auto& F = mesh.faces();
    for (Index f = 0; f < F.rows(); ++f)
        for (int c = 0; c < 3; ++c) total += (mesh.vertex(F(f, c)) - mesh.vertex(F(f, (c + 1) % 3))).norm();
    return total / static_cast<double>(3 * F.rows());
}

/// Moves every vertex by a uniform offset in [-a, a]^3 with
/// a = amplitude * mean edge length. Breaks the symmetries of regular meshes.
inline TriangleMesh jitter(const TriangleMesh& mesh, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = amplitude * mean_edge_length(mesh);
    Eigen::MatrixX3d V = mesh.vertices();
    for (Index i = 0; i < V.rows(); ++i)
        for (int c = 0; c < 3; ++c) V(i, c) += a * u(rng);
    return TriangleMesh(std::move(V), mesh.faces());
}

/// Smooth, mildly non-isometric bend/stretch of a shape centred near the origin.
inline TriangleMesh smooth_deform(const TriangleMesh& mesh, double strength = 0.15) {
    Eigen::MatrixX3d V = mesh.vertices();
    for (Index i = 0; i < V.rows(); ++i) {
        const double x = V(i, 0), y = V(i, 1), z = V(i, 2);
        V(i, 0) = x * (1.0 + strength * z);
        V(i, 1) = y * (1.0 - 0.5 * strength * z) + 0.5 * strength * x * x;
        V(i, 2) = z * (1.0 + 0.5 * strength) + strength * std::sin(2.0 * x) * 0.3;
    }
    return TriangleMesh(std::move(V), mesh.faces());
}

/// Random proper rotation (uniform quaternion).
inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    return q.toRotationMatrix();
}

}  // namespace diffwave::shapes
