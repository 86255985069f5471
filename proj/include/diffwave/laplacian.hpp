#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "diffwave/error.hpp"
#include "diffwave/mesh.hpp"

namespace diffwave {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lumped mass A (stored as its diagonal) and cotangent stiffness W.
///
/// W is symmetric positive semi-definite with zero row sums (natural boundary
/// conditions), so L = A^{-1} W annihilates constants.
struct LaplacianPair {
    Eigen::VectorXd mass;
    SparseMatrix stiffness;
    double total_area = 0.0;

    Index size() const noexcept { return mass.size(); }
};

/// Assembles the barycentric lumped mass and cotangent stiffness matrices.
///
/// W_ij = -(cot a_ij + cot b_ij)/2 over the (one or two) faces sharing edge ij,
/// W_ii = -sum_j W_ij, A_ii = (1/3) sum of incident face areas.
inline LaplacianPair build_laplacian(const TriangleMesh& mesh) {
    const Index n = mesh.n_vertices();
    const auto& F = mesh.faces();

    LaplacianPair lap;
    lap.mass = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(F.rows()) * 12);

    for (Index f = 0; f < F.rows(); ++f) {
        const int idx[3] = {F(f, 0), F(f, 1), F(f, 2)};
        const Eigen::Vector3d p[3] = {mesh.vertex(idx[0]), mesh.vertex(idx[1]), mesh.vertex(idx[2])};
        const double twice_area = (p[1] - p[0]).cross(p[2] - p[0]).norm();
        const double area = 0.5 * twice_area;
        for (int c = 0; c < 3; ++c) lap.mass[idx[c]] += area / 3.0;
        lap.total_area += area;

        for (int c = 0; c < 3; ++c) {
            // Angle at corner c is opposite edge (i, j).
            const int i = idx[(c + 1) % 3];
            const int j = idx[(c + 2) % 3];
            const Eigen::Vector3d u = p[(c + 1) % 3] - p[c];
            const Eigen::Vector3d v = p[(c + 2) % 3] - p[c];
            const double half_cot = 0.5 * u.dot(v) / twice_area;
            triplets.emplace_back(i, j, -half_cot);
            triplets.emplace_back(j, i, -half_cot);
            triplets.emplace_back(i, i, half_cot);
            triplets.emplace_back(j, j, half_cot);
        }
    }

    std::vector<Index> isolated;
    for (Index i = 0; i < n; ++i)
        if (!(lap.mass[i] > 0.0)) isolated.push_back(i);
    if (!isolated.empty()) {
        std::string list;
        for (std::size_t k = 0; k < isolated.size() && k < 20; ++k)
            list += (k ? ", " : "") + std::to_string(isolated[k]);
        if (isolated.size() > 20) list += ", ...";
        throw DataError(std::to_string(isolated.size()) + " isolated vertices with zero mass: " + list);
    }

    lap.stiffness.resize(n, n);
    lap.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    lap.stiffness.makeCompressed();
    return lap;
}

}  // namespace diffwave
