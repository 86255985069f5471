#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <lapacke.h>

#include "diffwave/error.hpp"
#include "diffwave/laplacian.hpp"

namespace diffwave {

/// Generalized eigenpairs W phi = lambda A phi, ascending, A-orthonormal.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // n x count, column k is phi_k

    Index count() const noexcept { return eigenvalues.size(); }
    Index n_vertices() const noexcept { return eigenvectors.rows(); }
};

struct EigsOptions {
    /// Number of smallest pairs; nullopt means the full spectrum.
    std::optional<Index> count;
    /// Largest problem accepted by the dense solver.
    Index max_vertices = 5000;
};

/// Dense generalized eigensolver for desk-scale meshes.
///
/// Reduces to the symmetric problem A^{-1/2} W A^{-1/2} v = lambda v and calls
/// LAPACK dsyevr, requesting only the wanted index range. Eigenvectors are
/// mapped back by phi = A^{-1/2} v and sign-fixed so their first entry with
/// |value| > 1e-8 is positive.
inline Spectrum generalized_eigs(const Eigen::VectorXd& mass, const SparseMatrix& stiffness,
                                 const EigsOptions& options = {}) {
    const Index n = mass.size();
    if (stiffness.rows() != n || stiffness.cols() != n) throw DataError("mass and stiffness dimensions disagree");
    if (n > options.max_vertices)
        throw UsageError("dense eigensolver limited to " + std::to_string(options.max_vertices) +
                         " vertices, mesh has " + std::to_string(n));
    const Index k = options.count.value_or(n);
    if (k < 1 || k > n) throw UsageError("requested " + std::to_string(k) + " eigenpairs of a size-" +
                                         std::to_string(n) + " problem");
    if ((mass.array() <= 0.0).any()) throw DataError("mass matrix must be strictly positive");

    const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
    // dsyevr reads the lower triangle only; fill it with the averaged pair so
    // tiny assembly asymmetries cannot bias the result.
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (Index c = 0; c < stiffness.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(stiffness, c); it; ++it) {
            const Index i = std::max(it.row(), it.col());
            const Index j = std::min(it.row(), it.col());
            const double scaled = it.value() * inv_sqrt[i] * inv_sqrt[j];
            B(i, j) += i == j ? scaled : 0.5 * scaled;
        }

    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, k);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<Index>(k, 1)));
    lapack_int found = 0;
    const char range = k == n ? 'A' : 'I';
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', range, 'L', static_cast<lapack_int>(n), B.data(),
                       static_cast<lapack_int>(n), 0.0, 0.0, 1, static_cast<lapack_int>(k), 0.0, &found, w.data(),
                       z.data(), static_cast<lapack_int>(n), support.data());
    if (info != 0) throw NumericalError("dsyevr failed with info " + std::to_string(info));
    if (found != k) throw NumericalError("dsyevr returned " + std::to_string(found) + " of " + std::to_string(k) +
                                         " eigenpairs");

    Spectrum spec;
    spec.eigenvalues = w.head(k);
    spec.eigenvectors = inv_sqrt.asDiagonal() * z;
    for (Index j = 0; j < k; ++j) {
        auto col = spec.eigenvectors.col(j);
        for (Index i = 0; i < n; ++i)
            if (std::abs(col[i]) > 1e-8) {
                if (col[i] < 0.0) col = -col;
                break;
            }
    }
    return spec;
}

inline Spectrum generalized_eigs(const LaplacianPair& lap, const EigsOptions& options = {}) {
    return generalized_eigs(lap.mass, lap.stiffness, options);
}

}  // namespace diffwave
