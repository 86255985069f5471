#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "diffwave/error.hpp"
#include "diffwave/mesh.hpp"
#include "diffwave/wavelets.hpp"

namespace diffwave {

/// Dense vertex correspondence: targets[i] is the image of source vertex i.
struct PointMap {
    std::vector<Index> targets;
    Index target_size = 0;

    Index source_size() const noexcept { return static_cast<Index>(targets.size()); }

    void validate() const {
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (targets[i] < 0 || targets[i] >= target_size)
                throw DataError("map entry " + std::to_string(i) + " -> " + std::to_string(targets[i]) +
                                " outside [0, " + std::to_string(target_size) + ")");
    }

    static PointMap identity(Index n) {
        PointMap map{std::vector<Index>(static_cast<std::size_t>(n)), n};
        for (Index i = 0; i < n; ++i) map.targets[static_cast<std::size_t>(i)] = i;
        return map;
    }
};

// ---------------------------------------------------------------------------
// Index-list files: one 0-based index per line. Used for point maps,
// ground-truth maps and landmark lists.

inline std::vector<Index> read_index_list(std::istream& in) {
    std::vector<Index> values;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto content = detail::trim(raw);
        if (content.empty()) continue;
        values.push_back(detail::parse_number<long long>(std::string(content), line, "index"));
        if (values.back() < 0) throw ParseError(line, "negative index");
    }
    return values;
}

inline std::vector<Index> load_index_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_index_list(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.message(), path.string());
    }
}

inline void write_index_list(std::ostream& out, const std::vector<Index>& values) {
    for (Index v : values) out << v << '\n';
}

inline void save_index_list(const std::filesystem::path& path, const std::vector<Index>& values) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_index_list(out, values);
}

/// Reads a point map and checks it against the target vertex count.
inline PointMap load_pointmap(const std::filesystem::path& path, Index target_size) {
    PointMap map{load_index_list(path), target_size};
    map.validate();
    return map;
}

inline void save_pointmap(const std::filesystem::path& path, const PointMap& map) {
    save_index_list(path, map.targets);
}

// ---------------------------------------------------------------------------

/// Diagonal ridge weights 1/k^2 for the scale k of every dictionary column.
struct TikhonovRegularizer {
    Eigen::VectorXd weights;

    Index size() const noexcept { return weights.size(); }
};

inline TikhonovRegularizer build_gamma(Index n_samples, Index n_scales) {
    if (n_samples < 1 || n_scales < 1) throw UsageError("gamma needs at least one sample and one scale");
    TikhonovRegularizer reg{Eigen::VectorXd(n_samples * n_scales)};
    for (Index k = 1; k <= n_scales; ++k)
        reg.weights.segment((k - 1) * n_samples, n_samples).setConstant(1.0 / static_cast<double>(k * k));
    return reg;
}

/// The m x m normal matrix Psi^T Psi + Gamma^2 of the ridge problem.
inline Eigen::MatrixXd normal_matrix(const Eigen::Ref<const Eigen::MatrixXd>& psi, const TikhonovRegularizer& reg) {
    if (reg.size() != psi.cols())
        throw DataError("regularizer has " + std::to_string(reg.size()) + " weights for " +
                        std::to_string(psi.cols()) + " dictionary columns");
    Eigen::MatrixXd normal = psi.transpose() * psi;
    normal.diagonal() += reg.weights.cwiseAbs2();
    return normal;
}

/// 2-norm condition number of a symmetric PSD matrix (+inf when singular).
inline double spd_condition_number(const Eigen::MatrixXd& m) {
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
    if (!(ev[0] > 0.0)) return std::numeric_limits<double>::infinity();
    return ev[ev.size() - 1] / ev[0];
}

/// Self-matching by delta-function reconstruction.
///
/// Solves min ||Psi a - I||^2 + ||Gamma a||^2 for all vertex indicators at
/// once, a = (Psi^T Psi + Gamma^2)^{-1} Psi^T, and maps vertex k to the row
/// holding the largest entry of column k of Psi a (lowest row on ties). The
/// n x n reconstruction is never formed; it is streamed in column blocks.
inline PointMap reconstruct_delta_map(const Eigen::Ref<const Eigen::MatrixXd>& psi, const TikhonovRegularizer& reg) {
    const Eigen::MatrixXd normal = normal_matrix(psi, reg);
    // A strictly positive ridge keeps the system definite; without one the
    // dictionary's rank deficiency has to be checked explicitly.
    if (!(reg.weights.cwiseAbs().minCoeff() > 0.0)) {
        const double cond = spd_condition_number(normal);
        if (!(cond < 1e12))
            throw NumericalError("normal matrix is numerically singular (condition number " +
                                 std::to_string(cond) + "); use a non-zero regularizer");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) throw NumericalError("normal matrix is not positive definite");

    const Index n = psi.rows();
    // R = Psi N^{-1} Psi^T is symmetric; column k = left * psi.row(k)^T.
    const Eigen::MatrixXd left = psi * llt.solve(Eigen::MatrixXd::Identity(normal.rows(), normal.cols()));
    PointMap map{std::vector<Index>(static_cast<std::size_t>(n)), n};
    constexpr Index kBlock = 256;
    for (Index start = 0; start < n; start += kBlock) {
        const Index width = std::min(kBlock, n - start);
        const Eigen::MatrixXd block = left * psi.middleRows(start, width).transpose();
        for (Index j = 0; j < width; ++j) {
            Index best = 0;
            for (Index r = 1; r < n; ++r)
                if (block(r, j) > block(best, j)) best = r;
            map.targets[static_cast<std::size_t>(start + j)] = best;
        }
    }
    return map;
}

inline PointMap reconstruct_delta_map(const WaveletDictionary& dict, const TikhonovRegularizer& reg) {
    return reconstruct_delta_map(dict.columns, reg);
}

/// Exact nearest neighbor of every source row among the target rows
/// (Euclidean; lowest target index on ties).
inline PointMap nearest_rows(const Eigen::Ref<const Eigen::MatrixXd>& source,
                             const Eigen::Ref<const Eigen::MatrixXd>& target) {
    if (source.cols() != target.cols())
        throw DataError("embedding dimensions differ: " + std::to_string(source.cols()) + " vs " +
                        std::to_string(target.cols()));
    // Row-major copies make the inner distance loop contiguous.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor src = source;
    const RowMajor dst = target;
    const Index d = src.cols();
    PointMap map{std::vector<Index>(static_cast<std::size_t>(src.rows())), dst.rows()};
    for (Index i = 0; i < src.rows(); ++i) {
        const double* a = src.data() + i * d;
        double best = std::numeric_limits<double>::infinity();
        Index best_j = 0;
        for (Index j = 0; j < dst.rows(); ++j) {
            const double* b = dst.data() + j * d;
            double acc = 0.0;
            for (Index c = 0; c < d && acc < best; ++c) {
                const double diff = a[c] - b[c];
                acc += diff * diff;
            }
            if (acc < best) {
                best = acc;
                best_j = j;
            }
        }
        map.targets[static_cast<std::size_t>(i)] = best_j;
    }
    return map;
}

/// Transfers vertices from one shape to another by matching dictionary rows
/// (the per-vertex values of all wavelets). Samples are assumed to correspond
/// by position in the two dictionaries.
template <typename Dict>
    requires std::is_base_of_v<DictionaryData, Dict>
PointMap transfer_pointmap(const Dict& source, const Dict& target) {
    if (source.n_columns() != target.n_columns() || source.n_scales != target.n_scales)
        throw DataError("dictionaries have different layouts (" + std::to_string(source.n_columns()) + " vs " +
                        std::to_string(target.n_columns()) + " columns)");
    return nearest_rows(source.columns, target.columns);
}

}  // namespace diffwave
