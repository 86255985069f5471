#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "diffwave/error.hpp"
#include "diffwave/laplacian.hpp"
#include "diffwave/sampling.hpp"
#include "diffwave/sparse_solve.hpp"

namespace diffwave {

/// Column values plus the construction parameters shared by both dictionary kinds.
///
/// Layout is scale-major: columns [(k-1)|S|, k|S|) hold scale k (1-based) for
/// every sample, in sample order.
struct DictionaryData {
    Eigen::MatrixXd columns;
    SampleSet samples;
    Index n_scales = 0;
    double t_max = 0.0;
    double t_step = 0.0;
    double rho = 1.0;

    Index n_samples() const noexcept { return samples.size(); }
    Index n_vertices() const noexcept { return columns.rows(); }
    Index n_columns() const noexcept { return columns.cols(); }

    /// `scale` is 1-based.
    Index column_index(Index sample, Index scale) const noexcept { return (scale - 1) * n_samples() + sample; }
};

/// Mexican-hat-like wavelets: diffused Laplacians of sample indicators,
/// normalized per column by A-weighted L1 norm and then by range.
struct WaveletDictionary : DictionaryData {};

/// Diffused sample indicators (heat kernel approximations), L1-normalized only.
struct HeatDictionary : DictionaryData {};

enum class Normalization {
    none,
    l1,
    l1_then_range,
};

struct DictionaryOptions {
    SolverKind solver = SolverKind::direct;
    std::optional<Normalization> normalization;  // default depends on dictionary kind
};

/// n x |S| matrix whose column j is the unit indicator of sample j.
inline Eigen::MatrixXd indicator_block(Index n_vertices, const SampleSet& samples) {
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n_vertices, samples.size());
    for (Index j = 0; j < samples.size(); ++j) delta(samples.indices[static_cast<std::size_t>(j)], j) = 1.0;
    return delta;
}

/// A^{-1} W delta_S: the Laplacian of each sample indicator.
inline Eigen::MatrixXd mother_wavelets(const LaplacianPair& lap, const SampleSet& samples) {
    samples.validate(lap.size());
    Eigen::MatrixXd psi(lap.size(), samples.size());
    for (Index j = 0; j < samples.size(); ++j)
        psi.col(j) = Eigen::VectorXd(lap.stiffness.col(samples.indices[static_cast<std::size_t>(j)]));
    return lap.mass.cwiseInverse().asDiagonal() * psi;
}

/// One backward-Euler heat step: (A + tW)^{-1} A F. A prefactorized system for
/// the same step is reused when supplied.
inline Eigen::MatrixXd diffusion_step(const LaplacianPair& lap, double t, const Eigen::Ref<const Eigen::MatrixXd>& F,
                                      const SpdSystem* system = nullptr) {
    if (!(t > 0.0)) throw UsageError("diffusion step must be positive");
    if (F.rows() != lap.size()) throw DataError("function block does not match the mesh size");
    std::optional<SpdSystem> owned;
    if (!system) {
        system = &owned.emplace(lap.mass, lap.stiffness, t);
    } else if (system->size() != lap.size() || system->step() != t) {
        throw UsageError("prefactorized system does not match this Laplacian and step");
    }
    return system->solve(lap.mass.asDiagonal() * F);
}

/// Diffusion-scale adjustment sqrt(area_N / area_M), clamped to (0, 1].
inline double compute_rho(double area_partial, double area_full) {
    if (!(area_partial > 0.0) || !(area_full > 0.0)) throw DataError("areas must be positive to compute rho");
    const double rho = std::sqrt(area_partial / area_full);
    if (rho > 1.0) {
        warn("rho = " + std::to_string(rho) + " exceeds 1 (first shape is larger); clamped to 1");
        return 1.0;
    }
    return rho;
}

/// Per-step diffusion time rho * t_max / (n_scales * sqrt(area)).
inline double diffusion_step_size(double t_max, Index n_scales, double rho, double area) {
    return rho * t_max / (static_cast<double>(n_scales) * std::sqrt(area));
}

/// Runs `n_scales` Euler steps from `start` through one factorization and
/// returns all intermediate blocks, scale-major, without normalization.
inline Eigen::MatrixXd propagate(const LaplacianPair& lap, const SpdSystem& system,
                                 const Eigen::Ref<const Eigen::MatrixXd>& start, Index n_scales) {
    const Index m = start.cols();
    Eigen::MatrixXd out(start.rows(), m * n_scales);
    Eigen::MatrixXd current = start;
    for (Index k = 0; k < n_scales; ++k) {
        current = diffusion_step(lap, system.step(), current, &system);
        out.middleCols(k * m, m) = current;
    }
    return out;
}

/// In-place column normalization. `n_samples` only serves error messages
/// (to name the sample and scale of a degenerate column).
inline void normalize_columns(Eigen::MatrixXd& columns, const Eigen::VectorXd& mass, Normalization mode,
                              Index n_samples) {
    if (mode == Normalization::none) return;
    const auto describe = [&](Index j) {
        return "sample " + std::to_string(j % n_samples) + ", scale " + std::to_string(j / n_samples + 1);
    };
    for (Index j = 0; j < columns.cols(); ++j) {
        auto c = columns.col(j);
        const double l1 = mass.dot(c.cwiseAbs());
        if (!(l1 > 1e-300)) throw NumericalError("column for " + describe(j) + " is identically zero");
        c /= l1;
        if (mode == Normalization::l1_then_range) {
            const double range = c.maxCoeff() - c.minCoeff();
            if (!(range >= 1e-14)) throw NumericalError("column for " + describe(j) + " has degenerate range");
            c /= range;
        }
    }
}

namespace detail {

template <typename Dict>
Dict build_from(const LaplacianPair& lap, const SampleSet& samples, Index n_scales, double t_max, double rho,
                const Eigen::MatrixXd& start, const DictionaryOptions& options, Normalization default_norm) {
    if (n_scales < 1) throw UsageError("number of scales must be at least 1");
    if (!(t_max > 0.0)) throw UsageError("t_max must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw UsageError("rho must lie in (0, 1]");

    Dict dict;
    dict.samples = samples;
    dict.n_scales = n_scales;
    dict.t_max = t_max;
    dict.rho = rho;
    dict.t_step = diffusion_step_size(t_max, n_scales, rho, lap.total_area);

    const SpdSystem system(lap.mass, lap.stiffness, dict.t_step, options.solver);
    dict.columns = propagate(lap, system, start, n_scales);
    normalize_columns(dict.columns, lap.mass, options.normalization.value_or(default_norm), samples.size());
    return dict;
}

}  // namespace detail

/// Multi-scale wavelet dictionary: mother wavelets A^{-1} W delta_S pushed
/// through `n_scales` backward-Euler steps of size rho t_max / (n_scales sqrt(area)),
/// all sharing a single factorization of A + tW. Scale 0 is not stored.
inline WaveletDictionary build_dictionary(const LaplacianPair& lap, const SampleSet& samples, Index n_scales,
                                          double t_max, double rho = 1.0, const DictionaryOptions& options = {}) {
    return detail::build_from<WaveletDictionary>(lap, samples, n_scales, t_max, rho, mother_wavelets(lap, samples),
                                                 options, Normalization::l1_then_range);
}

/// Heat-kernel baseline: the same propagation applied to the raw indicators.
inline HeatDictionary build_heat_dictionary(const LaplacianPair& lap, const SampleSet& samples, Index n_scales,
                                            double t_max, double rho = 1.0, const DictionaryOptions& options = {}) {
    samples.validate(lap.size());
    return detail::build_from<HeatDictionary>(lap, samples, n_scales, t_max, rho,
                                              indicator_block(lap.size(), samples), options, Normalization::l1);
}

}  // namespace diffwave
