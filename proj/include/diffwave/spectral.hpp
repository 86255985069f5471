#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diffwave/error.hpp"
#include "diffwave/matching.hpp"
#include "diffwave/sampling.hpp"
#include "diffwave/spectrum.hpp"
#include "diffwave/wavelets.hpp"

namespace diffwave {

/// Eigenpairs used by the truncated spectral Mexican hat when no count is given.
inline constexpr Index kDefaultTruncation = 300;

namespace detail {

inline Index resolve_truncation(const Spectrum& spec, std::optional<Index> truncation) {
    const Index k = truncation.value_or(std::min(kDefaultTruncation, spec.count()));
    if (k < 1 || k > spec.count())
        throw UsageError("truncation " + std::to_string(k) + " outside [1, " + std::to_string(spec.count()) + "]");
    return k;
}

inline void check_vertex(const Spectrum& spec, Index v) {
    if (v < 0 || v >= spec.n_vertices())
        throw DataError("vertex " + std::to_string(v) + " outside the spectrum's mesh");
}

/// sum_k filter(lambda_k) phi_k(sample) phi_k(.) over the first K pairs.
template <typename Filter>
Eigen::VectorXd spectral_sum(const Spectrum& spec, Index sample, Index K, Filter&& filter) {
    check_vertex(spec, sample);
    Eigen::VectorXd coeff(K);
    for (Index k = 0; k < K; ++k) coeff[k] = filter(spec.eigenvalues[k]) * spec.eigenvectors(sample, k);
    return spec.eigenvectors.leftCols(K) * coeff;
}

}  // namespace detail

/// K_t(sample, .) = sum_k exp(-t lambda_k) phi_k(sample) phi_k(.). The full
/// spectrum is used when no truncation is given.
inline Eigen::VectorXd spectral_heat_kernel(const Spectrum& spec, double t, Index sample,
                                            std::optional<Index> truncation = std::nullopt) {
    if (!(t >= 0.0)) throw UsageError("heat kernel time must be non-negative");
    const Index K = truncation ? detail::resolve_truncation(spec, truncation) : spec.count();
    return detail::spectral_sum(spec, sample, K, [t](double lambda) { return std::exp(-t * lambda); });
}

/// Spectral Mexican hat sum_k lambda_k exp(-t lambda_k) phi_k(sample) phi_k(.),
/// truncated to K pairs (default 300, or the whole spectrum if shorter).
inline Eigen::VectorXd spectral_mexican_hat(const Spectrum& spec, double t, Index sample,
                                            std::optional<Index> truncation = std::nullopt) {
    if (!(t > 0.0)) throw UsageError("Mexican hat time must be positive");
    const Index K = detail::resolve_truncation(spec, truncation);
    return detail::spectral_sum(spec, sample, K, [t](double lambda) { return lambda * std::exp(-t * lambda); });
}

// ---------------------------------------------------------------------------
// Reference wavelets and error measurement

/// How the reference diffusion time of scale n is derived from the step t.
enum class ReferenceTimes {
    /// log(n t); scales with n t <= 1 have no valid time and are excluded.
    log_nt,
    /// n t, the time actually reached after n Euler steps.
    linear_nt,
};

/// Spectral wavelets laid out like a dictionary (scale-major), with per-scale
/// times and validity flags.
struct ReferenceDictionary {
    Eigen::MatrixXd columns;
    std::vector<double> times;
    std::vector<bool> valid;
    Index n_samples = 0;
    Index n_scales = 0;

    Index valid_scales() const { return static_cast<Index>(std::count(valid.begin(), valid.end(), true)); }
};

inline std::vector<double> reference_times(double t_step, Index n_scales, ReferenceTimes mode) {
    std::vector<double> times(static_cast<std::size_t>(n_scales));
    for (Index n = 1; n <= n_scales; ++n) {
        const double nt = static_cast<double>(n) * t_step;
        times[static_cast<std::size_t>(n - 1)] = mode == ReferenceTimes::log_nt ? std::log(nt) : nt;
    }
    return times;
}

/// Spectral Mexican hats at the given per-scale times, normalized exactly
/// like dictionary columns. Scales whose time is not positive are flagged
/// invalid (with a warning) and left as zero columns.
inline ReferenceDictionary spectral_wavelet_dictionary(const Spectrum& spec, const Eigen::VectorXd& mass,
                                                       const std::vector<double>& times, const SampleSet& samples,
                                                       std::optional<Index> truncation) {
    samples.validate(spec.n_vertices());
    ReferenceDictionary ref;
    ref.n_samples = samples.size();
    ref.n_scales = static_cast<Index>(times.size());
    ref.times = times;
    ref.valid.assign(times.size(), true);
    ref.columns = Eigen::MatrixXd::Zero(spec.n_vertices(), ref.n_samples * ref.n_scales);
    std::vector<Index> excluded;
    for (Index n = 0; n < ref.n_scales; ++n) {
        const double t = times[static_cast<std::size_t>(n)];
        if (!(t > 0.0)) {
            ref.valid[static_cast<std::size_t>(n)] = false;
            excluded.push_back(n + 1);
            continue;
        }
        for (Index s = 0; s < ref.n_samples; ++s)
            ref.columns.col(n * ref.n_samples + s) =
                spectral_mexican_hat(spec, t, samples.indices[static_cast<std::size_t>(s)], truncation);
        auto block = ref.columns.middleCols(n * ref.n_samples, ref.n_samples);
        Eigen::MatrixXd tmp = block;
        normalize_columns(tmp, mass, Normalization::l1_then_range, ref.n_samples);
        block = tmp;
    }
    if (!excluded.empty()) {
        std::string list;
        for (std::size_t i = 0; i < excluded.size(); ++i) list += (i ? "," : "") + std::to_string(excluded[i]);
        warn(std::to_string(excluded.size()) + " of " + std::to_string(ref.n_scales) +
             " reference scales have a non-positive time and are excluded: " + list);
    }
    return ref;
}

/// Full-spectrum reference wavelets for an `n_scales`-step dictionary with
/// step `t_step`; by default scale n uses time log(n t_step).
inline ReferenceDictionary ground_truth_wavelets(const Spectrum& spec, const Eigen::VectorXd& mass, double t_step,
                                                 Index n_scales, const SampleSet& samples,
                                                 ReferenceTimes mode = ReferenceTimes::log_nt) {
    if (!(t_step > 0.0) || n_scales < 1) throw UsageError("invalid reference step or scale count");
    return spectral_wavelet_dictionary(spec, mass, reference_times(t_step, n_scales, mode), samples, spec.count());
}

struct DictionaryErrors {
    std::vector<double> l2_per_scale;    // NaN for excluded scales
    std::vector<double> linf_per_scale;  // NaN for excluded scales
    double l2_average = 0.0;
    double linf_average = 0.0;
};

/// A-weighted L2 and plain L-infinity distance between matching columns,
/// averaged per scale and over all valid scales.
inline DictionaryErrors dictionary_error(const Eigen::Ref<const Eigen::MatrixXd>& candidate,
                                         const ReferenceDictionary& reference, const Eigen::VectorXd& mass) {
    if (candidate.rows() != reference.columns.rows() || candidate.cols() != reference.columns.cols())
        throw DataError("candidate and reference dictionaries differ in shape");
    if (mass.size() != candidate.rows()) throw DataError("mass does not match the dictionary rows");
    DictionaryErrors err;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    err.l2_per_scale.assign(static_cast<std::size_t>(reference.n_scales), nan);
    err.linf_per_scale.assign(static_cast<std::size_t>(reference.n_scales), nan);
    double l2_total = 0.0, linf_total = 0.0;
    Index counted = 0;
    for (Index n = 0; n < reference.n_scales; ++n) {
        if (!reference.valid[static_cast<std::size_t>(n)]) continue;
        double l2 = 0.0, linf = 0.0;
        for (Index s = 0; s < reference.n_samples; ++s) {
            const Index j = n * reference.n_samples + s;
            const Eigen::VectorXd d = candidate.col(j) - reference.columns.col(j);
            l2 += std::sqrt(mass.dot(d.cwiseAbs2()));
            linf += d.cwiseAbs().maxCoeff();
        }
        l2 /= static_cast<double>(reference.n_samples);
        linf /= static_cast<double>(reference.n_samples);
        err.l2_per_scale[static_cast<std::size_t>(n)] = l2;
        err.linf_per_scale[static_cast<std::size_t>(n)] = linf;
        l2_total += l2;
        linf_total += linf;
        ++counted;
    }
    if (counted == 0) {
        err.l2_average = err.linf_average = nan;
    } else {
        err.l2_average = l2_total / static_cast<double>(counted);
        err.linf_average = linf_total / static_cast<double>(counted);
    }
    return err;
}

// ---------------------------------------------------------------------------
// Eigenbasis matching

/// Coefficient map from the source (M) basis to the target (N) basis.
struct FunctionalMap {
    Eigen::MatrixXd matrix;  // k_N x k_M

    Index source_size() const noexcept { return matrix.cols(); }
    Index target_size() const noexcept { return matrix.rows(); }
};

/// C = Phi_N^T A_N Pi Phi_M, where Pi pushes functions on M forward along
/// `gt_map` (M -> N): (Pi f)(gt(x)) = f(x).
inline FunctionalMap gt_functional_map(const Spectrum& spec_m, const Spectrum& spec_n, const Eigen::VectorXd& mass_n,
                                       const PointMap& gt_map, Index k) {
    if (gt_map.source_size() != spec_m.n_vertices() || gt_map.target_size != spec_n.n_vertices())
        throw DataError("ground-truth map does not match the two spectra");
    if (mass_n.size() != spec_n.n_vertices()) throw DataError("target mass does not match its spectrum");
    if (k < 1 || k > spec_m.count() || k > spec_n.count())
        throw UsageError("basis size " + std::to_string(k) + " exceeds an available spectrum");
    gt_map.validate();
    Eigen::MatrixXd pushed(spec_m.n_vertices(), k);  // rows: A_N(T(x)) phi_N(T(x))
    for (Index x = 0; x < spec_m.n_vertices(); ++x) {
        const Index y = gt_map.targets[static_cast<std::size_t>(x)];
        pushed.row(x) = mass_n[y] * spec_n.eigenvectors.row(y).head(k);
    }
    return FunctionalMap{pushed.transpose() * spec_m.eigenvectors.leftCols(k)};
}

/// For every vertex x of M, the vertex y of N minimizing ||C phi_M(x) - phi_N(y)||.
inline PointMap fmap_to_pointmap(const FunctionalMap& fmap, const Spectrum& spec_m, const Spectrum& spec_n) {
    const Index km = fmap.source_size(), kn = fmap.target_size();
    if (km > spec_m.count() || kn > spec_n.count()) throw DataError("functional map larger than the spectra");
    const Eigen::MatrixXd source = spec_m.eigenvectors.leftCols(km) * fmap.matrix.transpose();
    return nearest_rows(source, spec_n.eigenvectors.leftCols(kn));
}

/// Eigenbasis self-matching baseline: each vertex indicator is projected onto
/// the first k eigenfunctions (A-orthogonal projection) and mapped to the
/// vertex where the projection peaks (lowest index on ties).
inline PointMap spectral_delta_map(const Spectrum& spec, const Eigen::VectorXd& mass, Index k) {
    if (k < 1 || k > spec.count()) throw UsageError("basis size " + std::to_string(k) + " exceeds the spectrum");
    const Index n = spec.n_vertices();
    const Eigen::MatrixXd phi = spec.eigenvectors.leftCols(k);
    PointMap map{std::vector<Index>(static_cast<std::size_t>(n)), n};
    constexpr Index kBlock = 256;
    for (Index start = 0; start < n; start += kBlock) {
        const Index width = std::min(kBlock, n - start);
        // Column j: phi phi(x)^T A_xx for x = start + j.
        const Eigen::MatrixXd block =
            phi * (phi.middleRows(start, width).transpose() * mass.segment(start, width).asDiagonal());
        for (Index j = 0; j < width; ++j) {
            Index best = 0;
            for (Index r = 1; r < n; ++r)
                if (block(r, j) > block(best, j)) best = r;
            map.targets[static_cast<std::size_t>(start + j)] = best;
        }
    }
    return map;
}

// ---------------------------------------------------------------------------

/// a(t) = sum_i coeffs_i exp(-t rates_i).
inline double exponential_sum(std::span<const double> coeffs, std::span<const double> rates, double t) {
    if (coeffs.size() != rates.size()) throw UsageError("coefficient and rate lists differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) sum += coeffs[i] * std::exp(-t * rates[i]);
    return sum;
}

/// Largest |a(t) - b(t)| over the given time grid.
inline double max_exponential_sum_gap(std::span<const double> a_coeffs, std::span<const double> a_rates,
                                      std::span<const double> b_coeffs, std::span<const double> b_rates,
                                      std::span<const double> times) {
    double gap = 0.0;
    for (double t : times)
        gap = std::max(gap, std::abs(exponential_sum(a_coeffs, a_rates, t) - exponential_sum(b_coeffs, b_rates, t)));
    return gap;
}

}  // namespace diffwave
