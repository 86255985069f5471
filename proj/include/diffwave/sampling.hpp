#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "diffwave/error.hpp"
#include "diffwave/geodesic.hpp"
#include "diffwave/mesh.hpp"

namespace diffwave {

enum class SamplingStrategy { fps_euclidean, fps_geodesic, random, given };

inline std::string_view to_string(SamplingStrategy s) {
    switch (s) {
        case SamplingStrategy::fps_euclidean: return "fps-euclidean";
        case SamplingStrategy::fps_geodesic: return "fps-geodesic";
        case SamplingStrategy::random: return "random";
        case SamplingStrategy::given: return "given";
    }
    return "?";
}

inline SamplingStrategy parse_sampling_strategy(std::string_view s) {
    if (s == "fps-euclidean") return SamplingStrategy::fps_euclidean;
    if (s == "fps-geodesic") return SamplingStrategy::fps_geodesic;
    if (s == "random") return SamplingStrategy::random;
    throw UsageError("unknown sampling strategy '" + std::string(s) + "'");
}

/// Ordered set of distinct sample vertices and how they were chosen.
struct SampleSet {
    std::vector<Index> indices;
    SamplingStrategy strategy = SamplingStrategy::given;
    std::uint64_t seed = 0;

    Index size() const noexcept { return static_cast<Index>(indices.size()); }

    /// Throws unless indices are non-empty, distinct and inside [0, n_vertices).
    void validate(Index n_vertices) const {
        if (indices.empty()) throw DataError("sample set is empty");
        std::unordered_set<Index> seen;
        for (Index s : indices) {
            if (s < 0 || s >= n_vertices)
                throw DataError("sample " + std::to_string(s) + " outside [0, " + std::to_string(n_vertices) + ")");
            if (!seen.insert(s).second) throw DataError("duplicate sample vertex " + std::to_string(s));
        }
    }

    static SampleSet given(std::vector<Index> indices) {
        return SampleSet{std::move(indices), SamplingStrategy::given, 0};
    }
};

namespace detail {

template <typename DistanceFrom>
std::vector<Index> farthest_point(Index n_vertices, Index n, Index first, DistanceFrom&& distance_from) {
    std::vector<Index> chosen{first};
    Eigen::VectorXd min_dist = distance_from(first);
    while (static_cast<Index>(chosen.size()) < n) {
        // Strict '>' keeps the lowest index among equidistant candidates.
        Index best = -1;
        double best_d = -1.0;
        for (Index v = 0; v < n_vertices; ++v)
            if (min_dist[v] > best_d) {
                best_d = min_dist[v];
                best = v;
            }
        if (best_d <= 0.0) {
            // Everything left coincides with a chosen sample; take the lowest unused index.
            std::unordered_set<Index> used(chosen.begin(), chosen.end());
            for (Index v = 0; v < n_vertices; ++v)
                if (!used.count(v)) {
                    best = v;
                    break;
                }
        }
        chosen.push_back(best);
        min_dist = min_dist.cwiseMin(distance_from(best));
        min_dist[best] = 0.0;
    }
    return chosen;
}

}  // namespace detail

/// Picks `n` sample vertices.
///
/// FPS strategies start at a seed-chosen vertex and then repeatedly add the
/// vertex farthest (Euclidean or edge-graph geodesic) from the current set.
/// `random` draws `n` distinct vertices uniformly. Deterministic for a seed.
inline SampleSet sample(const TriangleMesh& mesh, Index n, SamplingStrategy strategy, std::uint64_t seed,
                        const GeodesicOracle* geodesics = nullptr) {
    const Index nv = mesh.n_vertices();
    if (n < 1 || n > nv)
        throw UsageError("sample count " + std::to_string(n) + " outside [1, " + std::to_string(nv) + "]");

    std::mt19937_64 rng(seed);
    SampleSet out{{}, strategy, seed};
    switch (strategy) {
        case SamplingStrategy::fps_euclidean: {
            const Index first = std::uniform_int_distribution<Index>(0, nv - 1)(rng);
            const auto& V = mesh.vertices();
            out.indices = detail::farthest_point(nv, n, first, [&](Index s) -> Eigen::VectorXd {
                return (V.rowwise() - V.row(s)).rowwise().norm();
            });
            break;
        }
        case SamplingStrategy::fps_geodesic: {
            const Index first = std::uniform_int_distribution<Index>(0, nv - 1)(rng);
            std::optional<GeodesicOracle> owned;
            if (!geodesics) geodesics = &owned.emplace(mesh);
            out.indices =
                detail::farthest_point(nv, n, first, [&](Index s) { return geodesics->distances(s); });
            break;
        }
        case SamplingStrategy::random: {
            // Partial Fisher-Yates.
            std::vector<Index> pool(static_cast<std::size_t>(nv));
            for (Index i = 0; i < nv; ++i) pool[static_cast<std::size_t>(i)] = i;
            for (Index i = 0; i < n; ++i) {
                const Index j = std::uniform_int_distribution<Index>(i, nv - 1)(rng);
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            }
            out.indices.assign(pool.begin(), pool.begin() + n);
            break;
        }
        case SamplingStrategy::given:
            throw UsageError("'given' is not a sampling strategy");
    }
    return out;
}

/// Displaces `count` seed-chosen samples to uniformly drawn vertices within
/// geodesic distance `noise_radius * eccentricity(sample)` of the original,
/// where eccentricity is the largest geodesic distance from that sample.
/// Candidates already used by another sample are skipped so indices stay distinct.
inline SampleSet perturb_samples(const TriangleMesh& mesh, const SampleSet& samples, double noise_radius,
                                 Index count, std::uint64_t seed, const GeodesicOracle* geodesics = nullptr) {
    if (count < 0 || count > samples.size())
        throw UsageError("cannot displace " + std::to_string(count) + " of " + std::to_string(samples.size()) +
                         " samples");
    if (!(noise_radius >= 0.0)) throw UsageError("noise radius must be non-negative");
    SampleSet out = samples;
    if (noise_radius == 0.0 || count == 0) return out;

    std::optional<GeodesicOracle> owned;
    if (!geodesics) geodesics = &owned.emplace(mesh);

    std::mt19937_64 rng(seed);
    std::vector<Index> order(samples.indices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    for (Index i = 0; i < count; ++i) {
        const Index j = std::uniform_int_distribution<Index>(i, samples.size() - 1)(rng);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    std::unordered_set<Index> used(out.indices.begin(), out.indices.end());
    for (Index k = 0; k < count; ++k) {
        const std::size_t slot = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
        const Index original = samples.indices[slot];
        const Eigen::VectorXd dist = geodesics->distances(original);
        double eccentricity = 0.0;
        for (Index v = 0; v < dist.size(); ++v)
            if (std::isfinite(dist[v])) eccentricity = std::max(eccentricity, dist[v]);
        const double radius = noise_radius * eccentricity;

        std::vector<Index> candidates;
        for (Index v = 0; v < dist.size(); ++v)
            if (dist[v] <= radius && (v == original || !used.count(v))) candidates.push_back(v);
        const Index pick =
            candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        used.erase(original);
        used.insert(pick);
        out.indices[slot] = pick;
    }
    return out;
}

}  // namespace diffwave
