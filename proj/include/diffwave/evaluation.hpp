#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diffwave/error.hpp"
#include "diffwave/geodesic.hpp"
#include "diffwave/matching.hpp"
#include "diffwave/mesh.hpp"

namespace diffwave {

/// Per source vertex, the graph-geodesic distance on the target mesh between
/// the predicted and the ground-truth image. The target is expected to have
/// unit area so distances are already normalized.
inline Eigen::VectorXd geodesic_errors(const PointMap& map, const PointMap& gt, const TriangleMesh& target_mesh,
                                       const GeodesicOracle* geodesics = nullptr) {
    if (map.source_size() != gt.source_size())
        throw DataError("map and ground truth cover " + std::to_string(map.source_size()) + " and " +
                        std::to_string(gt.source_size()) + " source vertices");
    const Index n_target = target_mesh.n_vertices();
    for (const PointMap* m : {&map, &gt})
        for (Index t : m->targets)
            if (t < 0 || t >= n_target)
                throw DataError("map target " + std::to_string(t) + " outside the target mesh");

    std::optional<GeodesicOracle> owned;
    if (!geodesics) geodesics = &owned.emplace(target_mesh);
    Eigen::VectorXd errors(map.source_size());
    for (Index i = 0; i < map.source_size(); ++i) {
        const Index a = map.targets[static_cast<std::size_t>(i)];
        const Index b = gt.targets[static_cast<std::size_t>(i)];
        errors[i] = a == b ? 0.0 : geodesics->distance(b, a);
    }
    return errors;
}

/// Cumulative error curve: share of vertices matched within each threshold.
struct EvalCurve {
    std::vector<double> thresholds;
    std::vector<double> fractions;
    double mean_error = 0.0;
    double auc_025 = 0.0;
    Index n_infinite = 0;
};

inline constexpr double kAucThreshold = 0.25;

/// Builds the curve on `n_thresholds` evenly spaced thresholds over
/// [0, max_threshold]. Infinite errors (unreachable pairs) count as misses
/// and are left out of the mean.
inline EvalCurve curve(const Eigen::Ref<const Eigen::VectorXd>& errors, Index n_thresholds = 100,
                       double max_threshold = 0.5) {
    if (errors.size() == 0) throw DataError("cannot build a curve from an empty error vector");
    if (n_thresholds < 2) throw UsageError("a curve needs at least 2 thresholds");
    if (!(max_threshold > 0.0)) throw UsageError("max threshold must be positive");

    std::vector<double> sorted(errors.data(), errors.data() + errors.size());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const auto share_within = [&](double threshold) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin()) / n;
    };

    EvalCurve c;
    c.thresholds.resize(static_cast<std::size_t>(n_thresholds));
    c.fractions.resize(static_cast<std::size_t>(n_thresholds));
    for (Index i = 0; i < n_thresholds; ++i) {
        const double th = max_threshold * static_cast<double>(i) / static_cast<double>(n_thresholds - 1);
        c.thresholds[static_cast<std::size_t>(i)] = th;
        c.fractions[static_cast<std::size_t>(i)] = share_within(th);
    }
    c.auc_025 = share_within(kAucThreshold);

    double sum = 0.0;
    Index finite = 0;
    for (double e : sorted) {
        if (std::isfinite(e)) {
            sum += e;
            ++finite;
        }
    }
    c.n_infinite = static_cast<Index>(sorted.size()) - finite;
    if (c.n_infinite > 0)
        warn(std::to_string(c.n_infinite) + " vertices have infinite geodesic error (disconnected target); "
             "excluded from the mean");
    c.mean_error = finite > 0 ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    return c;
}

// ---------------------------------------------------------------------------
// CSV output. Every file starts with a schema tag line so golden files stay stable.

inline constexpr const char* kCurveSchema = "#schema=diffwave.curve.v1";
inline constexpr const char* kScaleErrorSchema = "#schema=diffwave.scale_errors.v1";

inline void write_curve_csv(std::ostream& out, const EvalCurve& c, const std::string& label = "") {
    out << kCurveSchema << '\n' << "label,threshold,fraction\n" << std::setprecision(17);
    for (std::size_t i = 0; i < c.thresholds.size(); ++i)
        out << label << ',' << c.thresholds[i] << ',' << c.fractions[i] << '\n';
}

}  // namespace diffwave
