#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "diffwave/error.hpp"
#include "diffwave/mesh.hpp"

namespace diffwave {

/// Edge graph of a mesh with Euclidean edge lengths, stored in CSR form.
/// Shortest paths over this graph approximate surface geodesics.
///
/// Immutable after construction; queries may run concurrently.
class GeodesicOracle {
public:
    explicit GeodesicOracle(const TriangleMesh& mesh) : n_(mesh.n_vertices()) {
        std::vector<std::pair<int, int>> edges;
        edges.reserve(static_cast<std::size_t>(mesh.n_faces()) * 6);
        const auto& F = mesh.faces();
        for (Index f = 0; f < F.rows(); ++f)
            for (int c = 0; c < 3; ++c) {
                const int a = F(f, c), b = F(f, (c + 1) % 3);
                edges.emplace_back(a, b);
                edges.emplace_back(b, a);
            }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (const auto& e : edges) ++offsets_[static_cast<std::size_t>(e.first) + 1];
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) offsets_[i + 1] += offsets_[i];
        neighbors_.resize(edges.size());
        lengths_.resize(edges.size());
        for (std::size_t k = 0; k < edges.size(); ++k) {
            neighbors_[k] = edges[k].second;
            lengths_[k] = (mesh.vertex(edges[k].first) - mesh.vertex(edges[k].second)).norm();
        }
    }

    Index size() const noexcept { return n_; }

    /// Single-source shortest path lengths; unreachable vertices are +inf.
    Eigen::VectorXd distances(Index source) const {
        Eigen::VectorXd dist;
        run(source, -1, dist);
        return dist;
    }

    /// Shortest path length between two vertices (early exit once `target` settles).
    double distance(Index source, Index target) const {
        check(target);
        Eigen::VectorXd dist;
        run(source, target, dist);
        return dist[target];
    }

private:
    void check(Index v) const {
        if (v < 0 || v >= n_)
            throw DataError("vertex " + std::to_string(v) + " outside [0, " + std::to_string(n_) + ")");
    }

    void run(Index source, Index target, Eigen::VectorXd& dist) const {
        check(source);
        dist.setConstant(n_, std::numeric_limits<double>::infinity());
        using Entry = std::pair<double, Index>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[source] = 0.0;
        heap.emplace(0.0, source);
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[v]) continue;
            if (v == target) return;
            for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
                const Index w = neighbors_[k];
                const double nd = d + lengths_[k];
                if (nd < dist[w]) {
                    dist[w] = nd;
                    heap.emplace(nd, w);
                }
            }
        }
    }

    Index n_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<int> neighbors_;
    std::vector<double> lengths_;
};

/// Dijkstra distances from `source` over the mesh edge graph.
inline Eigen::VectorXd geodesic_distances(const TriangleMesh& mesh, Index source) {
    return GeodesicOracle(mesh).distances(source);
}

}  // namespace diffwave
