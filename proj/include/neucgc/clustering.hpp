#pragma once

#include "neucgc/common.hpp"

namespace neucgc {

struct ClusterResult {
    IntVector assignments;  // length N, values in [0, C)
    Matrix centroids;       // C x m
    double inertia = 0.0;   // sum of squared distances to assigned centroid
    std::uint64_t seed = 0; // seed of the winning restart
};

struct KmeansOptions {
    Index max_iter = 300;
    Index restarts = 10;
    double rel_tol = 1e-6;
};

/// Lloyd iterations with greedy ++-style seeding; several restarts with
/// derived seeds, lowest inertia wins (ties by lowest restart seed). Empty
/// clusters are re-seeded from the farthest point. Deterministic for a fixed
/// seed.
ClusterResult kmeans(const Matrix& points, Index n_clusters, std::uint64_t seed,
                     const KmeansOptions& options = {});

struct MetricsReport {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double f1 = 0.0;
};

/// ACC via optimal cluster-to-class matching, NMI (arithmetic-mean
/// normalization), ARI, and macro-F1 under the ACC-optimal matching. All
/// four are invariant under relabeling of the predicted cluster ids.
MetricsReport evaluate(const IntVector& predicted, const IntVector& truth);

namespace detail {
/// Max-profit assignment on a square matrix; returns the column matched to
/// each row. O(n^3) Hungarian algorithm.
std::vector<Index> hungarian_max(const Matrix& profit);
} // namespace detail

} // namespace neucgc
