#pragma once

#include "neucgc/common.hpp"
#include "neucgc/distributions.hpp"
#include "neucgc/neutral.hpp"

namespace neucgc {

/// Nodes whose pseudo-labels are trusted this epoch, picked by distance to
/// the assigned K-means centroid (smaller = more confident).
struct HighConfidenceSet {
    std::vector<NodeId> node_ids;    // sorted ascending, unique
    IntVector pseudo_labels;         // aligned with node_ids
    Vector confidence_scores;        // centroid distances, aligned with node_ids
};

/// Weighted graph H with entries in [0, 1] and zero diagonal. Only positive
/// entries are stored; rows are sorted by column. Values need not be
/// symmetric (case-2 weights come from the asymmetric similarity matrix),
/// but the support is symmetric up to entries whose weight is exactly zero.
struct HighConfidenceGraph {
    Index n = 0;
    std::vector<std::vector<std::pair<NodeId, double>>> rows;
    /// Undirected support size: pairs i < j with H(i,j) > 0 or H(j,i) > 0.
    Index support_edges = 0;

    /// Support as symmetric neighbor lists (for homophily diagnostics).
    AdjacencyList support() const;
};

/// Rank nodes by ascending distance to their assigned centroid (ties by node
/// index) and keep the first floor(k * N), at least one. With `per_cluster`
/// the same rule is applied inside each cluster with floor(k * cluster size).
HighConfidenceSet select_high_confidence(const Matrix& fused, const IntVector& assignments,
                                         const Matrix& centroids, double k,
                                         bool per_cluster = false);

/// H(i,j) = 1 when both nodes are high-confidence with equal pseudo-label;
/// otherwise norm_s(i,j) when A(i,j) = 1; otherwise 0. Diagonal zero.
HighConfidenceGraph build_high_confidence_graph(const HighConfidenceSet& hc,
                                                const AdjacencyList& adjacency,
                                                const Matrix& norm_s);

/// Copy of H with every positive weight set to 1 (the InfoNCE-side graph in
/// the bound chain).
HighConfidenceGraph with_unit_weights(const HighConfidenceGraph& h);

/// Adaptive feature consistency loss:
///   mean_i -log[(exp(S_ii) + sum_k H_ik exp(S_ik)) / sum_j exp(S_ij)].
double afc_loss(const Matrix& s, const HighConfidenceGraph& h);

/// afc_loss with analytic gradients with respect to the raw embeddings
/// (through the cosine matrix; H is a constant).
LossGrad afc_loss_grad(const CosineCache& cosine, const HighConfidenceGraph& h);

} // namespace neucgc
