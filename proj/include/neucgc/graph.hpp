#pragma once

#include "neucgc/common.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace neucgc {

/// Undirected attributed graph: node features X (N x D), adjacency given as
/// neighbor lists (symmetric, no self loops, each undirected edge stored in
/// both endpoint lists), and optional ground-truth labels used only for
/// evaluation and diagnostics.
class AttributedGraph {
  public:
    AttributedGraph() = default;

    /// Builds from features and an edge list. Edges are symmetrized,
    /// deduplicated, and self loops dropped. Labels, when present, must have
    /// one entry per node; n_classes is max(label)+1.
    AttributedGraph(Matrix features, const std::vector<std::pair<NodeId, NodeId>>& edges,
                    std::optional<IntVector> labels);

    Index num_nodes() const { return features_.rows(); }
    Index num_features() const { return features_.cols(); }
    /// Undirected edge count (each edge counted once).
    Index num_edges() const { return n_edges_; }

    const Matrix& features() const { return features_; }
    const AdjacencyList& neighbors() const { return neighbors_; }
    const std::vector<NodeId>& neighbors_of(NodeId i) const { return neighbors_[i]; }
    Index degree(NodeId i) const { return static_cast<Index>(neighbors_[i].size()); }

    bool has_labels() const { return labels_.has_value(); }
    const IntVector& labels() const;
    Index num_classes() const { return n_classes_; }

    /// Sparse copy of the feature matrix, built on first use. Worth it for
    /// bag-of-words style inputs (Cora is ~1% dense).
    const SparseMatrix& sparse_features() const;
    double feature_density() const;

    /// Drops the label vector (the trainer's label-hygiene tests rely on
    /// loss values being identical with and without it).
    void strip_labels();

  private:
    Matrix features_;
    AdjacencyList neighbors_;
    Index n_edges_ = 0;
    std::optional<IntVector> labels_;
    Index n_classes_ = 0;
    mutable std::optional<SparseMatrix> sparse_features_;
};

/// Summary row matching the dataset-statistics table layout.
struct GraphStats {
    Index n_nodes = 0;
    Index n_edges = 0;
    Index n_classes = 0;
    Index n_attributes = 0;
    double homophily_ratio = 0.0;              // r_h
    double neighborhood_homophily_ratio = 0.0; // r_nh
    double congener_ratio = 0.0;               // delta
};

/// Loads a dataset directory containing `features.txt` (N rows of D reals),
/// `edges.txt` (two 0-indexed node columns per line) and an optional
/// `labels.txt` (one integer per line).
AttributedGraph load_graph(const std::filesystem::path& data_dir);

/// Writes the same layout back; load_graph(save_graph(g)) round-trips
/// bit-exactly (features are printed with 17 significant digits).
void save_graph(const AttributedGraph& g, const std::filesystem::path& data_dir);

/// Fraction of undirected edges whose endpoints share a label.
double homophily_ratio(const AttributedGraph& g);

/// Mean over non-isolated nodes of the same-label fraction within each
/// node's neighborhood. Isolated nodes are excluded from the mean.
double neighborhood_homophily_ratio(const AttributedGraph& g);

/// Mean over all nodes of |same-label neighbors| / |same-label nodes in V|,
/// the denominator counting the node itself.
double congener_ratio(const AttributedGraph& g);

GraphStats compute_stats(const AttributedGraph& g);

/// Same three ratios evaluated on an arbitrary edge support (used for the
/// learned high-confidence graph). `support` must be symmetric like the
/// graph's own neighbor lists.
double homophily_ratio_on(const AdjacencyList& support, const IntVector& labels);
double congener_ratio_on(const AdjacencyList& support, const IntVector& labels);

struct SbmParams {
    Index n_nodes = 0;
    Index n_classes = 2;
    double p_in = 0.0;
    double p_out = 0.0;
    Index feature_dim = 1;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;
};

/// Planted-partition graph with Gaussian class-mean features plus isotropic
/// noise. Deterministic for a fixed seed. Classes are contiguous node blocks
/// of near-equal size.
AttributedGraph generate_sbm(const SbmParams& params);

} // namespace neucgc
