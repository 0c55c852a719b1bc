#include "neucgc/graph.hpp"

#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace neucgc {

namespace fs = std::filesystem;

AttributedGraph::AttributedGraph(Matrix features,
                                 const std::vector<std::pair<NodeId, NodeId>>& edges,
                                 std::optional<IntVector> labels)
    : features_(std::move(features)) {
    const Index n = features_.rows();
    std::set<std::pair<NodeId, NodeId>> canonical;
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) {
            throw_error(ErrorCode::kFormat, "edge endpoint out of range: " + std::to_string(u) +
                                                " " + std::to_string(v));
        }
        if (u == v) continue;
        canonical.emplace(std::min(u, v), std::max(u, v));
    }
    neighbors_.assign(static_cast<std::size_t>(n), {});
    for (const auto& [u, v] : canonical) {
        neighbors_[u].push_back(v);
        neighbors_[v].push_back(u);
    }
    for (auto& list : neighbors_) std::sort(list.begin(), list.end());
    n_edges_ = static_cast<Index>(canonical.size());

    if (labels) {
        if (static_cast<Index>(labels->size()) != n) {
            throw_error(ErrorCode::kFormat,
                        "label count " + std::to_string(labels->size()) + " != node count " +
                            std::to_string(n));
        }
        int max_label = -1;
        for (int y : *labels) {
            if (y < 0) throw_error(ErrorCode::kFormat, "negative label");
            max_label = std::max(max_label, y);
        }
        labels_ = std::move(*labels);
        n_classes_ = max_label + 1;
    }
}

const IntVector& AttributedGraph::labels() const {
    if (!labels_) throw_error(ErrorCode::kMissingLabels, "graph has no labels");
    return *labels_;
}

const SparseMatrix& AttributedGraph::sparse_features() const {
    if (!sparse_features_) {
        SparseMatrix s = features_.sparseView();
        s.makeCompressed();
        sparse_features_ = std::move(s);
    }
    return *sparse_features_;
}

double AttributedGraph::feature_density() const {
    const double total = static_cast<double>(features_.size());
    if (total == 0.0) return 0.0;
    return static_cast<double>((features_.array() != 0.0).count()) / total;
}

void AttributedGraph::strip_labels() {
    labels_.reset();
    n_classes_ = 0;
}

namespace {

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw_error(ErrorCode::kIo, "cannot open " + p.string());
    return in;
}

} // namespace

AttributedGraph load_graph(const fs::path& data_dir) {
    const fs::path feat_path = data_dir / "features.txt";
    const fs::path edge_path = data_dir / "edges.txt";
    const fs::path label_path = data_dir / "labels.txt";

    std::ifstream feat_in = open_or_throw(feat_path);
    std::vector<std::vector<double>> rows;
    std::string line;
    Index n_cols = -1;
    while (std::getline(feat_in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (row.empty()) continue;
        if (n_cols < 0) {
            n_cols = static_cast<Index>(row.size());
        } else if (static_cast<Index>(row.size()) != n_cols) {
            throw_error(ErrorCode::kFormat, "ragged feature row in " + feat_path.string());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw_error(ErrorCode::kFormat, "no feature rows in " + feat_path.string());

    Matrix X(static_cast<Index>(rows.size()), n_cols);
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = 0; j < n_cols; ++j) X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    std::ifstream edge_in = open_or_throw(edge_path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    long long u, v;
    while (edge_in >> u >> v) {
        if (u < 0 || v < 0 || u >= X.rows() || v >= X.rows()) {
            throw_error(ErrorCode::kFormat, "edge endpoint out of range in " + edge_path.string() +
                                                ": " + std::to_string(u) + " " + std::to_string(v));
        }
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }

    std::optional<IntVector> labels;
    if (fs::exists(label_path)) {
        std::ifstream label_in = open_or_throw(label_path);
        IntVector ys;
        long long y;
        while (label_in >> y) ys.push_back(static_cast<std::int32_t>(y));
        if (static_cast<Index>(ys.size()) != X.rows()) {
            throw_error(ErrorCode::kFormat, "label count " + std::to_string(ys.size()) +
                                                " != node count " + std::to_string(X.rows()) +
                                                " in " + label_path.string());
        }
        labels = std::move(ys);
    }

    return AttributedGraph(std::move(X), edges, std::move(labels));
}

void save_graph(const AttributedGraph& g, const fs::path& data_dir) {
    fs::create_directories(data_dir);

    std::ofstream feat_out(data_dir / "features.txt");
    if (!feat_out) throw_error(ErrorCode::kIo, "cannot write " + (data_dir / "features.txt").string());
    char buf[64];
    const Matrix& X = g.features();
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
            feat_out << (j ? " " : "") << buf;
        }
        feat_out << '\n';
    }

    std::ofstream edge_out(data_dir / "edges.txt");
    if (!edge_out) throw_error(ErrorCode::kIo, "cannot write " + (data_dir / "edges.txt").string());
    for (NodeId i = 0; i < g.num_nodes(); ++i)
        for (NodeId j : g.neighbors_of(i))
            if (i < j) edge_out << i << ' ' << j << '\n';

    if (g.has_labels()) {
        std::ofstream label_out(data_dir / "labels.txt");
        if (!label_out) throw_error(ErrorCode::kIo, "cannot write " + (data_dir / "labels.txt").string());
        for (int y : g.labels()) label_out << y << '\n';
    }
}

double homophily_ratio(const AttributedGraph& g) {
    if (!g.has_labels()) throw_error(ErrorCode::kMissingLabels, "homophily_ratio needs labels");
    if (g.num_edges() == 0) throw_error(ErrorCode::kDegenerate, "homophily_ratio needs edges");
    return homophily_ratio_on(g.neighbors(), g.labels());
}

double homophily_ratio_on(const AdjacencyList& support, const IntVector& labels) {
    long long same = 0, total = 0;
    for (NodeId i = 0; i < static_cast<NodeId>(support.size()); ++i) {
        for (NodeId j : support[i]) {
            if (j <= i) continue; // each undirected edge once
            ++total;
            if (labels[i] == labels[j]) ++same;
        }
    }
    if (total == 0) throw_error(ErrorCode::kDegenerate, "support has no edges");
    return static_cast<double>(same) / static_cast<double>(total);
}

double neighborhood_homophily_ratio(const AttributedGraph& g) {
    if (!g.has_labels()) throw_error(ErrorCode::kMissingLabels, "neighborhood_homophily_ratio needs labels");
    const IntVector& y = g.labels();
    double sum = 0.0;
    Index counted = 0;
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        const auto& nbrs = g.neighbors_of(i);
        if (nbrs.empty()) continue; // isolated nodes excluded from the mean
        Index same = 0;
        for (NodeId j : nbrs)
            if (y[i] == y[j]) ++same;
        sum += static_cast<double>(same) / static_cast<double>(nbrs.size());
        ++counted;
    }
    if (counted == 0) throw_error(ErrorCode::kDegenerate, "all nodes isolated");
    return sum / static_cast<double>(counted);
}

double congener_ratio(const AttributedGraph& g) {
    if (!g.has_labels()) throw_error(ErrorCode::kMissingLabels, "congener_ratio needs labels");
    return congener_ratio_on(g.neighbors(), g.labels());
}

double congener_ratio_on(const AdjacencyList& support, const IntVector& labels) {
    const Index n = static_cast<Index>(support.size());
    // class sizes: the denominator of each node's term counts the node itself
    std::vector<Index> class_size;
    for (int y : labels) {
        if (y >= static_cast<int>(class_size.size())) class_size.resize(static_cast<std::size_t>(y) + 1, 0);
        ++class_size[static_cast<std::size_t>(y)];
    }
    double sum = 0.0;
    for (NodeId i = 0; i < n; ++i) {
        Index same = 0;
        for (NodeId j : support[i])
            if (labels[i] == labels[j]) ++same;
        sum += static_cast<double>(same) / static_cast<double>(class_size[static_cast<std::size_t>(labels[i])]);
    }
    return sum / static_cast<double>(n);
}

GraphStats compute_stats(const AttributedGraph& g) {
    GraphStats s;
    s.n_nodes = g.num_nodes();
    s.n_edges = g.num_edges();
    s.n_classes = g.num_classes();
    s.n_attributes = g.num_features();
    s.homophily_ratio = homophily_ratio(g);
    s.neighborhood_homophily_ratio = neighborhood_homophily_ratio(g);
    s.congener_ratio = congener_ratio(g);
    return s;
}

AttributedGraph generate_sbm(const SbmParams& p) {
    if (p.p_in < 0.0 || p.p_in > 1.0 || p.p_out < 0.0 || p.p_out > 1.0) {
        throw_error(ErrorCode::kParam, "SBM probabilities must lie in [0, 1]");
    }
    if (p.n_classes < 2) throw_error(ErrorCode::kParam, "SBM needs at least 2 classes");
    if (p.n_nodes < p.n_classes) throw_error(ErrorCode::kParam, "SBM needs n_nodes >= n_classes");
    if (p.feature_dim < 1) throw_error(ErrorCode::kParam, "SBM needs feature_dim >= 1");

    const Index n = p.n_nodes;
    const Index c = p.n_classes;

    // contiguous class blocks of near-equal size
    IntVector labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i * c / n);

    Rng rng(p.seed);

    Matrix means(c, p.feature_dim);
    for (Index k = 0; k < c; ++k)
        for (Index j = 0; j < p.feature_dim; ++j) means(k, j) = rng.normal();

    Matrix X(n, p.feature_dim);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p.feature_dim; ++j)
            X(i, j) = means(labels[static_cast<std::size_t>(i)], j) + p.feature_noise * rng.normal();

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            const double prob =
                labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? p.p_in : p.p_out;
            if (rng.bernoulli(prob)) edges.emplace_back(i, j);
        }
    }

    return AttributedGraph(std::move(X), edges, std::move(labels));
}

} // namespace neucgc
