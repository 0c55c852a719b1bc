#include "neucgc/afc.hpp"

#include "neucgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace neucgc {

AdjacencyList HighConfidenceGraph::support() const {
    // canonicalize to undirected pairs; an entry present in one direction
    // only (weight exactly zero the other way) still counts as support
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId i = 0; i < n; ++i)
        for (const auto& [j, w] : rows[static_cast<std::size_t>(i)])
            pairs.emplace_back(std::min(i, j), std::max(i, j));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    AdjacencyList out(static_cast<std::size_t>(n));
    for (const auto& [i, j] : pairs) {
        out[static_cast<std::size_t>(i)].push_back(j);
        out[static_cast<std::size_t>(j)].push_back(i);
    }
    return out;
}

HighConfidenceSet select_high_confidence(const Matrix& fused, const IntVector& assignments,
                                         const Matrix& centroids, double k, bool per_cluster) {
    if (k <= 0.0 || k > 1.0) throw_error(ErrorCode::kParam, "high-confidence fraction k must be in (0, 1]");
    const Index n = fused.rows();
    if (static_cast<Index>(assignments.size()) != n) {
        throw_error(ErrorCode::kShape, "select_high_confidence: assignment length mismatch");
    }

    Vector dist(n);
    for (Index i = 0; i < n; ++i) {
        dist(i) = (fused.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)])).norm();
    }

    std::vector<NodeId> picked;
    auto take_sorted = [&](std::vector<NodeId>& ids, std::size_t count) {
        std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
            if (dist(a) != dist(b)) return dist(a) < dist(b);
            return a < b;
        });
        ids.resize(count);
        picked.insert(picked.end(), ids.begin(), ids.end());
    };

    if (per_cluster) {
        const Index n_clusters = centroids.rows();
        for (Index c = 0; c < n_clusters; ++c) {
            std::vector<NodeId> members;
            for (Index i = 0; i < n; ++i)
                if (assignments[static_cast<std::size_t>(i)] == c) members.push_back(static_cast<NodeId>(i));
            if (members.empty()) continue;
            const std::size_t count =
                std::max<std::size_t>(1, static_cast<std::size_t>(k * static_cast<double>(members.size()) + 1e-9));
            take_sorted(members, count);
        }
    } else {
        std::vector<NodeId> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        const std::size_t count =
            std::max<std::size_t>(1, static_cast<std::size_t>(k * static_cast<double>(n) + 1e-9));
        take_sorted(all, count);
    }

    std::sort(picked.begin(), picked.end());
    HighConfidenceSet hc;
    hc.node_ids = std::move(picked);
    hc.pseudo_labels.reserve(hc.node_ids.size());
    hc.confidence_scores.resize(static_cast<Index>(hc.node_ids.size()));
    for (std::size_t t = 0; t < hc.node_ids.size(); ++t) {
        hc.pseudo_labels.push_back(assignments[static_cast<std::size_t>(hc.node_ids[t])]);
        hc.confidence_scores(static_cast<Index>(t)) = dist(hc.node_ids[t]);
    }
    return hc;
}

HighConfidenceGraph build_high_confidence_graph(const HighConfidenceSet& hc,
                                                const AdjacencyList& adjacency,
                                                const Matrix& norm_s) {
    const Index n = norm_s.rows();
    HighConfidenceGraph h;
    h.n = n;
    h.rows.assign(static_cast<std::size_t>(n), {});

    // pseudo-label lookup, -1 for nodes outside the selection
    IntVector hc_label(static_cast<std::size_t>(n), -1);
    for (std::size_t t = 0; t < hc.node_ids.size(); ++t)
        hc_label[static_cast<std::size_t>(hc.node_ids[t])] = hc.pseudo_labels[t];

    // case 1: same-pseudo-label high-confidence pairs at weight 1
    std::vector<std::vector<NodeId>> by_label;
    for (NodeId i : hc.node_ids) {
        const int y = hc_label[static_cast<std::size_t>(i)];
        if (y >= static_cast<int>(by_label.size())) by_label.resize(static_cast<std::size_t>(y) + 1);
        by_label[static_cast<std::size_t>(y)].push_back(i);
    }
    long long undirected = 0;
    for (const auto& group : by_label) {
        for (std::size_t s = 0; s < group.size(); ++s) {
            for (std::size_t t = s + 1; t < group.size(); ++t) {
                h.rows[static_cast<std::size_t>(group[s])].emplace_back(group[t], 1.0);
                h.rows[static_cast<std::size_t>(group[t])].emplace_back(group[s], 1.0);
                ++undirected;
            }
        }
    }

    // case 2: original edges not claimed by case 1 keep their normalized
    // similarity (one weight per direction; S is asymmetric)
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j : adjacency[i]) {
            if (j <= i) continue;
            const int yi = hc_label[static_cast<std::size_t>(i)];
            const int yj = hc_label[static_cast<std::size_t>(j)];
            if (yi >= 0 && yi == yj) continue;
            const double wij = norm_s(i, j);
            const double wji = norm_s(j, i);
            if (wij > 0.0) h.rows[static_cast<std::size_t>(i)].emplace_back(j, wij);
            if (wji > 0.0) h.rows[static_cast<std::size_t>(j)].emplace_back(i, wji);
            if (wij > 0.0 || wji > 0.0) ++undirected;
        }
    }

    for (auto& row : h.rows)
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    h.support_edges = static_cast<Index>(undirected);
    return h;
}

HighConfidenceGraph with_unit_weights(const HighConfidenceGraph& h) {
    HighConfidenceGraph out = h;
    for (auto& row : out.rows)
        for (auto& [j, w] : row) w = 1.0;
    return out;
}

double afc_loss(const Matrix& s, const HighConfidenceGraph& h) {
    const Index n = s.rows();
    if (s.cols() != n) throw_error(ErrorCode::kShape, "afc_loss: similarity matrix must be square");
    if (h.n != n) throw_error(ErrorCode::kShape, "afc_loss: H size mismatch");
    const Matrix e = s.array().exp();
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
        double numerator = e(i, i);
        for (const auto& [j, w] : h.rows[static_cast<std::size_t>(i)]) numerator += w * e(i, j);
        loss += std::log(e.row(i).sum()) - std::log(numerator);
    }
    return loss / static_cast<double>(n);
}

LossGrad afc_loss_grad(const CosineCache& cosine, const HighConfidenceGraph& h) {
    const Matrix& s = cosine.s;
    const Index n = s.rows();
    if (h.n != n) throw_error(ErrorCode::kShape, "afc_loss: H size mismatch");
    const double inv_n = 1.0 / static_cast<double>(n);

    const Matrix e = s.array().exp();
    const Vector denom = e.rowwise().sum();
    Vector numer(n);
    for (Index i = 0; i < n; ++i) {
        double acc = e(i, i);
        for (const auto& [j, w] : h.rows[static_cast<std::size_t>(i)]) acc += w * e(i, j);
        numer(i) = acc;
    }

    LossGrad out;
    out.value = inv_n * (denom.array().log() - numer.array().log()).sum();

    // dL/dS = (1/N) [diag(1/denom) E - diag(1/numer) (I + H) .* E]
    Matrix w_s = denom.cwiseInverse().asDiagonal() * e;
    for (Index i = 0; i < n; ++i) {
        w_s(i, i) -= e(i, i) / numer(i);
        for (const auto& [j, w] : h.rows[static_cast<std::size_t>(i)])
            w_s(i, j) -= w * e(i, j) / numer(i);
    }
    w_s *= inv_n;

    // back through the cosine: dZ1_i = (W Zhat2 - diag(rowsum(W .* S)) Zhat1)_i / ||z1_i||
    const Vector row_ws = (w_s.array() * s.array()).rowwise().sum();
    const Vector col_ws = (w_s.array() * s.array()).colwise().sum();
    out.d_z1 = cosine.inv_norm1.asDiagonal() *
               (w_s * cosine.z2_hat - row_ws.asDiagonal() * cosine.z1_hat);
    out.d_z2 = cosine.inv_norm2.asDiagonal() *
               (w_s.transpose() * cosine.z1_hat - col_ws.asDiagonal() * cosine.z2_hat);
    return out;
}

} // namespace neucgc
