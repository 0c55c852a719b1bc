#include "neucgc/neutral.hpp"

#include "neucgc/error.hpp"

#include <cmath>

namespace neucgc {

namespace {
constexpr double kDenomEps = 1e-12;
} // namespace

CosineCache cosine_cache(const Matrix& z1, const Matrix& z2) {
    if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) {
        throw_error(ErrorCode::kShape, "cross_view_similarity: shape mismatch");
    }
    CosineCache c;
    const Vector n1 = z1.rowwise().norm();
    const Vector n2 = z2.rowwise().norm();
    if ((n1.array() == 0.0).any() || (n2.array() == 0.0).any()) {
        throw_error(ErrorCode::kNumeric, "cross_view_similarity: zero-norm row");
    }
    c.inv_norm1 = n1.cwiseInverse();
    c.inv_norm2 = n2.cwiseInverse();
    c.z1_hat = c.inv_norm1.asDiagonal() * z1;
    c.z2_hat = c.inv_norm2.asDiagonal() * z2;
    c.s.noalias() = c.z1_hat * c.z2_hat.transpose();
    return c;
}

Matrix cross_view_similarity(const Matrix& z1, const Matrix& z2) {
    return cosine_cache(z1, z2).s;
}

Matrix minmax_normalize(const Matrix& s, NormScope scope) {
    if (!s.allFinite()) throw_error(ErrorCode::kNumeric, "minmax_normalize: non-finite input");
    Matrix out(s.rows(), s.cols());
    if (scope == NormScope::kGlobal) {
        const double lo = s.minCoeff();
        const double hi = s.maxCoeff();
        if (hi == lo) {
            out.setConstant(0.5);
        } else {
            out = (s.array() - lo) / (hi - lo);
        }
    } else {
        for (Index i = 0; i < s.rows(); ++i) {
            const double lo = s.row(i).minCoeff();
            const double hi = s.row(i).maxCoeff();
            if (hi == lo) {
                out.row(i).setConstant(0.5);
            } else {
                out.row(i) = (s.row(i).array() - lo) / (hi - lo);
            }
        }
    }
    return out;
}

double similarity_threshold(const Matrix& norm_s) {
    if (norm_s.rows() != norm_s.cols()) {
        throw_error(ErrorCode::kShape, "similarity_threshold: matrix must be square");
    }
    return norm_s.trace() / static_cast<double>(norm_s.rows());
}

double neutral_contrastive_factor(const Matrix& norm_s, const AdjacencyList& adjacency,
                                  double xi) {
    double sum = 0.0;
    Index counted = 0;
    for (NodeId i = 0; i < static_cast<NodeId>(adjacency.size()); ++i) {
        const auto& nbrs = adjacency[i];
        if (nbrs.empty()) continue;
        Index above = 0;
        for (NodeId k : nbrs)
            if (norm_s(i, k) >= xi) ++above;
        sum += static_cast<double>(above) / static_cast<double>(nbrs.size());
        ++counted;
    }
    if (counted == 0) {
        throw_error(ErrorCode::kDegenerate, "neutral_contrastive_factor: graph has no edges");
    }
    return sum / static_cast<double>(counted);
}

double nca_loss(const Matrix& k, const AdjacencyList& adjacency, double eta) {
    const Index n = k.rows();
    if (n < 2) throw_error(ErrorCode::kDegenerate, "nca_loss: need at least 2 nodes");
    if (eta < 0.0 || eta > 1.0) throw_error(ErrorCode::kParam, "nca_loss: eta outside [0, 1]");
    double loss = 0.0;
    for (NodeId i = 0; i < n; ++i) {
        double neighbor_sum = 0.0;
        for (NodeId nb : adjacency[i]) neighbor_sum += k(i, nb);
        const double deg = static_cast<double>(adjacency[i].size());
        const double numerator = (k(i, i) + eta * neighbor_sum) / (deg + 1.0);
        const double denominator = (k.row(i).sum() - k(i, i)) / static_cast<double>(n - 1) + kDenomEps;
        loss += numerator / denominator;
    }
    return loss / static_cast<double>(n);
}

LossGrad nca_loss_grad(const RowDistributions& rows1, const RowDistributions& rows2,
                       const AdjacencyList& adjacency, double eta) {
    const Index n = rows1.probs.rows();
    const Index d = rows1.probs.cols();
    if (n < 2) throw_error(ErrorCode::kDegenerate, "nca_loss: need at least 2 nodes");
    if (eta < 0.0 || eta > 1.0) throw_error(ErrorCode::kParam, "nca_loss: eta outside [0, 1]");

    const RowMatrix& p = rows1.probs;
    const RowMatrix& lp = rows1.log_probs;
    const Vector& hp = rows1.neg_entropy;
    const RowMatrix& q = rows2.probs;
    const RowMatrix& lq = rows2.log_probs;
    const Vector& hq = rows2.neg_entropy;

    const RowVector colsum_lq = lq.colwise().sum();
    const RowVector colsum_q = q.colwise().sum();
    const double sum_hq = hq.sum();

    // K row sums without materializing K:
    //   sum_j KL(P_i||Q_j) = N*hp_i - P_i . colsum(lnQ)
    //   sum_j KL(Q_j||P_i) = sum(hq) - lnP_i . colsum(Q)
    const Vector rowsum_klpq = static_cast<double>(n) * hp - p * colsum_lq.transpose();
    const Vector rowsum_klqp = Vector::Constant(n, sum_hq) - lp * colsum_q.transpose();

    Vector k_diag(n);          // K_ii, floored like the materialized matrix
    Vector klpq_diag(n);       // KL(P_i||Q_i)
    for (Index i = 0; i < n; ++i) {
        klpq_diag(i) = hp(i) - p.row(i).dot(lq.row(i));
        const double v = klpq_diag(i) + hq(i) - q.row(i).dot(lp.row(i));
        k_diag(i) = std::max(v, kProbFloor);
    }

    // neighbor aggregates (O(E d))
    RowMatrix nbr_q = RowMatrix::Zero(n, d);  // sum_{k in N_i} Q_k
    RowMatrix nbr_lq = RowMatrix::Zero(n, d); // sum_{k in N_i} lnQ_k
    Vector nbr_k = Vector::Zero(n);         // sum_{k in N_i} K_ik
    Vector nbr_klpq = Vector::Zero(n);      // sum_{k in N_i} KL(P_i||Q_k)
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId k : adjacency[i]) {
            const double klpq = hp(i) - p.row(i).dot(lq.row(k));
            const double klqp = hq(k) - q.row(k).dot(lp.row(i));
            nbr_k(i) += std::max(klpq + klqp, kProbFloor);
            nbr_klpq(i) += klpq;
            nbr_q.row(i) += q.row(k);
            nbr_lq.row(i) += lq.row(k);
        }
    }

    LossGrad out;
    Vector a(n); // dL/dK_ii
    Vector b(n); // -dL/dK_ij for off-diagonal non-neighbor entries
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Index i = 0; i < n; ++i) {
        const double deg1 = static_cast<double>(adjacency[i].size()) + 1.0;
        const double numerator = (k_diag(i) + eta * nbr_k(i)) / deg1;
        const double denominator =
            (rowsum_klpq(i) + rowsum_klqp(i) - k_diag(i)) / static_cast<double>(n - 1) + kDenomEps;
        loss += numerator / denominator;
        a(i) = inv_n / (deg1 * denominator);
        b(i) = inv_n * numerator / (denominator * denominator * static_cast<double>(n - 1));
    }
    out.value = loss * inv_n;

    // G = dL/dK has the structure diag(a + b) + eta * diag(a) A - b 1^T,
    // so every contraction against it reduces to row/column aggregates.
    const double sum_b = b.sum();
    const RowVector bt_lp = b.transpose() * lp;
    const RowVector bt_p = b.transpose() * p;

    Vector na = Vector::Zero(n);              // sum_{i in N_j} a_i
    RowMatrix na_lp = RowMatrix::Zero(n, d);  // sum_{i in N_j} a_i lnP_i
    RowMatrix na_p = RowMatrix::Zero(n, d);   // sum_{i in N_j} a_i P_i
    Vector na_klqp = Vector::Zero(n);       // sum_{i in N_j} a_i KL(Q_j||P_i)
    for (NodeId j = 0; j < n; ++j) {
        for (NodeId i : adjacency[j]) {
            na(j) += a(i);
            na_lp.row(j) += a(i) * lp.row(i);
            na_p.row(j) += a(i) * p.row(i);
            na_klqp(j) += a(i) * (hq(j) - q.row(j).dot(lp.row(i)));
        }
    }

    RowMatrix d_z1(n, d);
    RowMatrix d_z2(n, d);
    for (Index i = 0; i < n; ++i) {
        const double ab = a(i) + b(i);
        const double deg = static_cast<double>(adjacency[i].size());
        const double row_g = ab + eta * a(i) * deg - b(i) * static_cast<double>(n);
        // sum_j G_ij lnQ_j and sum_j G_ij Q_j
        const RowVector g_lq = ab * lq.row(i) + eta * a(i) * nbr_lq.row(i) - b(i) * colsum_lq;
        const RowVector g_q = ab * q.row(i) + eta * a(i) * nbr_q.row(i) - b(i) * colsum_q;
        // sum_j G_ij KL(P_i||Q_j)
        const double g_klpq = ab * klpq_diag(i) + eta * a(i) * nbr_klpq(i) - b(i) * rowsum_klpq(i);
        d_z1.row(i) = (p.row(i).array() * (lp.row(i).array() + 1.0) * row_g -
                       p.row(i).array() * g_lq.array() - g_q.array() -
                       p.row(i).array() * g_klpq)
                          .matrix();
    }
    for (Index j = 0; j < n; ++j) {
        const double ab = a(j) + b(j);
        const double col_g = ab + eta * na(j) - sum_b;
        const RowVector gt_lp = ab * lp.row(j) + eta * na_lp.row(j) - bt_lp;
        const RowVector gt_p = ab * p.row(j) + eta * na_p.row(j) - bt_p;
        const double klqp_jj = hq(j) - q.row(j).dot(lp.row(j));
        const double g_klqp =
            ab * klqp_jj + eta * na_klqp(j) - (sum_b * hq(j) - bt_lp.dot(q.row(j)));
        d_z2.row(j) = (q.row(j).array() * (lq.row(j).array() + 1.0) * col_g -
                       q.row(j).array() * gt_lp.array() - gt_p.array() -
                       q.row(j).array() * g_klqp)
                          .matrix();
    }
    out.d_z1 = d_z1;
    out.d_z2 = d_z2;
    return out;
}

} // namespace neucgc
