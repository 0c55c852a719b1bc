#include "neucgc/distributions.hpp"

#include "neucgc/error.hpp"

#include <cmath>

namespace neucgc {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw_error(ErrorCode::kShape, std::string(op) + ": shape mismatch " +
                                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                           " vs " + std::to_string(b.rows()) + "x" +
                                           std::to_string(b.cols()));
    }
}

/// Softmax with max subtraction, then floor + renormalize.
Vector softmax_clamped(const Vector& z) {
    Vector p = (z.array() - z.maxCoeff()).exp();
    p /= p.sum();
    p = p.cwiseMax(kProbFloor);
    p /= p.sum();
    return p;
}

} // namespace

Vector node_distribution(const Vector& z) {
    if (!z.allFinite()) throw_error(ErrorCode::kNumeric, "node_distribution: non-finite input");
    return softmax_clamped(z);
}

RowDistributions row_distributions(const Matrix& z) {
    if (!z.allFinite()) throw_error(ErrorCode::kNumeric, "row_distributions: non-finite input");
    RowDistributions r;
    r.probs = z; // converts to row-major; rows are contiguous from here on
    for (Index i = 0; i < r.probs.rows(); ++i) {
        auto row = r.probs.row(i).array();
        row = (row - row.maxCoeff()).exp();
        row /= row.sum();
        row = row.max(kProbFloor);
        row /= row.sum();
    }
    r.log_probs = r.probs.array().log();
    r.neg_entropy = (r.probs.array() * r.log_probs.array()).rowwise().sum();
    return r;
}

double skl_divergence(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw_error(ErrorCode::kShape, "skl_divergence: length mismatch");
    // (p-q)(log p - log q) is elementwise non-negative, so the sum is >= 0
    // and symmetric in the arguments down to the last bit.
    return ((p - q).array() * (p.array().log() - q.array().log())).sum();
}

namespace detail {

Vector skl_grad_wrt_logits(const Vector& p, const Vector& log_p, const Vector& q,
                           const Vector& log_q, double kl_pq) {
    return (p.array() * (log_p - log_q).array() + p.array() - q.array() - p.array() * kl_pq).matrix();
}

} // namespace detail

double gda_loss(const Matrix& z1, const Matrix& z2) {
    check_same_shape(z1, z2, "gda_loss");
    const Vector g1 = softmax_clamped(z1.reshaped());
    const Vector g2 = softmax_clamped(z2.reshaped());
    double loss = skl_divergence(g1, g2);
    const RowDistributions r1 = row_distributions(z1);
    const RowDistributions r2 = row_distributions(z2);
    for (Index i = 0; i < z1.rows(); ++i) {
        loss += ((r1.probs.row(i) - r2.probs.row(i)).array() *
                 (r1.log_probs.row(i) - r2.log_probs.row(i)).array())
                    .sum();
    }
    return loss;
}

LossGrad gda_loss_grad(const Matrix& z1, const Matrix& z2, const RowDistributions& rows1,
                       const RowDistributions& rows2) {
    check_same_shape(z1, z2, "gda_loss");
    const Index n = z1.rows();
    LossGrad out;

    // global term over the flattened views
    const Vector g1 = softmax_clamped(z1.reshaped());
    const Vector g2 = softmax_clamped(z2.reshaped());
    const Vector lg1 = g1.array().log();
    const Vector lg2 = g2.array().log();
    const double kl12 = (g1.array() * (lg1 - lg2).array()).sum();
    const double kl21 = (g2.array() * (lg2 - lg1).array()).sum();
    out.value = kl12 + kl21;
    RowMatrix d1 = detail::skl_grad_wrt_logits(g1, lg1, g2, lg2, kl12).reshaped(n, z1.cols());
    RowMatrix d2 = detail::skl_grad_wrt_logits(g2, lg2, g1, lg1, kl21).reshaped(n, z1.cols());

    // node-level terms, streaming the cached row-major distributions
    for (Index i = 0; i < n; ++i) {
        const auto p = rows1.probs.row(i).array();
        const auto lp = rows1.log_probs.row(i).array();
        const auto q = rows2.probs.row(i).array();
        const auto lq = rows2.log_probs.row(i).array();
        const double kl_pq = (p * (lp - lq)).sum();
        const double kl_qp = (q * (lq - lp)).sum();
        out.value += kl_pq + kl_qp;
        d1.row(i).array() += p * (lp - lq) + p - q - p * kl_pq;
        d2.row(i).array() += q * (lq - lp) + q - p - q * kl_qp;
    }
    out.d_z1 = d1;
    out.d_z2 = d2;
    return out;
}

Matrix pairwise_skl_matrix(const Matrix& z1, const Matrix& z2, Index block_rows) {
    check_same_shape(z1, z2, "pairwise_skl_matrix");
    const Index n = z1.rows();
    const RowDistributions r1 = row_distributions(z1);
    const RowDistributions r2 = row_distributions(z2);

    Matrix k(n, n);
    const Index block = block_rows > 0 ? block_rows : n;
    const Index n_blocks = (n + block - 1) / block;
    // blocks write disjoint rows and every entry is a fixed-order dot
    // product, so the parallel result is bit-identical to the serial one
#pragma omp parallel for schedule(static)
    for (Index b = 0; b < n_blocks; ++b) {
        const Index start = b * block;
        const Index end = std::min(n, start + block);
        for (Index i = start; i < end; ++i) {
            for (Index j = 0; j < n; ++j) {
                // K_ij = KL(P_i || Q_j) + KL(Q_j || P_i), expanded so each
                // entry is two fixed-order dot products.
                const double v = r1.neg_entropy(i) - r1.probs.row(i).dot(r2.log_probs.row(j)) +
                                 r2.neg_entropy(j) - r2.probs.row(j).dot(r1.log_probs.row(i));
                k(i, j) = std::max(v, kProbFloor);
            }
        }
    }
    return k;
}

} // namespace neucgc
