#pragma once

#include "neucgc/common.hpp"

namespace neucgc {

/// Probability mass floor applied before every log.
inline constexpr double kProbFloor = 1e-12;

/// Value plus gradients with respect to the two embedding views.
struct LossGrad {
    double value = 0.0;
    Matrix d_z1;
    Matrix d_z2;
};

/// Row-wise probability view of an embedding matrix, cached together with
/// the quantities the losses reuse (logs and negative entropies). Stored
/// row-major: every consumer streams whole rows.
struct RowDistributions {
    RowMatrix probs;       // N x d, each row a distribution
    RowMatrix log_probs;   // elementwise log of probs
    Vector neg_entropy;    // row i: sum_s probs(i,s) * log_probs(i,s)
};

/// Softmax over the d components of one latent vector, floored at kProbFloor
/// and renormalized.
Vector node_distribution(const Vector& z);

/// Row-wise node_distribution over a whole embedding matrix.
RowDistributions row_distributions(const Matrix& z);

/// Symmetric KL divergence D_KL(P||Q) + D_KL(Q||P), natural log.
double skl_divergence(const Vector& p, const Vector& q);

/// Global distribution alignment: SKL between the softmax of the two
/// flattened views plus the sum over nodes of row-level SKL.
double gda_loss(const Matrix& z1, const Matrix& z2);

/// gda_loss with analytic gradients. `rows1`/`rows2` must be the row
/// distributions of z1/z2 (shared with the NCA path by the trainer).
LossGrad gda_loss_grad(const Matrix& z1, const Matrix& z2, const RowDistributions& rows1,
                       const RowDistributions& rows2);

/// Pairwise cross-view SKL matrix: K(i, j) = SKL(row_i of view 1, row_j of
/// view 2), entries floored at kProbFloor. Computed in row blocks of
/// `block_rows` (<= 0 means unchunked); the per-entry arithmetic is a fixed
/// dot-product order, so block size does not change a single bit of output.
Matrix pairwise_skl_matrix(const Matrix& z1, const Matrix& z2, Index block_rows = 0);

namespace detail {
/// d SKL(p, q) / d a where p = softmax(a); `kl_pq` = D_KL(p||q).
Vector skl_grad_wrt_logits(const Vector& p, const Vector& log_p, const Vector& q,
                           const Vector& log_q, double kl_pq);
} // namespace detail

} // namespace neucgc
