#pragma once

#include "neucgc/common.hpp"
#include "neucgc/distributions.hpp"

namespace neucgc {

/// Scope of the min-max normalization applied to the similarity matrix.
/// Global keeps the adaptive threshold and the masked similarities on one
/// scale; per-row is exposed as a config alternative.
enum class NormScope { kGlobal, kRow };

/// Cross-view cosine similarity S plus the row-normalized embeddings needed
/// to backpropagate through it.
struct CosineCache {
    Matrix z1_hat;     // rows of z1, L2 normalized
    Matrix z2_hat;
    Vector inv_norm1;  // 1 / ||z1_i||
    Vector inv_norm2;
    Matrix s;          // s(i, j) = cosine(z1_i, z2_j)
};

CosineCache cosine_cache(const Matrix& z1, const Matrix& z2);

/// S(i, j) = cosine(z1_i, z2_j). Zero rows must have been guarded upstream.
Matrix cross_view_similarity(const Matrix& z1, const Matrix& z2);

/// Min-max scaling to [0, 1]; if max == min everything maps to 0.5.
Matrix minmax_normalize(const Matrix& s, NormScope scope = NormScope::kGlobal);

/// Adaptive threshold xi: mean of the diagonal of norm(S).
double similarity_threshold(const Matrix& norm_s);

/// Neutral contrastive factor eta: per non-isolated node, the fraction of
/// neighbors k with norm(S)(i, k) >= xi, averaged over those nodes.
double neutral_contrastive_factor(const Matrix& norm_s, const AdjacencyList& adjacency,
                                  double xi);

/// Neighborhood distribution alignment loss on a materialized SKL matrix.
double nca_loss(const Matrix& k, const AdjacencyList& adjacency, double eta);

/// Same loss computed straight from the row distributions, with analytic
/// gradients with respect to both views. Avoids materializing K: the K row
/// sums reduce to O(N d) via column aggregates, edges contribute O(E d).
LossGrad nca_loss_grad(const RowDistributions& rows1, const RowDistributions& rows2,
                       const AdjacencyList& adjacency, double eta);

} // namespace neucgc
