#pragma once

#include "neucgc/common.hpp"

#include <array>
#include <filesystem>
#include <string>

namespace neucgc {

enum class Preprocessing { kNone, kRowL2, kColStandardize };

struct EncoderConfig {
    Index input_dim = 0;
    Index latent_dim = 0;
    Index depth = 1;               // hidden widths equal latent_dim
    bool final_activation = true;  // tanh on the output layer
};

/// One view's multilayer perceptron. Layer l maps via
/// act(input * weights[l] + biases[l]); tanh everywhere, optionally linear
/// on the last layer.
struct Mlp {
    std::vector<Matrix> weights; // in x out per layer
    std::vector<Vector> biases;  // out per layer
};

/// Dual parameter-unshared encoders producing the two embedding views.
/// The two parameter sets live in disjoint storage by construction.
struct EncoderPair {
    EncoderConfig config;
    Mlp view1;
    Mlp view2;
    std::uint64_t seed = 0;
};

/// Two views plus their column-wise concatenation.
struct EmbeddingPair {
    Matrix z1;
    Matrix z2;
    Matrix fused; // [z1, z2], N x 2d
};

/// Per-layer outputs kept for backpropagation (entry l is layer l's output
/// after activation and, for the last layer, after the zero-row guard).
struct ForwardCache {
    std::vector<Matrix> outputs;
};

struct MlpGrads {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;
};

/// Uniform fan-in init (U[-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and
/// biases), the two views independently seeded. Deterministic per seed.
EncoderPair init_encoders(Index input_dim, Index latent_dim, Index depth, std::uint64_t seed,
                          bool final_activation = true);

Matrix preprocess_features(const Matrix& x, Preprocessing mode);

/// Forward pass of one view. Any exactly-zero output row is nudged by 1e-12
/// on its first component so downstream cosine similarities stay defined.
Matrix mlp_forward(const Mlp& mlp, const EncoderConfig& config, const Matrix& x,
                   ForwardCache* cache = nullptr);
Matrix mlp_forward(const Mlp& mlp, const EncoderConfig& config, const SparseMatrix& x,
                   ForwardCache* cache = nullptr);

/// Both views plus fusion.
EmbeddingPair encode(const EncoderPair& encoders, const Matrix& x,
                     std::array<ForwardCache, 2>* caches = nullptr);
EmbeddingPair encode(const EncoderPair& encoders, const SparseMatrix& x,
                     std::array<ForwardCache, 2>* caches = nullptr);

/// Column-wise concatenation [z1, z2].
Matrix fuse(const Matrix& z1, const Matrix& z2);

/// Backpropagates d(loss)/d(output) to parameter gradients.
MlpGrads mlp_backward(const Mlp& mlp, const EncoderConfig& config, const Matrix& x,
                      const ForwardCache& cache, const Matrix& d_output);
MlpGrads mlp_backward(const Mlp& mlp, const EncoderConfig& config, const SparseMatrix& x,
                      const ForwardCache& cache, const Matrix& d_output);

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vector> m_biases, v_biases;
    long step = 0;
};

AdamState make_adam_state(const Mlp& mlp);

/// Bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8).
void adam_step(Mlp& mlp, AdamState& state, const MlpGrads& grads, double learning_rate);

/// Versioned self-describing binary checkpoint of both parameter sets.
void save_checkpoint(const EncoderPair& encoders, const std::filesystem::path& path);
EncoderPair load_checkpoint(const std::filesystem::path& path);

} // namespace neucgc
