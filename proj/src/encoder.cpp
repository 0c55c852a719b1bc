#include "neucgc/encoder.hpp"

#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace neucgc {

namespace {

constexpr double kZeroRowNudge = 1e-12;

Mlp init_view(const EncoderConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    Mlp mlp;
    Index in = cfg.input_dim;
    for (Index l = 0; l < cfg.depth; ++l) {
        const Index out = cfg.latent_dim;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Matrix w(in, out);
        for (Index i = 0; i < in; ++i)
            for (Index j = 0; j < out; ++j) w(i, j) = rng.uniform(-bound, bound);
        Vector b(out);
        for (Index j = 0; j < out; ++j) b(j) = rng.uniform(-bound, bound);
        mlp.weights.push_back(std::move(w));
        mlp.biases.push_back(std::move(b));
        in = out;
    }
    return mlp;
}

void guard_zero_rows(Matrix& z) {
    for (Index i = 0; i < z.rows(); ++i) {
        if ((z.row(i).array() == 0.0).all()) z(i, 0) = kZeroRowNudge;
    }
}

template <typename Input>
Matrix forward_impl(const Mlp& mlp, const EncoderConfig& cfg, const Input& x,
                    ForwardCache* cache) {
    if (x.cols() != cfg.input_dim) {
        throw_error(ErrorCode::kShape, "encode: input has " + std::to_string(x.cols()) +
                                           " columns, encoder expects " +
                                           std::to_string(cfg.input_dim));
    }
    if (cache) cache->outputs.clear();
    Matrix h = x * mlp.weights[0];
    for (std::size_t l = 0;; ++l) {
        h.rowwise() += mlp.biases[l].transpose();
        const bool last = l + 1 == mlp.weights.size();
        if (!last || cfg.final_activation) h = h.array().tanh();
        if (last) guard_zero_rows(h);
        if (cache) cache->outputs.push_back(h);
        if (last) break;
        h = h * mlp.weights[l + 1];
    }
    return h;
}

template <typename Input>
MlpGrads backward_impl(const Mlp& mlp, const EncoderConfig& cfg, const Input& x,
                       const ForwardCache& cache, const Matrix& d_output) {
    const auto layers = mlp.weights.size();
    MlpGrads grads;
    grads.d_weights.resize(layers);
    grads.d_biases.resize(layers);

    Matrix d_out = d_output;
    for (std::size_t l = layers; l-- > 0;) {
        const bool last = l + 1 == layers;
        Matrix d_pre;
        if (!last || cfg.final_activation) {
            d_pre = d_out.array() * (1.0 - cache.outputs[l].array().square());
        } else {
            d_pre = std::move(d_out);
        }
        if (l == 0) {
            grads.d_weights[0] = x.transpose() * d_pre;
        } else {
            grads.d_weights[l] = cache.outputs[l - 1].transpose() * d_pre;
        }
        grads.d_biases[l] = d_pre.colwise().sum();
        if (l > 0) d_out = d_pre * mlp.weights[l].transpose();
    }
    return grads;
}

template <typename Input>
EmbeddingPair encode_impl(const EncoderPair& enc, const Input& x,
                          std::array<ForwardCache, 2>* caches) {
    EmbeddingPair e;
    e.z1 = forward_impl(enc.view1, enc.config, x, caches ? &(*caches)[0] : nullptr);
    e.z2 = forward_impl(enc.view2, enc.config, x, caches ? &(*caches)[1] : nullptr);
    e.fused = fuse(e.z1, e.z2);
    return e;
}

} // namespace

EncoderPair init_encoders(Index input_dim, Index latent_dim, Index depth, std::uint64_t seed,
                          bool final_activation) {
    if (input_dim < 1 || latent_dim < 1 || depth < 1) {
        throw_error(ErrorCode::kParam, "init_encoders: dims and depth must be >= 1");
    }
    EncoderPair enc;
    enc.config = {input_dim, latent_dim, depth, final_activation};
    enc.seed = seed;
    enc.view1 = init_view(enc.config, derive_seed(seed, 1));
    enc.view2 = init_view(enc.config, derive_seed(seed, 2));
    return enc;
}

Matrix preprocess_features(const Matrix& x, Preprocessing mode) {
    switch (mode) {
        case Preprocessing::kNone:
            return x;
        case Preprocessing::kRowL2: {
            Matrix out = x;
            for (Index i = 0; i < out.rows(); ++i) {
                const double norm = out.row(i).norm();
                if (norm > 0.0) out.row(i) /= norm;
            }
            return out;
        }
        case Preprocessing::kColStandardize: {
            Matrix out = x;
            const RowVector mean = out.colwise().mean();
            out.rowwise() -= mean;
            RowVector stddev = (out.array().square().colwise().sum() /
                                std::max<double>(1.0, static_cast<double>(out.rows())))
                                   .sqrt();
            for (Index j = 0; j < out.cols(); ++j)
                if (stddev(j) > 0.0) out.col(j) /= stddev(j);
            return out;
        }
    }
    throw_error(ErrorCode::kParam, "unknown preprocessing mode");
}

Matrix mlp_forward(const Mlp& mlp, const EncoderConfig& cfg, const Matrix& x, ForwardCache* cache) {
    return forward_impl(mlp, cfg, x, cache);
}

Matrix mlp_forward(const Mlp& mlp, const EncoderConfig& cfg, const SparseMatrix& x,
                   ForwardCache* cache) {
    return forward_impl(mlp, cfg, x, cache);
}

EmbeddingPair encode(const EncoderPair& enc, const Matrix& x, std::array<ForwardCache, 2>* caches) {
    return encode_impl(enc, x, caches);
}

EmbeddingPair encode(const EncoderPair& enc, const SparseMatrix& x,
                     std::array<ForwardCache, 2>* caches) {
    return encode_impl(enc, x, caches);
}

Matrix fuse(const Matrix& z1, const Matrix& z2) {
    if (z1.rows() != z2.rows()) throw_error(ErrorCode::kShape, "fuse: row count mismatch");
    Matrix fused(z1.rows(), z1.cols() + z2.cols());
    fused << z1, z2;
    return fused;
}

MlpGrads mlp_backward(const Mlp& mlp, const EncoderConfig& cfg, const Matrix& x,
                      const ForwardCache& cache, const Matrix& d_output) {
    return backward_impl(mlp, cfg, x, cache, d_output);
}

MlpGrads mlp_backward(const Mlp& mlp, const EncoderConfig& cfg, const SparseMatrix& x,
                      const ForwardCache& cache, const Matrix& d_output) {
    return backward_impl(mlp, cfg, x, cache, d_output);
}

AdamState make_adam_state(const Mlp& mlp) {
    AdamState s;
    for (const auto& w : mlp.weights) {
        s.m_weights.push_back(Matrix::Zero(w.rows(), w.cols()));
        s.v_weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : mlp.biases) {
        s.m_biases.push_back(Vector::Zero(b.size()));
        s.v_biases.push_back(Vector::Zero(b.size()));
    }
    return s;
}

void adam_step(Mlp& mlp, AdamState& state, const MlpGrads& grads, double learning_rate) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        state.m_weights[l] = beta1 * state.m_weights[l] + (1.0 - beta1) * grads.d_weights[l];
        state.v_weights[l] =
            beta2 * state.v_weights[l].array() + (1.0 - beta2) * grads.d_weights[l].array().square();
        mlp.weights[l].array() -= learning_rate * (state.m_weights[l].array() / bc1) /
                                  ((state.v_weights[l].array() / bc2).sqrt() + eps);

        state.m_biases[l] = beta1 * state.m_biases[l] + (1.0 - beta1) * grads.d_biases[l];
        state.v_biases[l] =
            beta2 * state.v_biases[l].array() + (1.0 - beta2) * grads.d_biases[l].array().square();
        mlp.biases[l].array() -= learning_rate * (state.m_biases[l].array() / bc1) /
                                 ((state.v_biases[l].array() / bc2).sqrt() + eps);
    }
}

namespace {

constexpr char kMagic[4] = {'N', 'C', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

Matrix read_matrix(std::istream& in) {
    const auto rows = static_cast<Index>(read_u64(in));
    const auto cols = static_cast<Index>(read_u64(in));
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    return m;
}

void write_mlp(std::ostream& out, const Mlp& mlp) {
    write_u64(out, mlp.weights.size());
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        write_matrix(out, mlp.weights[l]);
        write_matrix(out, mlp.biases[l]);
    }
}

Mlp read_mlp(std::istream& in) {
    Mlp mlp;
    const auto layers = read_u64(in);
    for (std::uint64_t l = 0; l < layers; ++l) {
        mlp.weights.push_back(read_matrix(in));
        mlp.biases.push_back(read_matrix(in).col(0));
    }
    return mlp;
}

} // namespace

void save_checkpoint(const EncoderPair& enc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    write_u64(out, static_cast<std::uint64_t>(enc.config.input_dim));
    write_u64(out, static_cast<std::uint64_t>(enc.config.latent_dim));
    write_u64(out, static_cast<std::uint64_t>(enc.config.depth));
    write_u64(out, enc.config.final_activation ? 1 : 0);
    write_u64(out, enc.seed);
    write_mlp(out, enc.view1);
    write_mlp(out, enc.view2);
    if (!out) throw_error(ErrorCode::kIo, "failed writing checkpoint " + path.string());
}

EncoderPair load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
    char magic[4];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw_error(ErrorCode::kFormat, "not a checkpoint file: " + path.string());
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kVersion) {
        throw_error(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
    }
    EncoderPair enc;
    enc.config.input_dim = static_cast<Index>(read_u64(in));
    enc.config.latent_dim = static_cast<Index>(read_u64(in));
    enc.config.depth = static_cast<Index>(read_u64(in));
    enc.config.final_activation = read_u64(in) != 0;
    enc.seed = read_u64(in);
    enc.view1 = read_mlp(in);
    enc.view2 = read_mlp(in);
    if (!in) throw_error(ErrorCode::kFormat, "truncated checkpoint " + path.string());
    return enc;
}

} // namespace neucgc
