#include "neucgc/encoder.hpp"

#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace neucgc;

TEST_CASE("init_encoders") {
    const EncoderPair enc = init_encoders(10, 4, 1, 7);

    SUBCASE("shape contract") {
        CHECK(enc.view1.weights.size() == 1);
        CHECK(enc.view1.weights[0].rows() == 10);
        CHECK(enc.view1.weights[0].cols() == 4);
        CHECK(enc.view1.biases[0].size() == 4);
    }

    SUBCASE("same seed reproduces bit-identical parameters") {
        const EncoderPair enc2 = init_encoders(10, 4, 1, 7);
        CHECK(enc.view1.weights[0] == enc2.view1.weights[0]);
        CHECK(enc.view2.weights[0] == enc2.view2.weights[0]);
        CHECK(enc.view1.biases[0] == enc2.view1.biases[0]);
    }

    SUBCASE("different seeds differ in both views") {
        const EncoderPair enc2 = init_encoders(10, 4, 1, 8);
        CHECK(enc.view1.weights[0] != enc2.view1.weights[0]);
        CHECK(enc.view2.weights[0] != enc2.view2.weights[0]);
    }

    SUBCASE("the two views never share parameters") {
        CHECK(enc.view1.weights[0] != enc.view2.weights[0]);
        CHECK(enc.view1.weights[0].data() != enc.view2.weights[0].data());
    }

    SUBCASE("fan-in bound") {
        const double bound = 1.0 / std::sqrt(10.0);
        CHECK(enc.view1.weights[0].cwiseAbs().maxCoeff() <= bound);
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(init_encoders(0, 4, 1, 7), Error);
        CHECK_THROWS_AS(init_encoders(10, 4, 0, 7), Error);
    }
}

TEST_CASE("encode") {
    SUBCASE("identity weights with linear output reproduce the input block") {
        EncoderPair enc = init_encoders(3, 3, 1, 0, /*final_activation=*/false);
        enc.view1.weights[0] = Matrix::Identity(3, 3);
        enc.view1.biases[0].setZero();
        Matrix x(2, 3);
        x << 1, 0, 0, 0, 2, 0;
        const Matrix z = mlp_forward(enc.view1, enc.config, x);
        CHECK(z == x);
    }

    SUBCASE("hand matrix product") {
        EncoderPair enc = init_encoders(2, 1, 1, 0, false);
        enc.view1.weights[0] << 3, 4;
        enc.view1.biases[0].setZero();
        Matrix x(1, 2);
        x << 1, 2;
        CHECK(mlp_forward(enc.view1, enc.config, x)(0, 0) == doctest::Approx(11.0));
    }

    SUBCASE("shapes of both views and fusion") {
        const EncoderPair enc = init_encoders(10, 4, 1, 3);
        Rng rng(1);
        const Matrix x = oracle::random_matrix(5, 10, rng);
        const EmbeddingPair e = encode(enc, x);
        CHECK(e.z1.rows() == 5);
        CHECK(e.z1.cols() == 4);
        CHECK(e.z2.cols() == 4);
        CHECK(e.fused.rows() == 5);
        CHECK(e.fused.cols() == 8);
        CHECK(e.fused.leftCols(4) == e.z1);
        CHECK(e.fused.rightCols(4) == e.z2);
    }

    SUBCASE("deterministic and identical for dense and sparse input") {
        const EncoderPair enc = init_encoders(6, 3, 2, 5);
        Rng rng(2);
        Matrix x = oracle::random_matrix(4, 6, rng);
        x(0, 0) = 0.0; // some sparsity
        x(2, 3) = 0.0;
        SparseMatrix xs = x.sparseView();
        const EmbeddingPair dense = encode(enc, x);
        const EmbeddingPair sparse = encode(enc, xs);
        CHECK((dense.z1 - sparse.z1).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(encode(enc, x).z1 == dense.z1);
    }

    SUBCASE("zero input row is nudged off zero") {
        EncoderPair enc = init_encoders(2, 2, 1, 0);
        enc.view1.biases[0].setZero();
        Matrix x = Matrix::Zero(1, 2);
        const Matrix z = mlp_forward(enc.view1, enc.config, x);
        CHECK(z(0, 0) == 1e-12);
        CHECK(z.row(0).norm() > 0.0);
    }

    SUBCASE("dimension mismatch") {
        const EncoderPair enc = init_encoders(10, 4, 1, 3);
        CHECK_THROWS_AS(encode(enc, Matrix::Zero(5, 9)), Error);
    }
}

TEST_CASE("fuse") {
    SUBCASE("scalars") {
        Matrix a(1, 1), b(1, 1);
        a << 1;
        b << 2;
        Matrix f = fuse(a, b);
        CHECK(f.rows() == 1);
        CHECK(f(0, 0) == 1);
        CHECK(f(0, 1) == 2);
    }
    SUBCASE("identical views repeat the row") {
        Matrix a(1, 2);
        a << 3, 4;
        const Matrix f = fuse(a, a);
        CHECK(f(0, 0) == 3);
        CHECK(f(0, 2) == 3);
    }
    SUBCASE("2x3 blocks in order") {
        Rng rng(1);
        const Matrix a = oracle::random_matrix(2, 3, rng);
        const Matrix b = oracle::random_matrix(2, 3, rng);
        const Matrix f = fuse(a, b);
        CHECK(f.cols() == 6);
        CHECK(f.leftCols(3) == a);
        CHECK(f.rightCols(3) == b);
    }
    SUBCASE("row mismatch") {
        CHECK_THROWS_AS(fuse(Matrix::Zero(2, 2), Matrix::Zero(3, 2)), Error);
    }
}

TEST_CASE("mlp gradients match central differences to 1e-6") {
    // d(sum of Z entries)/d(theta) for depths 1 and 2
    for (Index depth : {Index(1), Index(2)}) {
        const Index n = 8, in_dim = 6, d = 4;
        EncoderPair enc = init_encoders(in_dim, d, depth, 21);
        Rng rng(31);
        const Matrix x = oracle::random_matrix(n, in_dim, rng);

        // pack/unpack view-1 parameters
        auto flatten = [&](const Mlp& mlp) {
            std::vector<double> v;
            for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
                for (Index i = 0; i < mlp.weights[l].size(); ++i) v.push_back(mlp.weights[l].data()[i]);
                for (Index i = 0; i < mlp.biases[l].size(); ++i) v.push_back(mlp.biases[l](i));
            }
            return Vector(Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size())));
        };
        auto unflatten = [&](const Vector& v) {
            Mlp mlp = enc.view1;
            Index pos = 0;
            for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
                for (Index i = 0; i < mlp.weights[l].size(); ++i) mlp.weights[l].data()[i] = v(pos++);
                for (Index i = 0; i < mlp.biases[l].size(); ++i) mlp.biases[l](i) = v(pos++);
            }
            return mlp;
        };

        const auto f = [&](const Vector& theta) {
            return mlp_forward(unflatten(theta), enc.config, x).sum();
        };

        ForwardCache cache;
        mlp_forward(enc.view1, enc.config, x, &cache);
        const MlpGrads grads =
            mlp_backward(enc.view1, enc.config, x, cache, Matrix::Ones(n, d));
        Mlp grad_as_mlp = enc.view1;
        grad_as_mlp.weights = grads.d_weights;
        grad_as_mlp.biases = grads.d_biases;

        const Vector analytic = flatten(grad_as_mlp);
        const Vector numeric = oracle::central_differences(f, flatten(enc.view1), 1e-6);
        CHECK(oracle::max_relative_error(analytic, numeric) < 1e-6);
    }
}

TEST_CASE("view-1 gradients are independent of view-2 storage") {
    // re-initializing the second view's storage must not change any gradient
    // taken with respect to the first view's parameters
    const Index n = 5, in_dim = 4, d = 3;
    Rng rng(51);
    const Matrix x = oracle::random_matrix(n, in_dim, rng);
    EncoderPair enc = init_encoders(in_dim, d, 1, 33);

    auto view1_grads = [&](const EncoderPair& e) {
        std::array<ForwardCache, 2> caches;
        const EmbeddingPair emb = encode(e, x, &caches);
        // a loss coupling both views: sum of the elementwise product
        const Matrix d_z1 = emb.z2;
        return mlp_backward(e.view1, e.config, x, caches[0], d_z1);
    };

    const MlpGrads before = view1_grads(enc);

    // move view 2 into fresh storage, values preserved
    EncoderPair moved = enc;
    moved.view2.weights[0] = Matrix(enc.view2.weights[0]);
    moved.view2.biases[0] = Vector(enc.view2.biases[0]);
    REQUIRE(moved.view2.weights[0].data() != enc.view2.weights[0].data());

    const MlpGrads after = view1_grads(moved);
    CHECK(before.d_weights[0] == after.d_weights[0]);
    CHECK(before.d_biases[0] == after.d_biases[0]);
}

TEST_CASE("adam step moves parameters and is deterministic") {
    EncoderPair a = init_encoders(4, 3, 1, 5);
    EncoderPair b = init_encoders(4, 3, 1, 5);
    AdamState sa = make_adam_state(a.view1);
    AdamState sb = make_adam_state(b.view1);
    MlpGrads g;
    g.d_weights.push_back(Matrix::Ones(4, 3));
    g.d_biases.push_back(Vector::Ones(3));
    adam_step(a.view1, sa, g, 1e-2);
    adam_step(b.view1, sb, g, 1e-2);
    CHECK(a.view1.weights[0] == b.view1.weights[0]);
    CHECK(a.view1.weights[0] != init_encoders(4, 3, 1, 5).view1.weights[0]);
}

TEST_CASE("checkpoint round-trip") {
    const EncoderPair enc = init_encoders(7, 3, 2, 13);
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / ("neucgc_ckpt_" + std::to_string(::getpid()));
    save_checkpoint(enc, path);
    const EncoderPair back = load_checkpoint(path);
    std::filesystem::remove(path);

    CHECK(back.seed == enc.seed);
    CHECK(back.config.input_dim == 7);
    CHECK(back.config.depth == 2);
    for (std::size_t l = 0; l < enc.view1.weights.size(); ++l) {
        CHECK(back.view1.weights[l] == enc.view1.weights[l]);
        CHECK(back.view2.weights[l] == enc.view2.weights[l]);
        CHECK(back.view1.biases[l] == enc.view1.biases[l]);
    }
}

TEST_CASE("preprocessing modes") {
    Matrix x(2, 2);
    x << 3.0, 4.0, 0.0, 0.0;

    SUBCASE("none is the identity") { CHECK(preprocess_features(x, Preprocessing::kNone) == x); }

    SUBCASE("row L2 normalizes nonzero rows and keeps zero rows") {
        const Matrix out = preprocess_features(x, Preprocessing::kRowL2);
        CHECK(out.row(0).norm() == doctest::Approx(1.0));
        CHECK(out(0, 0) == doctest::Approx(0.6));
        CHECK(out.row(1).norm() == 0.0);
    }

    SUBCASE("column standardization zero-means the columns") {
        Rng rng(3);
        const Matrix r = oracle::random_matrix(10, 3, rng, 2.0);
        const Matrix out = preprocess_features(r, Preprocessing::kColStandardize);
        CHECK(out.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    }
}
