#include "neucgc/trainer.hpp"

#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace neucgc;
namespace fs = std::filesystem;

namespace {

AttributedGraph small_sbm(std::uint64_t seed = 1) {
    SbmParams p;
    p.n_nodes = 48;
    p.n_classes = 3;
    p.p_in = 0.3;
    p.p_out = 0.02;
    p.feature_dim = 8;
    p.feature_noise = 0.6;
    p.seed = seed;
    return generate_sbm(p);
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.latent_dim = 8;
    cfg.epochs = 5;
    cfg.learning_rate = 1e-3;
    cfg.k_fraction = 0.5;
    cfg.seed = 7;
    cfg.kmeans_restarts = 2;
    cfg.kmeans_max_iter = 50;
    return cfg;
}

} // namespace

TEST_CASE("total_loss combination") {
    CHECK(total_loss(3.5, 9.9, 4.4, 0.0, 0.0) == doctest::Approx(3.5));
    CHECK(total_loss(1.0, 2.0, 3.0, 0.1, 1.0) == doctest::Approx(4.2));
    // the grid endpoints are plain numbers, nothing special about them
    for (double lambda : {0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0}) {
        CHECK(std::isfinite(total_loss(1.0, 1.0, 1.0, lambda, lambda)));
    }
}

TEST_CASE("training runs and keeps all losses finite and non-negative") {
    const AttributedGraph g = small_sbm();
    const TrainResult r = train(g, small_config());
    REQUIRE(r.per_epoch.size() == 5);
    for (const EpochRecord& rec : r.per_epoch) {
        CHECK(std::isfinite(rec.l_total));
        CHECK(rec.l_nca >= 0.0);
        CHECK(rec.l_afc >= 0.0);
        CHECK(rec.l_gda >= 0.0);
        CHECK(rec.eta >= 0.0);
        CHECK(rec.eta <= 1.0);
        CHECK(rec.xi >= 0.0);
        CHECK(rec.xi <= 1.0);
        CHECK(rec.h_support_edges >= g.num_edges()); // support contains A
        CHECK(std::isfinite(rec.acc));               // labels present
    }
    CHECK(r.final_assignments.size() == 48);
    CHECK(r.has_final_metrics);
}

TEST_CASE("fixed-seed reruns are bit-identical") {
    const AttributedGraph g = small_sbm();
    const TrainResult a = train(g, small_config());
    const TrainResult b = train(g, small_config());
    REQUIRE(a.per_epoch.size() == b.per_epoch.size());
    for (std::size_t e = 0; e < a.per_epoch.size(); ++e) {
        CHECK(a.per_epoch[e].l_nca == b.per_epoch[e].l_nca);
        CHECK(a.per_epoch[e].l_afc == b.per_epoch[e].l_afc);
        CHECK(a.per_epoch[e].l_gda == b.per_epoch[e].l_gda);
        CHECK(a.per_epoch[e].l_total == b.per_epoch[e].l_total);
        CHECK(a.per_epoch[e].eta == b.per_epoch[e].eta);
    }
    CHECK(a.final_assignments == b.final_assignments);
}

TEST_CASE("removing labels changes no loss value") {
    AttributedGraph g = small_sbm();
    TrainConfig cfg = small_config();
    const TrainResult with_labels = train(g, cfg);

    AttributedGraph stripped = small_sbm();
    stripped.strip_labels();
    cfg.n_clusters = 3; // labels no longer imply the cluster count
    const TrainResult without = train(stripped, cfg);

    REQUIRE(with_labels.per_epoch.size() == without.per_epoch.size());
    for (std::size_t e = 0; e < without.per_epoch.size(); ++e) {
        CHECK(with_labels.per_epoch[e].l_nca == without.per_epoch[e].l_nca);
        CHECK(with_labels.per_epoch[e].l_afc == without.per_epoch[e].l_afc);
        CHECK(with_labels.per_epoch[e].l_gda == without.per_epoch[e].l_gda);
        CHECK(with_labels.per_epoch[e].l_total == without.per_epoch[e].l_total);
    }
    CHECK(!without.has_final_metrics);
    CHECK(std::isnan(without.per_epoch[0].acc));
    CHECK(with_labels.final_assignments == without.final_assignments);
}

TEST_CASE("combined objective gradient matches central differences (frozen H, eta)") {
    // N=8, D=6, d=4 instance; H and eta held constant
    const Index n = 8, in_dim = 6, d = 4;
    Rng rng(41);
    const Matrix x = oracle::random_matrix(n, in_dim, rng);
    const AdjacencyList adj = oracle::random_adjacency(n, 0.4, rng);
    const double eta = 0.35, lambda1 = 0.7, lambda2 = 0.4;

    EncoderPair enc = init_encoders(in_dim, d, 1, 17);

    // freeze H from the initial embeddings
    const EmbeddingPair emb0 = encode(enc, x);
    const Matrix norm_s0 = minmax_normalize(cross_view_similarity(emb0.z1, emb0.z2));
    HighConfidenceSet hc;
    for (NodeId i = 0; i < n / 2; ++i) {
        hc.node_ids.push_back(i);
        hc.pseudo_labels.push_back(i % 2);
    }
    hc.confidence_scores = Vector::Zero(n / 2);
    const HighConfidenceGraph h = build_high_confidence_graph(hc, adj, norm_s0);

    auto objective = [&](const EncoderPair& e) {
        const EmbeddingPair emb = encode(e, x);
        const Matrix k = pairwise_skl_matrix(emb.z1, emb.z2);
        const Matrix s = cross_view_similarity(emb.z1, emb.z2);
        return total_loss(nca_loss(k, adj, eta), afc_loss(s, h), gda_loss(emb.z1, emb.z2),
                          lambda1, lambda2);
    };

    // analytic gradient
    std::array<ForwardCache, 2> caches;
    const EmbeddingPair emb = encode(enc, x, &caches);
    const RowDistributions r1 = row_distributions(emb.z1);
    const RowDistributions r2 = row_distributions(emb.z2);
    const LossGrad nca = nca_loss_grad(r1, r2, adj, eta);
    const LossGrad afc = afc_loss_grad(cosine_cache(emb.z1, emb.z2), h);
    const LossGrad gda = gda_loss_grad(emb.z1, emb.z2, r1, r2);
    const Matrix d_z1 = nca.d_z1 + lambda1 * afc.d_z1 + lambda2 * gda.d_z1;
    const Matrix d_z2 = nca.d_z2 + lambda1 * afc.d_z2 + lambda2 * gda.d_z2;
    const MlpGrads g1 = mlp_backward(enc.view1, enc.config, x, caches[0], d_z1);
    const MlpGrads g2 = mlp_backward(enc.view2, enc.config, x, caches[1], d_z2);

    // finite differences over every parameter of both views
    for (int view = 0; view < 2; ++view) {
        Mlp& mlp = view == 0 ? enc.view1 : enc.view2;
        const MlpGrads& analytic = view == 0 ? g1 : g2;
        Vector a(in_dim * d + d), f(in_dim * d + d);
        Index pos = 0;
        for (Index i = 0; i < mlp.weights[0].size(); ++i) {
            double& theta = mlp.weights[0].data()[i];
            const double saved = theta, step = 1e-5 * std::max(1.0, std::abs(saved));
            theta = saved + step;
            const double hi = objective(enc);
            theta = saved - step;
            const double lo = objective(enc);
            theta = saved;
            a(pos) = analytic.d_weights[0].data()[i];
            f(pos++) = (hi - lo) / (2.0 * step);
        }
        for (Index i = 0; i < mlp.biases[0].size(); ++i) {
            double& theta = mlp.biases[0](i);
            const double saved = theta, step = 1e-5 * std::max(1.0, std::abs(saved));
            theta = saved + step;
            const double hi = objective(enc);
            theta = saved - step;
            const double lo = objective(enc);
            theta = saved;
            a(pos) = analytic.d_biases[0](i);
            f(pos++) = (hi - lo) / (2.0 * step);
        }
        CHECK(oracle::max_relative_error(a, f) < 1e-4);
    }
}

TEST_CASE("run_diagnostics on the H support") {
    const AttributedGraph g = small_sbm();

    SUBCASE("H with exactly the original edges reproduces the graph ratios") {
        HighConfidenceGraph h;
        h.n = g.num_nodes();
        h.rows.assign(static_cast<std::size_t>(h.n), {});
        Index edges = 0;
        for (NodeId i = 0; i < h.n; ++i)
            for (NodeId j : g.neighbors_of(i)) {
                h.rows[static_cast<std::size_t>(i)].emplace_back(j, 0.5);
                if (i < j) ++edges;
            }
        h.support_edges = edges;
        const SupportDiagnostics d = run_diagnostics(g, h);
        CHECK(d.homophily_ratio == doctest::Approx(homophily_ratio(g)));
        CHECK(d.congener_ratio == doctest::Approx(congener_ratio(g)));
    }

    SUBCASE("adding only same-label pairs can only raise r_h") {
        HighConfidenceGraph h;
        h.n = g.num_nodes();
        h.rows.assign(static_cast<std::size_t>(h.n), {});
        Index edges = 0;
        for (NodeId i = 0; i < h.n; ++i)
            for (NodeId j : g.neighbors_of(i)) {
                h.rows[static_cast<std::size_t>(i)].emplace_back(j, 1.0);
                if (i < j) ++edges;
            }
        // splice in a few extra same-label pairs
        const IntVector& y = g.labels();
        for (NodeId i = 0; i + 1 < h.n && edges < g.num_edges() + 5; ++i) {
            for (NodeId j = i + 1; j < h.n; ++j) {
                if (y[i] != y[j]) continue;
                auto& row = h.rows[static_cast<std::size_t>(i)];
                if (std::none_of(row.begin(), row.end(), [&](auto& e) { return e.first == j; })) {
                    row.emplace_back(j, 1.0);
                    h.rows[static_cast<std::size_t>(j)].emplace_back(i, 1.0);
                    ++edges;
                    break;
                }
            }
        }
        h.support_edges = edges;
        const SupportDiagnostics d = run_diagnostics(g, h);
        CHECK(d.homophily_ratio >= homophily_ratio(g) - 1e-12);
    }

    SUBCASE("labels are required") {
        AttributedGraph stripped = small_sbm();
        stripped.strip_labels();
        HighConfidenceGraph h;
        h.n = stripped.num_nodes();
        h.rows.assign(static_cast<std::size_t>(h.n), {});
        CHECK_THROWS_AS(run_diagnostics(stripped, h), Error);
    }
}

TEST_CASE("trainer config paths") {
    SUBCASE("fixed eta is honored") {
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 2;
        cfg.eta_mode = EtaMode::kFixed;
        cfg.eta_fixed = 1.0;
        const TrainResult r = train(g, cfg);
        CHECK(r.per_epoch[0].eta == 1.0);
        CHECK(r.per_epoch[1].eta == 1.0);
    }

    SUBCASE("lambda1 = lambda2 = 0 reduces the total to the NCA term") {
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 3;
        cfg.lambda1 = 0.0;
        cfg.lambda2 = 0.0;
        const TrainResult r = train(g, cfg);
        for (const EpochRecord& rec : r.per_epoch) CHECK(rec.l_total == rec.l_nca);
    }

    SUBCASE("lambda = 0 with eta pinned to 0 leaves a decreasing NCA-only curve") {
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 60;
        cfg.lambda1 = 0.0;
        cfg.lambda2 = 0.0;
        cfg.eta_mode = EtaMode::kFixed;
        cfg.eta_fixed = 0.0;
        const TrainResult r = train(g, cfg);
        double first = 0.0, last = 0.0;
        for (int e = 0; e < 10; ++e) {
            first += r.per_epoch[static_cast<std::size_t>(e)].l_nca;
            last += r.per_epoch[r.per_epoch.size() - 1 - static_cast<std::size_t>(e)].l_nca;
        }
        CHECK(last < first); // downward trend of the self-alignment objective
    }

    SUBCASE("zero-edge graph falls back to eta 0") {
        Matrix x(4, 3);
        x << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
        AttributedGraph g(x, {}, IntVector{0, 0, 1, 1});
        TrainConfig cfg = small_config();
        cfg.epochs = 2;
        cfg.latent_dim = 3;
        const TrainResult r = train(g, cfg);
        CHECK(r.per_epoch[0].eta == 0.0);
    }

    SUBCASE("kmeans interval reuses pseudo-labels between refreshes") {
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 4;
        cfg.kmeans_interval = 2;
        const TrainResult r = train(g, cfg);
        CHECK(r.per_epoch.size() == 4);
    }

    SUBCASE("early stop cuts the epoch budget") {
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 200;
        cfg.learning_rate = 1e-9; // effectively frozen: no improvement
        cfg.early_stop = true;
        cfg.early_stop_patience = 10;
        const TrainResult r = train(g, cfg);
        CHECK(r.per_epoch.size() < 200);
    }

    SUBCASE("run log and checkpoint are written") {
        const fs::path dir = fs::temp_directory_path() / ("neucgc_train_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        const AttributedGraph g = small_sbm();
        TrainConfig cfg = small_config();
        cfg.epochs = 3;
        cfg.log_path = (dir / "run.jsonl").string();
        cfg.checkpoint_path = (dir / "enc.ckpt").string();
        const TrainResult r = train(g, cfg);
        CHECK(r.checkpoint_path == cfg.checkpoint_path);

        std::ifstream log(cfg.log_path);
        REQUIRE(log.good());
        std::string line;
        int lines = 0;
        while (std::getline(log, line)) {
            ++lines;
            CHECK(line.find("\"l_total\"") != std::string::npos);
            CHECK(line.find("\"eta\"") != std::string::npos);
        }
        CHECK(lines == 3);

        const EncoderPair back = load_checkpoint(cfg.checkpoint_path);
        CHECK(back.config.latent_dim == 8);
        fs::remove_all(dir);
    }

    SUBCASE("unlabeled graph needs an explicit cluster count") {
        AttributedGraph g = small_sbm();
        g.strip_labels();
        CHECK_THROWS_AS(train(g, small_config()), Error);
    }

    SUBCASE("invalid parameters are rejected") {
        const AttributedGraph g = small_sbm();
        TrainConfig bad = small_config();
        bad.k_fraction = 0.0;
        CHECK_THROWS_AS(train(g, bad), Error);
        bad = small_config();
        bad.learning_rate = -1.0;
        CHECK_THROWS_AS(train(g, bad), Error);
        bad = small_config();
        bad.lambda1 = -0.5;
        CHECK_THROWS_AS(train(g, bad), Error);
    }
}
