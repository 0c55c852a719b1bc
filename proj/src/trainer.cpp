#include "neucgc/trainer.hpp"

#include "neucgc/distributions.hpp"
#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace neucgc {

namespace {

constexpr double kSparseDensityThreshold = 0.25;

void validate(const AttributedGraph& g, const TrainConfig& cfg) {
    if (cfg.latent_dim < 1 || cfg.depth < 1) throw_error(ErrorCode::kParam, "train: dims/depth must be >= 1");
    if (cfg.epochs < 1) throw_error(ErrorCode::kParam, "train: epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw_error(ErrorCode::kParam, "train: learning rate must be positive");
    if (cfg.k_fraction <= 0.0 || cfg.k_fraction > 1.0) {
        throw_error(ErrorCode::kParam, "train: k must lie in (0, 1]");
    }
    if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0) throw_error(ErrorCode::kParam, "train: lambdas must be >= 0");
    if (cfg.eta_mode == EtaMode::kFixed && (cfg.eta_fixed < 0.0 || cfg.eta_fixed > 1.0)) {
        throw_error(ErrorCode::kParam, "train: fixed eta must lie in [0, 1]");
    }
    if (cfg.kmeans_interval < 1) throw_error(ErrorCode::kParam, "train: kmeans interval must be >= 1");
    if (cfg.n_clusters == 0 && !g.has_labels()) {
        throw_error(ErrorCode::kParam, "train: n_clusters required for unlabeled graphs");
    }
    if (g.num_nodes() < 2) throw_error(ErrorCode::kDegenerate, "train: need at least 2 nodes");
}

nlohmann::json record_to_json(const EpochRecord& r, bool with_labels) {
    nlohmann::json j{{"epoch", r.epoch},   {"l_nca", r.l_nca}, {"l_afc", r.l_afc},
                     {"l_gda", r.l_gda},   {"l_total", r.l_total}, {"eta", r.eta},
                     {"xi", r.xi},         {"h_edges", r.h_support_edges}};
    if (with_labels) {
        j["r_h_H"] = r.r_h_h;
        j["delta_H"] = r.delta_h;
        j["acc"] = r.acc;
        j["nmi"] = r.nmi;
        j["ari"] = r.ari;
        j["f1"] = r.f1;
    }
    return j;
}

} // namespace

SupportDiagnostics run_diagnostics(const AttributedGraph& g, const HighConfidenceGraph& h) {
    const IntVector& labels = g.labels(); // throws when absent
    SupportDiagnostics d;
    const AdjacencyList support = h.support();
    if (h.support_edges > 0) d.homophily_ratio = homophily_ratio_on(support, labels);
    d.congener_ratio = congener_ratio_on(support, labels);
    return d;
}

TrainResult train(const AttributedGraph& g, const TrainConfig& cfg) {
    validate(g, cfg);
    const Index n = g.num_nodes();
    const Index n_clusters = cfg.n_clusters > 0 ? cfg.n_clusters : g.num_classes();
    if (n_clusters < 1 || n_clusters > n) {
        throw_error(ErrorCode::kParam, "train: invalid cluster count " + std::to_string(n_clusters));
    }

    const Matrix x = preprocess_features(g.features(), cfg.preprocessing);
    const double density =
        x.size() > 0 ? static_cast<double>((x.array() != 0.0).count()) / static_cast<double>(x.size())
                     : 1.0;
    const bool use_sparse = density < kSparseDensityThreshold;
    SparseMatrix x_sparse;
    if (use_sparse) {
        x_sparse = x.sparseView();
        x_sparse.makeCompressed();
    }

    EncoderPair enc = init_encoders(x.cols(), cfg.latent_dim, cfg.depth, derive_seed(cfg.seed, 0),
                                    cfg.final_activation);
    AdamState adam1 = make_adam_state(enc.view1);
    AdamState adam2 = make_adam_state(enc.view2);

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path);
        if (!log) throw_error(ErrorCode::kIo, "cannot open run log " + cfg.log_path);
    }

    const KmeansOptions epoch_kmeans{cfg.kmeans_max_iter, cfg.kmeans_restarts, 1e-6};
    const KmeansOptions final_kmeans{cfg.kmeans_final_max_iter, cfg.kmeans_final_restarts, 1e-6};
    const std::uint64_t kmeans_seed_base = derive_seed(cfg.seed, 3);

    bool warned_no_edges = false;
    ClusterResult clusters;
    HighConfidenceGraph h;

    TrainResult result;
    result.per_epoch.reserve(static_cast<std::size_t>(cfg.epochs));
    double best_loss = std::numeric_limits<double>::infinity();
    Index epochs_since_improvement = 0;

    for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::array<ForwardCache, 2> caches;
        const EmbeddingPair emb =
            use_sparse ? encode(enc, x_sparse, &caches) : encode(enc, x, &caches);

        const RowDistributions rows1 = row_distributions(emb.z1);
        const RowDistributions rows2 = row_distributions(emb.z2);
        const LossGrad gda = gda_loss_grad(emb.z1, emb.z2, rows1, rows2);

        const CosineCache cosine = cosine_cache(emb.z1, emb.z2);
        const Matrix norm_s = minmax_normalize(cosine.s, cfg.norm_scope);
        const double xi = similarity_threshold(norm_s);

        double eta;
        if (cfg.eta_mode == EtaMode::kFixed) {
            eta = cfg.eta_fixed;
        } else if (g.num_edges() == 0) {
            if (!warned_no_edges) {
                std::cerr << "warning: graph has no edges; eta falls back to 0\n";
                warned_no_edges = true;
            }
            eta = 0.0;
        } else {
            eta = neutral_contrastive_factor(norm_s, g.neighbors(), xi);
        }

        const LossGrad nca = nca_loss_grad(rows1, rows2, g.neighbors(), eta);

        if (epoch == 1 || (epoch - 1) % cfg.kmeans_interval == 0) {
            clusters = kmeans(emb.fused, n_clusters,
                              derive_seed(kmeans_seed_base, static_cast<std::uint64_t>(epoch)),
                              epoch_kmeans);
            const HighConfidenceSet hc = select_high_confidence(
                emb.fused, clusters.assignments, clusters.centroids, cfg.k_fraction, cfg.hc_per_cluster);
            h = build_high_confidence_graph(hc, g.neighbors(), norm_s);
        }

        const LossGrad afc = afc_loss_grad(cosine, h);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.l_nca = nca.value;
        rec.l_afc = afc.value;
        rec.l_gda = gda.value;
        rec.l_total = total_loss(nca.value, afc.value, gda.value, cfg.lambda1, cfg.lambda2);
        rec.eta = eta;
        rec.xi = xi;
        rec.h_support_edges = h.support_edges;
        if (g.has_labels()) {
            const SupportDiagnostics diag = run_diagnostics(g, h);
            rec.r_h_h = diag.homophily_ratio;
            rec.delta_h = diag.congener_ratio;
            const MetricsReport metrics = evaluate(clusters.assignments, g.labels());
            rec.acc = metrics.acc;
            rec.nmi = metrics.nmi;
            rec.ari = metrics.ari;
            rec.f1 = metrics.f1;
        }
        result.per_epoch.push_back(rec);
        if (log) log << record_to_json(rec, g.has_labels()).dump() << '\n';

        if (!std::isfinite(rec.l_total) || !std::isfinite(rec.l_nca) || !std::isfinite(rec.l_afc) ||
            !std::isfinite(rec.l_gda)) {
            if (log) log.flush();
            std::ostringstream snap;
            snap << "non-finite loss at epoch " << epoch << ": l_nca=" << rec.l_nca
                 << " l_afc=" << rec.l_afc << " l_gda=" << rec.l_gda << " eta=" << eta
                 << " xi=" << xi;
            throw_error(ErrorCode::kTraining, snap.str());
        }

        const Matrix d_z1 = nca.d_z1 + cfg.lambda1 * afc.d_z1 + cfg.lambda2 * gda.d_z1;
        const Matrix d_z2 = nca.d_z2 + cfg.lambda1 * afc.d_z2 + cfg.lambda2 * gda.d_z2;
        const MlpGrads grads1 = use_sparse
                                    ? mlp_backward(enc.view1, enc.config, x_sparse, caches[0], d_z1)
                                    : mlp_backward(enc.view1, enc.config, x, caches[0], d_z1);
        const MlpGrads grads2 = use_sparse
                                    ? mlp_backward(enc.view2, enc.config, x_sparse, caches[1], d_z2)
                                    : mlp_backward(enc.view2, enc.config, x, caches[1], d_z2);
        adam_step(enc.view1, adam1, grads1, cfg.learning_rate);
        adam_step(enc.view2, adam2, grads2, cfg.learning_rate);

        if (cfg.early_stop) {
            const double improvement =
                (best_loss - rec.l_total) / std::max(std::abs(best_loss), 1e-300);
            if (rec.l_total < best_loss) best_loss = rec.l_total;
            if (improvement >= cfg.early_stop_rel_tol) {
                epochs_since_improvement = 0;
            } else if (++epochs_since_improvement >= cfg.early_stop_patience) {
                break;
            }
        }
    }

    // final assignments from the trained encoders
    const EmbeddingPair final_emb = use_sparse ? encode(enc, x_sparse) : encode(enc, x);
    const ClusterResult final_clusters =
        kmeans(final_emb.fused, n_clusters, derive_seed(cfg.seed, 4), final_kmeans);
    result.final_assignments = final_clusters.assignments;
    if (g.has_labels()) {
        result.final_metrics = evaluate(result.final_assignments, g.labels());
        result.has_final_metrics = true;
    }

    if (!cfg.checkpoint_path.empty()) {
        save_checkpoint(enc, cfg.checkpoint_path);
        result.checkpoint_path = cfg.checkpoint_path;
    }
    return result;
}

} // namespace neucgc
