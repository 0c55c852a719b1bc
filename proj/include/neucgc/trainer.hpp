#pragma once

#include "neucgc/afc.hpp"
#include "neucgc/clustering.hpp"
#include "neucgc/common.hpp"
#include "neucgc/encoder.hpp"
#include "neucgc/graph.hpp"
#include "neucgc/neutral.hpp"

#include <limits>
#include <string>

namespace neucgc {

/// How the neutral contrastive factor is obtained each epoch: estimated from
/// the masked similarities (NCFE) or pinned to a constant (ablations).
enum class EtaMode { kNcfe, kFixed };

struct TrainConfig {
    Index latent_dim = 1000;
    Index depth = 1;
    bool final_activation = true;
    Preprocessing preprocessing = Preprocessing::kNone;

    double learning_rate = 1e-3;
    Index epochs = 500;
    double lambda1 = 0.1; // weight of the feature-consistency loss
    double lambda2 = 1.0; // weight of the global alignment loss
    double k_fraction = 0.3;
    Index n_clusters = 0; // 0 = take from labels
    std::uint64_t seed = 0;

    NormScope norm_scope = NormScope::kGlobal;
    EtaMode eta_mode = EtaMode::kNcfe;
    double eta_fixed = 0.0;
    bool hc_per_cluster = false;

    // per-epoch K-means (pseudo-labels); the final assignment pass uses the
    // clustering module defaults
    Index kmeans_restarts = 3;
    Index kmeans_max_iter = 100;
    Index kmeans_final_restarts = 10;
    Index kmeans_final_max_iter = 300;
    Index kmeans_interval = 1; // recompute pseudo-labels every n epochs

    bool early_stop = false;
    double early_stop_rel_tol = 1e-6;
    Index early_stop_patience = 50;

    std::string log_path;        // JSON-lines stream, one object per epoch
    std::string checkpoint_path; // encoder checkpoint written after training
};

/// One training epoch's losses and diagnostics. Label-dependent fields are
/// NaN when the graph carries no labels.
struct EpochRecord {
    Index epoch = 0;
    double l_nca = 0.0, l_afc = 0.0, l_gda = 0.0, l_total = 0.0;
    double eta = 0.0, xi = 0.0;
    Index h_support_edges = 0;
    double r_h_h = std::numeric_limits<double>::quiet_NaN();
    double delta_h = std::numeric_limits<double>::quiet_NaN();
    double acc = std::numeric_limits<double>::quiet_NaN();
    double nmi = std::numeric_limits<double>::quiet_NaN();
    double ari = std::numeric_limits<double>::quiet_NaN();
    double f1 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    std::vector<EpochRecord> per_epoch;
    IntVector final_assignments;
    MetricsReport final_metrics; // meaningful only when has_final_metrics
    bool has_final_metrics = false;
    std::string checkpoint_path;
};

/// Weighted combination of the three losses.
inline double total_loss(double l_nca, double l_afc, double l_gda, double lambda1,
                         double lambda2) {
    return l_nca + lambda1 * l_afc + lambda2 * l_gda;
}

/// Full optimization loop: encode, the three losses, Adam updates on both
/// parameter sets, per-epoch pseudo-labels and diagnostics. Deterministic
/// for a fixed config and seed; labels influence diagnostics only.
TrainResult train(const AttributedGraph& graph, const TrainConfig& config);

struct SupportDiagnostics {
    double homophily_ratio = std::numeric_limits<double>::quiet_NaN();
    double congener_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Homophily and congener ratios of the high-confidence graph's support
/// (any H entry > 0 counts as an edge). Evaluation-only.
SupportDiagnostics run_diagnostics(const AttributedGraph& graph, const HighConfidenceGraph& h);

} // namespace neucgc
