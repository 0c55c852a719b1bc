#include "neucgc/neucgc.h"

#include "neucgc/error.hpp"
#include "neucgc/graph.hpp"
#include "neucgc/trainer.hpp"

#include <cmath>
#include <cstring>
#include <string>

struct neucgc_graph {
    neucgc::AttributedGraph graph;
};

struct neucgc_result {
    neucgc::TrainResult result;
};

static_assert(static_cast<int>(neucgc::ErrorCode::kIo) == NEUCGC_ERR_IO);
static_assert(static_cast<int>(neucgc::ErrorCode::kFormat) == NEUCGC_ERR_FORMAT);
static_assert(static_cast<int>(neucgc::ErrorCode::kParam) == NEUCGC_ERR_PARAM);
static_assert(static_cast<int>(neucgc::ErrorCode::kShape) == NEUCGC_ERR_SHAPE);
static_assert(static_cast<int>(neucgc::ErrorCode::kMissingLabels) == NEUCGC_ERR_MISSING_LABELS);
static_assert(static_cast<int>(neucgc::ErrorCode::kDegenerate) == NEUCGC_ERR_DEGENERATE);
static_assert(static_cast<int>(neucgc::ErrorCode::kNumeric) == NEUCGC_ERR_NUMERIC);
static_assert(static_cast<int>(neucgc::ErrorCode::kTraining) == NEUCGC_ERR_TRAINING);
static_assert(static_cast<int>(neucgc::ErrorCode::kInternal) == NEUCGC_ERR_INTERNAL);

namespace {

thread_local std::string g_last_error;

neucgc_status to_status(const neucgc::Error& e) {
    return static_cast<neucgc_status>(static_cast<int>(e.code()));
}

template <typename Fn>
neucgc_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return NEUCGC_OK;
    } catch (const neucgc::Error& e) {
        g_last_error = e.what();
        return to_status(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NEUCGC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return NEUCGC_ERR_INTERNAL;
    }
}

neucgc_status param_error(const char* message) {
    g_last_error = message;
    return NEUCGC_ERR_PARAM;
}

} // namespace

extern "C" {

const char* neucgc_version(void) { return NEUCGC_VERSION_STRING; }

const char* neucgc_last_error(void) { return g_last_error.c_str(); }

neucgc_status neucgc_graph_load(const char* data_dir, neucgc_graph** out) {
    if (!data_dir || !out) return param_error("null argument");
    return guarded([&] { *out = new neucgc_graph{neucgc::load_graph(data_dir)}; });
}

neucgc_status neucgc_graph_save(const neucgc_graph* g, const char* data_dir) {
    if (!g || !data_dir) return param_error("null argument");
    return guarded([&] { neucgc::save_graph(g->graph, data_dir); });
}

void neucgc_graph_free(neucgc_graph* g) { delete g; }

neucgc_status neucgc_graph_sbm(const neucgc_sbm_params* params, neucgc_graph** out) {
    if (!params || !out) return param_error("null argument");
    return guarded([&] {
        neucgc::SbmParams p;
        p.n_nodes = params->n_nodes;
        p.n_classes = params->n_classes;
        p.p_in = params->p_in;
        p.p_out = params->p_out;
        p.feature_dim = params->feature_dim;
        p.feature_noise = params->feature_noise;
        p.seed = params->seed;
        *out = new neucgc_graph{neucgc::generate_sbm(p)};
    });
}

int64_t neucgc_graph_nodes(const neucgc_graph* g) { return g ? g->graph.num_nodes() : 0; }
int64_t neucgc_graph_edges(const neucgc_graph* g) { return g ? g->graph.num_edges() : 0; }
int64_t neucgc_graph_features(const neucgc_graph* g) { return g ? g->graph.num_features() : 0; }
int64_t neucgc_graph_classes(const neucgc_graph* g) {
    return g && g->graph.has_labels() ? g->graph.num_classes() : 0;
}
int neucgc_graph_has_labels(const neucgc_graph* g) {
    return g && g->graph.has_labels() ? 1 : 0;
}

neucgc_status neucgc_graph_strip_labels(neucgc_graph* g) {
    if (!g) return param_error("null argument");
    return guarded([&] { g->graph.strip_labels(); });
}

neucgc_status neucgc_graph_compute_stats(const neucgc_graph* g, neucgc_graph_stats* out) {
    if (!g || !out) return param_error("null argument");
    return guarded([&] {
        const neucgc::GraphStats s = neucgc::compute_stats(g->graph);
        out->n_nodes = s.n_nodes;
        out->n_edges = s.n_edges;
        out->n_classes = s.n_classes;
        out->n_attributes = s.n_attributes;
        out->homophily_ratio = s.homophily_ratio;
        out->neighborhood_homophily_ratio = s.neighborhood_homophily_ratio;
        out->congener_ratio = s.congener_ratio;
    });
}

void neucgc_train_config_init(neucgc_train_config* config) {
    if (!config) return;
    std::memset(config, 0, sizeof(*config));
    const neucgc::TrainConfig d;
    config->latent_dim = d.latent_dim;
    config->depth = d.depth;
    config->final_activation = d.final_activation ? 1 : 0;
    config->preprocessing = NEUCGC_PREP_NONE;
    config->learning_rate = d.learning_rate;
    config->epochs = d.epochs;
    config->lambda1 = d.lambda1;
    config->lambda2 = d.lambda2;
    config->k_fraction = d.k_fraction;
    config->n_clusters = d.n_clusters;
    config->seed = d.seed;
    config->norm_scope = NEUCGC_NORM_GLOBAL;
    config->eta_mode = NEUCGC_ETA_NCFE;
    config->eta_fixed = d.eta_fixed;
    config->hc_per_cluster = d.hc_per_cluster ? 1 : 0;
    config->kmeans_restarts = d.kmeans_restarts;
    config->kmeans_max_iter = d.kmeans_max_iter;
    config->kmeans_final_restarts = d.kmeans_final_restarts;
    config->kmeans_final_max_iter = d.kmeans_final_max_iter;
    config->kmeans_interval = d.kmeans_interval;
    config->early_stop = d.early_stop ? 1 : 0;
    config->early_stop_rel_tol = d.early_stop_rel_tol;
    config->early_stop_patience = d.early_stop_patience;
    config->log_path = nullptr;
    config->checkpoint_path = nullptr;
}

neucgc_status neucgc_train(const neucgc_graph* g, const neucgc_train_config* config,
                           neucgc_result** out) {
    if (!g || !config || !out) return param_error("null argument");
    return guarded([&] {
        neucgc::TrainConfig cfg;
        cfg.latent_dim = config->latent_dim;
        cfg.depth = config->depth;
        cfg.final_activation = config->final_activation != 0;
        switch (config->preprocessing) {
            case NEUCGC_PREP_NONE: cfg.preprocessing = neucgc::Preprocessing::kNone; break;
            case NEUCGC_PREP_ROW_L2: cfg.preprocessing = neucgc::Preprocessing::kRowL2; break;
            case NEUCGC_PREP_COL_STANDARDIZE:
                cfg.preprocessing = neucgc::Preprocessing::kColStandardize;
                break;
            default: neucgc::throw_error(neucgc::ErrorCode::kParam, "bad preprocessing mode");
        }
        cfg.learning_rate = config->learning_rate;
        cfg.epochs = config->epochs;
        cfg.lambda1 = config->lambda1;
        cfg.lambda2 = config->lambda2;
        cfg.k_fraction = config->k_fraction;
        cfg.n_clusters = config->n_clusters;
        cfg.seed = config->seed;
        cfg.norm_scope =
            config->norm_scope == NEUCGC_NORM_ROW ? neucgc::NormScope::kRow : neucgc::NormScope::kGlobal;
        cfg.eta_mode =
            config->eta_mode == NEUCGC_ETA_FIXED ? neucgc::EtaMode::kFixed : neucgc::EtaMode::kNcfe;
        cfg.eta_fixed = config->eta_fixed;
        cfg.hc_per_cluster = config->hc_per_cluster != 0;
        cfg.kmeans_restarts = config->kmeans_restarts;
        cfg.kmeans_max_iter = config->kmeans_max_iter;
        cfg.kmeans_final_restarts = config->kmeans_final_restarts;
        cfg.kmeans_final_max_iter = config->kmeans_final_max_iter;
        cfg.kmeans_interval = config->kmeans_interval;
        cfg.early_stop = config->early_stop != 0;
        cfg.early_stop_rel_tol = config->early_stop_rel_tol;
        cfg.early_stop_patience = config->early_stop_patience;
        if (config->log_path) cfg.log_path = config->log_path;
        if (config->checkpoint_path) cfg.checkpoint_path = config->checkpoint_path;
        *out = new neucgc_result{neucgc::train(g->graph, cfg)};
    });
}

void neucgc_result_free(neucgc_result* result) { delete result; }

int64_t neucgc_result_epochs(const neucgc_result* result) {
    return result ? static_cast<int64_t>(result->result.per_epoch.size()) : 0;
}

neucgc_status neucgc_result_epoch_stats(const neucgc_result* result, int64_t epoch_index,
                                        neucgc_epoch_stats* out) {
    if (!result || !out) return param_error("null argument");
    const auto& records = result->result.per_epoch;
    if (epoch_index < 0 || epoch_index >= static_cast<int64_t>(records.size())) {
        return param_error("epoch index out of range");
    }
    const neucgc::EpochRecord& r = records[static_cast<std::size_t>(epoch_index)];
    out->epoch = r.epoch;
    out->l_nca = r.l_nca;
    out->l_afc = r.l_afc;
    out->l_gda = r.l_gda;
    out->l_total = r.l_total;
    out->eta = r.eta;
    out->xi = r.xi;
    out->h_support_edges = r.h_support_edges;
    out->r_h_h = r.r_h_h;
    out->delta_h = r.delta_h;
    out->acc = r.acc;
    out->nmi = r.nmi;
    out->ari = r.ari;
    out->f1 = r.f1;
    return NEUCGC_OK;
}

int neucgc_result_has_metrics(const neucgc_result* result) {
    return result && result->result.has_final_metrics ? 1 : 0;
}

neucgc_status neucgc_result_metrics(const neucgc_result* result, neucgc_metrics* out) {
    if (!result || !out) return param_error("null argument");
    if (!result->result.has_final_metrics) {
        g_last_error = "result carries no metrics (graph had no labels)";
        return NEUCGC_ERR_MISSING_LABELS;
    }
    out->acc = result->result.final_metrics.acc;
    out->nmi = result->result.final_metrics.nmi;
    out->ari = result->result.final_metrics.ari;
    out->f1 = result->result.final_metrics.f1;
    return NEUCGC_OK;
}

int64_t neucgc_result_num_nodes(const neucgc_result* result) {
    return result ? static_cast<int64_t>(result->result.final_assignments.size()) : 0;
}

neucgc_status neucgc_result_assignments(const neucgc_result* result, int32_t* buffer,
                                        int64_t buffer_len) {
    if (!result || !buffer) return param_error("null argument");
    const auto& a = result->result.final_assignments;
    if (buffer_len < static_cast<int64_t>(a.size())) return param_error("buffer too small");
    std::memcpy(buffer, a.data(), sizeof(int32_t) * a.size());
    return NEUCGC_OK;
}

} // extern "C"
