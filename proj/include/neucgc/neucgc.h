/* neucgc.h - C interface to the NeuCGC graph clustering library.
 *
 * All functions return a neucgc_status; resources come back as opaque
 * handles that must be released with the matching _free call. Error detail
 * for the calling thread is available via neucgc_last_error().
 */
#ifndef NEUCGC_H
#define NEUCGC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum neucgc_status {
    NEUCGC_OK = 0,
    NEUCGC_ERR_IO = 1,
    NEUCGC_ERR_FORMAT = 2,
    NEUCGC_ERR_PARAM = 3,
    NEUCGC_ERR_SHAPE = 4,
    NEUCGC_ERR_MISSING_LABELS = 5,
    NEUCGC_ERR_DEGENERATE = 6,
    NEUCGC_ERR_NUMERIC = 7,
    NEUCGC_ERR_TRAINING = 8,
    NEUCGC_ERR_INTERNAL = 9
} neucgc_status;

typedef struct neucgc_graph neucgc_graph;
typedef struct neucgc_result neucgc_result;

const char* neucgc_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* neucgc_last_error(void);

/* ---- graphs ---- */

neucgc_status neucgc_graph_load(const char* data_dir, neucgc_graph** out);
neucgc_status neucgc_graph_save(const neucgc_graph* g, const char* data_dir);
void neucgc_graph_free(neucgc_graph* g);

typedef struct neucgc_sbm_params {
    int64_t n_nodes;
    int64_t n_classes;
    double p_in;
    double p_out;
    int64_t feature_dim;
    double feature_noise;
    uint64_t seed;
} neucgc_sbm_params;

neucgc_status neucgc_graph_sbm(const neucgc_sbm_params* params, neucgc_graph** out);

int64_t neucgc_graph_nodes(const neucgc_graph* g);
int64_t neucgc_graph_edges(const neucgc_graph* g); /* undirected count */
int64_t neucgc_graph_features(const neucgc_graph* g);
int64_t neucgc_graph_classes(const neucgc_graph* g); /* 0 when unlabeled */
int neucgc_graph_has_labels(const neucgc_graph* g);

/* Drops labels; losses of a subsequent train run must be unaffected. */
neucgc_status neucgc_graph_strip_labels(neucgc_graph* g);

typedef struct neucgc_graph_stats {
    int64_t n_nodes;
    int64_t n_edges;
    int64_t n_classes;
    int64_t n_attributes;
    double homophily_ratio;              /* r_h  */
    double neighborhood_homophily_ratio; /* r_nh */
    double congener_ratio;               /* delta */
} neucgc_graph_stats;

neucgc_status neucgc_graph_compute_stats(const neucgc_graph* g, neucgc_graph_stats* out);

/* ---- training ---- */

typedef enum neucgc_preprocessing {
    NEUCGC_PREP_NONE = 0,
    NEUCGC_PREP_ROW_L2 = 1,
    NEUCGC_PREP_COL_STANDARDIZE = 2
} neucgc_preprocessing;

typedef enum neucgc_norm_scope { NEUCGC_NORM_GLOBAL = 0, NEUCGC_NORM_ROW = 1 } neucgc_norm_scope;

typedef enum neucgc_eta_mode { NEUCGC_ETA_NCFE = 0, NEUCGC_ETA_FIXED = 1 } neucgc_eta_mode;

typedef struct neucgc_train_config {
    int64_t latent_dim;
    int64_t depth;
    int final_activation;
    int preprocessing; /* neucgc_preprocessing */

    double learning_rate;
    int64_t epochs;
    double lambda1;
    double lambda2;
    double k_fraction;
    int64_t n_clusters; /* 0 = from labels */
    uint64_t seed;

    int norm_scope; /* neucgc_norm_scope */
    int eta_mode;   /* neucgc_eta_mode */
    double eta_fixed;
    int hc_per_cluster;

    int64_t kmeans_restarts;
    int64_t kmeans_max_iter;
    int64_t kmeans_final_restarts;
    int64_t kmeans_final_max_iter;
    int64_t kmeans_interval;

    int early_stop;
    double early_stop_rel_tol;
    int64_t early_stop_patience;

    const char* log_path;        /* JSON lines per epoch; NULL to disable */
    const char* checkpoint_path; /* encoder checkpoint; NULL to disable */
} neucgc_train_config;

/* Fills in the documented defaults. */
void neucgc_train_config_init(neucgc_train_config* config);

typedef struct neucgc_epoch_stats {
    int64_t epoch;
    double l_nca, l_afc, l_gda, l_total;
    double eta, xi;
    int64_t h_support_edges;
    /* NaN when the graph carries no labels */
    double r_h_h, delta_h;
    double acc, nmi, ari, f1;
} neucgc_epoch_stats;

typedef struct neucgc_metrics {
    double acc, nmi, ari, f1;
} neucgc_metrics;

neucgc_status neucgc_train(const neucgc_graph* g, const neucgc_train_config* config,
                           neucgc_result** out);
void neucgc_result_free(neucgc_result* result);

int64_t neucgc_result_epochs(const neucgc_result* result);
neucgc_status neucgc_result_epoch_stats(const neucgc_result* result, int64_t epoch_index,
                                        neucgc_epoch_stats* out);

/* 1 when final metrics exist (labels were present). */
int neucgc_result_has_metrics(const neucgc_result* result);
neucgc_status neucgc_result_metrics(const neucgc_result* result, neucgc_metrics* out);

int64_t neucgc_result_num_nodes(const neucgc_result* result);
neucgc_status neucgc_result_assignments(const neucgc_result* result, int32_t* buffer,
                                        int64_t buffer_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NEUCGC_H */
