// neucgc command-line tool: dataset statistics, synthetic graph generation,
// training/reproduction runs and hyper-parameter sweeps. Talks to the library
// exclusively through the C API in neucgc/neucgc.h.
#include <neucgc/neucgc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitTrainingFailure = 3;
constexpr int kExitPartialSweep = 4;

struct GraphHandle {
    neucgc_graph* ptr = nullptr;
    ~GraphHandle() { neucgc_graph_free(ptr); }
};

struct ResultHandle {
    neucgc_result* ptr = nullptr;
    ~ResultHandle() { neucgc_result_free(ptr); }
};

[[noreturn]] void die(int code, const std::string& message) {
    std::cerr << "neucgc: " << message << '\n';
    std::exit(code);
}

int exit_code_for(neucgc_status status) {
    switch (status) {
        case NEUCGC_OK: return kExitOk;
        case NEUCGC_ERR_TRAINING:
        case NEUCGC_ERR_NUMERIC:
        case NEUCGC_ERR_INTERNAL: return kExitTrainingFailure;
        default: return kExitInputError;
    }
}

// ---- shared experiment options -------------------------------------------

struct SbmOptions {
    std::int64_t nodes = 300;
    std::int64_t classes = 3;
    double p_in = 0.1;
    double p_out = 0.005;
    std::int64_t features = 64;
    double noise = 1.0;
    std::uint64_t seed = 0;
};

struct ExperimentOptions {
    std::string data_dir;
    std::optional<SbmOptions> sbm;
    neucgc_train_config config{};
    std::int64_t repeat = 1;
    std::string out_dir;
};

void add_train_flags(CLI::App* cmd, neucgc_train_config& cfg, std::string& preprocessing,
                     std::string& norm_scope, std::string& eta_mode) {
    cmd->add_option("--dim", cfg.latent_dim, "latent dimension d");
    cmd->add_option("--depth", cfg.depth, "encoder depth");
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--lambda1", cfg.lambda1, "weight of the AFC loss");
    cmd->add_option("--lambda2", cfg.lambda2, "weight of the GDA loss");
    cmd->add_option("--k", cfg.k_fraction, "high-confidence fraction in (0,1]");
    cmd->add_option("--clusters", cfg.n_clusters, "cluster count (default: from labels)");
    cmd->add_option("--seed", cfg.seed, "base random seed");
    cmd->add_flag("--no-final-activation",
                  [&cfg](std::int64_t count) { cfg.final_activation = count ? 0 : 1; },
                  "linear output layer");
    cmd->add_option("--preprocessing", preprocessing, "none|row-l2|col-standardize")
        ->check(CLI::IsMember({"none", "row-l2", "col-standardize"}));
    cmd->add_option("--norm-scope", norm_scope, "global|row min-max scope")
        ->check(CLI::IsMember({"global", "row"}));
    cmd->add_option("--eta-mode", eta_mode, "ncfe|fixed")->check(CLI::IsMember({"ncfe", "fixed"}));
    cmd->add_option("--eta-fixed", cfg.eta_fixed, "eta value when --eta-mode fixed");
    cmd->add_flag("--hc-per-cluster",
                  [&cfg](std::int64_t count) { cfg.hc_per_cluster = count ? 1 : 0; },
                  "rank high-confidence nodes per cluster");
    cmd->add_option("--kmeans-restarts", cfg.kmeans_restarts, "per-epoch k-means restarts");
    cmd->add_option("--kmeans-interval", cfg.kmeans_interval, "epochs between pseudo-label refreshes");
    cmd->add_flag("--early-stop",
                  [&cfg](std::int64_t count) { cfg.early_stop = count ? 1 : 0; },
                  "stop when the loss plateaus");
}

// ---- flat key=value config files -------------------------------------------

std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) die(kExitInputError, "cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            die(kExitInputError, path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

/// Applies config entries to any option of `cmd` the user did not pass on the
/// command line (flags override the file). Keys are flag names without the
/// leading dashes.
void apply_flat_config(CLI::App* cmd, const std::string& path) {
    for (const auto& [key, value] : read_flat_config(path)) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            die(kExitInputError, path + ": unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue; // command line wins
        try {
            if (opt->get_expected_min() == 0) {
                // flag: accept true/false/1/0
                if (value == "true" || value == "1") opt->add_result("1");
                else if (value != "false" && value != "0")
                    die(kExitInputError, path + ": flag '" + key + "' expects true/false");
            } else {
                for (const auto& piece : CLI::detail::split(value, ',')) opt->add_result(piece);
            }
            opt->run_callback();
        } catch (const CLI::Error& e) {
            die(kExitInputError, path + ": bad value for '" + key + "': " + e.what());
        }
    }
}

void resolve_enum_flags(neucgc_train_config& cfg, const std::string& preprocessing,
                        const std::string& norm_scope, const std::string& eta_mode) {
    cfg.preprocessing = preprocessing == "row-l2"
                            ? NEUCGC_PREP_ROW_L2
                            : preprocessing == "col-standardize" ? NEUCGC_PREP_COL_STANDARDIZE
                                                                 : NEUCGC_PREP_NONE;
    cfg.norm_scope = norm_scope == "row" ? NEUCGC_NORM_ROW : NEUCGC_NORM_GLOBAL;
    cfg.eta_mode = eta_mode == "fixed" ? NEUCGC_ETA_FIXED : NEUCGC_ETA_NCFE;
}

GraphHandle open_graph(const ExperimentOptions& opt) {
    GraphHandle g;
    neucgc_status status;
    if (opt.sbm) {
        neucgc_sbm_params p{};
        p.n_nodes = opt.sbm->nodes;
        p.n_classes = opt.sbm->classes;
        p.p_in = opt.sbm->p_in;
        p.p_out = opt.sbm->p_out;
        p.feature_dim = opt.sbm->features;
        p.feature_noise = opt.sbm->noise;
        p.seed = opt.sbm->seed;
        status = neucgc_graph_sbm(&p, &g.ptr);
    } else {
        status = neucgc_graph_load(opt.data_dir.c_str(), &g.ptr);
    }
    if (status != NEUCGC_OK) die(exit_code_for(status), neucgc_last_error());
    return g;
}

// ---- stats ----------------------------------------------------------------

void print_stats_row(const std::string& name, const neucgc_graph_stats& s, bool header) {
    if (header) {
        std::printf("%-12s %8s %9s %8s %11s %6s %6s %8s\n", "Dataset", "Nodes", "Edges", "Classes",
                    "Attributes", "r_h", "r_nh", "delta");
    }
    std::printf("%-12s %8lld %9lld %8lld %11lld %6.2f %6.2f %8.4f\n", name.c_str(),
                static_cast<long long>(s.n_nodes), static_cast<long long>(s.n_edges),
                static_cast<long long>(s.n_classes), static_cast<long long>(s.n_attributes),
                s.homophily_ratio, s.neighborhood_homophily_ratio, s.congener_ratio);
}

int cmd_stats(const std::string& data_dir) {
    GraphHandle g;
    neucgc_status status = neucgc_graph_load(data_dir.c_str(), &g.ptr);
    if (status != NEUCGC_OK) die(exit_code_for(status), neucgc_last_error());
    neucgc_graph_stats stats{};
    status = neucgc_graph_compute_stats(g.ptr, &stats);
    if (status != NEUCGC_OK) die(exit_code_for(status), neucgc_last_error());
    print_stats_row(fs::path(data_dir).filename().string(), stats, true);
    return kExitOk;
}

// ---- sbm ------------------------------------------------------------------

int cmd_sbm(const SbmOptions& opt, const std::string& out_dir) {
    ExperimentOptions eopt;
    eopt.sbm = opt;
    GraphHandle g = open_graph(eopt);
    if (neucgc_status status = neucgc_graph_save(g.ptr, out_dir.c_str()); status != NEUCGC_OK) {
        die(exit_code_for(status), neucgc_last_error());
    }
    neucgc_graph_stats stats{};
    if (neucgc_status status = neucgc_graph_compute_stats(g.ptr, &stats); status != NEUCGC_OK) {
        die(exit_code_for(status), neucgc_last_error());
    }
    print_stats_row(fs::path(out_dir).filename().string(), stats, true);
    std::cout << "written to " << out_dir << '\n';
    return kExitOk;
}

// ---- train ----------------------------------------------------------------

json config_to_json(const neucgc_train_config& cfg) {
    return json{{"latent_dim", cfg.latent_dim},
                {"depth", cfg.depth},
                {"final_activation", cfg.final_activation != 0},
                {"preprocessing", cfg.preprocessing},
                {"learning_rate", cfg.learning_rate},
                {"epochs", cfg.epochs},
                {"lambda1", cfg.lambda1},
                {"lambda2", cfg.lambda2},
                {"k", cfg.k_fraction},
                {"n_clusters", cfg.n_clusters},
                {"norm_scope", cfg.norm_scope == NEUCGC_NORM_ROW ? "row" : "global"},
                {"eta_mode", cfg.eta_mode == NEUCGC_ETA_FIXED ? "fixed" : "ncfe"},
                {"eta_fixed", cfg.eta_fixed},
                {"hc_per_cluster", cfg.hc_per_cluster != 0},
                {"kmeans_restarts", cfg.kmeans_restarts},
                {"kmeans_max_iter", cfg.kmeans_max_iter},
                {"kmeans_final_restarts", cfg.kmeans_final_restarts},
                {"kmeans_final_max_iter", cfg.kmeans_final_max_iter},
                {"kmeans_interval", cfg.kmeans_interval},
                {"early_stop", cfg.early_stop != 0},
                {"early_stop_rel_tol", cfg.early_stop_rel_tol},
                {"early_stop_patience", cfg.early_stop_patience}};
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    neucgc_metrics metrics{};
    bool has_metrics = false;
};

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    if (values.empty()) return ms;
    for (double v : values) ms.mean += v;
    ms.mean /= static_cast<double>(values.size());
    for (double v : values) ms.stddev += (v - ms.mean) * (v - ms.mean);
    ms.stddev = std::sqrt(ms.stddev / static_cast<double>(values.size()));
    return ms;
}

std::string format_table_row(const std::vector<SeedOutcome>& outcomes) {
    std::vector<double> acc, nmi, ari, f1;
    for (const SeedOutcome& o : outcomes) {
        if (!o.ok || !o.has_metrics) continue;
        acc.push_back(100.0 * o.metrics.acc);
        nmi.push_back(100.0 * o.metrics.nmi);
        ari.push_back(100.0 * o.metrics.ari);
        f1.push_back(100.0 * o.metrics.f1);
    }
    if (acc.empty()) return "no labeled metrics";
    char buf[160];
    const MeanStd a = mean_std(acc), n = mean_std(nmi), r = mean_std(ari), f = mean_std(f1);
    std::snprintf(buf, sizeof(buf), "%.1f±%.1f %.1f±%.1f %.1f±%.1f %.1f±%.1f", a.mean, a.stddev,
                  n.mean, n.stddev, r.mean, r.stddev, f.mean, f.stddev);
    return buf;
}

int run_experiment(const ExperimentOptions& opt, bool quiet = false) {
    if (opt.out_dir.empty()) die(kExitInputError, "--out is required");
    fs::create_directories(opt.out_dir);
    const fs::path out(opt.out_dir);

    GraphHandle g = open_graph(opt);

    std::vector<std::uint64_t> seeds;
    for (std::int64_t r = 0; r < opt.repeat; ++r)
        seeds.push_back(opt.config.seed + static_cast<std::uint64_t>(r));

    // resolved spec with full provenance
    json spec{{"tool_version", neucgc_version()},
              {"config", config_to_json(opt.config)},
              {"repeat", opt.repeat},
              {"seeds", seeds}};
    if (opt.sbm) {
        spec["sbm"] = {{"nodes", opt.sbm->nodes},   {"classes", opt.sbm->classes},
                       {"p_in", opt.sbm->p_in},     {"p_out", opt.sbm->p_out},
                       {"features", opt.sbm->features}, {"noise", opt.sbm->noise},
                       {"seed", opt.sbm->seed}};
    } else {
        spec["dataset"] = opt.data_dir;
    }
    std::ofstream(out / "resolved_spec.json") << spec.dump(2) << '\n';

    std::ofstream fig8(out / "fig8_curves.csv");
    fig8 << "seed,epoch,l_nca,l_afc,l_gda,l_total,acc,nmi,ari,f1\n";
    std::ofstream fig3(out / "fig3_curves.csv");
    fig3 << "seed,epoch,r_h_H,delta_H,r_h_A,delta_A\n";

    double r_h_a = std::nan(""), delta_a = std::nan("");
    if (neucgc_graph_has_labels(g.ptr)) {
        neucgc_graph_stats stats{};
        if (neucgc_graph_compute_stats(g.ptr, &stats) == NEUCGC_OK) {
            r_h_a = stats.homophily_ratio;
            delta_a = stats.congener_ratio;
        }
    }

    std::vector<SeedOutcome> outcomes;
    for (std::uint64_t seed : seeds) {
        SeedOutcome outcome;
        outcome.seed = seed;

        neucgc_train_config cfg = opt.config;
        cfg.seed = seed;
        const std::string log_path = (out / ("seed_" + std::to_string(seed) + ".jsonl")).string();
        const std::string ckpt_path = (out / ("seed_" + std::to_string(seed) + ".ckpt")).string();
        cfg.log_path = log_path.c_str();
        cfg.checkpoint_path = ckpt_path.c_str();

        ResultHandle res;
        const neucgc_status status = neucgc_train(g.ptr, &cfg, &res.ptr);
        if (status != NEUCGC_OK) {
            outcome.error = neucgc_last_error();
            std::cerr << "seed " << seed << " failed: " << outcome.error << '\n';
            outcomes.push_back(outcome);
            continue;
        }
        outcome.ok = true;

        const std::int64_t epochs = neucgc_result_epochs(res.ptr);
        for (std::int64_t e = 0; e < epochs; ++e) {
            neucgc_epoch_stats s{};
            neucgc_result_epoch_stats(res.ptr, e, &s);
            fig8 << seed << ',' << s.epoch << ',' << s.l_nca << ',' << s.l_afc << ',' << s.l_gda
                 << ',' << s.l_total << ',' << s.acc << ',' << s.nmi << ',' << s.ari << ','
                 << s.f1 << '\n';
            fig3 << seed << ',' << s.epoch << ',' << s.r_h_h << ',' << s.delta_h << ',' << r_h_a
                 << ',' << delta_a << '\n';
        }

        if (neucgc_result_has_metrics(res.ptr)) {
            neucgc_result_metrics(res.ptr, &outcome.metrics);
            outcome.has_metrics = true;
            if (!quiet) {
                std::printf("seed %llu: ACC %.4f NMI %.4f ARI %.4f F1 %.4f\n",
                            static_cast<unsigned long long>(seed), outcome.metrics.acc,
                            outcome.metrics.nmi, outcome.metrics.ari, outcome.metrics.f1);
            }
        }
        outcomes.push_back(outcome);
    }

    // summary
    json summary;
    summary["table_row"] = format_table_row(outcomes);
    summary["seeds"] = json::array();
    std::size_t failures = 0;
    for (const SeedOutcome& o : outcomes) {
        json row{{"seed", o.seed}, {"ok", o.ok}};
        if (!o.ok) {
            row["error"] = o.error;
            ++failures;
        } else if (o.has_metrics) {
            row["acc"] = o.metrics.acc;
            row["nmi"] = o.metrics.nmi;
            row["ari"] = o.metrics.ari;
            row["f1"] = o.metrics.f1;
        }
        summary["seeds"].push_back(row);
    }
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    std::ofstream(out / "table_row.txt") << summary["table_row"].get<std::string>() << '\n';
    if (!quiet) std::cout << summary["table_row"].get<std::string>() << '\n';

    return failures == 0 ? kExitOk : kExitTrainingFailure;
}

// ---- sweep ----------------------------------------------------------------

int cmd_sweep(const ExperimentOptions& base, const std::vector<double>& lambda1_grid,
              const std::vector<double>& lambda2_grid, const std::vector<double>& k_grid,
              const std::vector<std::int64_t>& dim_grid) {
    if (base.out_dir.empty()) die(kExitInputError, "--out is required");
    fs::create_directories(base.out_dir);

    json spec{{"tool_version", neucgc_version()},
              {"base_config", config_to_json(base.config)},
              {"repeat", base.repeat},
              {"grid",
               {{"lambda1", lambda1_grid},
                {"lambda2", lambda2_grid},
                {"k", k_grid},
                {"dim", dim_grid}}}};
    if (base.sbm) {
        spec["sbm"] = {{"nodes", base.sbm->nodes}, {"classes", base.sbm->classes},
                       {"p_in", base.sbm->p_in},   {"p_out", base.sbm->p_out},
                       {"features", base.sbm->features}, {"noise", base.sbm->noise},
                       {"seed", base.sbm->seed}};
    } else {
        spec["dataset"] = base.data_dir;
    }
    std::ofstream(fs::path(base.out_dir) / "resolved_spec.json") << spec.dump(2) << '\n';

    std::ofstream table(fs::path(base.out_dir) / "sweep.csv");
    table << "lambda1,lambda2,k,dim,seed,status,acc,nmi,ari,f1\n";

    std::size_t cells = 0, failed_cells = 0;
    for (double l1 : lambda1_grid) {
        for (double l2 : lambda2_grid) {
            for (double k : k_grid) {
                for (std::int64_t dim : dim_grid) {
                    ++cells;
                    ExperimentOptions opt = base;
                    opt.config.lambda1 = l1;
                    opt.config.lambda2 = l2;
                    opt.config.k_fraction = k;
                    opt.config.latent_dim = dim;
                    char cell_name[96];
                    std::snprintf(cell_name, sizeof(cell_name), "cell_l1=%g_l2=%g_k=%g_d=%lld", l1,
                                  l2, k, static_cast<long long>(dim));
                    opt.out_dir = (fs::path(base.out_dir) / cell_name).string();

                    int code = kExitTrainingFailure;
                    try {
                        code = run_experiment(opt, /*quiet=*/true);
                    } catch (const std::exception& e) {
                        std::cerr << cell_name << ": " << e.what() << '\n';
                    }
                    if (code != kExitOk) ++failed_cells;

                    // fold the cell's per-seed results into the long table
                    std::ifstream summary_in(fs::path(opt.out_dir) / "summary.json");
                    if (summary_in) {
                        json summary;
                        summary_in >> summary;
                        for (const auto& row : summary["seeds"]) {
                            table << l1 << ',' << l2 << ',' << k << ',' << dim << ','
                                  << row["seed"].get<std::uint64_t>() << ','
                                  << (row["ok"].get<bool>() ? "ok" : "failed");
                            if (row.contains("acc")) {
                                table << ',' << row["acc"].get<double>() << ','
                                      << row["nmi"].get<double>() << ',' << row["ari"].get<double>()
                                      << ',' << row["f1"].get<double>();
                            } else {
                                table << ",,,,";
                            }
                            table << '\n';
                        }
                    }
                    std::cout << cell_name << (code == kExitOk ? " done" : " FAILED") << '\n';
                }
            }
        }
    }
    std::cout << "sweep: " << (cells - failed_cells) << "/" << cells << " cells succeeded\n";
    if (failed_cells == cells && cells > 0) return kExitTrainingFailure;
    return failed_cells > 0 ? kExitPartialSweep : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NeuCGC: homophily-aware neutral contrastive graph clustering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(neucgc_version()));

    // stats
    std::string stats_dir;
    CLI::App* stats = app.add_subcommand("stats", "print dataset statistics");
    stats->add_option("data_dir", stats_dir, "dataset directory")->required();

    // sbm
    SbmOptions sbm_opt;
    std::string sbm_out;
    CLI::App* sbm = app.add_subcommand("sbm", "generate a planted-partition dataset");
    sbm->add_option("--nodes", sbm_opt.nodes, "node count");
    sbm->add_option("--classes", sbm_opt.classes, "class count");
    sbm->add_option("--p-in", sbm_opt.p_in, "intra-class edge probability");
    sbm->add_option("--p-out", sbm_opt.p_out, "inter-class edge probability");
    sbm->add_option("--features", sbm_opt.features, "feature dimension");
    sbm->add_option("--noise", sbm_opt.noise, "feature noise scale");
    sbm->add_option("--seed", sbm_opt.seed, "generator seed");
    sbm->add_option("--out", sbm_out, "output dataset directory")->required();

    // train
    ExperimentOptions train_opt;
    neucgc_train_config_init(&train_opt.config);
    std::string train_prep = "none", train_scope = "global", train_eta = "ncfe";
    SbmOptions train_sbm;
    bool train_use_sbm = false;
    std::string train_config_file;
    CLI::App* train = app.add_subcommand("train", "train and report clustering metrics");
    train->add_option("--config", train_config_file, "flat key=value config file; flags override");
    train->add_option("--data", train_opt.data_dir, "dataset directory");
    train->add_flag("--sbm", train_use_sbm, "train on a generated SBM instead of a dataset");
    train->add_option("--sbm-nodes", train_sbm.nodes, "SBM node count");
    train->add_option("--sbm-classes", train_sbm.classes, "SBM class count");
    train->add_option("--sbm-p-in", train_sbm.p_in, "SBM intra-class probability");
    train->add_option("--sbm-p-out", train_sbm.p_out, "SBM inter-class probability");
    train->add_option("--sbm-features", train_sbm.features, "SBM feature dimension");
    train->add_option("--sbm-noise", train_sbm.noise, "SBM feature noise");
    train->add_option("--sbm-seed", train_sbm.seed, "SBM generator seed");
    add_train_flags(train, train_opt.config, train_prep, train_scope, train_eta);
    train->add_option("--repeat", train_opt.repeat, "number of seeds to run");
    train->add_option("--out", train_opt.out_dir, "output directory")->required();

    // sweep
    ExperimentOptions sweep_opt;
    neucgc_train_config_init(&sweep_opt.config);
    std::string sweep_prep = "none", sweep_scope = "global", sweep_eta = "ncfe";
    SbmOptions sweep_sbm;
    bool sweep_use_sbm = false;
    std::vector<double> grid_l1{0.1}, grid_l2{1.0}, grid_k{0.3};
    std::vector<std::int64_t> grid_dim{1000};
    std::string sweep_config_file;
    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over (lambda1, lambda2, k, dim)");
    sweep->add_option("--config", sweep_config_file, "flat key=value config file; flags override");
    sweep->add_option("--data", sweep_opt.data_dir, "dataset directory");
    sweep->add_flag("--sbm", sweep_use_sbm, "sweep on a generated SBM");
    sweep->add_option("--sbm-nodes", sweep_sbm.nodes, "SBM node count");
    sweep->add_option("--sbm-classes", sweep_sbm.classes, "SBM class count");
    sweep->add_option("--sbm-p-in", sweep_sbm.p_in, "SBM intra-class probability");
    sweep->add_option("--sbm-p-out", sweep_sbm.p_out, "SBM inter-class probability");
    sweep->add_option("--sbm-features", sweep_sbm.features, "SBM feature dimension");
    sweep->add_option("--sbm-noise", sweep_sbm.noise, "SBM feature noise");
    sweep->add_option("--sbm-seed", sweep_sbm.seed, "SBM generator seed");
    add_train_flags(sweep, sweep_opt.config, sweep_prep, sweep_scope, sweep_eta);
    sweep->add_option("--grid-lambda1", grid_l1, "lambda1 grid values")->delimiter(',');
    sweep->add_option("--grid-lambda2", grid_l2, "lambda2 grid values")->delimiter(',');
    sweep->add_option("--grid-k", grid_k, "k grid values")->delimiter(',');
    sweep->add_option("--grid-dim", grid_dim, "latent dimension grid values")->delimiter(',');
    sweep->add_option("--repeat", sweep_opt.repeat, "seeds per cell");
    sweep->add_option("--out", sweep_opt.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (stats->parsed()) return cmd_stats(stats_dir);
    if (sbm->parsed()) return cmd_sbm(sbm_opt, sbm_out);
    if (train->parsed()) {
        if (!train_config_file.empty()) apply_flat_config(train, train_config_file);
        resolve_enum_flags(train_opt.config, train_prep, train_scope, train_eta);
        if (train_use_sbm) {
            train_opt.sbm = train_sbm;
        } else if (train_opt.data_dir.empty()) {
            die(kExitInputError, "train needs --data or --sbm");
        }
        return run_experiment(train_opt);
    }
    if (sweep->parsed()) {
        if (!sweep_config_file.empty()) apply_flat_config(sweep, sweep_config_file);
        resolve_enum_flags(sweep_opt.config, sweep_prep, sweep_scope, sweep_eta);
        if (sweep_use_sbm) {
            sweep_opt.sbm = sweep_sbm;
        } else if (sweep_opt.data_dir.empty()) {
            die(kExitInputError, "sweep needs --data or --sbm");
        }
        return cmd_sweep(sweep_opt, grid_l1, grid_l2, grid_k, grid_dim);
    }
    return kExitOk;
}
