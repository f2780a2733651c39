#pragma once

#include "mvtl/features.hpp"
#include "mvtl/kvconfig.hpp"
#include "mvtl/synth.hpp"
#include "mvtl/trainer.hpp"

#include <string>
#include <tuple>
#include <utility>

namespace mvtl::experiment {

// Bad flags, bad config values or missing inputs: the CLI exits with code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

enum class Method { mvtl, tsk };

struct ExperimentConfig {
    std::string features_dir;
    std::vector<std::pair<std::string, std::string>> tasks;  // empty: every ordered pair
    TrainConfig train;
    Method method = Method::mvtl;

    std::vector<double> lambda_pg_grid{0.01, 0.1, 1, 10, 100};
    std::vector<double> lambda_t_grid{0.01, 0.1, 1, 10, 100};
    std::vector<double> lambda_d_grid{0.01, 0.1, 1, 10, 100};
    std::vector<double> lambda_un_grid{0.01, 0.1, 1, 10, 100};
    std::vector<double> m_grid{0.25, 0.5, 1, 2, 4};
    std::vector<std::size_t> rules_grid;  // empty: train.rules only

    std::size_t folds = 5;
    std::size_t inner_folds = 3;
    double label_fraction = 0.05;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
};

void validate(const ExperimentConfig& cfg);

/// Keys: features_dir, tasks ("A>B,C>D"), method (mvtl|tsk), K, m, lambda_pg,
/// lambda_t, lambda_d, lambda_un, max_iters, tol, prior_refresh, folds,
/// inner_folds, label_fraction, seed, threads, lambda_grid (sets all four
/// lambda grids), lambda_pg_grid, lambda_t_grid, lambda_d_grid,
/// lambda_un_grid, m_grid, rules_grid.
ExperimentConfig config_from(const KeyValues& kv, ExperimentConfig base = {});

struct NamedDataset {
    std::string id;
    MultiViewDataset data;  // unnormalized features with labels
};

struct Hyper {
    std::size_t rules = 3;
    double fuzzy_index = 2.0;
    double lambda_pg = 1.0;
    double lambda_t = 1.0;
    double lambda_d = 1.0;
    double lambda_un = 1.0;

    auto key() const { return std::tie(lambda_pg, lambda_t, lambda_d, lambda_un, fuzzy_index, rules); }
};

Hyper hyper_from(const TrainConfig& cfg);
TrainConfig apply(const Hyper& h, TrainConfig cfg);

std::vector<Hyper> grid_points(const ExperimentConfig& cfg);

struct ResultRow {
    std::string kind = "fold";  // fold | summary
    std::string method;
    std::string source;
    std::string target;
    std::string fold;  // index, or "mean" on summary rows
    Hyper hyper;
    double label_fraction = 0.0;
    std::size_t labeled = 0;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double sd = 0.0;
    std::vector<double> weights;
    double train_seconds = 0.0;  // not written to the results CSV
    std::string status = "ok";

    std::string task() const { return source + ">" + target; }
};

struct PredictionRecord {
    std::string method;
    std::string source;
    std::string target;
    std::size_t fold = 0;
    std::size_t sample = 0;  // row in the target dataset
    std::size_t truth = 0;
    std::size_t predicted = 0;
};

struct TransferResults {
    std::vector<ResultRow> rows;  // fold rows then one summary row per (method, task)
    std::vector<PredictionRecord> predictions;
};

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified k-fold split of `labels` (class indices); deterministic in seed.
std::vector<Fold> stratified_folds(std::span<const std::size_t> labels, std::size_t folds, std::uint64_t seed);

/// Per-class draw of round(fraction * n_c) (at least 1) indices from `pool`.
std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> pool,
                                              std::span<const std::size_t> labels, double fraction,
                                              std::uint64_t seed);

// Throws std::logic_error if any test index appears in `train`.
void assert_fold_hygiene(std::span<const std::size_t> train, std::span<const std::size_t> test);

std::vector<std::pair<std::string, std::string>> resolve_tasks(const ExperimentConfig& cfg,
                                                               const std::vector<std::string>& ids);

/// Five-fold transfer protocol over every task. Row order is canonical:
/// tasks in configured order, folds ascending, methods in generation order.
TransferResults run_transfer(const std::vector<NamedDataset>& datasets, const ExperimentConfig& cfg);

// Summary rows (mean, sample SD) for each (method, task) group of fold rows.
std::vector<ResultRow> summarize(const std::vector<ResultRow>& fold_rows);

struct SweepRow {
    std::string source;
    std::string target;
    Hyper hyper;
    std::vector<double> fold_scores;  // inner-CV accuracy per outer fold
    double mean_score = 0.0;
};

struct GridSearchResults {
    std::vector<SweepRow> sweep;
    TransferResults outer;                  // test accuracy of each fold's selection
    std::vector<std::pair<std::string, Hyper>> best;  // task -> best mean inner score
};

/// Nested CV: every outer fold selects hyperparameters by inner CV on its own
/// training part only, then reports accuracy on its untouched test part.
GridSearchResults run_gridsearch(const std::vector<NamedDataset>& datasets, const ExperimentConfig& cfg);

// Max score, ties to the lexicographically smallest (lambda_pg, lambda_t, lambda_d, lambda_un, m, K).
std::size_t select_best(const std::vector<Hyper>& points, const std::vector<double>& scores);

struct GroupStats {
    std::string method;
    std::string label;  // task, target id, or "all"
    std::size_t n = 0;
    double mean = 0.0;  // percent
    double sd = 0.0;    // percent, sample SD, 0 for n = 1
};

struct Report {
    std::vector<GroupStats> per_task;
    std::vector<GroupStats> per_target;  // average of per-task means sharing a target
    std::vector<GroupStats> per_method;  // average of all per-task means
};

Report make_report(const std::vector<ResultRow>& rows);
double sample_sd(std::span<const double> values);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& path);
std::string predictions_csv(const std::vector<PredictionRecord>& preds);
std::string timings_csv(const std::vector<ResultRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows, std::size_t folds);
std::string report_csv(const Report& r);
std::string report_text(const Report& r);

// Writers behind the CLI subcommands. All return the files written.
std::vector<std::string> cmd_synth(const std::string& out_dir, const SynthSpec& spec, std::uint64_t seed);
std::vector<std::string> cmd_extract(const std::string& raw_dir, const std::string& out_dir,
                                     const FeatureConfig& cfg);
std::vector<std::string> cmd_transfer(const ExperimentConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_gridsearch(const ExperimentConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_report(const std::string& results_path, const std::string& out_dir,
                                    std::string* text = nullptr);

std::vector<NamedDataset> load_feature_sets(const std::string& features_dir,
                                            const std::vector<std::string>& ids);
std::vector<std::string> feature_set_ids(const std::string& features_dir);

}  // namespace mvtl::experiment
