#pragma once

#include "mvtl/transfer.hpp"

#include <optional>

namespace mvtl {

struct MvTlModel {
    AntecedentBank antecedents;
    std::vector<ConsequentBlock> consequents;
    Vector weights;
    double fuzzy_index = 2.0;
    std::size_t classes = 0;
    TrainConfig config;

    std::size_t num_views() const { return consequents.size(); }
};

enum class PriorProvenance { source_derived, refreshed_from_current };

struct PriorConsequents {
    std::vector<Matrix> blocks;
    PriorProvenance provenance = PriorProvenance::source_derived;
};

// Which objective terms were active in the solve. The ablation configuration
// (lambda_t = lambda_d = 0) runs with both transfer flags false.
struct TraceFlags {
    bool knowledge_transfer = false;
    bool distribution_matching = false;
    bool consensus = false;
    bool prior_refresh = false;
};

struct IterationRecord {
    double objective = 0.0;
    std::vector<double> view_errors;
    Vector weights;
};

struct TrainTrace {
    double initial_objective = 0.0;
    std::vector<IterationRecord> iterations;
    TraceFlags flags;
    bool converged = false;
    double wall_seconds = 0.0;
};

/// Everything the block updates need, already in the fuzzy feature space.
/// `design[v]` / `labels` are the labeled target samples; `omega` is built
/// from the source and the full target pool.
struct TrainingState {
    std::vector<Matrix> design;
    Matrix labels;
    MmdMatrix omega;
    std::vector<Matrix> source_consequents;
    PriorConsequents priors;
    std::vector<Matrix> P;
    Vector weights;

    double fuzzy_index = 2.0;
    double lambda_pg = 0.0;
    double lambda_t = 0.0;
    double lambda_d = 0.0;
    double lambda_un = 0.0;

    std::size_t num_views() const { return design.size(); }
};

// Sets P <- source consequents, priors <- source consequents, w <- 1/V.
TrainingState make_state(std::vector<Matrix> design, Matrix labels, MmdMatrix omega,
                         std::vector<Matrix> source_consequents, const TrainConfig& cfg);

// E_v = sum_j sum_i (p_j^T x_i - y_ij)^2 per view.
std::vector<double> view_errors(std::span<const Matrix> P, std::span<const Matrix> design,
                                const Matrix& labels);

double collaborative_value(std::span<const Matrix> P, const Vector& weights, double fuzzy_index,
                           std::span<const Matrix> priors, std::span<const Matrix> design,
                           const Matrix& labels, double lambda_pg, double lambda_un);

// Psi + T at the state's current P and weights.
double objective(const TrainingState& state);

/// Exact minimizer of the objective over view v's consequents with every
/// other block held fixed; returns the new K(d+1) x C block.
Matrix update_consequents(std::size_t view, const TrainingState& state);

/// Simplex minimizer of sum_v w_v^m E_v.
Vector update_weights(std::span<const double> errors, double fuzzy_index);

// One full sweep: every view's consequents then the weights.
void alternate_once(TrainingState& state);

struct FitResult {
    MvTlModel model;
    TrainTrace trace;
};

FitResult fit(const MultiViewDataset& source, const MultiViewDataset& target,
              const TrainConfig& cfg);

// `target_pool` holds every available target sample (labels ignored) and is
// used only for distribution matching.
FitResult fit(const MultiViewDataset& source, const MultiViewDataset& target,
              const MultiViewDataset& target_pool, const TrainConfig& cfg);

struct MultiViewPrediction {
    Vector decision;
    std::size_t label = 0;
};

MultiViewPrediction predict(const MvTlModel& model, std::span<const Vector> sample);

// N x C decision values for a dataset (labels ignored).
Matrix decision_values(const MvTlModel& model, const MultiViewDataset& ds);
std::vector<std::size_t> predict_labels(const MvTlModel& model, const MultiViewDataset& ds);

// Single-view TSK model for view v with the fused weight dropped.
TskModel view_model(const MvTlModel& model, std::size_t view);

}  // namespace mvtl
