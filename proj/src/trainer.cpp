#include "mvtl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace mvtl {

namespace {

double pow_weight(double w, double m) {
    return w == 0.0 ? 0.0 : std::pow(w, m);
}

// Mean of the other views' prior outputs for each target sample: the
// consensus target of view v. Zero when there is a single view.
Matrix consensus_target(std::size_t view, std::span<const Matrix> priors,
                        std::span<const Matrix> design) {
    const std::size_t views = design.size();
    Matrix target = Matrix::Zero(design[view].rows(), priors[view].cols());
    if (views < 2) return target;
    for (std::size_t l = 0; l < views; ++l) {
        if (l == view) continue;
        target.noalias() += design[l] * priors[l];
    }
    target /= static_cast<double>(views - 1);
    return target;
}

void check_shapes(std::span<const Matrix> P, std::span<const Matrix> design, const Matrix& labels) {
    if (P.size() != design.size()) throw ValidationError("consequent/design view counts differ");
    for (std::size_t v = 0; v < P.size(); ++v) {
        if (design[v].rows() != labels.rows())
            throw ValidationError("view " + std::to_string(v) + ": design rows differ from labels");
        if (P[v].rows() != design[v].cols() || P[v].cols() != labels.cols())
            throw ValidationError("view " + std::to_string(v) + ": consequent shape mismatch");
    }
}

}  // namespace

TrainingState make_state(std::vector<Matrix> design, Matrix labels, MmdMatrix omega,
                         std::vector<Matrix> source_consequents, const TrainConfig& cfg) {
    TrainingState s;
    const std::size_t views = design.size();
    if (views == 0) throw ValidationError("make_state: no views");
    if (omega.views.size() != views || source_consequents.size() != views)
        throw ValidationError("make_state: view counts differ");
    s.design = std::move(design);
    s.labels = std::move(labels);
    s.omega = std::move(omega);
    s.source_consequents = std::move(source_consequents);
    check_shapes(s.source_consequents, s.design, s.labels);
    s.priors.blocks = s.source_consequents;
    s.priors.provenance = PriorProvenance::source_derived;
    s.P = s.source_consequents;
    s.weights = Vector::Constant(static_cast<Eigen::Index>(views), 1.0 / static_cast<double>(views));
    s.fuzzy_index = cfg.fuzzy_index;
    s.lambda_pg = cfg.lambda_pg;
    s.lambda_t = cfg.lambda_t;
    s.lambda_d = cfg.lambda_d;
    s.lambda_un = cfg.lambda_un;
    return s;
}

std::vector<double> view_errors(std::span<const Matrix> P, std::span<const Matrix> design,
                                const Matrix& labels) {
    check_shapes(P, design, labels);
    std::vector<double> e(P.size());
    for (std::size_t v = 0; v < P.size(); ++v) e[v] = (design[v] * P[v] - labels).squaredNorm();
    return e;
}

double collaborative_value(std::span<const Matrix> P, const Vector& weights, double fuzzy_index,
                           std::span<const Matrix> priors, std::span<const Matrix> design,
                           const Matrix& labels, double lambda_pg, double lambda_un) {
    const auto errors = view_errors(P, design, labels);
    if (static_cast<std::size_t>(weights.size()) != P.size())
        throw ValidationError("collaborative_value: weight count mismatch");
    double psi = 0.0;
    for (std::size_t v = 0; v < P.size(); ++v) {
        psi += 0.5 * pow_weight(weights(static_cast<Eigen::Index>(v)), fuzzy_index) * errors[v];
        psi += lambda_pg * P[v].squaredNorm();
    }
    if (lambda_un != 0.0 && P.size() > 1) {
        if (priors.size() != P.size()) throw ValidationError("collaborative_value: prior count mismatch");
        for (std::size_t v = 0; v < P.size(); ++v) {
            const Matrix target = consensus_target(v, priors, design);
            psi += 0.5 * lambda_un * (design[v] * P[v] - target).squaredNorm();
        }
    }
    return psi;
}

double objective(const TrainingState& s) {
    return collaborative_value(s.P, s.weights, s.fuzzy_index, s.priors.blocks, s.design, s.labels,
                               s.lambda_pg, s.lambda_un) +
           transfer_value(s.P, s.source_consequents, s.omega, s.lambda_t, s.lambda_d);
}

Matrix update_consequents(std::size_t view, const TrainingState& s) {
    const std::size_t views = s.num_views();
    if (view >= views) throw ValidationError("update_consequents: view index out of range");
    const Matrix& X = s.design[view];
    const double wm = pow_weight(s.weights(static_cast<Eigen::Index>(view)), s.fuzzy_index);
    const bool consensus = s.lambda_un != 0.0 && views > 1;
    const double data_weight = wm + (consensus ? s.lambda_un : 0.0);

    const auto width = X.cols();
    Matrix A = Matrix::Zero(width, width);
    if (data_weight != 0.0) A.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), data_weight);
    A.diagonal().array() += 2.0 * (s.lambda_pg + s.lambda_t);
    if (s.lambda_d != 0.0) A.noalias() += 2.0 * s.lambda_d * s.omega.views[view].omega;

    Matrix b = wm * (X.transpose() * s.labels);
    if (consensus) {
        b.noalias() += s.lambda_un * (X.transpose() * consensus_target(view, s.priors.blocks, s.design));
    }
    if (s.lambda_t != 0.0) b.noalias() += 2.0 * s.lambda_t * s.source_consequents[view];

    Eigen::LLT<Matrix, Eigen::Lower> llt(A);
    if (llt.info() != Eigen::Success ||
        (s.lambda_pg + s.lambda_t == 0.0 && !(llt.rcond() > 1e-13))) {
        throw NumericalError("update_consequents: view " + std::to_string(view) +
                             " system is singular; use lambda_pg > 0");
    }
    return llt.solve(b);
}

Vector update_weights(std::span<const double> errors, double fuzzy_index) {
    const auto views = static_cast<Eigen::Index>(errors.size());
    if (views == 0) throw ValidationError("update_weights: no views");
    if (!(fuzzy_index > 0.0)) throw ValidationError("update_weights: fuzzy index must be > 0");
    Eigen::Index zeros = 0;
    for (double e : errors) {
        if (!(e >= 0.0) || !std::isfinite(e))
            throw ValidationError("update_weights: view errors must be finite and >= 0");
        if (e == 0.0) ++zeros;
    }
    Vector w = Vector::Zero(views);
    if (zeros > 0) {
        for (Eigen::Index v = 0; v < views; ++v)
            if (errors[static_cast<std::size_t>(v)] == 0.0) w(v) = 1.0 / static_cast<double>(zeros);
        return w;
    }
    if (fuzzy_index <= 1.0) {
        Eigen::Index best = 0;
        for (Eigen::Index v = 1; v < views; ++v)
            if (errors[static_cast<std::size_t>(v)] < errors[static_cast<std::size_t>(best)]) best = v;
        w(best) = 1.0;
        return w;
    }
    // w_v proportional to E_v^{1/(1-m)}, normalized in the log domain.
    const double expo = 1.0 / (1.0 - fuzzy_index);
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index v = 0; v < views; ++v) {
        w(v) = expo * std::log(errors[static_cast<std::size_t>(v)]);
        top = std::max(top, w(v));
    }
    w = (w.array() - top).exp().matrix();
    w /= w.sum();
    return w;
}

void alternate_once(TrainingState& s) {
    if (s.priors.provenance == PriorProvenance::refreshed_from_current) s.priors.blocks = s.P;
    for (std::size_t v = 0; v < s.num_views(); ++v) s.P[v] = update_consequents(v, s);
    const auto errors = view_errors(s.P, s.design, s.labels);
    s.weights = update_weights(errors, s.fuzzy_index);
}

namespace {

void check_domain_pair(const MultiViewDataset& source, const MultiViewDataset& target,
                       const MultiViewDataset& pool) {
    validate_multiview(source);
    validate_multiview(target);
    validate_multiview(pool);
    if (!source.labeled() || !target.labeled())
        throw ValidationError("fit: source and target must both carry labels");
    if (source.num_views() != target.num_views() || pool.num_views() != target.num_views())
        throw ValidationError("fit: source and target view counts differ");
    if (source.num_classes() != target.num_classes())
        throw ValidationError("fit: source and target class counts differ");
    for (std::size_t v = 0; v < source.num_views(); ++v) {
        if (source.views[v].dim() != target.views[v].dim() ||
            pool.views[v].dim() != target.views[v].dim())
            throw ValidationError("fit: view " + std::to_string(v) + " dimension differs across domains");
    }
    if (target.samples() == 0) throw ValidationError("fit: target has no labeled samples");
}

std::string trace_dump(const TrainTrace& trace) {
    std::ostringstream os;
    os << "J0=" << trace.initial_objective;
    for (std::size_t i = 0; i < trace.iterations.size(); ++i)
        os << " J" << i + 1 << "=" << trace.iterations[i].objective;
    return os.str();
}

}  // namespace

FitResult fit(const MultiViewDataset& source, const MultiViewDataset& target,
              const TrainConfig& cfg) {
    return fit(source, target, target, cfg);
}

FitResult fit(const MultiViewDataset& source, const MultiViewDataset& target,
              const MultiViewDataset& target_pool, const TrainConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    validate(cfg);
    check_domain_pair(source, target, target_pool);
    const std::size_t views = source.num_views();

    ClusteringOptions copts;
    copts.fuzzifier = cfg.clustering_fuzzifier;
    copts.spread_scale = cfg.spread_scale;

    FitResult result;
    MvTlModel& model = result.model;
    model.classes = source.num_classes();
    model.fuzzy_index = cfg.fuzzy_index;
    model.config = cfg;

    std::vector<Matrix> design;
    std::vector<Matrix> p0;
    MmdMatrix omega;
    for (std::size_t v = 0; v < views; ++v) {
        auto bank = cluster_antecedents(source.views[v].data, cfg.rules, copts).antecedents;
        const auto gs = map_dataset(source.views[v].data, bank, v);
        const auto gt = map_dataset(target.views[v].data, bank, v);
        const auto gp = map_dataset(target_pool.views[v].data, bank, v);
        // Source knowledge; 2 lambda_pg matches the ridge scale of the block update.
        p0.push_back(ridge_consequents(gs, source.labels(), 2.0 * cfg.lambda_pg).P);
        omega.views.push_back(build_mmd(gs, gp));
        design.push_back(gt.rows);
        model.antecedents.views.push_back(std::move(bank));
    }

    TrainingState state = make_state(std::move(design), target.labels(), std::move(omega),
                                     std::move(p0), cfg);
    if (cfg.prior_refresh) state.priors.provenance = PriorProvenance::refreshed_from_current;

    TrainTrace& trace = result.trace;
    trace.flags.knowledge_transfer = cfg.lambda_t != 0.0;
    trace.flags.distribution_matching = cfg.lambda_d != 0.0;
    trace.flags.consensus = cfg.lambda_un != 0.0 && views > 1;
    trace.flags.prior_refresh = cfg.prior_refresh;
    trace.initial_objective = objective(state);

    double previous = trace.initial_objective;
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        alternate_once(state);
        IterationRecord rec;
        rec.objective = objective(state);
        rec.view_errors = view_errors(state.P, state.design, state.labels);
        rec.weights = state.weights;
        trace.iterations.push_back(std::move(rec));
        const double j = trace.iterations.back().objective;
        if (!std::isfinite(j)) {
            throw NumericalError("fit: objective became non-finite; " + trace_dump(trace));
        }
        if (std::abs(j - previous) < cfg.tol * std::max(1.0, std::abs(previous))) {
            trace.converged = true;
            break;
        }
        previous = j;
    }

    for (std::size_t v = 0; v < views; ++v)
        model.consequents.push_back(ConsequentBlock{std::move(state.P[v]), 2.0 * cfg.lambda_pg});
    model.weights = state.weights;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

MultiViewPrediction predict(const MvTlModel& model, std::span<const Vector> sample) {
    if (sample.size() != model.num_views()) {
        throw ValidationError("predict: sample has " + std::to_string(sample.size()) +
                              " views, model expects " + std::to_string(model.num_views()));
    }
    MultiViewPrediction out;
    out.decision = Vector::Zero(static_cast<Eigen::Index>(model.classes));
    for (std::size_t v = 0; v < sample.size(); ++v) {
        const Vector g = map_sample(sample[v], model.antecedents.views[v]);
        out.decision.noalias() +=
            model.weights(static_cast<Eigen::Index>(v)) * (model.consequents[v].P.transpose() * g);
    }
    out.label = predict_class(out.decision).label;
    return out;
}

Matrix decision_values(const MvTlModel& model, const MultiViewDataset& ds) {
    if (ds.num_views() != model.num_views()) {
        throw ValidationError("decision_values: dataset has " + std::to_string(ds.num_views()) +
                              " views, model expects " + std::to_string(model.num_views()));
    }
    Matrix f = Matrix::Zero(static_cast<Eigen::Index>(ds.samples()),
                            static_cast<Eigen::Index>(model.classes));
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        const auto g = map_dataset(ds.views[v].data, model.antecedents.views[v], v);
        f.noalias() += model.weights(static_cast<Eigen::Index>(v)) * (g.rows * model.consequents[v].P);
    }
    return f;
}

std::vector<std::size_t> predict_labels(const MvTlModel& model, const MultiViewDataset& ds) {
    return argmax_decode(decision_values(model, ds));
}

TskModel view_model(const MvTlModel& model, std::size_t view) {
    if (view >= model.num_views()) throw ValidationError("view_model: view index out of range");
    return TskModel{model.antecedents.views[view], model.consequents[view], model.classes};
}

}  // namespace mvtl
