#include "mvtl/experiment.hpp"

#include "mvtl/csv.hpp"
#include "mvtl/dataio.hpp"
#include "mvtl/log.hpp"
#include "mvtl/tsk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace mvtl::experiment {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Fisher-Yates driven directly by mt19937_64 output (standardized sequence).
void shuffle(std::vector<std::size_t>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// failure (lowest index) after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto body = [&](std::atomic<std::size_t>& next) {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
    if (workers == 1) {
        body(next);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back([&] { body(next); });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<std::size_t> parse_rules(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& cell : csv::split(s)) {
        const double v = csv::parse_number(cell, "rules_grid", 0);
        if (v < 1 || v != std::floor(v)) throw UsageError("rules_grid entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string method_label(Method method, const Hyper& h, std::size_t view) {
    if (method == Method::tsk) return std::string("tsk_") + view_name(view);
    return (h.lambda_t == 0.0 && h.lambda_d == 0.0) ? "mvtl_ablation" : "mvtl";
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

const NamedDataset* find_dataset(const std::vector<NamedDataset>& sets, const std::string& id) {
    for (const auto& d : sets)
        if (d.id == id) return &d;
    return nullptr;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    try {
        mvtl::validate(cfg.train);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    if (cfg.folds < 2) throw UsageError("folds must be >= 2");
    if (cfg.inner_folds < 2) throw UsageError("inner_folds must be >= 2");
    if (!(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0))
        throw UsageError("label_fraction must be in (0, 1]");
    if (cfg.threads < 1) throw UsageError("threads must be >= 1");
}

ExperimentConfig config_from(const KeyValues& kv, ExperimentConfig base) {
    ExperimentConfig c = std::move(base);
    try {
        c.features_dir = kv.get("features_dir", c.features_dir);
        if (kv.has("tasks")) {
            c.tasks.clear();
            const std::string spec = kv.get("tasks");
            if (spec != "all") {
                for (const auto& t : csv::split(spec)) {
                    const auto gt = t.find('>');
                    if (gt == std::string::npos || gt == 0 || gt + 1 == t.size())
                        throw UsageError("task '" + t + "' must look like SOURCE>TARGET");
                    c.tasks.emplace_back(t.substr(0, gt), t.substr(gt + 1));
                }
            }
        }
        if (kv.has("method")) {
            const std::string m = kv.get("method");
            if (m == "mvtl") c.method = Method::mvtl;
            else if (m == "tsk") c.method = Method::tsk;
            else throw UsageError("method must be mvtl or tsk, got '" + m + "'");
        }
        TrainConfig& t = c.train;
        t.rules = kv.get_size("K", t.rules);
        t.fuzzy_index = kv.get_double("m", t.fuzzy_index);
        t.lambda_pg = kv.get_double("lambda_pg", t.lambda_pg);
        t.lambda_t = kv.get_double("lambda_t", t.lambda_t);
        t.lambda_d = kv.get_double("lambda_d", t.lambda_d);
        t.lambda_un = kv.get_double("lambda_un", t.lambda_un);
        t.max_iters = kv.get_size("max_iters", t.max_iters);
        t.tol = kv.get_double("tol", t.tol);
        t.prior_refresh = kv.get_bool("prior_refresh", t.prior_refresh);
        c.folds = kv.get_size("folds", c.folds);
        c.inner_folds = kv.get_size("inner_folds", c.inner_folds);
        c.label_fraction = kv.get_double("label_fraction", c.label_fraction);
        c.seed = kv.get_size("seed", c.seed);
        t.seed = c.seed;
        c.threads = kv.get_size("threads", c.threads);
        if (kv.has("lambda_grid")) {
            const auto g = kv.get_doubles("lambda_grid", {});
            c.lambda_pg_grid = c.lambda_t_grid = c.lambda_d_grid = c.lambda_un_grid = g;
        }
        c.lambda_pg_grid = kv.get_doubles("lambda_pg_grid", c.lambda_pg_grid);
        c.lambda_t_grid = kv.get_doubles("lambda_t_grid", c.lambda_t_grid);
        c.lambda_d_grid = kv.get_doubles("lambda_d_grid", c.lambda_d_grid);
        c.lambda_un_grid = kv.get_doubles("lambda_un_grid", c.lambda_un_grid);
        c.m_grid = kv.get_doubles("m_grid", c.m_grid);
        if (kv.has("rules_grid")) c.rules_grid = parse_rules(kv.get("rules_grid"));
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    validate(c);
    return c;
}

Hyper hyper_from(const TrainConfig& cfg) {
    return Hyper{cfg.rules, cfg.fuzzy_index, cfg.lambda_pg, cfg.lambda_t, cfg.lambda_d, cfg.lambda_un};
}

TrainConfig apply(const Hyper& h, TrainConfig cfg) {
    cfg.rules = h.rules;
    cfg.fuzzy_index = h.fuzzy_index;
    cfg.lambda_pg = h.lambda_pg;
    cfg.lambda_t = h.lambda_t;
    cfg.lambda_d = h.lambda_d;
    cfg.lambda_un = h.lambda_un;
    return cfg;
}

std::vector<Hyper> grid_points(const ExperimentConfig& cfg) {
    const std::vector<std::size_t> rules = cfg.rules_grid.empty() ? std::vector<std::size_t>{cfg.train.rules}
                                                                  : cfg.rules_grid;
    std::vector<Hyper> out;
    for (double pg : cfg.lambda_pg_grid)
        for (double t : cfg.lambda_t_grid)
            for (double d : cfg.lambda_d_grid)
                for (double un : cfg.lambda_un_grid)
                    for (double m : cfg.m_grid)
                        for (std::size_t k : rules) out.push_back(Hyper{k, m, pg, t, d, un});
    return out;
}

std::vector<Fold> stratified_folds(std::span<const std::size_t> labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ValidationError("stratified_folds: need at least 2 folds");
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> assignment(labels.size(), 0);
    std::size_t offset = 0;
    for (auto& [cls, idx] : by_class) {
        shuffle(idx, mix(seed, cls));
        // Continue the round robin across classes so fold sizes stay balanced.
        for (std::size_t r = 0; r < idx.size(); ++r) assignment[idx[r]] = (offset + r) % folds;
        offset = (offset + idx.size()) % folds;
    }
    std::vector<Fold> out(folds);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t f = 0; f < folds; ++f) {
            (assignment[i] == f ? out[f].test : out[f].train).push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> pool,
                                              std::span<const std::size_t> labels, double fraction,
                                              std::uint64_t seed) {
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i : pool) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> out;
    for (auto& [cls, idx] : by_class) {
        shuffle(idx, mix(seed, cls));
        const auto want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size()))));
        out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(want, idx.size())));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void assert_fold_hygiene(std::span<const std::size_t> train, std::span<const std::size_t> test) {
    std::vector<std::size_t> a(train.begin(), train.end());
    std::vector<std::size_t> b(test.begin(), test.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (!common.empty())
        throw std::logic_error("fold hygiene violated: test sample " + std::to_string(common.front()) +
                               " appears in a training set");
}

std::vector<std::pair<std::string, std::string>> resolve_tasks(const ExperimentConfig& cfg,
                                                               const std::vector<std::string>& ids) {
    if (!cfg.tasks.empty()) return cfg.tasks;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : ids)
        for (const auto& t : ids)
            if (s != t) out.emplace_back(s, t);
    return out;
}

namespace {

struct RunOutput {
    std::vector<ResultRow> rows;
    std::vector<PredictionRecord> predictions;
};

std::vector<std::size_t> class_indices(const MultiViewDataset& ds) {
    return argmax_decode(ds.labels());
}

std::size_t count_classes(std::span<const std::size_t> idx, std::span<const std::size_t> labels) {
    std::vector<std::size_t> seen;
    for (std::size_t i : idx) seen.push_back(labels[i]);
    std::sort(seen.begin(), seen.end());
    return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

ResultRow base_row(const std::string& method, const std::string& src, const std::string& tgt, std::size_t fold,
                   const Hyper& h, double fraction) {
    ResultRow r;
    r.method = method;
    r.source = src;
    r.target = tgt;
    r.fold = std::to_string(fold);
    r.hyper = h;
    r.label_fraction = fraction;
    return r;
}

// One (task, fold, hyperparameter) run: trains on `train` (labels restricted to
// `labeled`) and scores on `test`.
RunOutput run_split(const NamedDataset& source, const MultiViewDataset& source_normalized,
                    const NamedDataset& target, std::span<const std::size_t> train,
                    std::span<const std::size_t> labeled, std::span<const std::size_t> test, std::size_t fold,
                    const Hyper& h, Method method, const ExperimentConfig& cfg, bool keep_predictions) {
    assert_fold_hygiene(train, test);
    assert_fold_hygiene(labeled, test);
    const auto labels = class_indices(target.data);
    const std::size_t classes = target.data.num_classes();

    RunOutput out;
    const std::size_t views = method == Method::tsk ? target.data.num_views() : 1;
    auto emit_skip = [&](const std::string& why) {
        log::warn("task " + source.id + ">" + target.id + " fold " + std::to_string(fold) + ": skipped, " + why);
        for (std::size_t v = 0; v < views; ++v) {
            auto r = base_row(method_label(method, h, v), source.id, target.id, fold, h, cfg.label_fraction);
            r.status = "skipped: " + why;
            r.labeled = labeled.size();
            r.total = test.size();
            out.rows.push_back(std::move(r));
        }
        return out;
    };
    if (test.empty()) return emit_skip("empty test fold");
    if (count_classes(test, labels) < classes) return emit_skip("test fold lacks a class");
    if (count_classes(labeled, labels) < classes) return emit_skip("labeled subset lacks a class");

    MultiViewDataset pool = target.data.subset(train);
    const Normalizer norm = fit_normalizer(pool);
    pool = norm.apply(pool);
    MultiViewDataset lab = norm.apply(target.data.subset(labeled));
    MultiViewDataset tst = norm.apply(target.data.subset(test));
    pool.domain = lab.domain = tst.domain = DomainTag::target;

    const TrainConfig tc = apply(h, cfg.train);
    std::vector<std::vector<std::size_t>> predicted;
    std::vector<std::vector<double>> weights;
    std::vector<double> seconds;
    if (method == Method::mvtl) {
        const FitResult fr = fit(source_normalized, lab, pool, tc);
        predicted.push_back(predict_labels(fr.model, tst));
        weights.emplace_back(fr.model.weights.data(), fr.model.weights.data() + fr.model.weights.size());
        seconds.push_back(fr.trace.wall_seconds);
    } else {
        ClusteringOptions opts;
        opts.fuzzifier = tc.clustering_fuzzifier;
        opts.spread_scale = tc.spread_scale;
        for (std::size_t v = 0; v < views; ++v) {
            const auto start = std::chrono::steady_clock::now();
            const TskModel m = train_tsk(lab.views[v].data, lab.labels(), tc.rules, 2.0 * tc.lambda_pg, opts);
            predicted.push_back(argmax_decode(decision_values(m, tst.views[v].data)));
            weights.push_back({});
            seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
    }

    for (std::size_t v = 0; v < predicted.size(); ++v) {
        auto r = base_row(method_label(method, h, v), source.id, target.id, fold, h, cfg.label_fraction);
        r.labeled = labeled.size();
        r.total = test.size();
        for (std::size_t i = 0; i < test.size(); ++i) {
            const std::size_t truth = labels[test[i]];
            if (predicted[v][i] == truth) ++r.correct;
            if (keep_predictions)
                out.predictions.push_back({r.method, source.id, target.id, fold, test[i], truth, predicted[v][i]});
        }
        r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
        r.weights = weights[v];
        r.train_seconds = seconds[v];
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::uint64_t fold_seed(const ExperimentConfig& cfg, const std::string& target) {
    return mix(cfg.seed, fnv1a("folds:" + target));
}

std::uint64_t label_seed(const ExperimentConfig& cfg, const std::string& task, std::size_t fold,
                         std::size_t inner = 0) {
    return mix(mix(cfg.seed, fnv1a("labels:" + task)), fold * 1000 + inner);
}

struct TaskContext {
    std::string source_id;
    std::string target_id;
    const NamedDataset* source = nullptr;
    const NamedDataset* target = nullptr;
    MultiViewDataset source_normalized;
    std::vector<Fold> folds;
    std::vector<std::size_t> labels;
    std::string missing;  // id of an absent feature set, if any

    std::string task() const { return source_id + ">" + target_id; }
};

std::vector<TaskContext> prepare_tasks(const std::vector<NamedDataset>& datasets, const ExperimentConfig& cfg) {
    std::vector<std::string> ids;
    for (const auto& d : datasets) ids.push_back(d.id);
    std::vector<TaskContext> out;
    for (const auto& [s, t] : resolve_tasks(cfg, ids)) {
        TaskContext ctx;
        ctx.source_id = s;
        ctx.target_id = t;
        ctx.source = find_dataset(datasets, s);
        ctx.target = find_dataset(datasets, t);
        if (!ctx.source || !ctx.target) {
            ctx.missing = !ctx.source ? s : t;
            log::warn("task " + ctx.task() + ": missing features for " + ctx.missing);
            out.push_back(std::move(ctx));
            continue;
        }
        validate_multiview(ctx.source->data);
        validate_multiview(ctx.target->data);
        ctx.source_normalized = fit_normalizer(ctx.source->data).apply(ctx.source->data);
        ctx.source_normalized.domain = DomainTag::source;
        ctx.labels = class_indices(ctx.target->data);
        ctx.folds = stratified_folds(ctx.labels, cfg.folds, fold_seed(cfg, t));
        out.push_back(std::move(ctx));
    }
    return out;
}

}  // namespace

std::vector<ResultRow> summarize(const std::vector<ResultRow>& fold_rows) {
    std::vector<std::pair<std::string, std::string>> order;  // (method, task)
    std::map<std::pair<std::string, std::string>, std::vector<const ResultRow*>> groups;
    for (const auto& r : fold_rows) {
        if (r.kind != "fold") continue;
        const auto key = std::make_pair(r.method, r.task());
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    std::vector<ResultRow> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        ResultRow s = *g.front();
        s.kind = "summary";
        s.fold = "mean";
        s.labeled = s.total = s.correct = 0;
        s.weights.clear();
        s.train_seconds = 0.0;
        std::vector<double> acc;
        for (const ResultRow* r : g) {
            if (r->status != "ok") continue;
            acc.push_back(r->accuracy);
            s.total += r->total;
            s.correct += r->correct;
            s.train_seconds += r->train_seconds;
        }
        s.status = acc.empty() ? "empty" : "ok";
        s.accuracy = acc.empty() ? 0.0 : std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
        s.sd = sample_sd(acc);
        out.push_back(std::move(s));
    }
    return out;
}

TransferResults run_transfer(const std::vector<NamedDataset>& datasets, const ExperimentConfig& cfg) {
    validate(cfg);
    const auto tasks = prepare_tasks(datasets, cfg);
    const Hyper h = hyper_from(cfg.train);

    struct Job {
        std::size_t task;
        std::size_t fold;
    };
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (std::size_t f = 0; f < cfg.folds; ++f) jobs.push_back({t, f});

    std::vector<RunOutput> outputs(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        const TaskContext& ctx = tasks[jobs[j].task];
        const std::size_t fold = jobs[j].fold;
        if (!ctx.missing.empty()) {
            const std::size_t views = cfg.method == Method::tsk ? kNumViews : 1;
            for (std::size_t v = 0; v < views; ++v) {
                auto r = base_row(method_label(cfg.method, h, v), ctx.source_id, ctx.target_id, fold, h,
                                  cfg.label_fraction);
                r.status = "skipped: missing features for " + ctx.missing;
                outputs[j].rows.push_back(std::move(r));
            }
            return;
        }
        const Fold& split = ctx.folds[fold];
        const std::string task = ctx.task();
        const auto labeled = stratified_subsample(split.train, ctx.labels, cfg.label_fraction,
                                                  label_seed(cfg, task, fold));
        outputs[j] = run_split(*ctx.source, ctx.source_normalized, *ctx.target, split.train, labeled, split.test,
                               fold, h, cfg.method, cfg, true);
    });

    TransferResults res;
    for (auto& o : outputs) {
        res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
        res.predictions.insert(res.predictions.end(), o.predictions.begin(), o.predictions.end());
    }
    const auto summary = summarize(res.rows);
    res.rows.insert(res.rows.end(), summary.begin(), summary.end());
    return res;
}

std::size_t select_best(const std::vector<Hyper>& points, const std::vector<double>& scores) {
    if (points.empty() || points.size() != scores.size()) throw UsageError("grid search: empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (scores[i] > scores[best] || (scores[i] == scores[best] && points[i].key() < points[best].key())) best = i;
    }
    return best;
}

GridSearchResults run_gridsearch(const std::vector<NamedDataset>& datasets, const ExperimentConfig& cfg) {
    validate(cfg);
    const auto points = grid_points(cfg);
    if (points.empty()) throw UsageError("grid search: empty grid");
    const auto tasks = prepare_tasks(datasets, cfg);
    for (const auto& t : tasks)
        if (!t.missing.empty()) throw UsageError("grid search: missing features for " + t.missing);

    // Inner folds of each outer training part, in outer-index space.
    std::vector<std::vector<std::vector<Fold>>> inner(tasks.size());
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& ctx = tasks[t];
        for (std::size_t f = 0; f < cfg.folds; ++f) {
            const auto& train = ctx.folds[f].train;
            std::vector<std::size_t> sub_labels;
            for (std::size_t i : train) sub_labels.push_back(ctx.labels[i]);
            auto local = stratified_folds(sub_labels, cfg.inner_folds, mix(fold_seed(cfg, ctx.target->id), f + 1));
            for (auto& fold : local) {
                for (auto& i : fold.train) i = train[i];
                for (auto& i : fold.test) i = train[i];
            }
            inner[t].push_back(std::move(local));
        }
    }

    struct Job {
        std::size_t task, outer, point;
    };
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (std::size_t f = 0; f < cfg.folds; ++f)
            for (std::size_t p = 0; p < points.size(); ++p) jobs.push_back({t, f, p});

    std::vector<double> scores(jobs.size(), 0.0);
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        const auto& ctx = tasks[jobs[j].task];
        const std::string task = ctx.task();
        std::vector<double> acc;
        for (std::size_t k = 0; k < cfg.inner_folds; ++k) {
            const Fold& split = inner[jobs[j].task][jobs[j].outer][k];
            assert_fold_hygiene(split.train, ctx.folds[jobs[j].outer].test);
            assert_fold_hygiene(split.test, ctx.folds[jobs[j].outer].test);
            const auto labeled = stratified_subsample(split.train, ctx.labels, cfg.label_fraction,
                                                      label_seed(cfg, task, jobs[j].outer, k + 1));
            const auto o = run_split(*ctx.source, ctx.source_normalized, *ctx.target, split.train, labeled,
                                     split.test, jobs[j].outer, points[jobs[j].point], cfg.method, cfg, false);
            // tsk runs score the best view.
            double best = -1.0;
            for (const auto& r : o.rows)
                if (r.status == "ok") best = std::max(best, r.accuracy);
            if (best >= 0.0) acc.push_back(best);
        }
        scores[j] = acc.empty() ? 0.0 : std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    });

    GridSearchResults res;
    std::vector<Hyper> selected;  // per (task, outer fold)
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& ctx = tasks[t];
        std::vector<double> means(points.size(), 0.0);
        for (std::size_t p = 0; p < points.size(); ++p) {
            SweepRow row;
            row.source = ctx.source->id;
            row.target = ctx.target->id;
            row.hyper = points[p];
            for (std::size_t f = 0; f < cfg.folds; ++f)
                row.fold_scores.push_back(scores[(t * cfg.folds + f) * points.size() + p]);
            row.mean_score = std::accumulate(row.fold_scores.begin(), row.fold_scores.end(), 0.0) /
                             static_cast<double>(cfg.folds);
            means[p] = row.mean_score;
            res.sweep.push_back(std::move(row));
        }
        res.best.emplace_back(ctx.task(), points[select_best(points, means)]);
        for (std::size_t f = 0; f < cfg.folds; ++f) {
            std::vector<double> fs_scores(points.size());
            for (std::size_t p = 0; p < points.size(); ++p) fs_scores[p] = scores[(t * cfg.folds + f) * points.size() + p];
            selected.push_back(points[select_best(points, fs_scores)]);
        }
    }

    std::vector<RunOutput> outputs(tasks.size() * cfg.folds);
    parallel_for(outputs.size(), cfg.threads, [&](std::size_t j) {
        const auto& ctx = tasks[j / cfg.folds];
        const std::size_t fold = j % cfg.folds;
        const Fold& split = ctx.folds[fold];
        const std::string task = ctx.task();
        const auto labeled = stratified_subsample(split.train, ctx.labels, cfg.label_fraction,
                                                  label_seed(cfg, task, fold));
        outputs[j] = run_split(*ctx.source, ctx.source_normalized, *ctx.target, split.train, labeled, split.test,
                               fold, selected[j], cfg.method, cfg, true);
    });
    for (auto& o : outputs) {
        res.outer.rows.insert(res.outer.rows.end(), o.rows.begin(), o.rows.end());
        res.outer.predictions.insert(res.outer.predictions.end(), o.predictions.begin(), o.predictions.end());
    }
    const auto summary = summarize(res.outer.rows);
    res.outer.rows.insert(res.outer.rows.end(), summary.begin(), summary.end());
    return res;
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Report make_report(const std::vector<ResultRow>& rows) {
    Report rep;
    std::vector<std::pair<std::string, std::string>> task_order;
    std::map<std::pair<std::string, std::string>, std::vector<double>> task_acc;
    std::map<std::pair<std::string, std::string>, std::string> task_target;
    for (const auto& r : rows) {
        if (r.kind != "fold" || r.status != "ok") continue;
        const auto key = std::make_pair(r.method, r.task());
        if (!task_acc.count(key)) task_order.push_back(key);
        task_acc[key].push_back(100.0 * r.accuracy);
        task_target[key] = r.target;
    }
    std::vector<std::pair<std::string, std::string>> target_order;
    std::map<std::pair<std::string, std::string>, std::vector<double>> target_means;
    std::vector<std::string> method_order;
    std::map<std::string, std::vector<double>> method_means;
    for (const auto& key : task_order) {
        const auto& acc = task_acc[key];
        GroupStats g;
        g.method = key.first;
        g.label = key.second;
        g.n = acc.size();
        g.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
        g.sd = sample_sd(acc);
        rep.per_task.push_back(g);
        const auto tkey = std::make_pair(key.first, task_target[key]);
        if (!target_means.count(tkey)) target_order.push_back(tkey);
        target_means[tkey].push_back(g.mean);
        if (!method_means.count(key.first)) method_order.push_back(key.first);
        method_means[key.first].push_back(g.mean);
    }
    auto stats = [](const std::string& m, const std::string& label, const std::vector<double>& v) {
        GroupStats g;
        g.method = m;
        g.label = label;
        g.n = v.size();
        g.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        g.sd = sample_sd(v);
        return g;
    };
    for (const auto& key : target_order) rep.per_target.push_back(stats(key.first, key.second, target_means[key]));
    for (const auto& m : method_order) rep.per_method.push_back(stats(m, "all", method_means[m]));
    return rep;
}

namespace {

constexpr const char* kResultsHeaderComment = "# mvtl-results v1";
const std::vector<std::string> kResultColumns = {
    "kind",      "method",   "source",   "target",         "fold",    "K",     "m",
    "lambda_pg", "lambda_t", "lambda_d", "lambda_un",      "label_fraction", "labeled", "total",
    "correct",   "accuracy", "sd",       "weights",        "status"};

std::string join_weights(const std::vector<double>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ';';
        s += csv::format_number(w[i]);
    }
    return s;
}

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = std::string(kResultsHeaderComment) + "\n" + csv::join(kResultColumns) + "\n";
    for (const auto& r : rows) {
        out += csv::join({r.kind, r.method, r.source, r.target, r.fold, std::to_string(r.hyper.rules),
                          csv::format_number(r.hyper.fuzzy_index), csv::format_number(r.hyper.lambda_pg),
                          csv::format_number(r.hyper.lambda_t), csv::format_number(r.hyper.lambda_d),
                          csv::format_number(r.hyper.lambda_un), csv::format_number(r.label_fraction),
                          std::to_string(r.labeled), std::to_string(r.total), std::to_string(r.correct),
                          csv::format_number(r.accuracy), csv::format_number(r.sd), join_weights(r.weights),
                          sanitize(r.status)}) +
               "\n";
    }
    return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& path) {
    const std::string text = csv::read_file(path);
    if (text.rfind(kResultsHeaderComment, 0) != 0)
        throw ParseError("not an mvtl results file (missing '" + std::string(kResultsHeaderComment) + "')", path, 1);
    const auto t = csv::read_text(path);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < t.header.size(); ++i) col[t.header[i]] = i;
    for (const char* need : {"kind", "method", "source", "target", "fold", "accuracy", "status"})
        if (!col.count(need)) throw ParseError(std::string("results file lacks column '") + need + "'", path, 2);
    auto num = [&](const std::vector<std::string>& row, const char* name, std::size_t line, double fallback) {
        return col.count(name) ? csv::parse_number(row[col[name]], path, line) : fallback;
    };
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& c = t.rows[i];
        const std::size_t line = t.lines[i];
        ResultRow r;
        r.kind = c[col["kind"]];
        r.method = c[col["method"]];
        r.source = c[col["source"]];
        r.target = c[col["target"]];
        r.fold = c[col["fold"]];
        r.status = c[col["status"]];
        r.accuracy = num(c, "accuracy", line, 0.0);
        if (r.accuracy < 0.0 || r.accuracy > 1.0) throw ParseError("accuracy must lie in [0, 1]", path, line);
        r.sd = num(c, "sd", line, 0.0);
        r.hyper.rules = static_cast<std::size_t>(num(c, "K", line, 3));
        r.hyper.fuzzy_index = num(c, "m", line, 2.0);
        r.hyper.lambda_pg = num(c, "lambda_pg", line, 0.0);
        r.hyper.lambda_t = num(c, "lambda_t", line, 0.0);
        r.hyper.lambda_d = num(c, "lambda_d", line, 0.0);
        r.hyper.lambda_un = num(c, "lambda_un", line, 0.0);
        r.label_fraction = num(c, "label_fraction", line, 0.0);
        r.labeled = static_cast<std::size_t>(num(c, "labeled", line, 0));
        r.total = static_cast<std::size_t>(num(c, "total", line, 0));
        r.correct = static_cast<std::size_t>(num(c, "correct", line, 0));
        if (col.count("weights") && !c[col["weights"]].empty()) {
            for (const auto& w : csv::split(c[col["weights"]], ';')) r.weights.push_back(csv::parse_number(w, path, line));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string predictions_csv(const std::vector<PredictionRecord>& preds) {
    std::string out = "method,source,target,fold,sample,truth,predicted\n";
    for (const auto& p : preds) {
        out += p.method + "," + p.source + "," + p.target + "," + std::to_string(p.fold) + "," +
               std::to_string(p.sample) + "," + std::to_string(p.truth) + "," + std::to_string(p.predicted) + "\n";
    }
    return out;
}

std::string timings_csv(const std::vector<ResultRow>& rows) {
    std::string out = "method,source,target,fold,train_seconds\n";
    for (const auto& r : rows) {
        if (r.kind != "fold") continue;
        out += r.method + "," + r.source + "," + r.target + "," + r.fold + "," + csv::format_number(r.train_seconds) + "\n";
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, std::size_t folds) {
    std::string out = "source,target,K,m,lambda_pg,lambda_t,lambda_d,lambda_un";
    for (std::size_t f = 0; f < folds; ++f) out += ",inner_accuracy_fold" + std::to_string(f);
    out += ",mean_inner_accuracy\n";
    for (const auto& r : rows) {
        out += r.source + "," + r.target + "," + std::to_string(r.hyper.rules) + "," +
               csv::format_number(r.hyper.fuzzy_index) + "," + csv::format_number(r.hyper.lambda_pg) + "," +
               csv::format_number(r.hyper.lambda_t) + "," + csv::format_number(r.hyper.lambda_d) + "," +
               csv::format_number(r.hyper.lambda_un);
        for (double s : r.fold_scores) out += "," + csv::format_number(s);
        out += "," + csv::format_number(r.mean_score) + "\n";
    }
    return out;
}

std::string report_csv(const Report& r) {
    std::string out = "scope,method,group,n,mean_percent,sd_percent\n";
    auto add = [&](const char* scope, const std::vector<GroupStats>& gs) {
        for (const auto& g : gs)
            out += std::string(scope) + "," + g.method + "," + g.label + "," + std::to_string(g.n) + "," +
                   csv::format_number(g.mean) + "," + csv::format_number(g.sd) + "\n";
    };
    add("task", r.per_task);
    add("target", r.per_target);
    add("method", r.per_method);
    return out;
}

std::string report_text(const Report& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    auto section = [&](const char* title, const char* label, const std::vector<GroupStats>& gs) {
        if (gs.empty()) return;
        std::size_t wm = 6;
        std::size_t wl = std::string(label).size();
        for (const auto& g : gs) {
            wm = std::max(wm, g.method.size());
            wl = std::max(wl, g.label.size());
        }
        os << title << "\n";
        os << std::left << std::setw(static_cast<int>(wm)) << "method" << "  " << std::setw(static_cast<int>(wl))
           << label << "  " << std::right << std::setw(4) << "n" << "  " << std::setw(8) << "Accuracy" << "  "
           << std::setw(6) << "SD" << "\n";
        for (const auto& g : gs) {
            os << std::left << std::setw(static_cast<int>(wm)) << g.method << "  " << std::setw(static_cast<int>(wl))
               << g.label << "  " << std::right << std::setw(4) << g.n << "  " << std::setw(8) << g.mean << "  "
               << std::setw(6) << g.sd << "\n";
        }
        os << "\n";
    };
    section("Per task (mean over folds)", "task", r.per_task);
    section("Average per target", "target", r.per_target);
    section("Average per method", "scope", r.per_method);
    return os.str();
}

std::vector<std::string> feature_set_ids(const std::string& features_dir) {
    std::vector<std::string> ids;
    if (!fs::is_directory(features_dir)) return ids;
    const std::string suffix = std::string("_") + view_name(kTimeView) + ".csv";
    for (const auto& e : fs::directory_iterator(features_dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<NamedDataset> load_feature_sets(const std::string& features_dir, const std::vector<std::string>& ids) {
    std::vector<NamedDataset> out;
    for (const auto& id : ids) {
        try {
            out.push_back({id, dataio::read_features(features_dir, id)});
        } catch (const ParseError& e) {
            log::warn(std::string("skipping feature set ") + id + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::string> cmd_synth(const std::string& out_dir, const SynthSpec& spec, std::uint64_t seed) {
    const SynthDomains d = synth_domains(spec, seed);
    std::vector<std::string> written;
    auto dump = [&](const std::string& id, const std::vector<SignalRecord>& recs) {
        const fs::path dir = fs::path(out_dir) / id;
        fs::create_directories(dir);
        for (const auto& r : recs) {
            const auto p = dataio::record_paths(dir.string(), r.id);
            dataio::save_raw(r, p);
            written.insert(written.end(), {p.signal, p.annotation, p.metadata});
        }
    };
    dump("D1", d.source);
    dump("D2", d.target);
    return written;
}

std::vector<std::string> cmd_extract(const std::string& raw_dir, const std::string& out_dir,
                                     const FeatureConfig& cfg) {
    const auto ids = dataio::discover_datasets(raw_dir);
    if (ids.empty()) throw UsageError("no records found in " + raw_dir);
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    for (const auto& id : ids) {
        const auto records = dataio::load_dataset((fs::path(raw_dir) / id).string());
        const MultiViewDataset feats = extract_features(records, cfg);
        dataio::write_features(out_dir, id, feats);
        for (std::size_t v = 0; v < kNumViews; ++v) written.push_back(dataio::feature_path(out_dir, id, v));
        dataio::write_normalizer(dataio::normalizer_path(out_dir, id), fit_normalizer(feats));
        written.push_back(dataio::normalizer_path(out_dir, id));
    }
    return written;
}

namespace {

std::vector<NamedDataset> load_for(const ExperimentConfig& cfg) {
    if (cfg.features_dir.empty()) throw UsageError("features_dir is not set");
    const auto ids = feature_set_ids(cfg.features_dir);
    if (ids.empty()) throw UsageError("no feature sets found in " + cfg.features_dir);
    std::vector<std::string> needed;
    for (const auto& [s, t] : resolve_tasks(cfg, ids)) {
        needed.push_back(s);
        needed.push_back(t);
    }
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    std::vector<std::string> present;
    for (const auto& id : needed) {
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) present.push_back(id);
    }
    return load_feature_sets(cfg.features_dir, present);
}

std::string out_file(const std::string& dir, const char* name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

}  // namespace

std::vector<std::string> cmd_transfer(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto res = run_transfer(load_for(cfg), cfg);
    const std::string results = out_file(out_dir, "results.csv");
    const std::string preds = out_file(out_dir, "predictions.csv");
    const std::string timing = out_file(out_dir, "timings.csv");
    csv::write_file(results, results_csv(res.rows));
    csv::write_file(preds, predictions_csv(res.predictions));
    csv::write_file(timing, timings_csv(res.rows));
    return {results, preds, timing};
}

std::vector<std::string> cmd_gridsearch(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto res = run_gridsearch(load_for(cfg), cfg);
    const std::string sweep = out_file(out_dir, "sweep.csv");
    const std::string results = out_file(out_dir, "results.csv");
    const std::string preds = out_file(out_dir, "predictions.csv");
    const std::string best = out_file(out_dir, "best.csv");
    csv::write_file(sweep, sweep_csv(res.sweep, cfg.folds));
    csv::write_file(results, results_csv(res.outer.rows));
    csv::write_file(preds, predictions_csv(res.outer.predictions));
    std::string b = "task,scope,K,m,lambda_pg,lambda_t,lambda_d,lambda_un\n";
    auto line = [](const std::string& task, const std::string& scope, const Hyper& h) {
        return task + "," + scope + "," + std::to_string(h.rules) + "," + csv::format_number(h.fuzzy_index) + "," +
               csv::format_number(h.lambda_pg) + "," + csv::format_number(h.lambda_t) + "," +
               csv::format_number(h.lambda_d) + "," + csv::format_number(h.lambda_un) + "\n";
    };
    for (const auto& [task, h] : res.best) b += line(task, "mean", h);
    for (const auto& r : res.outer.rows)
        if (r.kind == "fold") b += line(r.task(), "fold" + r.fold, r.hyper);
    csv::write_file(best, b);
    return {sweep, results, preds, best};
}

std::vector<std::string> cmd_report(const std::string& results_path, const std::string& out_dir, std::string* text) {
    const auto rep = make_report(parse_results_csv(results_path));
    const std::string path = out_file(out_dir, "report.csv");
    csv::write_file(path, report_csv(rep));
    const std::string txt = report_text(rep);
    const std::string tpath = out_file(out_dir, "report.txt");
    csv::write_file(tpath, txt);
    if (text) *text = txt;
    return {path, tpath};
}

}  // namespace mvtl::experiment
