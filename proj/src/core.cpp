#include "mvtl/core.hpp"

#include <cmath>

namespace mvtl {

ParseError::ParseError(const std::string& what, std::string file, std::size_t line)
    : Error(file.empty() ? what
                         : file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                               what),
      file_(std::move(file)),
      line_(line) {}

const char* to_string(DomainTag tag) {
    return tag == DomainTag::source ? "source" : "target";
}

std::size_t MultiViewDataset::num_classes() const {
    return labeled() ? static_cast<std::size_t>(views.front().labels->cols()) : 0;
}

const Matrix& MultiViewDataset::labels() const {
    if (!labeled()) throw ValidationError("dataset has no labels");
    return *views.front().labels;
}

MultiViewDataset MultiViewDataset::subset(std::span<const std::size_t> rows) const {
    MultiViewDataset out;
    out.domain = domain;
    out.views.reserve(views.size());
    for (const auto& v : views) {
        ViewDataset sub;
        sub.view_id = v.view_id;
        sub.data.resize(static_cast<Eigen::Index>(rows.size()), v.data.cols());
        if (v.labels) sub.labels = Matrix(static_cast<Eigen::Index>(rows.size()), v.labels->cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(rows[i]);
            if (r >= v.data.rows()) throw ValidationError("subset row index out of range");
            sub.data.row(static_cast<Eigen::Index>(i)) = v.data.row(r);
            if (v.labels) sub.labels->row(static_cast<Eigen::Index>(i)) = v.labels->row(r);
        }
        out.views.push_back(std::move(sub));
    }
    return out;
}

MultiViewDataset make_multiview(std::vector<Matrix> view_data, std::optional<Matrix> labels,
                                DomainTag domain) {
    MultiViewDataset ds;
    ds.domain = domain;
    for (std::size_t v = 0; v < view_data.size(); ++v) {
        ds.views.push_back(ViewDataset{v, std::move(view_data[v]), labels});
    }
    return ds;
}

void validate(const TrainConfig& cfg) {
    if (cfg.rules < 1) throw ValidationError("rules K must be >= 1");
    if (!(cfg.fuzzy_index > 0.0)) throw ValidationError("fuzzy index m must be > 0");
    for (double l : {cfg.lambda_pg, cfg.lambda_t, cfg.lambda_d, cfg.lambda_un}) {
        if (!(l >= 0.0) || !std::isfinite(l))
            throw ValidationError("regularization weights must be finite and >= 0");
    }
    if (cfg.max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (!(cfg.tol > 0.0)) throw ValidationError("tol must be > 0");
    if (!(cfg.clustering_fuzzifier > 1.0))
        throw ValidationError("clustering fuzzifier must be > 1");
    if (!(cfg.spread_scale > 0.0)) throw ValidationError("spread scale must be > 0");
}

Matrix one_hot_encode(std::span<const std::size_t> labels, std::size_t classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()),
                            static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) {
            throw ValidationError("label " + std::to_string(labels[i]) + " at row " +
                                  std::to_string(i) + " is outside [0, " +
                                  std::to_string(classes) + ")");
        }
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }
    return y;
}

std::vector<std::size_t> argmax_decode(const Matrix& scores) {
    std::vector<std::size_t> out(static_cast<std::size_t>(scores.rows()), 0);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j) {
            if (scores(i, j) > scores(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

bool all_finite(const Matrix& m) {
    return m.size() == 0 || m.allFinite();
}

namespace {

void check_one_hot(const Matrix& y, std::size_t view) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const double e = y(i, j);
            if (e != 0.0 && e != 1.0) {
                throw ValidationError("view " + std::to_string(view) + ": label row " +
                                      std::to_string(i) + " has entry outside {0,1}");
            }
            sum += e;
        }
        if (sum != 1.0) {
            throw ValidationError("view " + std::to_string(view) + ": label row " +
                                  std::to_string(i) + " does not sum to 1");
        }
    }
}

}  // namespace

const MultiViewDataset& validate_multiview(const MultiViewDataset& ds) {
    if (ds.views.empty()) throw ValidationError("dataset has no views");
    const auto n = ds.views.front().data.rows();
    const bool labeled = ds.views.front().labels.has_value();
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const auto& view = ds.views[v];
        const std::string tag = "view " + std::to_string(v);
        if (view.view_id != v) throw ValidationError(tag + ": view_id does not match position");
        if (view.data.rows() != n) {
            throw ValidationError(tag + ": has " + std::to_string(view.data.rows()) +
                                  " samples, expected " + std::to_string(n));
        }
        if (!all_finite(view.data)) throw ValidationError(tag + ": non-finite feature value");
        if (view.labels.has_value() != labeled)
            throw ValidationError(tag + ": labels present on some views only");
        if (!labeled) continue;
        const Matrix& y = *view.labels;
        if (y.rows() != n) throw ValidationError(tag + ": label row count mismatch");
        if (y.cols() < 1) throw ValidationError(tag + ": label matrix has no classes");
        check_one_hot(y, v);
        if (v > 0 && y != *ds.views.front().labels)
            throw ValidationError(tag + ": labels differ from view 0");
    }
    return ds;
}

}  // namespace mvtl
