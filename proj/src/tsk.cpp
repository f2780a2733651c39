#include "mvtl/tsk.hpp"

#include <cmath>

namespace mvtl {

ConsequentBlock ridge_consequents(const Matrix& G, const Matrix& Y, double lambda) {
    if (G.rows() < 1) throw ValidationError("ridge_consequents: need at least one sample");
    if (Y.rows() != G.rows()) throw ValidationError("ridge_consequents: G and Y row counts differ");
    if (!(lambda >= 0.0)) throw ValidationError("ridge_consequents: lambda must be >= 0");

    Matrix A = Matrix::Zero(G.cols(), G.cols());
    A.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose());
    A.diagonal().array() += lambda;
    Eigen::LLT<Matrix, Eigen::Lower> llt(A);
    // At lambda = 0 LLT can pass on a numerically singular Gram matrix.
    if (llt.info() != Eigen::Success || (lambda == 0.0 && !(llt.rcond() > 1e-13))) {
        throw NumericalError("ridge_consequents: system is singular; use lambda > 0");
    }
    ConsequentBlock out;
    out.P = llt.solve(G.transpose() * Y);
    out.lambda = lambda;
    return out;
}

ConsequentBlock ridge_consequents(const FuzzyDesignMatrix& G, const Matrix& Y, double lambda) {
    return ridge_consequents(G.rows, Y, lambda);
}

Vector decision_value(const TskModel& model, const Eigen::Ref<const Vector>& x) {
    const Vector g = map_sample(x, model.antecedents);
    if (g.size() != model.consequents.P.rows()) {
        throw ValidationError("decision_value: consequent rows do not match the fuzzy width");
    }
    return model.consequents.P.transpose() * g;
}

Matrix decision_values(const TskModel& model, const Matrix& data) {
    const FuzzyDesignMatrix g = map_dataset(data, model.antecedents);
    if (g.rows.cols() != model.consequents.P.rows()) {
        throw ValidationError("decision_values: consequent rows do not match the fuzzy width");
    }
    return g.rows * model.consequents.P;
}

Prediction predict_class(const Eigen::Ref<const Vector>& f) {
    Prediction p;
    p.one_hot = Vector::Zero(f.size());
    if (f.size() == 0) return p;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < f.size(); ++j) {
        if (f(j) > f(best)) best = j;
    }
    p.label = static_cast<std::size_t>(best);
    p.one_hot(best) = 1.0;
    return p;
}

TskModel train_tsk(const Matrix& data, const Matrix& Y, std::size_t rules, double lambda,
                   const ClusteringOptions& opts) {
    TskModel model;
    model.antecedents = cluster_antecedents(data, rules, opts).antecedents;
    model.consequents = ridge_consequents(map_dataset(data, model.antecedents), Y, lambda);
    model.classes = static_cast<std::size_t>(Y.cols());
    return model;
}

}  // namespace mvtl
