#pragma once

#include "mvtl/fuzzy_map.hpp"

namespace mvtl {

/// Consequent parameters of one view: column j is p_g,j, of length K(d+1).
struct ConsequentBlock {
    Matrix P;
    double lambda = 0.0;

    std::size_t classes() const { return static_cast<std::size_t>(P.cols()); }
};

struct TskModel {
    ViewAntecedents antecedents;
    ConsequentBlock consequents;
    std::size_t classes = 0;
};

struct Prediction {
    std::size_t label = 0;
    Vector one_hot;
};

/// Ridge solution (lambda I + G^T G)^{-1} G^T Y via Cholesky. Throws
/// NumericalError when the system is singular (only possible at lambda = 0).
ConsequentBlock ridge_consequents(const Matrix& G, const Matrix& Y, double lambda);
ConsequentBlock ridge_consequents(const FuzzyDesignMatrix& G, const Matrix& Y, double lambda);

Vector decision_value(const TskModel& model, const Eigen::Ref<const Vector>& x);

// Row-wise decision values for raw samples.
Matrix decision_values(const TskModel& model, const Matrix& data);

/// Argmax with ties broken toward the lowest class index.
Prediction predict_class(const Eigen::Ref<const Vector>& f);

// Single-view baseline: clustering, mapping and ridge in one step.
TskModel train_tsk(const Matrix& data, const Matrix& Y, std::size_t rules, double lambda,
                   const ClusteringOptions& opts = {});

}  // namespace mvtl
