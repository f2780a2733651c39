#pragma once

#include "mvtl/antecedent.hpp"

namespace mvtl {

/// Rows are the fuzzy-space images x_g of one view's samples; the column
/// count is K(d+1), laid out as K blocks [mu~^k, mu~^k x^T].
struct FuzzyDesignMatrix {
    std::size_t view_id = 0;
    Matrix rows;

    std::size_t samples() const { return static_cast<std::size_t>(rows.rows()); }
    std::size_t width() const { return static_cast<std::size_t>(rows.cols()); }
};

inline std::size_t fuzzy_width(std::size_t rules, std::size_t dim) {
    return rules * (dim + 1);
}

/// Normalized firing strengths mu~^k(x). Computed in the log domain; the
/// uniform fallback 1/K applies only when every log-membership is -inf or NaN.
Vector firing_strengths(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank);

Vector map_sample(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank);

FuzzyDesignMatrix map_dataset(const Matrix& data, const ViewAntecedents& bank,
                              std::size_t view_id = 0);
FuzzyDesignMatrix map_dataset(const ViewDataset& ds, const ViewAntecedents& bank);

}  // namespace mvtl
