#pragma once

#include "mvtl/antecedent.hpp"
#include "mvtl/fuzzy_map.hpp"
#include "mvtl/tsk.hpp"

namespace mvtl {

/// Distribution-matching matrix of one view. `omega` is stored densely and is
/// always the symmetric rank-1 product mean_diff mean_diff^T.
struct MmdView {
    Matrix omega;
    Vector mean_diff;  // mean(source x_g) - mean(target z_g)
};

struct MmdMatrix {
    std::vector<MmdView> views;
};

/// Source-domain knowledge per view: ridge consequents p_g0 and the shared
/// antecedents used to map both domains.
struct SourceKnowledge {
    std::vector<ConsequentBlock> consequents;
    AntecedentBank bank;
};

MmdView build_mmd(const Matrix& source, const Matrix& target);
MmdView build_mmd(const FuzzyDesignMatrix& source, const FuzzyDesignMatrix& target);

// sum_v sum_j p^T Omega^v p
double mmd_value(std::span<const Matrix> P, const MmdMatrix& omega);

// sum_v sum_j ||p - p0||^2
double kt_value(std::span<const Matrix> P, std::span<const Matrix> P0);

double transfer_value(std::span<const Matrix> P, std::span<const Matrix> P0,
                      const MmdMatrix& omega, double lambda_t, double lambda_d);

}  // namespace mvtl
