#pragma once

#include "mvtl/core.hpp"

namespace mvtl {

/// Gaussian IF-part parameters of one view: row k of `centers` / `spreads`
/// holds c^k and delta^k over the view's d features.
struct ViewAntecedents {
    Matrix centers;
    Matrix spreads;
    double scale = 1.0;

    std::size_t rules() const { return static_cast<std::size_t>(centers.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
};

struct AntecedentBank {
    std::vector<ViewAntecedents> views;
};

struct ClusteringOptions {
    double fuzzifier = 2.0;
    double spread_scale = 1.0;
    double spread_floor = 1e-4;
    double tol = 1e-6;          // max center movement
    std::size_t max_iters = 200;
};

struct ClusteringResult {
    ViewAntecedents antecedents;
    Matrix memberships;  // N x K fuzzy partition at termination
    std::size_t iterations = 0;
    bool converged = false;
};

/// Deterministic fuzzy c-means. Centers start at the per-feature quantiles
/// k/(K+1), k = 1..K; spreads are the membership-weighted within-cluster
/// standard deviations scaled by `spread_scale` and floored at `spread_floor`.
ClusteringResult cluster_antecedents(const Matrix& data, std::size_t rules,
                                     const ClusteringOptions& opts = {});

// Per-feature linear-interpolation quantile of column `col`, q in [0, 1].
double column_quantile(const Matrix& data, Eigen::Index col, double q);

// log mu^k(x) = -sum_i (x_i - c_i^k)^2 / (2 delta_i^k^2)
double log_membership(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank,
                      std::size_t rule);

double membership(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank,
                  std::size_t rule);

}  // namespace mvtl
