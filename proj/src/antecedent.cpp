#include "mvtl/antecedent.hpp"

#include "mvtl/log.hpp"

#include <algorithm>
#include <cmath>

namespace mvtl {

double column_quantile(const Matrix& data, Eigen::Index col, double q) {
    std::vector<double> values(data.col(col).begin(), data.col(col).end());
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

// Standard FCM membership update. Points sitting on one or more centers get
// their membership split evenly among those centers.
void update_memberships(const Matrix& data, const Matrix& centers, double fuzzifier,
                        Matrix& u) {
    const auto n = data.rows();
    const auto k = centers.rows();
    const double expo = 1.0 / (fuzzifier - 1.0);
    Vector dist2(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index zeros = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            dist2(c) = (data.row(i) - centers.row(c)).squaredNorm();
            if (dist2(c) == 0.0) ++zeros;
        }
        if (zeros > 0) {
            for (Eigen::Index c = 0; c < k; ++c)
                u(i, c) = dist2(c) == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
            continue;
        }
        // u_ic = 1 / sum_l (d_ic^2 / d_il^2)^(1/(m-1))
        for (Eigen::Index c = 0; c < k; ++c) {
            double denom = 0.0;
            for (Eigen::Index l = 0; l < k; ++l) denom += std::pow(dist2(c) / dist2(l), expo);
            u(i, c) = 1.0 / denom;
        }
    }
}

}  // namespace

ClusteringResult cluster_antecedents(const Matrix& data, std::size_t rules,
                                     const ClusteringOptions& opts) {
    const auto n = data.rows();
    const auto d = data.cols();
    const auto k = static_cast<Eigen::Index>(rules);
    if (rules < 1) throw ValidationError("cluster_antecedents: rule count must be >= 1");
    if (n < k) {
        throw ValidationError("cluster_antecedents: " + std::to_string(n) +
                              " samples is fewer than " + std::to_string(rules) + " rules");
    }
    if (d < 1) throw ValidationError("cluster_antecedents: data has no features");
    if (!all_finite(data)) throw ValidationError("cluster_antecedents: non-finite data");
    if (!(opts.fuzzifier > 1.0)) throw ValidationError("cluster_antecedents: fuzzifier must be > 1");

    Matrix centers(k, d);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double q = static_cast<double>(c + 1) / static_cast<double>(k + 1);
        for (Eigen::Index j = 0; j < d; ++j) centers(c, j) = column_quantile(data, j, q);
    }

    ClusteringResult result;
    Matrix u(n, k);
    Matrix um(n, k);
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        update_memberships(data, centers, opts.fuzzifier, u);
        um = u.array().pow(opts.fuzzifier).matrix();
        Matrix next(k, d);
        for (Eigen::Index c = 0; c < k; ++c) {
            const double w = um.col(c).sum();
            if (w > 0.0) {
                next.row(c) = (um.col(c).transpose() * data) / w;
            } else {
                next.row(c) = centers.row(c);
            }
        }
        const double move = (next - centers).cwiseAbs().maxCoeff();
        centers = std::move(next);
        result.iterations = it + 1;
        if (move < opts.tol) {
            result.converged = true;
            break;
        }
    }
    update_memberships(data, centers, opts.fuzzifier, u);
    um = u.array().pow(opts.fuzzifier).matrix();

    Matrix spreads(k, d);
    std::size_t clamped_features = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
        const double w = um.col(c).sum();
        for (Eigen::Index j = 0; j < d; ++j) {
            double var = 0.0;
            if (w > 0.0) {
                var = (um.col(c).array() * (data.col(j).array() - centers(c, j)).square()).sum() / w;
            }
            double s = opts.spread_scale * std::sqrt(var);
            if (!(s >= opts.spread_floor)) {
                s = opts.spread_floor;
                ++clamped_features;
            }
            spreads(c, j) = s;
        }
    }
    if (clamped_features > 0) {
        log::warn("cluster_antecedents: " + std::to_string(clamped_features) +
                  " spread(s) below floor clamped to " + std::to_string(opts.spread_floor) +
                  " (zero-variance feature or singleton cluster)");
    }

    result.antecedents = ViewAntecedents{std::move(centers), std::move(spreads), opts.spread_scale};
    result.memberships = std::move(u);
    return result;
}

namespace {

void check_dims(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank, std::size_t rule) {
    if (static_cast<std::size_t>(x.size()) != bank.dim()) {
        throw ValidationError("membership: input has " + std::to_string(x.size()) +
                              " features, antecedents expect " + std::to_string(bank.dim()));
    }
    if (rule >= bank.rules()) throw ValidationError("membership: rule index out of range");
}

}  // namespace

double log_membership(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank,
                      std::size_t rule) {
    check_dims(x, bank, rule);
    const auto r = static_cast<Eigen::Index>(rule);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double z = (x(i) - bank.centers(r, i)) / bank.spreads(r, i);
        acc -= 0.5 * z * z;
    }
    return acc;
}

double membership(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank,
                  std::size_t rule) {
    return std::exp(log_membership(x, bank, rule));
}

}  // namespace mvtl
