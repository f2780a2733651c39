#include "mvtl/fuzzy_map.hpp"

#include "mvtl/log.hpp"

#include <cmath>
#include <limits>

namespace mvtl {

namespace {

void normalized_strengths(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank,
                          Eigen::Ref<Vector> out) {
    const auto k = static_cast<Eigen::Index>(bank.rules());
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < k; ++r) {
        out(r) = log_membership(x, bank, static_cast<std::size_t>(r));
        if (out(r) > top) top = out(r);
    }
    if (!std::isfinite(top)) {
        log::warn("firing_strengths: all rule memberships underflow; using uniform strengths");
        out.setConstant(1.0 / static_cast<double>(k));
        return;
    }
    double sum = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
        out(r) = std::exp(out(r) - top);
        sum += out(r);
    }
    out /= sum;
}

}  // namespace

Vector firing_strengths(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank) {
    if (static_cast<std::size_t>(x.size()) != bank.dim()) {
        throw ValidationError("firing_strengths: input has " + std::to_string(x.size()) +
                              " features, antecedents expect " + std::to_string(bank.dim()));
    }
    Vector mu(static_cast<Eigen::Index>(bank.rules()));
    normalized_strengths(x, bank, mu);
    return mu;
}

Vector map_sample(const Eigen::Ref<const Vector>& x, const ViewAntecedents& bank) {
    const Vector mu = firing_strengths(x, bank);
    const auto d1 = x.size() + 1;
    Vector g(mu.size() * d1);
    for (Eigen::Index r = 0; r < mu.size(); ++r) {
        g(r * d1) = mu(r);
        g.segment(r * d1 + 1, x.size()) = mu(r) * x;
    }
    return g;
}

FuzzyDesignMatrix map_dataset(const Matrix& data, const ViewAntecedents& bank,
                              std::size_t view_id) {
    if (static_cast<std::size_t>(data.cols()) != bank.dim()) {
        throw ValidationError("map_dataset: view " + std::to_string(view_id) + " has " +
                              std::to_string(data.cols()) + " features, antecedents expect " +
                              std::to_string(bank.dim()));
    }
    FuzzyDesignMatrix out;
    out.view_id = view_id;
    out.rows.resize(data.rows(), static_cast<Eigen::Index>(fuzzy_width(bank.rules(), bank.dim())));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        out.rows.row(i) = map_sample(data.row(i).transpose(), bank).transpose();
    }
    return out;
}

FuzzyDesignMatrix map_dataset(const ViewDataset& ds, const ViewAntecedents& bank) {
    return map_dataset(ds.data, bank, ds.view_id);
}

}  // namespace mvtl
