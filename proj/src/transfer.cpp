#include "mvtl/transfer.hpp"

namespace mvtl {

MmdView build_mmd(const Matrix& source, const Matrix& target) {
    if (source.rows() == 0 || target.rows() == 0)
        throw ValidationError("build_mmd: both domains need at least one sample");
    if (source.cols() != target.cols())
        throw ValidationError("build_mmd: source and target widths differ");
    MmdView out;
    out.mean_diff = source.colwise().mean().transpose() - target.colwise().mean().transpose();
    out.omega = out.mean_diff * out.mean_diff.transpose();
    return out;
}

MmdView build_mmd(const FuzzyDesignMatrix& source, const FuzzyDesignMatrix& target) {
    return build_mmd(source.rows, target.rows);
}

double mmd_value(std::span<const Matrix> P, const MmdMatrix& omega) {
    if (P.size() != omega.views.size()) throw ValidationError("mmd_value: view count mismatch");
    double total = 0.0;
    for (std::size_t v = 0; v < P.size(); ++v) {
        const Matrix& om = omega.views[v].omega;
        if (P[v].rows() != om.rows())
            throw ValidationError("mmd_value: consequent rows do not match Omega");
        total += (P[v].transpose() * om * P[v]).trace();
    }
    return total;
}

double kt_value(std::span<const Matrix> P, std::span<const Matrix> P0) {
    if (P.size() != P0.size()) throw ValidationError("kt_value: view count mismatch");
    double total = 0.0;
    for (std::size_t v = 0; v < P.size(); ++v) {
        if (P[v].rows() != P0[v].rows() || P[v].cols() != P0[v].cols())
            throw ValidationError("kt_value: consequent shapes differ in view " + std::to_string(v));
        total += (P[v] - P0[v]).squaredNorm();
    }
    return total;
}

double transfer_value(std::span<const Matrix> P, std::span<const Matrix> P0,
                      const MmdMatrix& omega, double lambda_t, double lambda_d) {
    double t = 0.0;
    if (lambda_t != 0.0) t += lambda_t * kt_value(P, P0);
    if (lambda_d != 0.0) t += lambda_d * mmd_value(P, omega);
    return t;
}

}  // namespace mvtl
