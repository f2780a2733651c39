#include "mvtl/wavelet.hpp"

namespace mvtl::wavelet {

const std::array<double, 8>& db4_lowpass() {
    static const std::array<double, 8> h = {
        0.23037781330885523,  0.71484657055254153,  0.63088076792959036,  -0.027983769416983849,
        -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278,
    };
    return h;
}

std::array<double, 8> db4_highpass() {
    const auto& h = db4_lowpass();
    std::array<double, 8> g{};
    for (std::size_t k = 0; k < 8; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[7 - k];
    return g;
}

void analysis_step(const Eigen::Ref<const Vector>& signal, Eigen::Ref<Vector> approx,
                   Eigen::Ref<Vector> detail) {
    const auto n = signal.size();
    if (n % 2 != 0) throw ValidationError("wavelet analysis step needs an even length");
    const auto& h = db4_lowpass();
    const auto g = db4_highpass();
    const auto half = n / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            const double x = signal((2 * i + static_cast<Eigen::Index>(k)) % n);
            a += h[k] * x;
            d += g[k] * x;
        }
        approx(i) = a;
        detail(i) = d;
    }
}

Vector synthesis_step(const Eigen::Ref<const Vector>& approx, const Eigen::Ref<const Vector>& detail) {
    if (approx.size() != detail.size()) throw ValidationError("wavelet synthesis: band sizes differ");
    const auto half = approx.size();
    const auto n = 2 * half;
    const auto& h = db4_lowpass();
    const auto g = db4_highpass();
    Vector out = Vector::Zero(n);
    // Transpose of the orthogonal analysis operator.
    for (Eigen::Index i = 0; i < half; ++i) {
        for (std::size_t k = 0; k < 8; ++k) {
            out((2 * i + static_cast<Eigen::Index>(k)) % n) += h[k] * approx(i) + g[k] * detail(i);
        }
    }
    return out;
}

namespace {

void check_length(Eigen::Index n, std::size_t levels) {
    const Eigen::Index block = Eigen::Index{1} << levels;
    if (levels == 0 || n == 0 || n % block != 0) {
        const Eigen::Index padded = ((n + block - 1) / block) * block;
        throw ValidationError("dwt: length " + std::to_string(n) + " is not divisible by 2^" +
                              std::to_string(levels) + "; pad to " +
                              std::to_string(padded == 0 ? block : padded) + " samples");
    }
}

}  // namespace

Vector dwt(const Eigen::Ref<const Vector>& signal, std::size_t levels) {
    const auto n = signal.size();
    check_length(n, levels);
    Vector out(n);
    Vector current = signal;
    Eigen::Index end = n;
    for (std::size_t level = 0; level < levels; ++level) {
        const auto half = current.size() / 2;
        Vector a(half);
        Vector d(half);
        analysis_step(current, a, d);
        out.segment(end - half, half) = d;
        end -= half;
        current = std::move(a);
    }
    out.head(end) = current;
    return out;
}

Vector idwt(const Eigen::Ref<const Vector>& coeffs, std::size_t levels) {
    const auto n = coeffs.size();
    check_length(n, levels);
    Eigen::Index len = n >> levels;
    Vector current = coeffs.head(len);
    for (std::size_t level = 0; level < levels; ++level) {
        current = synthesis_step(current, coeffs.segment(len, len));
        len *= 2;
    }
    return current;
}

}  // namespace mvtl::wavelet
