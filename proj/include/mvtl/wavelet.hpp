#pragma once

#include "mvtl/core.hpp"

#include <array>

namespace mvtl::wavelet {

// Daubechies order-4 scaling (low-pass reconstruction) filter, 8 taps.
const std::array<double, 8>& db4_lowpass();

// Quadrature-mirror high-pass: g[k] = (-1)^k h[7-k].
std::array<double, 8> db4_highpass();

/// One analysis step with periodic extension. `signal.size()` must be even.
void analysis_step(const Eigen::Ref<const Vector>& signal, Eigen::Ref<Vector> approx,
                   Eigen::Ref<Vector> detail);

Vector synthesis_step(const Eigen::Ref<const Vector>& approx, const Eigen::Ref<const Vector>& detail);

/// Multi-level periodic DWT. Output order [a_L, d_L, d_{L-1}, ..., d_1].
/// Throws ValidationError unless the length is divisible by 2^levels.
Vector dwt(const Eigen::Ref<const Vector>& signal, std::size_t levels);

// Inverse of dwt for the same level count.
Vector idwt(const Eigen::Ref<const Vector>& coeffs, std::size_t levels);

}  // namespace mvtl::wavelet
