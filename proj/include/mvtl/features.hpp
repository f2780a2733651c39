#pragma once

#include "mvtl/core.hpp"

#include <complex>
#include <string>

namespace mvtl {

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
};

/// Multichannel recording. `samples` is channels x T.
struct SignalRecord {
    std::string id;
    Matrix samples;
    double fs = 256.0;
    std::vector<Interval> seizure_intervals;

    std::size_t channels() const { return static_cast<std::size_t>(samples.rows()); }
    std::size_t length() const { return static_cast<std::size_t>(samples.cols()); }
    double duration_s() const { return static_cast<double>(length()) / fs; }
};

void validate(const SignalRecord& record);

enum class WindowLabel : std::size_t { normal = 0, seizure = 1 };

// What to do with normal-grid windows that partially overlap a seizure.
enum class BoundaryPolicy { discard, as_normal };

struct WindowSpec {
    double length_s = 1.0;
    double overlap_frac = 0.5;        // seizure-region oversampling
    double negative_keep_frac = 1.0;  // fraction of normal windows retained
    BoundaryPolicy boundary = BoundaryPolicy::discard;
};

struct Window {
    Matrix data;  // channels x L
    WindowLabel label = WindowLabel::normal;
    std::size_t start = 0;  // first sample index in the record
};

/// Seizure regions use stride L(1 - overlap), normal regions stride L; normal
/// windows are then thinned to `negative_keep_frac` by a seeded draw. Output
/// is ordered by start sample.
std::vector<Window> segment(const SignalRecord& record, const WindowSpec& spec, std::uint64_t seed);

// Window length in samples; throws unless length_s * fs is a positive integer.
std::size_t window_samples(const WindowSpec& spec, double fs);

Vector time_view(const Matrix& window, std::size_t decimation = 4);

std::vector<std::complex<double>> fft(const Eigen::Ref<const Vector>& signal);

// |X_k| for k = 0..n-1.
Vector fft_magnitudes(const Eigen::Ref<const Vector>& signal);

struct Band {
    double low_hz = 4.0;
    double high_hz = 30.0;
};

// Bins k (0 <= k <= L/2) whose frequency k fs / L lies in the closed band.
std::vector<std::size_t> band_bins(std::size_t length, double fs, const Band& band);

/// Magnitude spectrum of each mean-removed channel restricted to the band.
Vector freq_view(const Matrix& window, double fs, const Band& band = {});

/// Per-channel db4 DWT coefficients [a_L, d_L, ..., d_1].
Vector wavelet_view(const Matrix& window, std::size_t levels = 4);

struct FeatureConfig {
    WindowSpec window;
    std::size_t decimation = 4;
    Band band;
    std::size_t wavelet_levels = 4;
    std::uint64_t seed = 42;
};

inline constexpr std::size_t kTimeView = 0;
inline constexpr std::size_t kFreqView = 1;
inline constexpr std::size_t kWaveletView = 2;
inline constexpr std::size_t kNumViews = 3;

const char* view_name(std::size_t view);

/// Per-view, per-feature z-score statistics.
struct Normalizer {
    std::vector<Vector> mean;
    std::vector<Vector> scale;

    bool empty() const { return mean.empty(); }
    MultiViewDataset apply(const MultiViewDataset& ds) const;
};

// Zero-variance features keep scale 1.
Normalizer fit_normalizer(const MultiViewDataset& ds);

/// Segments every record and computes the three views, unnormalized. Labels
/// are one-hot over {normal, seizure}.
MultiViewDataset extract_features(std::span<const SignalRecord> records, const FeatureConfig& cfg);

struct ExtractedDataset {
    MultiViewDataset data;  // normalized
    Normalizer normalizer;  // statistics of these records
};

// extract_features followed by z-scoring with statistics from the same records.
ExtractedDataset extract_multiview(std::span<const SignalRecord> records, const FeatureConfig& cfg);

}  // namespace mvtl
