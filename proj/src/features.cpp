#include "mvtl/features.hpp"

#include "mvtl/log.hpp"
#include "mvtl/wavelet.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <random>

namespace mvtl {

void validate(const SignalRecord& r) {
    const std::string tag = r.id.empty() ? "record" : "record " + r.id;
    if (!(r.fs > 0.0) || !std::isfinite(r.fs)) throw ValidationError(tag + ": fs must be > 0");
    if (!all_finite(r.samples)) throw ValidationError(tag + ": non-finite sample");
    const double duration = r.duration_s();
    double prev_end = -1.0;
    for (const auto& iv : r.seizure_intervals) {
        if (!(iv.start_s >= 0.0) || !(iv.end_s > iv.start_s))
            throw ValidationError(tag + ": malformed seizure interval");
        if (iv.end_s > duration + 1e-9)
            throw ValidationError(tag + ": seizure interval ends after the record");
        if (iv.start_s < prev_end) throw ValidationError(tag + ": seizure intervals overlap or are unsorted");
        prev_end = iv.end_s;
    }
}

std::size_t window_samples(const WindowSpec& spec, double fs) {
    const double exact = spec.length_s * fs;
    const double rounded = std::round(exact);
    if (!(rounded >= 1.0) || std::abs(exact - rounded) > 1e-9)
        throw ValidationError("window length_s * fs must be a positive integer");
    return static_cast<std::size_t>(rounded);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct SampleRange {
    std::size_t begin;
    std::size_t end;
};

}  // namespace

std::vector<Window> segment(const SignalRecord& record, const WindowSpec& spec, std::uint64_t seed) {
    validate(record);
    if (!(spec.overlap_frac >= 0.0 && spec.overlap_frac < 1.0))
        throw ValidationError("overlap_frac must be in [0, 1)");
    if (!(spec.negative_keep_frac > 0.0 && spec.negative_keep_frac <= 1.0))
        throw ValidationError("negative_keep_frac must be in (0, 1]");
    const std::size_t L = window_samples(spec, record.fs);
    const std::size_t T = record.length();
    std::vector<Window> out;
    if (T < L) {
        log::warn("segment: " + (record.id.empty() ? std::string("record") : record.id) +
                  " is shorter than one window");
        return out;
    }
    const double fs = record.fs;
    const auto pos_stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(L) * (1.0 - spec.overlap_frac))));

    // Samples fully inside an interval, and samples touched by it.
    std::vector<SampleRange> inner;
    std::vector<SampleRange> touched;
    for (const auto& iv : record.seizure_intervals) {
        const auto b = static_cast<std::size_t>(std::ceil(iv.start_s * fs - 1e-9));
        const auto e = std::min(T, static_cast<std::size_t>(std::floor(iv.end_s * fs + 1e-9)));
        inner.push_back({b, std::max(b, e)});
        const auto tb = static_cast<std::size_t>(std::floor(iv.start_s * fs + 1e-9));
        const auto te = std::min(T, static_cast<std::size_t>(std::ceil(iv.end_s * fs - 1e-9)));
        touched.push_back({tb, std::max(tb, te)});
    }

    auto make = [&](std::size_t start, WindowLabel label) {
        Window w;
        w.data = record.samples.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(L));
        w.label = label;
        w.start = start;
        return w;
    };

    for (const auto& r : inner) {
        for (std::size_t s = r.begin; s + L <= r.end; s += pos_stride) out.push_back(make(s, WindowLabel::seizure));
    }

    std::vector<std::size_t> normal_starts;
    if (spec.boundary == BoundaryPolicy::discard) {
        std::size_t cursor = 0;
        for (std::size_t i = 0; i <= touched.size(); ++i) {
            const std::size_t region_end = i < touched.size() ? touched[i].begin : T;
            for (std::size_t s = cursor; s + L <= region_end; s += L) normal_starts.push_back(s);
            if (i < touched.size()) cursor = touched[i].end;
        }
    } else {
        for (std::size_t s = 0; s + L <= T; s += L) {
            const bool inside = std::any_of(inner.begin(), inner.end(), [&](const SampleRange& r) {
                return s >= r.begin && s + L <= r.end;
            });
            if (!inside) normal_starts.push_back(s);
        }
    }

    if (spec.negative_keep_frac < 1.0 && !normal_starts.empty()) {
        const auto keep = static_cast<std::size_t>(
            std::llround(spec.negative_keep_frac * static_cast<double>(normal_starts.size())));
        std::mt19937_64 rng(splitmix64(seed));
        // Partial Fisher-Yates; the first `keep` slots are the retained set.
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (normal_starts.size() - i));
            std::swap(normal_starts[i], normal_starts[j]);
        }
        normal_starts.resize(keep);
        std::sort(normal_starts.begin(), normal_starts.end());
    }
    for (std::size_t s : normal_starts) out.push_back(make(s, WindowLabel::normal));

    std::stable_sort(out.begin(), out.end(), [](const Window& a, const Window& b) {
        return a.start != b.start ? a.start < b.start : a.label < b.label;
    });
    return out;
}

Vector time_view(const Matrix& window, std::size_t decimation) {
    if (decimation < 1) throw ValidationError("time_view: decimation must be >= 1");
    const auto L = static_cast<std::size_t>(window.cols());
    const std::size_t per = (L + decimation - 1) / decimation;
    Vector out(window.rows() * static_cast<Eigen::Index>(per));
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < window.rows(); ++c) {
        for (std::size_t t = 0; t < L; t += decimation) out(k++) = window(c, static_cast<Eigen::Index>(t));
    }
    return out;
}

std::vector<std::complex<double>> fft(const Eigen::Ref<const Vector>& signal) {
    Eigen::FFT<double> engine;
    std::vector<double> in(signal.data(), signal.data() + signal.size());
    std::vector<std::complex<double>> out;
    engine.fwd(out, in);
    return out;
}

Vector fft_magnitudes(const Eigen::Ref<const Vector>& signal) {
    const auto spectrum = fft(signal);
    Vector out(static_cast<Eigen::Index>(spectrum.size()));
    for (std::size_t k = 0; k < spectrum.size(); ++k) out(static_cast<Eigen::Index>(k)) = std::abs(spectrum[k]);
    return out;
}

std::vector<std::size_t> band_bins(std::size_t length, double fs, const Band& band) {
    std::vector<std::size_t> bins;
    for (std::size_t k = 0; k <= length / 2; ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(length);
        if (f >= band.low_hz - 1e-9 && f <= band.high_hz + 1e-9) bins.push_back(k);
    }
    return bins;
}

Vector freq_view(const Matrix& window, double fs, const Band& band) {
    const auto L = static_cast<std::size_t>(window.cols());
    const auto bins = band_bins(L, fs, band);
    if (bins.empty()) {
        throw ValidationError("freq_view: no FFT bin of a " + std::to_string(L) + "-sample window at " +
                              std::to_string(fs) + " Hz falls in the band");
    }
    Vector out(window.rows() * static_cast<Eigen::Index>(bins.size()));
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < window.rows(); ++c) {
        const Vector centered = window.row(c).transpose().array() - window.row(c).mean();
        const Vector mag = fft_magnitudes(centered);
        for (std::size_t b : bins) out(k++) = mag(static_cast<Eigen::Index>(b));
    }
    return out;
}

Vector wavelet_view(const Matrix& window, std::size_t levels) {
    const auto L = window.cols();
    Vector out(window.rows() * L);
    for (Eigen::Index c = 0; c < window.rows(); ++c)
        out.segment(c * L, L) = wavelet::dwt(window.row(c).transpose(), levels);
    return out;
}

const char* view_name(std::size_t view) {
    switch (view) {
        case kTimeView: return "time";
        case kFreqView: return "freq";
        case kWaveletView: return "wavelet";
        default: return "view";
    }
}

MultiViewDataset Normalizer::apply(const MultiViewDataset& ds) const {
    if (ds.num_views() != mean.size()) throw ValidationError("normalizer: view count mismatch");
    MultiViewDataset out = ds;
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        Matrix& x = out.views[v].data;
        if (x.cols() != mean[v].size()) throw ValidationError("normalizer: feature count mismatch");
        x = ((x.rowwise() - mean[v].transpose()).array().rowwise() / scale[v].transpose().array()).matrix();
    }
    return out;
}

Normalizer fit_normalizer(const MultiViewDataset& ds) {
    Normalizer n;
    for (const auto& view : ds.views) {
        const auto d = view.data.cols();
        Vector mu = Vector::Zero(d);
        Vector sd = Vector::Ones(d);
        if (view.data.rows() > 0) {
            mu = view.data.colwise().mean().transpose();
            for (Eigen::Index j = 0; j < d; ++j) {
                const double var = (view.data.col(j).array() - mu(j)).square().mean();
                const double s = std::sqrt(var);
                sd(j) = s > 1e-12 ? s : 1.0;
            }
        }
        n.mean.push_back(std::move(mu));
        n.scale.push_back(std::move(sd));
    }
    return n;
}

MultiViewDataset extract_features(std::span<const SignalRecord> records, const FeatureConfig& cfg) {
    std::vector<std::vector<Vector>> rows(kNumViews);
    std::vector<std::size_t> labels;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto windows = segment(records[r], cfg.window, splitmix64(cfg.seed) ^ static_cast<std::uint64_t>(r));
        for (const auto& w : windows) {
            rows[kTimeView].push_back(time_view(w.data, cfg.decimation));
            rows[kFreqView].push_back(freq_view(w.data, records[r].fs, cfg.band));
            rows[kWaveletView].push_back(wavelet_view(w.data, cfg.wavelet_levels));
            labels.push_back(static_cast<std::size_t>(w.label));
        }
    }
    std::vector<Matrix> views;
    for (std::size_t v = 0; v < kNumViews; ++v) {
        const Eigen::Index d = rows[v].empty() ? 0 : rows[v].front().size();
        Matrix m(static_cast<Eigen::Index>(rows[v].size()), d);
        for (std::size_t i = 0; i < rows[v].size(); ++i) {
            if (rows[v][i].size() != d)
                throw ValidationError(std::string("extract_features: records disagree on ") + view_name(v) +
                                      " view width (channel count or window length)");
            m.row(static_cast<Eigen::Index>(i)) = rows[v][i].transpose();
        }
        views.push_back(std::move(m));
    }
    return make_multiview(std::move(views), one_hot_encode(labels, 2), DomainTag::source);
}

ExtractedDataset extract_multiview(std::span<const SignalRecord> records, const FeatureConfig& cfg) {
    ExtractedDataset out;
    const MultiViewDataset raw = extract_features(records, cfg);
    out.normalizer = fit_normalizer(raw);
    out.data = out.normalizer.apply(raw);
    return out;
}

}  // namespace mvtl
