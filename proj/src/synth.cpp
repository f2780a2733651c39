#include "mvtl/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mvtl {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct DomainShift {
    std::vector<double> gain;
    std::vector<double> offset;
    double frequency_hz = 0.0;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

constexpr std::size_t kBackgroundTones = 48;

SignalRecord make_record(const SynthSpec& spec, const DomainShift& shift, std::uint64_t seed,
                         const std::string& id) {
    std::mt19937_64 rng(seed);
    const double fs = spec.fs;
    const auto T = static_cast<Eigen::Index>(std::llround(spec.record_seconds * fs));
    const auto C = static_cast<Eigen::Index>(spec.channels);
    const double two_pi = 2.0 * std::numbers::pi;

    SignalRecord rec;
    rec.id = id;
    rec.fs = fs;
    rec.samples = Matrix::Zero(C, T);

    // Seizure placement: one per equal slot, on whole-sample boundaries.
    const double slot = spec.record_seconds / static_cast<double>(std::max<std::size_t>(1, spec.seizures_per_record));
    for (std::size_t s = 0; s < spec.seizures_per_record; ++s) {
        const double dur = std::round(uniform(rng, spec.seizure_min_s, spec.seizure_max_s) * fs) / fs;
        const double lo = static_cast<double>(s) * slot + 2.0;
        const double hi = static_cast<double>(s + 1) * slot - dur - 2.0;
        if (hi <= lo) continue;
        const double start = std::round(uniform(rng, lo, hi) * fs) / fs;
        rec.seizure_intervals.push_back({start, start + dur});
    }

    const double f_lo = spec.background_low_hz + shift.frequency_hz;
    const double f_hi = spec.background_high_hz + shift.frequency_hz;
    std::normal_distribution<double> white(0.0, 1.0);
    for (Eigen::Index c = 0; c < C; ++c) {
        Vector bg = Vector::Zero(T);
        for (std::size_t k = 0; k < kBackgroundTones; ++k) {
            const double f = uniform(rng, f_lo, f_hi);
            const double amp = 1.0 / std::sqrt(f);
            const double phase = uniform(rng, 0.0, two_pi);
            for (Eigen::Index t = 0; t < T; ++t) bg(t) += amp * std::sin(two_pi * f * static_cast<double>(t) / fs + phase);
        }
        const double rms = std::sqrt(bg.squaredNorm() / static_cast<double>(T));
        if (rms > 0.0) bg /= rms;
        for (Eigen::Index t = 0; t < T; ++t) bg(t) += 0.3 * white(rng);
        bg *= spec.background_amplitude / std::sqrt(1.09);
        rec.samples.row(c) = bg.transpose();
    }

    for (const auto& iv : rec.seizure_intervals) {
        const double f = uniform(rng, spec.seizure_low_hz, spec.seizure_high_hz) + shift.frequency_hz;
        const double phase = uniform(rng, 0.0, two_pi);
        const auto b = static_cast<Eigen::Index>(std::llround(iv.start_s * fs));
        const auto e = static_cast<Eigen::Index>(std::llround(iv.end_s * fs));
        const double ramp = 0.5 * fs;
        for (Eigen::Index c = 0; c < C; ++c) {
            const double chan_amp = uniform(rng, 0.7, 1.3);
            for (Eigen::Index t = b; t < e; ++t) {
                const double rel = static_cast<double>(t - b);
                const double taper = std::min({1.0, (rel + 1.0) / ramp, static_cast<double>(e - t) / ramp});
                const double time = static_cast<double>(t) / fs;
                double v = spec.seizure_amplitude * std::sin(two_pi * f * time + phase);
                // Spike train locked to the rhythm: one Gaussian pulse per cycle.
                const double cycle = std::fmod(f * time + phase / two_pi, 1.0);
                const double dist_s = std::min(cycle, 1.0 - cycle) / f;
                v += spec.spike_amplitude * std::exp(-0.5 * (dist_s * dist_s) / (spec.spike_width_s * spec.spike_width_s));
                rec.samples(c, t) += chan_amp * taper * v;
            }
        }
    }

    for (Eigen::Index c = 0; c < C; ++c) {
        rec.samples.row(c) = (rec.samples.row(c).array() * shift.gain[static_cast<std::size_t>(c)] +
                              shift.offset[static_cast<std::size_t>(c)])
                                 .matrix();
    }
    return rec;
}

}  // namespace

SynthDomains synth_domains(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.channels < 1 || !(spec.fs > 0.0) || !(spec.record_seconds > 0.0))
        throw ValidationError("synth: channels, fs and record_seconds must be positive");
    if (!(spec.seizure_max_s >= spec.seizure_min_s) || !(spec.seizure_min_s > 0.0))
        throw ValidationError("synth: seizure duration range is invalid");

    DomainShift none;
    none.gain.assign(spec.channels, 1.0);
    none.offset.assign(spec.channels, 0.0);

    DomainShift shifted;
    std::mt19937_64 shift_rng(mix(seed, 0xD0));
    for (std::size_t c = 0; c < spec.channels; ++c) {
        shifted.gain.push_back(1.0 + spec.shift_magnitude * spec.gain_spread * uniform(shift_rng, -1.0, 1.0));
        shifted.offset.push_back(spec.shift_magnitude * spec.offset_spread * uniform(shift_rng, -1.0, 1.0));
    }
    shifted.frequency_hz = spec.shift_magnitude * spec.frequency_shift_hz;

    SynthDomains out;
    for (std::size_t r = 0; r < spec.records_per_domain; ++r) {
        out.source.push_back(make_record(spec, none, mix(seed, 2 * r + 1), "src" + std::to_string(r)));
        out.target.push_back(make_record(spec, shifted, mix(seed, 2 * r + 2), "tgt" + std::to_string(r)));
    }
    return out;
}

}  // namespace mvtl
