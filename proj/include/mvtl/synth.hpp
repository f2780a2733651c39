#pragma once

#include "mvtl/features.hpp"

namespace mvtl {

/// Scenario for the synthetic two-domain EEG generator. Amplitudes are in
/// microvolts. The target domain applies per-channel gain/offset and a
/// frequency shift, each scaled by `shift_magnitude`.
struct SynthSpec {
    std::size_t channels = 2;
    double fs = 256.0;
    std::size_t records_per_domain = 3;
    double record_seconds = 120.0;
    std::size_t seizures_per_record = 2;
    double seizure_min_s = 12.0;
    double seizure_max_s = 20.0;

    double background_amplitude = 20.0;  // RMS of band-limited noise
    double background_low_hz = 1.0;
    double background_high_hz = 40.0;
    double seizure_amplitude = 20.0;     // rhythmic 3-6 Hz component
    double seizure_low_hz = 3.0;
    double seizure_high_hz = 6.0;
    double spike_amplitude = 25.0;
    double spike_width_s = 0.02;

    double shift_magnitude = 1.0;
    double gain_spread = 0.4;    // target gain in 1 +/- spread
    double offset_spread = 15.0; // target offset in +/- spread
    double frequency_shift_hz = 1.5;
};

struct SynthDomains {
    std::vector<SignalRecord> source;
    std::vector<SignalRecord> target;
};

SynthDomains synth_domains(const SynthSpec& spec, std::uint64_t seed);

}  // namespace mvtl
