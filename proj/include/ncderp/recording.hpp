#pragma once

// Canonical multichannel recording model, its on-disk container and a
// synthetic P300 speller generator.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ncderp {

struct ChannelId {
    std::string name;
    int index = 0;

    bool operator==(const ChannelId&) const = default;
};

struct StimulusEvent {
    std::int64_t sample_index = 0;
    int stimulus_code = 1;  // rows 1-6, columns 7-12
    bool is_target = false;

    bool operator==(const StimulusEvent&) const = default;
};

/// Channel-major sampled signal with stimulus markers.
///
/// Samples are kept in double precision for processing; the file container
/// stores float32, so only float-representable values round-trip exactly.
struct Recording {
    int sample_rate_hz = 240;
    std::vector<ChannelId> channels;
    std::vector<std::vector<double>> samples;  // [channel][sample]
    std::vector<StimulusEvent> events;
    std::map<std::string, std::string> meta;

    std::size_t sample_count() const { return samples.empty() ? 0 : samples.front().size(); }
    const ChannelId& channel(const std::string& name) const;
    std::size_t channel_position(const std::string& name) const;

    bool operator==(const Recording&) const = default;
};

/// Throws Error describing the first violated invariant.
void validate(const Recording& rec);

struct SynthesisConfig {
    int n_characters = 2;
    int repeats_per_character = 15;
    int n_channels = 1;
    int sample_rate_hz = 240;
    double snr = 1.0;
    double noise_sd = 1.0;
    double p300_latency_ms = 300.0;
    double p300_width_ms = 100.0;  // full width at half maximum of the pulse
    std::vector<double> channel_gain;  // empty means 1.0 on every channel
    std::vector<std::string> channel_names;  // empty means montage order
    int gap_samples = 6;  // extra samples between consecutive 600 ms windows
    std::uint64_t rng_seed = 1;
};

void validate(const SynthesisConfig& cfg);

/// Speller-style recording: per character, `repeats_per_character` trials of
/// the 12 stimulus codes in random order, two of them targets. Target events
/// carry a Gaussian pulse on top of i.i.d. Gaussian noise.
Recording synthesize(const SynthesisConfig& cfg);

Recording read_recording(const std::filesystem::path& path);
void write_recording(const Recording& rec, const std::filesystem::path& path);

/// Number of samples in a 600 ms post-stimulus window.
inline std::size_t window_length(int sample_rate_hz) {
    return static_cast<std::size_t>(0.6 * sample_rate_hz + 0.5);
}

}  // namespace ncderp
