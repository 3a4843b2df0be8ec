#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ncderp/recording.hpp"

namespace ncderp {

enum class FilterMode { forward, forward_backward };

struct FilterSpec {
    double low_cut_hz = 0.5;
    double high_cut_hz = 10.0;
    int order = 4;  // order of the band-pass filter; must be even
    FilterMode mode = FilterMode::forward_backward;
};

void validate(const FilterSpec& spec, int sample_rate_hz);

/// One second-order IIR section, a[0] normalized to 1.
struct Biquad {
    std::array<double, 3> b{};
    std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Butterworth band-pass as a cascade of order/2 biquads (analog prototype,
/// low-pass to band-pass transform, bilinear transform with prewarping).
std::vector<Biquad> design_butterworth_bandpass(const FilterSpec& spec, int sample_rate_hz);

/// Runs the cascade over `x` in place from zero initial state.
void apply_sos(std::span<const Biquad> sos, std::span<double> x);

/// Filters one channel according to `spec.mode`.
void filter_channel(std::span<const Biquad> sos, FilterMode mode, std::span<double> x);

/// Band-passes every channel; channels are filtered in parallel.
Recording bandpass(Recording rec, const FilterSpec& spec);

/// Per-channel z-score over the whole recording (sample standard deviation).
Recording standardize(Recording rec);

enum class Label : std::uint8_t { NonP300 = 0, P300 = 1 };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

struct SegmentOrigin {
    std::int64_t event_index = 0;
    std::string recording_id;

    bool operator==(const SegmentOrigin&) const = default;
    auto operator<=>(const SegmentOrigin&) const = default;
};

/// One labeled 600 ms post-stimulus window from one channel.
struct Segment {
    ChannelId channel;
    std::vector<double> values;
    Label label = Label::NonP300;
    SegmentOrigin origin;

    bool operator==(const Segment&) const = default;
};

/// Identifier used for segment origins: meta "id" when present, else "rec".
std::string recording_id(const Recording& rec);

/// One segment per event in event order; label mirrors is_target.
std::vector<Segment> extract_segments(const Recording& rec, const ChannelId& channel);

/// Segments file: `ERPSEG v1; window=<L>; segments=<N>` header, one
/// `channel,channel_index,label,event_index,recording_id` line per segment,
/// a `---` separator, then N*L little-endian float32 values.
void write_segments(const std::vector<Segment>& segments, const std::filesystem::path& path);
std::vector<Segment> read_segments(const std::filesystem::path& path);

namespace serial {

/// Single-threaded reference for ncderp::bandpass.
Recording bandpass(Recording rec, const FilterSpec& spec);

}  // namespace serial

}  // namespace ncderp
