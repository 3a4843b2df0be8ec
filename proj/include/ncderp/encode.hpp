#pragma once

// Signal-to-ASCII object construction: random selection of segments,
// M-segment averaging and C-average concatenation.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ncderp/dsp.hpp"

namespace ncderp {

struct ObjectConfig {
    int m_means = 1;
    int c_concats = 1;
    int quant_levels = 64;
    double clip_sigma = 3.0;
    std::uint64_t rng_seed = 0;
};

void validate(const ObjectConfig& cfg);

inline constexpr char kBlockSeparator = '\n';
inline constexpr int kAlphabetOffset = 33;  // '!'
inline constexpr int kMaxQuantLevels = 94;  // printable ASCII '!'..'~'

struct AsciiObject {
    std::string bytes;
    Label label = Label::NonP300;
    std::string id;
    std::vector<SegmentOrigin> provenance;

    bool operator==(const AsciiObject&) const = default;
};

/// Quantization level of one value: clip to +-clip_sigma, then uniform
/// mid-rise bins over [-clip_sigma, clip_sigma]; the upper edge lands in
/// the top bin.
int quant_level(double v, const ObjectConfig& cfg);

/// One printable byte (33 + level) per value. Throws on NaN/Inf.
std::string quantize(std::span<const double> values, const ObjectConfig& cfg);

/// Upper bound on objects a class of `segments` segments supports.
inline std::size_t max_objects(std::size_t segments, int m_means, int c_concats) {
    return segments / (static_cast<std::size_t>(m_means) * static_cast<std::size_t>(c_concats));
}

/// Builds exactly `per_class_count` objects per class. Within each class the
/// segments are shuffled by the seeded RNG and partitioned without reuse.
/// P300 objects come first; ids are "o00", "o01", ... in output order.
std::vector<AsciiObject> build_objects(const std::vector<Segment>& segments, const ObjectConfig& cfg,
                                       int per_class_count);

/// Multi-electrode objects. `per_electrode[e]` holds the segments of
/// electrode e, aligned by event (same origins and labels in the same
/// order). Each object draws M*C events; each electrode's M segments are
/// averaged separately and the blocks are laid out electrode-major:
/// e1-avg1, e2-avg1, ..., e1-avg2, ...
std::vector<AsciiObject> build_multi_electrode_objects(
    const std::vector<std::vector<Segment>>& per_electrode, const ObjectConfig& cfg, int per_class_count);

/// Writes `<label>_<id>.obj` per object plus manifest.json into `dir`.
void write_objects(const std::vector<AsciiObject>& objects, const std::filesystem::path& dir);

/// Reads a directory written by write_objects (manifest order).
std::vector<AsciiObject> read_objects(const std::filesystem::path& dir);

}  // namespace ncderp
