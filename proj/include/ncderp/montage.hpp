#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ncderp {

/// Electrode position in unit-circle head coordinates (nose at +y, left at -x).
struct ElectrodePosition {
    std::string name;
    double x = 0.0;
    double y = 0.0;
};

/// The bundled 64-channel 10-10 layout, in BCI speller amplifier order.
const std::vector<ElectrodePosition>& standard_montage();

std::vector<ElectrodePosition> parse_montage_csv(const std::string& text);
std::vector<ElectrodePosition> read_montage(const std::filesystem::path& path);

/// Case-insensitive lookup; throws Error for unknown names.
const ElectrodePosition& find_electrode(const std::vector<ElectrodePosition>& montage,
                                        const std::string& name);

/// Default channel names for synthetic recordings: Cz first, then the
/// remaining montage channels spreading outward from the vertex.
std::vector<std::string> default_channel_names(int count);

}  // namespace ncderp
