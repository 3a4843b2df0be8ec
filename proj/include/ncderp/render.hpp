#pragma once

// SVG figures for experiment results. Output is a pure function of the
// input so repeated renders are byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include "ncderp/harness.hpp"
#include "ncderp/montage.hpp"

namespace ncderp {

std::string render_boxplot_svg(const ElectrodeScoreTable& table);

/// Throws Error for an electrode missing from `montage`.
std::string render_scalp_svg(const ElectrodeScoreTable& table, const std::vector<ElectrodePosition>& montage);

/// Infeasible cells stay blank; the best cell is outlined.
std::string render_heatmap_svg(const GridResult& grid);

/// Unrooted equal-angle layout; leaf i is drawn with names[i] and labels[i].
std::string render_dendrogram_svg(const QuartetTree& tree, const std::vector<std::string>& names,
                                  const std::vector<Label>& labels, const std::string& title);

std::string render_projection_svg(const Projection2D& p, const std::string& title);

/// Renders a result JSON written by the harness into `out_dir` (default:
/// next to the JSON) and returns the files written. Nothing is written
/// when the result is empty or any figure fails.
std::vector<std::filesystem::path> render(const std::filesystem::path& result_json,
                                          const std::filesystem::path& out_dir = {},
                                          const std::vector<ElectrodePosition>& montage = standard_montage());

}  // namespace ncderp
