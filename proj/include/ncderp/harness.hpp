#pragma once

// Experiment orchestration: per-electrode scoring, M x C grid search and
// single end-to-end runs, with JSON/CSV result serialization.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ncderp/config.hpp"
#include "ncderp/dsp.hpp"
#include "ncderp/encode.hpp"
#include "ncderp/ncd.hpp"
#include "ncderp/projection.hpp"
#include "ncderp/quartet_tree.hpp"
#include "ncderp/silhouette.hpp"

namespace ncderp {

inline constexpr int kGridMin = 1;
inline constexpr int kGridMax = 14;

struct ExperimentConfig {
    std::vector<std::filesystem::path> recordings;

    // Electrode selection: an explicit list, or the ranking of a previous
    // score-electrodes result (optionally cut to its top_k). Both empty
    // means every channel.
    std::vector<std::string> electrodes;
    int top_k = 0;
    std::filesystem::path prior_scores;
    int subset_size = 8;

    int m_means = 8;  // fixed configuration for electrode scoring and runs
    int c_concats = 8;
    int m_min = kGridMin, m_max = kGridMax;
    int c_min = kGridMin, c_max = kGridMax;
    int objects_per_run = 20;  // split evenly between the two classes
    int repeats = 100;
    int quant_levels = 64;
    double clip_sigma = 3.0;

    std::string compressor = "zlib";
    std::uint64_t seed = 1;
    std::size_t tree_max_rejections = 2000;
    std::size_t tree_max_proposals = 200000;
    int tree_restarts = 1;
    int projection_iters = 50;

    FilterSpec filter;
    std::filesystem::path output_dir = "results";
};

void validate(const ExperimentConfig& cfg);

/// Reads the key/value schema; relative paths resolve against `base_dir`.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

/// Synthetic recording parameters from the same key/value format.
SynthesisConfig synthesis_config_from(const KeyValueConfig& kv);

/// Segments of several electrodes, aligned by event across electrodes.
struct SegmentBank {
    std::vector<ChannelId> electrodes;
    std::vector<std::vector<Segment>> segments;

    std::size_t index_of(const std::string& name) const;
    std::size_t count(Label label) const;
    /// Per-electrode segment lists for a subset, in the given order.
    std::vector<std::vector<Segment>> select(const std::vector<std::string>& names) const;
};

/// Band-pass, standardize and segment each recording, pooling segments of
/// the same electrode across recordings. Empty `electrodes` keeps every
/// channel of the first recording.
SegmentBank prepare_segments(const std::vector<Recording>& recordings, const FilterSpec& filter,
                             const std::vector<std::string>& electrodes = {});

/// Reads the configured recordings and prepares `electrodes` (empty: all).
SegmentBank load_segments(const ExperimentConfig& cfg, const std::vector<std::string>& electrodes);

/// Whether every class holds enough segments for objects_per_run objects.
bool feasible(const SegmentBank& bank, int objects_per_run, int m_means, int c_concats);

/// One repeat: objects, NCD matrix, quartet tree, dendrogram silhouette.
double dendrogram_score(const std::vector<std::vector<Segment>>& per_electrode, const ExperimentConfig& cfg,
                        int m_means, int c_concats, std::uint64_t seed);

struct ElectrodeScores {
    std::string name;
    int index = 0;  // channel index in the recording
    std::vector<double> values;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::optional<std::pair<double, double>> position;  // montage x, y
};

struct ElectrodeScoreTable {
    int m_means = 0;
    int c_concats = 0;
    int repeats = 0;
    int objects_per_run = 0;
    std::uint64_t seed = 0;
    std::vector<ElectrodeScores> electrodes;

    bool operator==(const ElectrodeScoreTable&) const = default;
};

inline bool operator==(const ElectrodeScores& a, const ElectrodeScores& b) {
    return a.name == b.name && a.index == b.index && a.values == b.values && a.median == b.median &&
           a.q1 == b.q1 && a.q3 == b.q3 && a.position == b.position;
}

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

ElectrodeScoreTable score_electrodes(const SegmentBank& bank, const ExperimentConfig& cfg);

/// Electrodes by median descending (ties: lower index first), split into
/// consecutive subsets of size k; the last subset may be shorter.
std::vector<std::vector<std::string>> rank_and_subset(const ElectrodeScoreTable& table, int k);

struct GridResult {
    std::vector<std::string> electrodes;
    int subset = 0;
    std::vector<int> m_values;
    std::vector<int> c_values;
    std::vector<std::optional<double>> medians;  // [m index][c index], absent when infeasible
    int best_m = 0;
    int best_c = 0;
    double best_value = 0.0;
    int repeats = 0;
    std::uint64_t seed = 0;

    std::optional<double> at(int m, int c) const;
    bool operator==(const GridResult&) const = default;
};

/// Sets the best cell: largest median, ties to smaller M*C, then smaller M.
void select_best_cell(GridResult& g);

GridResult grid_search(const SegmentBank& bank, const ExperimentConfig& cfg,
                       const std::vector<std::string>& electrodes, int subset_index = 0);

/// Electrodes of subset `subset` according to the configuration: the
/// explicit list as one subset, or the prior result's ranking (cut to
/// top_k when set) split into subsets of subset_size.
std::vector<std::string> resolve_subset(const ExperimentConfig& cfg, int subset);

struct PipelineRun {
    std::vector<std::string> electrodes;
    int m_means = 0;
    int c_concats = 0;
    std::uint64_t seed = 0;
    std::string compressor;
    DistanceMatrix matrix;
    ClusterResult tree;
    Projection2D projection;
    SilhouetteReport tree_silhouette;
    SilhouetteReport projection_silhouette;
};

/// Single end-to-end run at the fixed (m_means, c_concats) configuration.
PipelineRun run_pipeline(const SegmentBank& bank, const ExperimentConfig& cfg,
                         const std::vector<std::string>& electrodes);

nlohmann::json to_json(const ElectrodeScoreTable& t);
nlohmann::json to_json(const GridResult& g);
nlohmann::json to_json(const PipelineRun& r);
ElectrodeScoreTable electrode_table_from_json(const nlohmann::json& j);
GridResult grid_from_json(const nlohmann::json& j);

std::string to_csv(const ElectrodeScoreTable& t);
std::string to_csv(const GridResult& g);

/// Writes every file or none: contents go to temporaries first and are
/// renamed into place only after all writes succeed.
void write_files_atomic(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

/// Result JSON plus CSV data files into `dir`; returns the JSON path.
std::filesystem::path write_result(const ElectrodeScoreTable& t, const std::filesystem::path& dir);
std::filesystem::path write_result(const GridResult& g, const std::filesystem::path& dir);
std::filesystem::path write_result(const PipelineRun& r, const std::filesystem::path& dir);

}  // namespace ncderp
