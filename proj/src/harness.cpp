#include "ncderp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "ncderp/error.hpp"
#include "ncderp/montage.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

void validate(const ExperimentConfig& cfg) {
    auto in_grid = [](int v) { return v >= kGridMin && v <= kGridMax; };
    if (!in_grid(cfg.m_means) || !in_grid(cfg.c_concats))
        throw Error("m and c must lie in [1, 14]");
    if (!in_grid(cfg.m_min) || !in_grid(cfg.m_max) || cfg.m_min > cfg.m_max)
        throw Error("m range must satisfy 1 <= m_min <= m_max <= 14");
    if (!in_grid(cfg.c_min) || !in_grid(cfg.c_max) || cfg.c_min > cfg.c_max)
        throw Error("c range must satisfy 1 <= c_min <= c_max <= 14");
    if (cfg.repeats < 1) throw Error("repeats must be >= 1");
    if (cfg.objects_per_run < 4 || cfg.objects_per_run % 2 != 0)
        throw Error("objects_per_run must be an even number >= 4");
    if (cfg.top_k < 0) throw Error("top_k must be >= 0");
    if (cfg.top_k > 0 && cfg.prior_scores.empty()) throw Error("top_k needs prior_scores");
    if (cfg.subset_size < 1) throw Error("subset_size must be >= 1");
    if (cfg.tree_restarts < 1) throw Error("restarts must be >= 1");
    if (cfg.tree_max_rejections < 1 || cfg.tree_max_proposals < 1) throw Error("tree budget must be >= 1");
    if (cfg.projection_iters < 0) throw Error("projection_iters must be >= 0");
    validate(ObjectConfig{cfg.m_means, cfg.c_concats, cfg.quant_levels, cfg.clip_sigma, 0});
    make_compressor(cfg.compressor);
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv, const fs::path& base_dir) {
    kv.reject_unknown({"recordings", "electrodes", "top_k", "prior_scores", "subset_size", "m", "c", "m_min",
                       "m_max", "c_min", "c_max", "objects_per_run", "repeats", "quant_levels", "clip_sigma",
                       "compressor", "seed", "tree_budget", "tree_max_proposals", "restarts", "projection_iters",
                       "low_cut", "high_cut", "order", "filter_mode", "output"});
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    auto as_int = [&](const char* key, int fallback) { return static_cast<int>(kv.get_int(key, fallback)); };

    ExperimentConfig cfg;
    for (const auto& r : kv.get_strings("recordings")) cfg.recordings.push_back(resolve(r));
    cfg.electrodes = kv.get_strings("electrodes");
    cfg.top_k = as_int("top_k", cfg.top_k);
    if (kv.has("prior_scores")) cfg.prior_scores = resolve(kv.get_string("prior_scores", ""));
    cfg.subset_size = as_int("subset_size", cfg.subset_size);
    cfg.m_means = as_int("m", cfg.m_means);
    cfg.c_concats = as_int("c", cfg.c_concats);
    cfg.m_min = as_int("m_min", cfg.m_min);
    cfg.m_max = as_int("m_max", cfg.m_max);
    cfg.c_min = as_int("c_min", cfg.c_min);
    cfg.c_max = as_int("c_max", cfg.c_max);
    cfg.objects_per_run = as_int("objects_per_run", cfg.objects_per_run);
    cfg.repeats = as_int("repeats", cfg.repeats);
    cfg.quant_levels = as_int("quant_levels", cfg.quant_levels);
    cfg.clip_sigma = kv.get_real("clip_sigma", cfg.clip_sigma);
    cfg.compressor = kv.get_string("compressor", cfg.compressor);
    const long long seed = kv.get_int("seed", static_cast<long long>(cfg.seed));
    if (seed < 0) throw Error(kv.origin() + ": seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const long long budget = kv.get_int("tree_budget", static_cast<long long>(cfg.tree_max_rejections));
    const long long proposals = kv.get_int("tree_max_proposals", static_cast<long long>(cfg.tree_max_proposals));
    if (budget < 1 || proposals < 1) throw Error(kv.origin() + ": tree budget must be >= 1");
    cfg.tree_max_rejections = static_cast<std::size_t>(budget);
    cfg.tree_max_proposals = static_cast<std::size_t>(proposals);
    cfg.tree_restarts = as_int("restarts", cfg.tree_restarts);
    cfg.projection_iters = as_int("projection_iters", cfg.projection_iters);
    cfg.filter.low_cut_hz = kv.get_real("low_cut", cfg.filter.low_cut_hz);
    cfg.filter.high_cut_hz = kv.get_real("high_cut", cfg.filter.high_cut_hz);
    cfg.filter.order = as_int("order", cfg.filter.order);
    const std::string mode = kv.get_string("filter_mode", "forward-backward");
    if (mode == "forward") cfg.filter.mode = FilterMode::forward;
    else if (mode == "forward-backward") cfg.filter.mode = FilterMode::forward_backward;
    else throw Error(kv.origin() + ": filter_mode must be \"forward\" or \"forward-backward\"");
    cfg.output_dir = resolve(kv.get_string("output", cfg.output_dir.string()));
    validate(cfg);
    return cfg;
}

ExperimentConfig read_experiment_config(const fs::path& path) {
    return experiment_config_from(KeyValueConfig::read(path), path.parent_path());
}

SynthesisConfig synthesis_config_from(const KeyValueConfig& kv) {
    kv.reject_unknown({"n_characters", "repeats_per_character", "n_channels", "sample_rate_hz", "snr", "noise_sd",
                       "p300_latency_ms", "p300_width_ms", "channel_gain", "channel_names", "gap_samples", "seed"});
    SynthesisConfig s;
    s.n_characters = static_cast<int>(kv.get_int("n_characters", s.n_characters));
    s.repeats_per_character = static_cast<int>(kv.get_int("repeats_per_character", s.repeats_per_character));
    s.n_channels = static_cast<int>(kv.get_int("n_channels", s.n_channels));
    s.sample_rate_hz = static_cast<int>(kv.get_int("sample_rate_hz", s.sample_rate_hz));
    s.snr = kv.get_real("snr", s.snr);
    s.noise_sd = kv.get_real("noise_sd", s.noise_sd);
    s.p300_latency_ms = kv.get_real("p300_latency_ms", s.p300_latency_ms);
    s.p300_width_ms = kv.get_real("p300_width_ms", s.p300_width_ms);
    s.channel_gain = kv.get_reals("channel_gain");
    s.channel_names = kv.get_strings("channel_names");
    s.gap_samples = static_cast<int>(kv.get_int("gap_samples", s.gap_samples));
    const long long seed = kv.get_int("seed", static_cast<long long>(s.rng_seed));
    if (seed < 0) throw Error(kv.origin() + ": seed must be >= 0");
    s.rng_seed = static_cast<std::uint64_t>(seed);
    validate(s);
    return s;
}

// ---------------------------------------------------------------- segments

std::size_t SegmentBank::index_of(const std::string& name) const {
    for (std::size_t e = 0; e < electrodes.size(); ++e)
        if (electrodes[e].name == name) return e;
    throw Error("electrode '" + name + "' is not in the segment bank");
}

std::size_t SegmentBank::count(Label label) const {
    if (segments.empty()) return 0;
    return static_cast<std::size_t>(std::count_if(segments.front().begin(), segments.front().end(),
                                                  [&](const Segment& s) { return s.label == label; }));
}

std::vector<std::vector<Segment>> SegmentBank::select(const std::vector<std::string>& names) const {
    std::vector<std::vector<Segment>> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(segments[index_of(n)]);
    return out;
}

SegmentBank prepare_segments(const std::vector<Recording>& recordings, const FilterSpec& filter,
                             const std::vector<std::string>& electrodes) {
    if (recordings.empty()) throw Error("no recordings configured");
    SegmentBank bank;
    std::vector<std::string> names = electrodes;
    if (names.empty())
        for (const auto& ch : recordings.front().channels) names.push_back(ch.name);
    for (const auto& n : names) bank.electrodes.push_back(recordings.front().channel(n));
    bank.segments.resize(names.size());
    for (const auto& raw : recordings) {
        for (const auto& n : names)
            if (std::none_of(raw.channels.begin(), raw.channels.end(),
                             [&](const ChannelId& c) { return c.name == n; }))
                throw Error("recording '" + recording_id(raw) + "' has no electrode '" + n + "'");
        const Recording rec = standardize(bandpass(raw, filter));
        for (std::size_t e = 0; e < names.size(); ++e) {
            auto segs = extract_segments(rec, rec.channel(names[e]));
            bank.segments[e].insert(bank.segments[e].end(), std::make_move_iterator(segs.begin()),
                                    std::make_move_iterator(segs.end()));
        }
    }
    return bank;
}

SegmentBank load_segments(const ExperimentConfig& cfg, const std::vector<std::string>& electrodes) {
    std::vector<Recording> recs;
    for (const auto& p : cfg.recordings) recs.push_back(read_recording(p));
    return prepare_segments(recs, cfg.filter, electrodes);
}

bool feasible(const SegmentBank& bank, int objects_per_run, int m_means, int c_concats) {
    const std::size_t per_class = static_cast<std::size_t>(objects_per_run / 2);
    return max_objects(bank.count(Label::P300), m_means, c_concats) >= per_class &&
           max_objects(bank.count(Label::NonP300), m_means, c_concats) >= per_class;
}

namespace {

void require_feasible(const SegmentBank& bank, const ExperimentConfig& cfg, int m, int c) {
    if (feasible(bank, cfg.objects_per_run, m, c)) return;
    const std::size_t need = static_cast<std::size_t>(cfg.objects_per_run / 2) * m * c;
    throw Error("insufficient segments for M=" + std::to_string(m) + ", C=" + std::to_string(c) + ": need " +
                std::to_string(need) + " per class, have " + std::to_string(bank.count(Label::P300)) +
                " P300 and " + std::to_string(bank.count(Label::NonP300)) + " non-P300");
}

ClusterOptions tree_options(const ExperimentConfig& cfg, std::uint64_t seed) {
    ClusterOptions o;
    o.max_rejections = cfg.tree_max_rejections;
    o.max_proposals = cfg.tree_max_proposals;
    o.restarts = cfg.tree_restarts;
    o.seed = derive_seed(seed, "tree");
    return o;
}

std::vector<AsciiObject> make_objects(const std::vector<std::vector<Segment>>& per_electrode,
                                      const ExperimentConfig& cfg, int m, int c, std::uint64_t seed) {
    const ObjectConfig oc{m, c, cfg.quant_levels, cfg.clip_sigma, derive_seed(seed, "objects")};
    return build_multi_electrode_objects(per_electrode, oc, cfg.objects_per_run / 2);
}

// Runs body(job) for job in [0, n) on the worker pool and rethrows the
// first failure after the loop. Results must be stored by job index.
template <class Body>
void run_jobs(std::size_t n, Body body) {
    std::exception_ptr failure;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(n); ++job) {
        try {
            body(static_cast<std::size_t>(job));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

double dendrogram_score(const std::vector<std::vector<Segment>>& per_electrode, const ExperimentConfig& cfg,
                        int m_means, int c_concats, std::uint64_t seed) {
    const auto objects = make_objects(per_electrode, cfg, m_means, c_concats, seed);
    const auto compressor = make_compressor(cfg.compressor);
    const DistanceMatrix matrix = distance_matrix(objects, *compressor);
    const ClusterResult tree = cluster_tree(matrix, tree_options(cfg, seed));
    return silhouette_dendrogram(tree.tree, matrix.ids, matrix.labels).overall;
}

// ---------------------------------------------------------------- scoring

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

ElectrodeScores summarize(const ChannelId& ch, std::vector<double> values) {
    ElectrodeScores s;
    s.name = ch.name;
    s.index = ch.index;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.values = std::move(values);
    try {
        const auto& pos = find_electrode(standard_montage(), ch.name);
        s.position = std::make_pair(pos.x, pos.y);
    } catch (const Error&) {
        // Non-montage names still get scores; only scalp rendering needs a position.
    }
    return s;
}

}  // namespace

ElectrodeScoreTable score_electrodes(const SegmentBank& bank, const ExperimentConfig& cfg) {
    validate(cfg);
    if (bank.electrodes.empty()) throw Error("no electrodes to score");
    require_feasible(bank, cfg, cfg.m_means, cfg.c_concats);

    const std::size_t n_el = bank.electrodes.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
    std::vector<std::vector<std::vector<Segment>>> single(n_el);
    for (std::size_t e = 0; e < n_el; ++e) single[e] = {bank.segments[e]};

    std::vector<double> values(n_el * reps);
    run_jobs(values.size(), [&](std::size_t job) {
        const std::size_t e = job / reps, r = job % reps;
        values[job] = dendrogram_score(single[e], cfg, cfg.m_means, cfg.c_concats,
                                       derive_seed(cfg.seed, "score-electrodes", e, r));
    });

    ElectrodeScoreTable t;
    t.m_means = cfg.m_means;
    t.c_concats = cfg.c_concats;
    t.repeats = cfg.repeats;
    t.objects_per_run = cfg.objects_per_run;
    t.seed = cfg.seed;
    for (std::size_t e = 0; e < n_el; ++e)
        t.electrodes.push_back(summarize(
            bank.electrodes[e], std::vector<double>(values.begin() + e * reps, values.begin() + (e + 1) * reps)));
    return t;
}

std::vector<std::vector<std::string>> rank_and_subset(const ElectrodeScoreTable& table, int k) {
    if (table.electrodes.empty()) throw Error("cannot rank an empty electrode table");
    if (k < 1 || static_cast<std::size_t>(k) > table.electrodes.size())
        throw Error("subset size must lie in [1, electrode count]");
    std::vector<std::size_t> order(table.electrodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = table.electrodes[a];
        const auto& eb = table.electrodes[b];
        if (ea.median != eb.median) return ea.median > eb.median;
        return ea.index < eb.index;
    });
    std::vector<std::vector<std::string>> subsets;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i % static_cast<std::size_t>(k) == 0) subsets.emplace_back();
        subsets.back().push_back(table.electrodes[order[i]].name);
    }
    return subsets;
}

// ---------------------------------------------------------------- grid

std::optional<double> GridResult::at(int m, int c) const {
    const auto mi = std::find(m_values.begin(), m_values.end(), m);
    const auto ci = std::find(c_values.begin(), c_values.end(), c);
    if (mi == m_values.end() || ci == c_values.end()) return std::nullopt;
    return medians[static_cast<std::size_t>(mi - m_values.begin()) * c_values.size() +
                   static_cast<std::size_t>(ci - c_values.begin())];
}

void select_best_cell(GridResult& g) {
    bool have_best = false;
    for (std::size_t mi = 0; mi < g.m_values.size(); ++mi)
        for (std::size_t ci = 0; ci < g.c_values.size(); ++ci) {
            const auto& v = g.medians[mi * g.c_values.size() + ci];
            if (!v) continue;
            const int m = g.m_values[mi], c = g.c_values[ci];
            const bool better = !have_best || *v > g.best_value ||
                                (*v == g.best_value &&
                                 (m * c < g.best_m * g.best_c || (m * c == g.best_m * g.best_c && m < g.best_m)));
            if (better) {
                g.best_value = *v;
                g.best_m = m;
                g.best_c = c;
                have_best = true;
            }
        }
    if (!have_best) throw Error("grid has no feasible cell");
}

GridResult grid_search(const SegmentBank& bank, const ExperimentConfig& cfg,
                       const std::vector<std::string>& electrodes, int subset_index) {
    validate(cfg);
    if (electrodes.empty()) throw Error("grid search needs at least one electrode");
    const auto per_electrode = bank.select(electrodes);

    GridResult g;
    g.electrodes = electrodes;
    g.subset = subset_index;
    g.repeats = cfg.repeats;
    g.seed = cfg.seed;
    for (int m = cfg.m_min; m <= cfg.m_max; ++m) g.m_values.push_back(m);
    for (int c = cfg.c_min; c <= cfg.c_max; ++c) g.c_values.push_back(c);
    g.medians.assign(g.m_values.size() * g.c_values.size(), std::nullopt);

    std::vector<std::size_t> cells;
    for (std::size_t mi = 0; mi < g.m_values.size(); ++mi)
        for (std::size_t ci = 0; ci < g.c_values.size(); ++ci)
            if (feasible(bank, cfg.objects_per_run, g.m_values[mi], g.c_values[ci]))
                cells.push_back(mi * g.c_values.size() + ci);
    if (cells.empty()) throw Error("no feasible (M, C) cell for the available segments");

    const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
    std::vector<double> values(cells.size() * reps);
    run_jobs(values.size(), [&](std::size_t job) {
        const std::size_t cell = cells[job / reps], r = job % reps;
        const int m = g.m_values[cell / g.c_values.size()];
        const int c = g.c_values[cell % g.c_values.size()];
        values[job] = dendrogram_score(per_electrode, cfg, m, c,
                                       derive_seed(cfg.seed, "grid", static_cast<std::uint64_t>(m),
                                                   static_cast<std::uint64_t>(c), r));
    });

    for (std::size_t k = 0; k < cells.size(); ++k)
        g.medians[cells[k]] = quantile({values.begin() + k * reps, values.begin() + (k + 1) * reps}, 0.5);
    select_best_cell(g);
    return g;
}

std::vector<std::string> resolve_subset(const ExperimentConfig& cfg, int subset) {
    if (subset < 0) throw Error("subset index must be >= 0");
    if (!cfg.prior_scores.empty() && cfg.electrodes.empty()) {
        std::ifstream f(cfg.prior_scores);
        if (!f) throw Error("cannot open prior scores " + cfg.prior_scores.string());
        const auto table = electrode_table_from_json(json::parse(f));
        auto ranked = rank_and_subset(table, static_cast<int>(table.electrodes.size())).front();
        if (cfg.top_k > 0 && ranked.size() > static_cast<std::size_t>(cfg.top_k)) ranked.resize(cfg.top_k);
        const std::size_t k = static_cast<std::size_t>(cfg.subset_size);
        const std::size_t count = (ranked.size() + k - 1) / k;
        if (static_cast<std::size_t>(subset) >= count)
            throw Error("subset " + std::to_string(subset) + " does not exist (" + std::to_string(count) +
                        " subsets)");
        const auto first = ranked.begin() + static_cast<std::ptrdiff_t>(subset * k);
        return {first, ranked.begin() + static_cast<std::ptrdiff_t>(std::min(ranked.size(), (subset + 1) * k))};
    }
    if (subset != 0) throw Error("an explicit electrode list forms a single subset (index 0)");
    if (cfg.electrodes.empty()) throw Error("grid search needs electrodes or prior_scores");
    return cfg.electrodes;
}

// ---------------------------------------------------------------- run

PipelineRun run_pipeline(const SegmentBank& bank, const ExperimentConfig& cfg,
                         const std::vector<std::string>& electrodes) {
    validate(cfg);
    require_feasible(bank, cfg, cfg.m_means, cfg.c_concats);
    PipelineRun run;
    run.electrodes = electrodes;
    run.m_means = cfg.m_means;
    run.c_concats = cfg.c_concats;
    run.seed = cfg.seed;
    run.compressor = cfg.compressor;
    const auto objects = make_objects(bank.select(electrodes), cfg, cfg.m_means, cfg.c_concats, cfg.seed);
    run.matrix = distance_matrix(objects, *make_compressor(cfg.compressor));
    run.tree = cluster_tree(run.matrix, tree_options(cfg, cfg.seed));
    run.projection = project(run.matrix, cfg.projection_iters, derive_seed(cfg.seed, "projection"));
    run.tree_silhouette = silhouette_dendrogram(run.tree.tree, run.matrix.ids, run.matrix.labels);
    run.projection_silhouette = silhouette_euclidean(run.projection);
    return run;
}

// ---------------------------------------------------------------- serialization

json to_json(const ElectrodeScoreTable& t) {
    json rows = json::array();
    for (const auto& e : t.electrodes) {
        json row{{"name", e.name}, {"index", e.index},  {"values", e.values},
                 {"median", e.median}, {"q1", e.q1}, {"q3", e.q3}};
        row["position"] = e.position ? json::array({e.position->first, e.position->second}) : json(nullptr);
        rows.push_back(row);
    }
    return {{"type", "electrode_scores"}, {"m", t.m_means},   {"c", t.c_concats},
            {"repeats", t.repeats},       {"objects_per_run", t.objects_per_run},
            {"seed", t.seed},             {"electrodes", rows}};
}

ElectrodeScoreTable electrode_table_from_json(const json& j) {
    if (j.value("type", "") != "electrode_scores") throw Error("not an electrode_scores result");
    ElectrodeScoreTable t;
    t.m_means = j.at("m").get<int>();
    t.c_concats = j.at("c").get<int>();
    t.repeats = j.at("repeats").get<int>();
    t.objects_per_run = j.at("objects_per_run").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("electrodes")) {
        ElectrodeScores e;
        e.name = row.at("name").get<std::string>();
        e.index = row.at("index").get<int>();
        e.values = row.at("values").get<std::vector<double>>();
        e.median = row.at("median").get<double>();
        e.q1 = row.at("q1").get<double>();
        e.q3 = row.at("q3").get<double>();
        if (!row.at("position").is_null())
            e.position = std::make_pair(row["position"][0].get<double>(), row["position"][1].get<double>());
        t.electrodes.push_back(std::move(e));
    }
    return t;
}

json to_json(const GridResult& g) {
    json medians = json::array();
    for (std::size_t mi = 0; mi < g.m_values.size(); ++mi) {
        json row = json::array();
        for (std::size_t ci = 0; ci < g.c_values.size(); ++ci) {
            const auto& v = g.medians[mi * g.c_values.size() + ci];
            row.push_back(v ? json(*v) : json(nullptr));
        }
        medians.push_back(row);
    }
    return {{"type", "grid"},
            {"electrodes", g.electrodes},
            {"subset", g.subset},
            {"m_values", g.m_values},
            {"c_values", g.c_values},
            {"medians", medians},
            {"best", {{"m", g.best_m}, {"c", g.best_c}, {"median", g.best_value}}},
            {"repeats", g.repeats},
            {"seed", g.seed}};
}

GridResult grid_from_json(const json& j) {
    if (j.value("type", "") != "grid") throw Error("not a grid result");
    GridResult g;
    g.electrodes = j.at("electrodes").get<std::vector<std::string>>();
    g.subset = j.at("subset").get<int>();
    g.m_values = j.at("m_values").get<std::vector<int>>();
    g.c_values = j.at("c_values").get<std::vector<int>>();
    for (const auto& row : j.at("medians"))
        for (const auto& v : row) g.medians.push_back(v.is_null() ? std::nullopt : std::optional(v.get<double>()));
    if (g.medians.size() != g.m_values.size() * g.c_values.size()) throw Error("grid medians do not match axes");
    g.best_m = j.at("best").at("m").get<int>();
    g.best_c = j.at("best").at("c").get<int>();
    g.best_value = j.at("best").at("median").get<double>();
    g.repeats = j.at("repeats").get<int>();
    g.seed = j.at("seed").get<std::uint64_t>();
    return g;
}

json to_json(const PipelineRun& r) {
    const std::size_t n = r.matrix.size();
    json labels = json::array(), matrix = json::array(), points = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        labels.push_back(to_string(r.matrix.labels[i]));
        matrix.push_back(std::vector<double>(r.matrix.values.begin() + i * n, r.matrix.values.begin() + (i + 1) * n));
        points.push_back({r.projection.points[i].x, r.projection.points[i].y});
    }
    auto sc = [](const SilhouetteReport& rep) { return json::parse(report_to_json(rep)); };
    return {{"type", "run"},
            {"electrodes", r.electrodes},
            {"m", r.m_means},
            {"c", r.c_concats},
            {"seed", r.seed},
            {"compressor", r.compressor},
            {"ids", r.matrix.ids},
            {"labels", labels},
            {"matrix", matrix},
            {"newick", r.tree.tree.to_newick(r.matrix.ids)},
            {"tree_score", r.tree.score.s},
            {"tree_proposals", r.tree.proposals},
            {"projection", points},
            {"silhouette_tree", sc(r.tree_silhouette)},
            {"silhouette_projection", sc(r.projection_silhouette)}};
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::string to_csv(const ElectrodeScoreTable& t) {
    std::ostringstream out;
    out << "electrode,index,median,q1,q3";
    for (int r = 0; r < t.repeats; ++r) out << ",r" << r;
    out << '\n';
    for (const auto& e : t.electrodes) {
        out << e.name << ',' << e.index << ',' << fmt(e.median) << ',' << fmt(e.q1) << ',' << fmt(e.q3);
        for (double v : e.values) out << ',' << fmt(v);
        out << '\n';
    }
    return out.str();
}

std::string to_csv(const GridResult& g) {
    std::ostringstream out;
    out << "M\\C";
    for (int c : g.c_values) out << ',' << c;
    out << '\n';
    for (std::size_t mi = 0; mi < g.m_values.size(); ++mi) {
        out << g.m_values[mi];
        for (std::size_t ci = 0; ci < g.c_values.size(); ++ci) {
            out << ',';
            if (const auto& v = g.medians[mi * g.c_values.size() + ci]) out << fmt(*v);
        }
        out << '\n';
    }
    return out.str();
}

void write_files_atomic(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    try {
        for (const auto& [path, content] : files) {
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            fs::path tmp = path;
            tmp += ".partial";
            temps.push_back(tmp);
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f << content;
            f.close();
            if (!f) throw Error("cannot write " + path.string());
        }
        for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], files[i].first);
    } catch (...) {
        cleanup();
        throw;
    }
}

fs::path write_result(const ElectrodeScoreTable& t, const fs::path& dir) {
    const fs::path json_path = dir / "electrode_scores.json";
    write_files_atomic({{json_path, to_json(t).dump(2) + "\n"}, {dir / "electrode_scores.csv", to_csv(t)}});
    return json_path;
}

fs::path write_result(const GridResult& g, const fs::path& dir) {
    const std::string stem = "grid_subset" + std::to_string(g.subset);
    const fs::path json_path = dir / (stem + ".json");
    write_files_atomic({{json_path, to_json(g).dump(2) + "\n"}, {dir / (stem + ".csv"), to_csv(g)}});
    return json_path;
}

fs::path write_result(const PipelineRun& r, const fs::path& dir) {
    const fs::path json_path = dir / "run.json";
    std::ostringstream matrix;
    const std::size_t n = r.matrix.size();
    matrix << "id";
    for (const auto& id : r.matrix.ids) matrix << ',' << id;
    matrix << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        matrix << r.matrix.ids[i];
        for (std::size_t j = 0; j < n; ++j) matrix << ',' << fmt(r.matrix(i, j));
        matrix << '\n';
    }
    write_files_atomic({{json_path, to_json(r).dump(2) + "\n"},
                        {dir / "run_matrix.csv", matrix.str()},
                        {dir / "run_tree.newick", r.tree.tree.to_newick(r.matrix.ids) + "\n"}});
    return json_path;
}

}  // namespace ncderp
