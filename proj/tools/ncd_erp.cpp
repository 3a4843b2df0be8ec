#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ncderp/config.hpp"
#include "ncderp/error.hpp"
#include "ncderp/harness.hpp"
#include "ncderp/parallel.hpp"
#include "ncderp/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ncderp;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open " + p.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
    write_files_atomic({{p, text}});
}

FilterMode parse_mode(const std::string& s) {
    if (s == "forward") return FilterMode::forward;
    if (s == "forward-backward") return FilterMode::forward_backward;
    throw Error("filter mode must be forward or forward-backward");
}

void inspect(const fs::path& path) {
    if (fs::is_directory(path)) {
        const auto objects = read_objects(path);
        std::size_t p300 = 0;
        for (const auto& o : objects) p300 += o.label == Label::P300;
        std::printf("objects: %zu (P300 %zu, NonP300 %zu)\n", objects.size(), p300, objects.size() - p300);
        for (const auto& o : objects)
            std::printf("  %s %-7s %zu bytes, %zu segments\n", o.id.c_str(), to_string(o.label).c_str(),
                        o.bytes.size(), o.provenance.size());
        return;
    }
    const std::string head = slurp(path).substr(0, 6);
    if (head == "ERPREC") {
        const Recording rec = read_recording(path);
        std::size_t targets = 0;
        for (const auto& e : rec.events) targets += e.is_target;
        std::printf("recording %s\n  rate: %d Hz\n  samples: %zu (%.1f s)\n  channels: %zu\n  events: %zu (%zu targets)\n",
                    recording_id(rec).c_str(), rec.sample_rate_hz, rec.sample_count(),
                    static_cast<double>(rec.sample_count()) / rec.sample_rate_hz, rec.channels.size(),
                    rec.events.size(), targets);
        std::printf("  channel names:");
        for (const auto& c : rec.channels) std::printf(" %s", c.name.c_str());
        std::printf("\n");
        for (const auto& [k, v] : rec.meta) std::printf("  meta %s = %s\n", k.c_str(), v.c_str());
    } else if (head == "ERPSEG") {
        const auto segs = read_segments(path);
        std::map<std::string, std::size_t> per_label;
        for (const auto& s : segs) ++per_label[to_string(s.label)];
        std::printf("segments: %zu, window %zu samples\n", segs.size(), segs.empty() ? 0 : segs[0].values.size());
        for (const auto& [l, n] : per_label) std::printf("  %s: %zu\n", l.c_str(), n);
    } else if (path.extension() == ".csv" && fs::exists(labels_sidecar(path))) {
        const DistanceMatrix m = read_matrix_csv(path);
        const auto summary = group_distance_summary(m);
        std::printf("distance matrix: %zu objects\n  max epsilon: %.6g\n", m.size(), max_epsilon(m));
        for (const auto& [l, v] : summary.intra) std::printf("  intra %s: %.6f\n", to_string(l).c_str(), v);
        std::printf("  intra pooled: %.6f\n  inter: %.6f\n  diff: %.6g\n", summary.intra_pooled, summary.inter,
                    summary.diff);
    } else {
        const json j = json::parse(slurp(path));
        std::printf("%s result\n", j.value("type", "unknown").c_str());
        std::cout << j.dump(2).substr(0, 2000) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ncd-erp: P300 structure from compression distances"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: NCD_ERP_THREADS or all cores)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic speller recording");
    fs::path synth_cfg, synth_out;
    long long synth_seed = -1;
    synth->add_option("--config", synth_cfg, "Key/value synthesis parameters")->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_seed, "Override the RNG seed");
    synth->add_option("--out", synth_out, "Output recording")->required();

    auto* insp = app.add_subcommand("inspect", "Summarize a recording, segments, objects, matrix or result");
    fs::path insp_path;
    insp->add_option("path", insp_path)->required()->check(CLI::ExistingPath);

    // segment
    auto* seg = app.add_subcommand("segment", "Band-pass, standardize and cut 600 ms segments of one channel");
    fs::path seg_in, seg_out;
    std::string seg_channel, seg_mode = "forward-backward";
    FilterSpec spec;
    seg->add_option("recording", seg_in)->required()->check(CLI::ExistingFile);
    seg->add_option("--channel", seg_channel)->required();
    seg->add_option("--low", spec.low_cut_hz, "Low cut-off in Hz");
    seg->add_option("--high", spec.high_cut_hz, "High cut-off in Hz");
    seg->add_option("--order", spec.order, "Band-pass filter order (even)");
    seg->add_option("--mode", seg_mode, "forward or forward-backward");
    seg->add_option("--out", seg_out)->required();

    // encode
    auto* enc = app.add_subcommand("encode", "Build ASCII objects from segments");
    fs::path enc_in, enc_out;
    ObjectConfig ocfg;
    int enc_count = 10;
    enc->add_option("segments", enc_in)->required()->check(CLI::ExistingFile);
    enc->add_option("-M,--means", ocfg.m_means, "Segments averaged per block");
    enc->add_option("-C,--concats", ocfg.c_concats, "Blocks concatenated per object");
    enc->add_option("--count", enc_count, "Objects per class");
    enc->add_option("--levels", ocfg.quant_levels, "Quantization levels");
    enc->add_option("--clip", ocfg.clip_sigma, "Clip range in standard deviations");
    enc->add_option("--seed", ocfg.rng_seed);
    enc->add_option("--out", enc_out, "Output directory")->required();

    // ncd
    auto* ncdc = app.add_subcommand("ncd", "Pairwise NCD matrix of an object directory");
    fs::path ncd_in, ncd_out;
    std::string ncd_comp = "zlib";
    ncdc->add_option("objects", ncd_in)->required()->check(CLI::ExistingDirectory);
    ncdc->add_option("--compressor", ncd_comp, "zlib or bwt");
    ncdc->add_option("--out", ncd_out)->required();

    // tree
    auto* treec = app.add_subcommand("tree", "Minimum quartet tree of a distance matrix");
    fs::path tree_in, tree_out, tree_score_out;
    ClusterOptions copts;
    treec->add_option("matrix", tree_in)->required()->check(CLI::ExistingFile);
    treec->add_option("--seed", copts.seed);
    treec->add_option("--restarts", copts.restarts);
    treec->add_option("--budget", copts.max_rejections, "Consecutive rejected proposals before stopping");
    treec->add_option("--max-proposals", copts.max_proposals);
    treec->add_option("--out", tree_out, "Newick output")->required();
    treec->add_option("--score-out", tree_score_out, "JSON with S(T) and search statistics");

    // project
    auto* projc = app.add_subcommand("project", "2-D projection of a distance matrix");
    fs::path proj_in, proj_out;
    int proj_iters = 50;
    std::uint64_t proj_seed = 0;
    projc->add_option("matrix", proj_in)->required()->check(CLI::ExistingFile);
    projc->add_option("--iters", proj_iters, "Refinement sweeps");
    projc->add_option("--seed", proj_seed);
    projc->add_option("--out", proj_out)->required();

    // score
    auto* scorec = app.add_subcommand("score", "Silhouette of a tree or a projection");
    fs::path score_tree, score_labels, score_proj, score_out;
    scorec->add_option("--tree", score_tree, "Newick tree")->check(CLI::ExistingFile);
    scorec->add_option("--labels", score_labels, "Labels JSON written next to the matrix")->check(CLI::ExistingFile);
    scorec->add_option("--proj", score_proj, "Projection CSV")->check(CLI::ExistingFile);
    scorec->add_option("--out", score_out, "Write the report here instead of stdout");

    // experiments
    fs::path exp_cfg;
    int exp_subset = 0;
    auto* se = app.add_subcommand("score-electrodes", "Per-electrode dendrogram silhouette distribution");
    se->add_option("--config", exp_cfg)->required()->check(CLI::ExistingFile);
    auto* grid = app.add_subcommand("grid", "M x C grid search over one electrode subset");
    grid->add_option("--config", exp_cfg)->required()->check(CLI::ExistingFile);
    grid->add_option("--subset", exp_subset, "Subset index (0 = best ranked)");
    auto* run = app.add_subcommand("run", "One end-to-end run: objects, matrix, tree, projection");
    run->add_option("--config", exp_cfg)->required()->check(CLI::ExistingFile);
    run->add_option("--subset", exp_subset, "Subset index (0 = best ranked)");

    auto* rend = app.add_subcommand("render", "SVG figures and CSV data for a result JSON");
    fs::path rend_in, rend_out;
    rend->add_option("result", rend_in)->required()->check(CLI::ExistingFile);
    rend->add_option("--out-dir", rend_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) set_worker_count(threads);

        if (*synth) {
            SynthesisConfig sc;
            if (!synth_cfg.empty()) sc = synthesis_config_from(KeyValueConfig::read(synth_cfg));
            if (synth_seed >= 0) sc.rng_seed = static_cast<std::uint64_t>(synth_seed);
            write_recording(synthesize(sc), synth_out);
            std::printf("wrote %s\n", synth_out.string().c_str());
        } else if (*insp) {
            inspect(insp_path);
        } else if (*seg) {
            spec.mode = parse_mode(seg_mode);
            const Recording rec = standardize(bandpass(read_recording(seg_in), spec));
            const auto segs = extract_segments(rec, rec.channel(seg_channel));
            write_segments(segs, seg_out);
            std::printf("wrote %zu segments to %s\n", segs.size(), seg_out.string().c_str());
        } else if (*enc) {
            const auto objects = build_objects(read_segments(enc_in), ocfg, enc_count);
            write_objects(objects, enc_out);
            std::printf("wrote %zu objects to %s\n", objects.size(), enc_out.string().c_str());
        } else if (*ncdc) {
            const DistanceMatrix m = distance_matrix(read_objects(ncd_in), *make_compressor(ncd_comp));
            if (const auto warning = check_range(m); !warning.empty()) std::fprintf(stderr, "warning: %s\n", warning.c_str());
            write_matrix_csv(m, ncd_out);
            std::printf("wrote %zux%zu matrix to %s\n", m.size(), m.size(), ncd_out.string().c_str());
        } else if (*treec) {
            const DistanceMatrix m = read_matrix_csv(tree_in);
            const ClusterResult r = cluster_tree(m, copts);
            write_text(tree_out, r.tree.to_newick(m.ids) + "\n");
            if (!tree_score_out.empty()) {
                const json j{{"s", r.score.s},           {"cost", r.score.cost},
                             {"best", r.score.best},     {"worst", r.score.worst},
                             {"proposals", r.proposals}, {"restarts", r.restarts},
                             {"best_restart", r.best_restart}};
                write_text(tree_score_out, j.dump(2) + "\n");
            }
            std::printf("S(T) = %.6f after %zu proposals\n", r.score.s, r.proposals);
        } else if (*projc) {
            const DistanceMatrix m = read_matrix_csv(proj_in);
            ProjectionTrace trace;
            const Projection2D p = project(m, proj_iters, proj_seed, &trace);
            write_projection_csv(p, proj_out);
            std::printf("stress %.6f after placement, %.6f after %d sweeps\n", trace.stress_after_placement,
                        trace.stress_per_sweep.empty() ? trace.stress_after_placement : trace.stress_per_sweep.back(),
                        proj_iters);
        } else if (*scorec) {
            SilhouetteReport report;
            if (!score_tree.empty()) {
                if (score_labels.empty()) throw Error("--tree needs --labels");
                std::vector<std::string> names;
                const QuartetTree tree = QuartetTree::parse_newick(slurp(score_tree), names);
                const json lj = json::parse(slurp(score_labels));
                std::vector<Label> labels;
                for (const auto& n : names) {
                    if (!lj.at("labels").contains(n)) throw Error("unlabeled leaf '" + n + "'");
                    labels.push_back(label_from_string(lj["labels"][n].get<std::string>()));
                }
                report = silhouette_dendrogram(tree, names, labels);
            } else if (!score_proj.empty()) {
                report = silhouette_euclidean(read_projection_csv(score_proj));
            } else {
                throw Error("score needs --tree with --labels, or --proj");
            }
            const std::string text = report_to_json(report) + "\n";
            if (score_out.empty()) std::cout << text;
            else write_text(score_out, text);
            std::fprintf(stderr, "SC (%s) = %.6f\n", to_string(report.variant).c_str(), report.overall);
        } else if (*se) {
            const ExperimentConfig cfg = read_experiment_config(exp_cfg);
            const ElectrodeScoreTable t = score_electrodes(load_segments(cfg, cfg.electrodes), cfg);
            const fs::path out = write_result(t, cfg.output_dir);
            for (const auto& sub : rank_and_subset(t, std::min<int>(cfg.subset_size, static_cast<int>(t.electrodes.size())))) {
                std::printf("subset:");
                for (const auto& n : sub) std::printf(" %s", n.c_str());
                std::printf("\n");
            }
            std::printf("wrote %s\n", out.string().c_str());
        } else if (*grid) {
            const ExperimentConfig cfg = read_experiment_config(exp_cfg);
            const auto electrodes = resolve_subset(cfg, exp_subset);
            const GridResult g = grid_search(load_segments(cfg, electrodes), cfg, electrodes, exp_subset);
            const fs::path out = write_result(g, cfg.output_dir);
            std::printf("best cell M=%d C=%d median SC %.4f\nwrote %s\n", g.best_m, g.best_c, g.best_value,
                        out.string().c_str());
        } else if (*run) {
            const ExperimentConfig cfg = read_experiment_config(exp_cfg);
            const auto electrodes = resolve_subset(cfg, exp_subset);
            const PipelineRun r = run_pipeline(load_segments(cfg, electrodes), cfg, electrodes);
            const fs::path out = write_result(r, cfg.output_dir);
            std::printf("S(T) %.4f, SC tree %.4f, SC projection %.4f\nwrote %s\n", r.tree.score.s,
                        r.tree_silhouette.overall, r.projection_silhouette.overall, out.string().c_str());
        } else if (*rend) {
            for (const auto& p : render(rend_in, rend_out)) std::printf("wrote %s\n", p.string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
