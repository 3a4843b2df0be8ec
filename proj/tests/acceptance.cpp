// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. Expected values come from the independent oracles
// below, never from the library under test.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ncderp/harness.hpp"
#include "ncderp/parallel.hpp"
#include "ncderp/render.hpp"

using namespace ncderp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;
int selected = 0;  // 0 runs every criterion

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    if (selected != 0 && id != selected) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0 || secs < limit_s;
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("[%s] criterion %d: %s | %s | %.1f s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
                secs, in_time ? "" : " (over time limit)");
    std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// ------------------------------------------------------------- oracles

using Edges = std::vector<std::pair<int, int>>;

std::vector<std::vector<int>> node_distances(std::size_t nodes, const Edges& edges) {
    std::vector<std::vector<int>> adj(nodes);
    for (auto [u, v] : edges) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    std::vector<std::vector<int>> d(nodes, std::vector<int>(nodes, -1));
    for (std::size_t s = 0; s < nodes; ++s) {
        std::queue<int> q;
        d[s][s] = 0;
        q.push(static_cast<int>(s));
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (d[s][static_cast<std::size_t>(v)] < 0) {
                    d[s][static_cast<std::size_t>(v)] = d[s][static_cast<std::size_t>(u)] + 1;
                    q.push(v);
                }
        }
    }
    return d;
}

double oracle_tree_score(const QuartetTree& t, const DistanceMatrix& m) {
    const std::size_t n = t.leaf_count();
    const auto d = node_distances(t.node_count(), t.edges());
    double cost = 0, best = 0, worst = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c)
                for (std::size_t e = c + 1; e < n; ++e) {
                    const double costs[3] = {m(a, b) + m(c, e), m(a, c) + m(b, e), m(a, e) + m(b, c)};
                    const int sums[3] = {d[a][b] + d[c][e], d[a][c] + d[b][e], d[a][e] + d[b][c]};
                    cost += costs[std::min_element(sums, sums + 3) - sums];
                    best += *std::min_element(costs, costs + 3);
                    worst += *std::max_element(costs, costs + 3);
                }
    return worst - best > 0 ? (worst - cost) / (worst - best) : 1.0;
}

std::vector<QuartetTree> all_trees(std::size_t n) {
    std::vector<QuartetTree> out;
    const int first = static_cast<int>(n);
    std::function<void(Edges, int)> grow = [&](Edges edges, int leaf) {
        if (leaf == static_cast<int>(n)) {
            out.push_back(QuartetTree::from_edges(n, edges));
            return;
        }
        const int inner = first + leaf - 2;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            Edges next = edges;
            const auto [u, v] = next[k];
            next[k] = {u, inner};
            next.push_back({inner, v});
            next.push_back({inner, leaf});
            grow(next, leaf + 1);
        }
    };
    grow({{0, first}, {1, first}, {2, first}}, 3);
    return out;
}

// Leaf-path topology signature: all pairwise leaf path lengths.
std::vector<int> leaf_signature(const QuartetTree& t) {
    const auto d = node_distances(t.node_count(), t.edges());
    std::vector<int> out;
    for (std::size_t i = 0; i < t.leaf_count(); ++i)
        for (std::size_t j = 0; j < t.leaf_count(); ++j) out.push_back(d[i][j]);
    return out;
}

double oracle_silhouette(const std::vector<std::vector<double>>& d, const std::vector<Label>& labels) {
    const std::size_t n = labels.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double same = 0, other = 0;
        int n_same = 0, n_other = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (labels[j] == labels[i]) {
                same += d[i][j];
                ++n_same;
            } else {
                other += d[i][j];
                ++n_other;
            }
        }
        if (n_same == 0 || n_other == 0) continue;
        const double a = same / n_same, b = other / n_other;
        if (std::max(a, b) > 0) total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

bool well_formed_svg(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    bool root = false;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        const std::size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        const std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty()) return false;
        if (tag.front() == '?') continue;
        if (tag.front() == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const std::string name = tag.substr(0, tag.find_first_of(" \n/"));
        root = root || name == "svg";
        if (tag.back() != '/') stack.push_back(name);
    }
    return root && stack.empty();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// ------------------------------------------------------------- data

Recording desk_recording(std::uint64_t seed, std::vector<double> gains, int characters = 24) {
    SynthesisConfig s;
    s.n_characters = characters;
    s.n_channels = static_cast<int>(gains.size());
    s.channel_gain = std::move(gains);
    s.snr = 1.0;
    s.rng_seed = seed;
    return synthesize(s);
}

DistanceMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i));
    auto m = make_matrix(ids, std::vector<Label>(n, Label::NonP300));
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = m.at(j, i) = u(rng);
    return m;
}

// Quantized slow random walk of 1-4 KiB: long runs of repeated symbols.
std::string low_entropy_object(std::mt19937_64& rng) {
    std::string out;
    const std::size_t len = 1024 + rng() % 3072;
    int level = 40;
    std::uniform_int_distribution<int> step(-1, 1);
    for (std::size_t i = 0; i < len; ++i) {
        if (rng() % 8 == 0) level = std::clamp(level + step(rng), 0, 63);
        out += static_cast<char>('!' + level);
    }
    return out;
}

// Encoded objects of 1-4 KiB with random M, C and one or two electrodes.
std::vector<AsciiObject> encoded_objects(std::mt19937_64& rng, std::size_t count) {
    const auto bank = prepare_segments({desk_recording(rng(), {1.0, 0.6})}, FilterSpec{});
    const std::size_t block = bank.segments[0].front().values.size() + 1;
    std::vector<AsciiObject> out;
    while (out.size() < count) {
        const int electrodes = 1 + static_cast<int>(rng() % 2);
        const int c_min = static_cast<int>((1024 + block * electrodes - 1) / (block * electrodes));
        const int c_max = std::min<int>(kGridMax, static_cast<int>(4096 / (block * electrodes)));
        const ObjectConfig oc{1 + static_cast<int>(rng() % 8), c_min + static_cast<int>(rng() % (c_max - c_min + 1)),
                              64, 3.0, rng()};
        const std::vector<std::vector<Segment>> per_electrode(bank.segments.begin(),
                                                               bank.segments.begin() + electrodes);
        for (auto& o : build_multi_electrode_objects(per_electrode, oc, 2)) out.push_back(std::move(o));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) selected = std::atoi(argv[1]);
    std::printf("acceptance suite, %d worker(s)\n", worker_count());

    criterion(1, "NCD range, symmetry and self-distance", 30, [] {
        std::mt19937_64 rng(2024);
        const auto objects = encoded_objects(rng, 60);
        std::size_t shortest = SIZE_MAX, longest = 0;
        for (const auto& o : objects) {
            shortest = std::min(shortest, o.bytes.size());
            longest = std::max(longest, o.bytes.size());
        }
        std::vector<std::string> low;
        for (int k = 0; k < 50; ++k) low.push_back(low_entropy_object(rng));
        double lo = 1e9, hi = -1e9, worst_self = 0.0, worst_asym = 0.0;
        for (const auto& name : compressor_names()) {
            const auto c = make_compressor(name);
            for (int k = 0; k < 200; ++k) {
                const std::size_t i = rng() % objects.size();
                const std::size_t j = (i + 1 + rng() % (objects.size() - 1)) % objects.size();
                const auto& x = objects[i].bytes;
                const auto& y = objects[j].bytes;
                const double xy = ncd(x, y, *c), yx = ncd(y, x, *c);
                lo = std::min({lo, xy, yx});
                hi = std::max({hi, xy, yx});
                worst_asym = std::max(worst_asym, std::abs(xy - yx));
            }
            for (const auto& x : low) worst_self = std::max(worst_self, ncd(x, x, *c));
        }
        return Outcome{lo >= 0.0 && hi <= 1.1 && worst_asym == 0.0 && worst_self < 0.15,
                       fmt("objects of %zu-%zu bytes; range [%.4f, %.4f], max asymmetry %.3g, "
                           "max low-entropy self-NCD %.4f",
                           shortest, longest, lo, hi, worst_asym, worst_self)};
    });

    criterion(2, "quartet tree search matches exhaustive enumeration", 60, [] {
        std::mt19937_64 rng(77);
        const auto trees = all_trees(5);
        int exact = 0;
        for (int k = 0; k < 50; ++k) {
            const auto m = random_matrix(5, rng);
            double best = 0.0;
            for (const auto& t : trees) best = std::max(best, oracle_tree_score(t, m));
            ClusterOptions opts;
            opts.seed = static_cast<std::uint64_t>(k);
            const auto r = cluster_tree(m, opts);
            if (std::abs(r.score.s - best) < 1e-12 && std::abs(oracle_tree_score(r.tree, m) - best) < 1e-12) ++exact;
        }
        int recovered = 0;
        const int additive = 20;
        for (int k = 0; k < additive; ++k) {
            const std::size_t n = 5 + static_cast<std::size_t>(k % 8);
            const auto truth = QuartetTree::random(n, rng);
            // Weighted path lengths of the true tree form an additive metric.
            std::uniform_real_distribution<double> w(0.1, 1.0);
            std::vector<std::vector<std::pair<int, double>>> adj(truth.node_count());
            for (auto [u, v] : truth.edges()) {
                const double x = w(rng);
                adj[static_cast<std::size_t>(u)].push_back({v, x});
                adj[static_cast<std::size_t>(v)].push_back({u, x});
            }
            std::vector<std::string> ids;
            for (std::size_t i = 0; i < n; ++i) ids.push_back("L" + std::to_string(i));
            auto m = make_matrix(ids, std::vector<Label>(n, Label::P300));
            for (std::size_t s = 0; s < n; ++s) {
                std::vector<double> dist(truth.node_count(), 0.0);
                std::function<void(int, int)> walk = [&](int u, int parent) {
                    for (auto [v, x] : adj[static_cast<std::size_t>(u)])
                        if (v != parent) {
                            dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + x;
                            walk(v, u);
                        }
                };
                walk(static_cast<int>(s), -1);
                for (std::size_t j = 0; j < n; ++j) m.at(s, j) = dist[j];
            }
            ClusterOptions opts;
            opts.seed = static_cast<std::uint64_t>(k);
            const auto r = cluster_tree(m, opts);
            if (r.score.s == 1.0 && leaf_signature(r.tree) == leaf_signature(truth)) ++recovered;
        }
        return Outcome{exact == 50 && recovered == additive,
                       fmt("%d/50 random n=5 matrices at the exhaustive optimum, %d/%d additive metrics recovered",
                           exact, recovered, additive)};
    });

    criterion(3, "silhouette variants match brute-force references", 0, [] {
        std::mt19937_64 rng(5);
        double worst_e = 0.0, worst_d = 0.0;
        for (int k = 0; k < 100; ++k) {
            const std::size_t n = 4 + rng() % 17;
            std::vector<Label> labels(n);
            for (std::size_t i = 0; i < n; ++i) labels[i] = i < n / 2 ? Label::P300 : Label::NonP300;
            std::shuffle(labels.begin(), labels.end(), rng);
            std::vector<std::string> ids;
            for (std::size_t i = 0; i < n; ++i) ids.push_back("o" + std::to_string(i));

            Projection2D p{ids, labels, {}};
            std::uniform_real_distribution<double> u(-1, 1);
            for (std::size_t i = 0; i < n; ++i) p.points.push_back({u(rng), u(rng)});
            std::vector<std::vector<double>> de(n, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    de[i][j] = std::hypot(p.points[i].x - p.points[j].x, p.points[i].y - p.points[j].y);
            worst_e = std::max(worst_e, std::abs(silhouette_euclidean(p).overall - oracle_silhouette(de, labels)));

            const auto t = QuartetTree::random(n, rng);
            const auto nd = node_distances(t.node_count(), t.edges());
            std::vector<std::vector<double>> dd(n, std::vector<double>(n, 0.0));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) dd[i][j] = nd[i][j] - 1.0;  // nodes strictly between the leaves
            worst_d = std::max(worst_d, std::abs(silhouette_dendrogram(t, ids, labels).overall - oracle_silhouette(dd, labels)));
        }
        return Outcome{worst_e < 1e-12 && worst_d < 1e-12,
                       fmt("max deviation euclidean %.3g, dendrogram %.3g over 100 instances", worst_e, worst_d)};
    });

    criterion(4, "inter-intra NCD gap grows from M=C=1 to M=C=8", 300, [] {
        int wins = 0;
        std::string diffs;
        const auto zlib = make_compressor("zlib");
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto bank = prepare_segments({desk_recording(seed, {1.0})}, FilterSpec{});
            auto gap = [&](int mc) {
                const ObjectConfig oc{mc, mc, 64, 3.0, derive_seed(seed, "gap", static_cast<std::uint64_t>(mc))};
                return group_distance_summary(distance_matrix(build_objects(bank.segments[0], oc, 10), *zlib)).diff;
            };
            const double d1 = gap(1), d8 = gap(8);
            wins += d8 > d1;
            if (seed <= 3) diffs += fmt(" seed %d: %.5f -> %.5f;", static_cast<int>(seed), d1, d8);
        }
        return Outcome{wins >= 18, fmt("%d/20 seeds;%s", wins, diffs.c_str())};
    });

    criterion(5, "median dendrogram silhouette higher at M=C=8 than M=C=1", 600, [] {
        int wins = 0;
        double sum1 = 0, sum8 = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto bank = prepare_segments({desk_recording(100 + seed, {1.0})}, FilterSpec{});
            ExperimentConfig cfg;
            cfg.seed = seed;
            cfg.repeats = 30;
            auto median_sc = [&](int mc) {
                std::vector<double> sc(30);
                for (std::size_t r = 0; r < sc.size(); ++r)
                    sc[r] = dendrogram_score(bank.segments, cfg, mc, mc,
                                             derive_seed(seed, "trend", static_cast<std::uint64_t>(mc), r));
                return quantile(sc, 0.5);
            };
            const double m1 = median_sc(1), m8 = median_sc(8);
            wins += m8 > m1;
            sum1 += m1;
            sum8 += m8;
        }
        return Outcome{wins >= 18, fmt("%d/20 seeds; mean median SC %.3f at M=C=1, %.3f at M=C=8", wins, sum1 / 20,
                                       sum8 / 20)};
    });

    criterion(6, "electrode ranking puts the strongest channels in the top subset", 900, [] {
        int hits = 0;
        double slowest = 0.0;
        std::vector<double> gains(16, 0.05);
        for (int c = 0; c < 3; ++c) gains[static_cast<std::size_t>(c)] = 1.0;
        for (int c = 3; c < 8; ++c) gains[static_cast<std::size_t>(c)] = 0.3;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto t0 = std::chrono::steady_clock::now();
            // Shuffle which montage channels carry which gain.
            std::vector<double> g = gains;
            std::mt19937_64 rng(derive_seed(seed, "gain-layout"));
            std::shuffle(g.begin(), g.end(), rng);
            const auto bank = prepare_segments({desk_recording(200 + seed, g)}, FilterSpec{});
            ExperimentConfig cfg;
            cfg.seed = seed;
            cfg.repeats = 20;
            const auto table = score_electrodes(bank, cfg);
            const auto top = rank_and_subset(table, 8).front();
            int strong_in_top = 0;
            for (std::size_t c = 0; c < g.size(); ++c)
                if (g[c] == 1.0 && std::find(top.begin(), top.end(), bank.electrodes[c].name) != top.end())
                    ++strong_in_top;
            hits += strong_in_top == 3;
            slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return Outcome{hits >= 18, fmt("%d/20 seeds; slowest single scoring run %.1f s", hits, slowest)};
    });

    criterion(7, "projection placement exactness and monotone refinement", 0, [] {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            // Any three planar points give a metric triple.
            const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
            const Point2 pts[3] = {a, b, c};
            auto m = make_matrix({"a", "b", "c"}, std::vector<Label>(3, Label::P300));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) m.at(i, j) = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            const auto p = place(m, static_cast<std::uint64_t>(k));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    worst = std::max(worst, std::abs(std::hypot(p.points[i].x - p.points[j].x,
                                                                p.points[i].y - p.points[j].y) - m(i, j)));
        }
        int monotone = 0;
        for (int k = 0; k < 20; ++k) {
            const auto m = random_matrix(10 + static_cast<std::size_t>(k), rng);
            ProjectionTrace trace;
            project(m, 50, static_cast<std::uint64_t>(k), &trace);
            bool ok = trace.stress_per_sweep.size() == 50 && trace.stress_per_sweep[0] <= trace.stress_after_placement;
            for (std::size_t s = 1; s < trace.stress_per_sweep.size(); ++s)
                ok = ok && trace.stress_per_sweep[s] <= trace.stress_per_sweep[s - 1];
            monotone += ok;
        }
        return Outcome{worst < 1e-9 && monotone == 20,
                       fmt("max triple error %.3g; %d/20 stress traces non-increasing", worst, monotone)};
    });

    criterion(8, "results byte-identical across worker counts", 0, [] {
        const fs::path root = fs::temp_directory_path() / "ncderp_acceptance_determinism";
        fs::remove_all(root);
        const auto rec = desk_recording(9, {1.0, 0.3, 0.05}, 12);
        ExperimentConfig cfg;
        cfg.seed = 11;
        cfg.repeats = 4;
        cfg.m_means = cfg.c_concats = 4;
        cfg.m_max = cfg.c_max = 4;
        cfg.objects_per_run = 10;
        std::vector<std::string> files;
        for (int workers : {1, 4}) {
            set_worker_count(workers);
            const fs::path dir = root / std::to_string(workers);
            const auto bank = prepare_segments({rec}, FilterSpec{});
            const auto table = score_electrodes(bank, cfg);
            write_result(table, dir);
            const auto subset = rank_and_subset(table, 2).front();
            write_result(grid_search(bank, cfg, subset), dir);
            write_result(run_pipeline(bank, cfg, subset), dir);
        }
        set_worker_count(0);
        int identical = 0, compared = 0;
        for (const auto& entry : fs::directory_iterator(root / "1")) {
            ++compared;
            identical += slurp(entry.path()) == slurp(root / "4" / entry.path().filename());
        }
        fs::remove_all(root);
        return Outcome{compared >= 7 && identical == compared,
                       fmt("%d/%d result files identical with 1 and 4 workers", identical, compared)};
    });

    criterion(9, "rendered dendrogram and projection for a 20-object run", 120, [] {
        const fs::path dir = fs::temp_directory_path() / "ncderp_acceptance_render";
        fs::remove_all(dir);
        const auto bank = prepare_segments({desk_recording(3, {1.0})}, FilterSpec{});
        ExperimentConfig cfg;
        cfg.seed = 3;
        const auto run = run_pipeline(bank, cfg, {bank.electrodes[0].name});
        const auto files = render(write_result(run, dir));
        int valid = 0, svgs = 0;
        for (const auto& f : files)
            if (f.extension() == ".svg") {
                ++svgs;
                valid += well_formed_svg(slurp(f));
            }
        fs::remove_all(dir);
        return Outcome{run.matrix.size() == 20 && svgs == 2 && valid == 2,
                       fmt("%d/%d SVG files well formed; S(T) %.3f, SC tree %.3f, SC projection %.3f", valid, svgs,
                           run.tree.score.s, run.tree_silhouette.overall, run.projection_silhouette.overall)};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
