#include <algorithm>
#include <limits>

#include "ncderp/error.hpp"
#include "ncderp/parallel.hpp"
#include "ncderp/quartet_tree.hpp"

namespace ncderp {

QuartetCostTable::QuartetCostTable(const DistanceMatrix& m) : n_(m.size()) {
    if (n_ < 4) throw Error("quartet scoring needs at least 4 objects");
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = a + 1; b < n_; ++b)
            for (std::size_t c = b + 1; c < n_; ++c)
                for (std::size_t d = c + 1; d < n_; ++d) {
                    const double ab = m(a, b) + m(c, d), ac = m(a, c) + m(b, d), ad = m(a, d) + m(b, c);
                    best_ += std::min({ab, ac, ad});
                    worst_ += std::max({ab, ac, ad});
                    costs_.insert(costs_.end(), {ab, ac, ad});
                }
}

TreeScore QuartetCostTable::score(const QuartetTree& tree) const {
    if (tree.leaf_count() != n_) throw Error("tree leaves do not match the distance matrix");
    const auto dist = tree.leaf_path_lengths();
    const std::size_t n = n_;
    TreeScore s;
    s.best = best_;
    s.worst = worst_;
    // Quartets in lexicographic order, matching the cost layout. In a
    // ternary tree the induced pairing has the strictly shortest path sum
    // and the other two sums are equal.
    const double* cost = costs_.data();
    for (std::size_t a = 0; a < n; ++a) {
        const int* ra = &dist[a * n];
        for (std::size_t b = a + 1; b < n; ++b) {
            const int* rb = &dist[b * n];
            const int dab = ra[b];
            for (std::size_t c = b + 1; c < n; ++c) {
                const int* rc = &dist[c * n];
                const int dac = ra[c];
                for (std::size_t d = c + 1; d < n; ++d, cost += 3) {
                    const int ab = dab + rc[d];
                    const int ac = dac + rb[d];
                    const int k = ab == ac ? 2 : static_cast<int>(ab > ac);
                    s.cost += cost[k];
                }
            }
        }
    }
    const double span = worst_ - best_;
    s.s = span > 0.0 ? (worst_ - s.cost) / span : 1.0;
    s.s = std::clamp(s.s, 0.0, 1.0);
    return s;
}

TreeScore quartet_cost(const QuartetTree& tree, const DistanceMatrix& m) {
    if (tree.leaf_count() != m.size()) throw Error("tree leaves do not match the distance matrix ids");
    return QuartetCostTable(m).score(tree);
}

namespace {

struct RestartOutcome {
    QuartetTree tree;
    TreeScore score;
    std::size_t proposals = 0;
    std::vector<double> trace;
};

QuartetTree four_leaf_topology(int pairing) {
    // Leaves 0..3, internal nodes 4 and 5; pairing 0: 01|23, 1: 02|13, 2: 03|12.
    static constexpr int other[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    const auto* p = other[pairing];
    return QuartetTree::from_edges(4, {{p[0], 4}, {p[1], 4}, {4, 5}, {p[2], 5}, {p[3], 5}});
}

RestartOutcome hill_climb(const QuartetCostTable& table, const ClusterOptions& opts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RestartOutcome out;
    out.tree = QuartetTree::random(table.leaf_count(), rng);
    out.score = table.score(out.tree);
    out.trace.push_back(out.score.s);

    std::uniform_int_distribution<int> kind(0, 2);
    std::bernoulli_distribution another(0.5);
    std::size_t rejections = 0;
    while (rejections < opts.max_rejections && out.proposals < opts.max_proposals && out.score.s < 1.0) {
        ++out.proposals;
        QuartetTree candidate = out.tree;
        // A chain of k >= 1 mutations with P(k) = 2^-k, so every tree is
        // reachable from every other in a single proposal.
        bool changed = false;
        do {
            switch (kind(rng)) {
                case 0: changed |= candidate.mutate_leaf_swap(rng); break;
                case 1: changed |= candidate.mutate_subtree_swap(rng); break;
                default: changed |= candidate.mutate_subtree_transfer(rng); break;
            }
        } while (another(rng));
        if (changed) {
            const TreeScore s = table.score(candidate);
            if (s.s > out.score.s) {
                out.tree = std::move(candidate);
                out.score = s;
                out.trace.push_back(s.s);
                rejections = 0;
                continue;
            }
        }
        ++rejections;
    }
    return out;
}

}  // namespace

ClusterResult cluster_tree(const DistanceMatrix& m, const ClusterOptions& opts) {
    if (m.size() < 4) throw Error("tree clustering needs at least 4 objects");
    if (opts.restarts < 1) throw Error("restarts must be >= 1");
    if (opts.max_rejections < 1) throw Error("search budget must be >= 1");
    const QuartetCostTable table(m);

    ClusterResult result;
    result.restarts = opts.restarts;
    if (m.size() == 4) {
        for (int pairing = 0; pairing < 3; ++pairing) {
            QuartetTree t = four_leaf_topology(pairing);
            const TreeScore s = table.score(t);
            ++result.proposals;
            if (pairing == 0 || s.s > result.score.s) {
                result.tree = std::move(t);
                result.score = s;
            }
        }
        result.accepted_scores = {result.score.s};
        return result;
    }

    std::vector<RestartOutcome> outcomes(opts.restarts);
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 1)
    for (int r = 0; r < opts.restarts; ++r)
        outcomes[r] = hill_climb(table, opts, derive_seed(opts.seed, "mqtc-restart", static_cast<std::uint64_t>(r)));

    int best = 0;
    for (int r = 0; r < opts.restarts; ++r) {
        result.proposals += outcomes[r].proposals;
        if (outcomes[r].score.s > outcomes[best].score.s) best = r;
    }
    result.best_restart = best;
    result.tree = std::move(outcomes[best].tree);
    result.score = outcomes[best].score;
    result.accepted_scores = std::move(outcomes[best].trace);
    return result;
}

}  // namespace ncderp
