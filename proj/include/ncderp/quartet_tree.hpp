#pragma once

// Minimum quartet tree clustering: unrooted ternary trees over the objects
// of a distance matrix, scored by the quartet topologies they induce, and a
// randomized hill climber searching for the best-scoring tree.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncderp/ncd.hpp"

namespace ncderp {

/// Unrooted tree with n leaves (nodes 0..n-1, leaf i bound to matrix row i)
/// and n-2 internal nodes (n..2n-3) of degree exactly 3.
class QuartetTree {
public:
    QuartetTree() = default;

    /// Builds from an edge list; throws Error unless the result is a valid
    /// ternary tree.
    static QuartetTree from_edges(std::size_t n_leaves, const std::vector<std::pair<int, int>>& edges);

    /// Uniformly random leaf insertion order and attachment edges.
    static QuartetTree random(std::size_t n_leaves, std::mt19937_64& rng);

    std::size_t leaf_count() const { return n_leaves_; }
    std::size_t node_count() const { return degree_.size(); }
    bool is_leaf(int node) const { return node < static_cast<int>(n_leaves_); }
    std::span<const int> neighbors(int node) const { return {adj_[node].data(), degree_[node]}; }
    std::vector<std::pair<int, int>> edges() const;

    /// Throws Error describing the first violated structural invariant.
    void validate() const;
    bool is_valid() const;

    /// Edge counts of the leaf-to-leaf paths, row-major n*n.
    std::vector<int> leaf_path_lengths() const;

    /// True when the tree separates {a,b} from {c,d} (paths a-b and c-d
    /// are node-disjoint).
    bool realizes(int a, int b, int c, int d) const;

    // Mutations. Each returns false and leaves the tree untouched when the
    // random draw is degenerate (e.g. swapping siblings).
    bool mutate_leaf_swap(std::mt19937_64& rng);
    bool mutate_subtree_swap(std::mt19937_64& rng);
    bool mutate_subtree_transfer(std::mt19937_64& rng);

    /// Newick serialization rooted at the first internal node.
    std::string to_newick(const std::vector<std::string>& leaf_names) const;

    /// Parses Newick (branch lengths and internal labels ignored). A binary
    /// root is suppressed. `leaf_names` receives the labels in leaf order.
    static QuartetTree parse_newick(const std::string& text, std::vector<std::string>& leaf_names);

    bool operator==(const QuartetTree&) const = default;

private:
    void add_edge(int u, int v);
    void replace_neighbor(int node, int old_nbr, int new_nbr);
    void remove_neighbor(int node, int nbr);
    std::vector<char> subtree_mask(int x, int px) const;

    std::size_t n_leaves_ = 0;
    std::vector<std::array<int, 3>> adj_;
    std::vector<std::uint8_t> degree_;
};

struct TreeScore {
    double s = 0.0;      // normalized benefit in [0, 1]
    double cost = 0.0;   // summed cost of the realized quartet topologies
    double best = 0.0;   // sum of per-quartet minimal topology costs
    double worst = 0.0;  // sum of per-quartet maximal topology costs
};

/// Per-quartet topology costs of a matrix, computed once and reused for
/// every tree scored against that matrix.
class QuartetCostTable {
public:
    explicit QuartetCostTable(const DistanceMatrix& m);

    std::size_t leaf_count() const { return n_; }
    TreeScore score(const QuartetTree& tree) const;

private:
    std::size_t n_ = 0;
    std::vector<double> costs_;  // per quartet a < b < c < d: ab|cd, ac|bd, ad|bc
    double best_ = 0.0;
    double worst_ = 0.0;
};

/// Scores `tree` against `m`; throws when leaf count and matrix size differ
/// or n < 4.
TreeScore quartet_cost(const QuartetTree& tree, const DistanceMatrix& m);

struct ClusterOptions {
    std::size_t max_rejections = 2000;   // consecutive rejected proposals
    std::size_t max_proposals = 200000;  // hard cap per restart
    int restarts = 1;
    std::uint64_t seed = 0;
};

struct ClusterResult {
    QuartetTree tree;
    TreeScore score;
    std::size_t proposals = 0;          // summed over restarts
    int restarts = 0;
    int best_restart = 0;
    std::vector<double> accepted_scores;  // S(T) trace of the winning restart
};

/// Randomized hill climbing from a random tree: each proposal applies a
/// short random chain of mutations (leaf swap, subtree swap, subtree
/// transfer, chosen uniformly) and is accepted iff S(T) strictly improves.
/// Restart r uses seed derive_seed(seed, "mqtc-restart", r); restarts run
/// in parallel and the best score wins, ties to the lowest restart index.
/// n == 4 is solved exactly by evaluating all three topologies.
ClusterResult cluster_tree(const DistanceMatrix& m, const ClusterOptions& opts = {});

}  // namespace ncderp
