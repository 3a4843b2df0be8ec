#include "ncderp/quartet_tree.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>

#include "ncderp/error.hpp"

namespace ncderp {

void QuartetTree::add_edge(int u, int v) {
    if (degree_[u] >= 3 || degree_[v] >= 3) throw Error("tree node degree exceeds 3");
    adj_[u][degree_[u]++] = v;
    adj_[v][degree_[v]++] = u;
}

void QuartetTree::replace_neighbor(int node, int old_nbr, int new_nbr) {
    for (int k = 0; k < degree_[node]; ++k)
        if (adj_[node][k] == old_nbr) {
            adj_[node][k] = new_nbr;
            return;
        }
    throw Error("tree edge not found");
}

void QuartetTree::remove_neighbor(int node, int nbr) {
    for (int k = 0; k < degree_[node]; ++k)
        if (adj_[node][k] == nbr) {
            for (int j = k; j + 1 < degree_[node]; ++j) adj_[node][j] = adj_[node][j + 1];
            --degree_[node];
            return;
        }
    throw Error("tree edge not found");
}

QuartetTree QuartetTree::from_edges(std::size_t n_leaves, const std::vector<std::pair<int, int>>& edges) {
    if (n_leaves < 3) throw Error("a quartet tree needs at least 3 leaves");
    QuartetTree t;
    t.n_leaves_ = n_leaves;
    const std::size_t nodes = 2 * n_leaves - 2;
    t.adj_.assign(nodes, {-1, -1, -1});
    t.degree_.assign(nodes, 0);
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= nodes || static_cast<std::size_t>(v) >= nodes || u == v)
            throw Error("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
        t.add_edge(u, v);
    }
    t.validate();
    return t;
}

QuartetTree QuartetTree::random(std::size_t n_leaves, std::mt19937_64& rng) {
    if (n_leaves < 3) throw Error("a quartet tree needs at least 3 leaves");
    QuartetTree t;
    t.n_leaves_ = n_leaves;
    const std::size_t nodes = 2 * n_leaves - 2;
    t.adj_.assign(nodes, {-1, -1, -1});
    t.degree_.assign(nodes, 0);

    std::vector<int> order(n_leaves);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    int next_internal = static_cast<int>(n_leaves);
    std::vector<std::pair<int, int>> edges;
    const int hub = next_internal++;
    for (int k = 0; k < 3; ++k) {
        t.add_edge(order[k], hub);
        edges.emplace_back(order[k], hub);
    }
    for (std::size_t k = 3; k < n_leaves; ++k) {
        const std::size_t e = std::uniform_int_distribution<std::size_t>(0, edges.size() - 1)(rng);
        const auto [u, v] = edges[e];
        const int w = next_internal++;
        t.replace_neighbor(u, v, w);
        t.replace_neighbor(v, u, w);
        t.adj_[w] = {u, v, order[k]};
        t.degree_[w] = 3;
        t.adj_[order[k]][0] = w;
        t.degree_[order[k]] = 1;
        edges[e] = {u, w};
        edges.emplace_back(w, v);
        edges.emplace_back(w, order[k]);
    }
    return t;
}

std::vector<std::pair<int, int>> QuartetTree::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < static_cast<int>(node_count()); ++u)
        for (int v : neighbors(u))
            if (u < v) out.emplace_back(u, v);
    return out;
}

void QuartetTree::validate() const {
    const std::size_t nodes = node_count();
    if (n_leaves_ < 3 || nodes != 2 * n_leaves_ - 2) throw Error("tree has the wrong node count");
    std::size_t degree_sum = 0;
    for (int u = 0; u < static_cast<int>(nodes); ++u) {
        const int want = is_leaf(u) ? 1 : 3;
        if (degree_[u] != want)
            throw Error("node " + std::to_string(u) + " has degree " + std::to_string(degree_[u]) + ", expected " +
                        std::to_string(want));
        for (int v : neighbors(u)) {
            if (v < 0 || static_cast<std::size_t>(v) >= nodes || v == u) throw Error("bad neighbor entry");
            const auto back = neighbors(v);
            if (std::count(back.begin(), back.end(), u) != 1) throw Error("adjacency is not symmetric");
        }
        degree_sum += degree_[u];
    }
    if (degree_sum / 2 != nodes - 1) throw Error("edge count is not nodes - 1");
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t visited = 0;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        ++visited;
        for (int v : neighbors(u))
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
    }
    if (visited != nodes) throw Error("tree is not connected");
}

bool QuartetTree::is_valid() const {
    try {
        validate();
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::vector<int> QuartetTree::leaf_path_lengths() const {
    const std::size_t n = n_leaves_;
    std::vector<int> out(n * n, 0);
    if (n < 2) return out;
    // One DFS from leaf 0. Leaves of a subtree are contiguous in visit order,
    // so every pair is written once at its lowest common ancestor.
    std::vector<int> order;  // leaves in visit order
    std::vector<int> depth(node_count(), 0);
    order.reserve(n);
    const auto visit = [&](const auto& self, int u, int from) -> void {
        if (is_leaf(u)) {
            order.push_back(u);
            if (from >= 0) return;
        }
        const std::size_t start = order.size() - (from < 0 ? 1 : 0);
        for (int k = 0; k < degree_[u]; ++k) {
            const int v = adj_[u][k];
            if (v == from) continue;
            depth[v] = depth[u] + 1;
            const std::size_t mid = order.size();
            self(self, v, u);
            for (std::size_t i = start; i < mid; ++i)
                for (std::size_t j = mid; j < order.size(); ++j) {
                    const int a = order[i], b = order[j];
                    const int d = depth[a] + depth[b] - 2 * depth[u];
                    out[static_cast<std::size_t>(a) * n + b] = d;
                    out[static_cast<std::size_t>(b) * n + a] = d;
                }
        }
    };
    visit(visit, 0, -1);
    return out;
}

bool QuartetTree::realizes(int a, int b, int c, int d) const {
    const auto path = [&](int from, int to) {
        std::vector<int> parent(node_count(), -2);
        std::vector<int> stack{from};
        parent[from] = -1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : neighbors(u))
                if (parent[v] == -2) {
                    parent[v] = u;
                    stack.push_back(v);
                }
        }
        std::vector<char> on(node_count(), 0);
        for (int u = to; u != -1; u = parent[u]) on[u] = 1;
        return on;
    };
    const auto p1 = path(a, b);
    const auto p2 = path(c, d);
    for (std::size_t u = 0; u < node_count(); ++u)
        if (p1[u] && p2[u]) return false;
    return true;
}

std::vector<char> QuartetTree::subtree_mask(int x, int px) const {
    std::vector<char> mask(node_count(), 0);
    std::vector<std::pair<int, int>> stack{{x, px}};
    while (!stack.empty()) {
        const auto [u, from] = stack.back();
        stack.pop_back();
        mask[u] = 1;
        for (int v : neighbors(u))
            if (v != from) stack.emplace_back(v, u);
    }
    return mask;
}

bool QuartetTree::mutate_leaf_swap(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n_leaves_) - 1);
    const int a = pick(rng);
    const int b = pick(rng);
    if (a == b) return false;
    const int u = adj_[a][0];
    const int v = adj_[b][0];
    if (u == v) return false;
    adj_[a][0] = v;
    adj_[b][0] = u;
    replace_neighbor(u, a, b);
    replace_neighbor(v, b, a);
    return true;
}

bool QuartetTree::mutate_subtree_swap(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_node(0, static_cast<int>(node_count()) - 1);
    auto pick_edge = [&](int& x, int& px) {
        x = pick_node(rng);
        px = adj_[x][std::uniform_int_distribution<int>(0, degree_[x] - 1)(rng)];
    };
    for (int attempt = 0; attempt < 64; ++attempt) {
        int x, px, y, py;
        pick_edge(x, px);
        pick_edge(y, py);
        if (x == y || px == py || px == y || py == x) continue;
        const auto sx = subtree_mask(x, px);
        if (sx[y] || sx[py]) continue;
        const auto sy = subtree_mask(y, py);
        if (sy[x] || sy[px]) continue;
        replace_neighbor(x, px, py);
        replace_neighbor(px, x, y);
        replace_neighbor(y, py, px);
        replace_neighbor(py, y, x);
        return true;
    }
    return false;
}

bool QuartetTree::mutate_subtree_transfer(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_node(0, static_cast<int>(node_count()) - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const int x = pick_node(rng);
        const int px = adj_[x][std::uniform_int_distribution<int>(0, degree_[x] - 1)(rng)];
        if (is_leaf(px)) continue;
        int a = -1, b = -1;
        for (int v : neighbors(px))
            if (v != x) (a < 0 ? a : b) = v;
        const auto sx = subtree_mask(x, px);

        // Edges of the tree that remains once the subtree and px are removed
        // and a-b is joined.
        std::vector<std::pair<int, int>> targets;
        for (const auto& [u, v] : edges()) {
            if (sx[u] || sx[v] || u == px || v == px) continue;
            targets.emplace_back(u, v);
        }
        if (targets.empty()) continue;
        // Choose uniformly among targets plus the joined edge a-b (a no-op).
        const std::size_t choice = std::uniform_int_distribution<std::size_t>(0, targets.size())(rng);
        if (choice == targets.size()) return false;
        const auto [tu, tv] = targets[choice];
        replace_neighbor(a, px, b);
        replace_neighbor(b, px, a);
        replace_neighbor(tu, tv, px);
        replace_neighbor(tv, tu, px);
        adj_[px] = {x, tu, tv};
        degree_[px] = 3;
        return true;
    }
    return false;
}

namespace {

bool needs_quotes(const std::string& s) {
    return s.empty() || s.find_first_of(" ()[]':;,\t\n") != std::string::npos;
}

std::string newick_label(const std::string& s) {
    if (!needs_quotes(s)) return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

}  // namespace

std::string QuartetTree::to_newick(const std::vector<std::string>& leaf_names) const {
    if (leaf_names.size() != n_leaves_) throw Error("leaf name count does not match tree");
    std::string out;
    std::function<void(int, int)> emit = [&](int u, int from) {
        if (is_leaf(u)) {
            out += newick_label(leaf_names[u]);
            return;
        }
        out += '(';
        bool first = true;
        for (int v : neighbors(u)) {
            if (v == from) continue;
            if (!first) out += ',';
            first = false;
            emit(v, u);
        }
        out += ')';
    };
    emit(static_cast<int>(n_leaves_), -1);
    return out + ";";
}

QuartetTree QuartetTree::parse_newick(const std::string& text, std::vector<std::string>& leaf_names) {
    // Rooted parse into a generic node list, then unroot and renumber.
    struct Node {
        int parent = -1;
        std::vector<int> children;
        std::string label;
    };
    std::vector<Node> nodes;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto fail = [&](const std::string& what) -> void {
        throw FormatError("newick offset " + std::to_string(pos), what);
    };
    auto read_label = [&]() {
        skip_ws();
        std::string label;
        if (pos < text.size() && text[pos] == '\'') {
            ++pos;
            for (;;) {
                if (pos >= text.size()) fail("unterminated quoted label");
                if (text[pos] == '\'') {
                    if (pos + 1 < text.size() && text[pos + 1] == '\'') {
                        label += '\'';
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    break;
                }
                label += text[pos++];
            }
        } else {
            while (pos < text.size() && std::string_view("():;,").find(text[pos]) == std::string_view::npos &&
                   !std::isspace(static_cast<unsigned char>(text[pos])))
                label += text[pos++];
        }
        skip_ws();
        if (pos < text.size() && text[pos] == ':') {
            ++pos;
            skip_ws();
            while (pos < text.size() && std::string_view("(),;").find(text[pos]) == std::string_view::npos &&
                   !std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
            skip_ws();
        }
        return label;
    };
    std::function<int(int)> parse_node = [&](int parent) -> int {
        skip_ws();
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({parent, {}, {}});
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            for (;;) {
                const int child = parse_node(id);
                nodes[id].children.push_back(child);
                skip_ws();
                if (pos >= text.size()) fail("unexpected end of input");
                if (text[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (text[pos] == ')') {
                    ++pos;
                    break;
                }
                fail("expected ',' or ')'");
            }
            read_label();  // internal labels are ignored
        } else {
            nodes[id].label = read_label();
            if (nodes[id].label.empty()) fail("leaf without a label");
        }
        return id;
    };
    parse_node(-1);
    skip_ws();
    if (pos >= text.size() || text[pos] != ';') fail("expected ';'");

    // Undirected adjacency over parsed nodes.
    std::vector<std::vector<int>> g(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int c : nodes[i].children) {
            g[i].push_back(c);
            g[c].push_back(static_cast<int>(i));
        }
    // Suppress degree-2 nodes (a binary root, or unary chains).
    std::vector<char> removed(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].children.empty() && g[i].size() == 2) {
            const int a = g[i][0], b = g[i][1];
            std::replace(g[a].begin(), g[a].end(), static_cast<int>(i), b);
            std::replace(g[b].begin(), g[b].end(), static_cast<int>(i), a);
            g[i].clear();
            removed[i] = 1;
        }
    }
    std::vector<int> renumber(nodes.size(), -1);
    leaf_names.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].children.empty()) {
            renumber[i] = static_cast<int>(leaf_names.size());
            leaf_names.push_back(nodes[i].label);
        }
    int next = static_cast<int>(leaf_names.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!nodes[i].children.empty() && !removed[i]) renumber[i] = next++;
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int j : g[i])
            if (static_cast<int>(i) < j) edges.emplace_back(renumber[i], renumber[j]);
    if (leaf_names.size() < 3) throw FormatError("newick", "tree needs at least 3 leaves");
    if (static_cast<std::size_t>(next) != 2 * leaf_names.size() - 2)
        throw FormatError("newick", "tree is not ternary (every internal node needs degree 3)");
    return from_edges(leaf_names.size(), edges);
}

}  // namespace ncderp
