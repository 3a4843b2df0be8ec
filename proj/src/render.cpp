#include "ncderp/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "ncderp/error.hpp"

namespace ncderp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf) == "-0.00" ? "0.00" : buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

class Svg {
public:
    Svg(double w, double h) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\">\n"
             << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"white\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none",
              double width = 1.0) {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    void circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke = "black") {
        out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\"" << fill
             << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, double size = 11, const std::string& anchor = "middle") {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
             << "\" text-anchor=\"" << anchor << "\">" << esc(s) << "</text>\n";
    }
    void raw(const std::string& s) { out_ << s << '\n'; }
    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

// Blue-white-red ramp over t in [0, 1].
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    static constexpr std::array<std::array<double, 3>, 3> stops{{{49, 54, 149}, {247, 247, 247}, {165, 0, 38}}};
    const double pos = t * 2.0;
    const auto k = std::min<std::size_t>(1, static_cast<std::size_t>(pos));
    const double f = pos - static_cast<double>(k);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[k][0] + f * (stops[k + 1][0] - stops[k][0]))),
                  static_cast<int>(std::lround(stops[k][1] + f * (stops[k + 1][1] - stops[k][1]))),
                  static_cast<int>(std::lround(stops[k][2] + f * (stops[k + 1][2] - stops[k][2]))));
    return buf;
}

std::string label_color(Label l) { return l == Label::P300 ? "#d62728" : "#1f77b4"; }

void legend(Svg& svg, double x, double y) {
    svg.circle(x, y, 5, label_color(Label::P300));
    svg.text(x + 10, y + 4, "P300", 11, "start");
    svg.circle(x + 60, y, 5, label_color(Label::NonP300));
    svg.text(x + 70, y + 4, "NonP300", 11, "start");
}

void colorbar(Svg& svg, double x, double y, double h, double lo, double hi) {
    const int steps = 20;
    for (int i = 0; i < steps; ++i) {
        const double t = 1.0 - (i + 0.5) / steps;
        svg.rect(x, y + h * i / steps, 14, h / steps + 0.5, ramp(t));
    }
    svg.rect(x, y, 14, h, "none", "black");
    svg.text(x + 18, y + 4, num(hi), 10, "start");
    svg.text(x + 18, y + h, num(lo), 10, "start");
}

}  // namespace

std::string render_boxplot_svg(const ElectrodeScoreTable& t) {
    if (t.electrodes.empty()) throw Error("empty electrode table: nothing to render");
    const double left = 50, top = 40, plot_h = 300, slot = 22;
    const double w = left + slot * static_cast<double>(t.electrodes.size()) + 30, h = top + plot_h + 70;
    double lo = 0.0, hi = 0.0;
    for (const auto& e : t.electrodes)
        for (double v : e.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    auto ymap = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    Svg svg(w, h);
    svg.text(w / 2, 20, "Dendrogram silhouette per electrode (M=" + std::to_string(t.m_means) +
                            ", C=" + std::to_string(t.c_concats) + ", " + std::to_string(t.repeats) + " repeats)",
             13);
    svg.line(left, top, left, top + plot_h, "black");
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        svg.line(left - 4, ymap(v), left, ymap(v), "black");
        svg.text(left - 6, ymap(v) + 4, num(v), 10, "end");
    }
    if (lo < 0.0) svg.line(left, ymap(0.0), w - 20, ymap(0.0), "#bbbbbb");
    for (std::size_t i = 0; i < t.electrodes.size(); ++i) {
        const auto& e = t.electrodes[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const auto [mn, mx] = std::minmax_element(e.values.begin(), e.values.end());
        svg.line(cx, ymap(*mn), cx, ymap(e.q1), "black");
        svg.line(cx, ymap(e.q3), cx, ymap(*mx), "black");
        svg.rect(cx - 7, ymap(e.q3), 14, std::max(0.5, ymap(e.q1) - ymap(e.q3)), "#9ecae1", "black");
        svg.line(cx - 7, ymap(e.median), cx + 7, ymap(e.median), "#d62728", 2);
        svg.raw("<text x=\"" + num(cx + 3) + "\" y=\"" + num(top + plot_h + 10) +
                "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-90 " + num(cx + 3) + ' ' +
                num(top + plot_h + 10) + ")\">" + esc(e.name) + "</text>");
    }
    return svg.finish();
}

std::string render_scalp_svg(const ElectrodeScoreTable& t, const std::vector<ElectrodePosition>& montage) {
    if (t.electrodes.empty()) throw Error("empty electrode table: nothing to render");
    std::vector<ElectrodePosition> pos;
    for (const auto& e : t.electrodes) pos.push_back(find_electrode(montage, e.name));
    double lo = t.electrodes.front().median, hi = lo;
    for (const auto& e : t.electrodes) {
        lo = std::min(lo, e.median);
        hi = std::max(hi, e.median);
    }
    const double span = hi - lo > 1e-12 ? hi - lo : 1.0;
    const double cx = 220, cy = 230, r = 170;

    Svg svg(500, 440);
    svg.text(220, 24, "Median dendrogram silhouette", 13);
    svg.raw("<polygon points=\"" + num(cx - 18) + ',' + num(cy - r + 2) + ' ' + num(cx) + ',' + num(cy - r - 22) +
            ' ' + num(cx + 18) + ',' + num(cy - r + 2) + "\" fill=\"white\" stroke=\"black\"/>");
    svg.raw("<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
            "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>");
    for (std::size_t i = 0; i < t.electrodes.size(); ++i) {
        const double x = cx + pos[i].x * r * 0.92, y = cy - pos[i].y * r * 0.92;
        svg.circle(x, y, 11, ramp((t.electrodes[i].median - lo) / span));
        svg.text(x, y + 3, t.electrodes[i].name, 7);
    }
    colorbar(svg, 440, 80, 300, lo, hi);
    return svg.finish();
}

std::string render_heatmap_svg(const GridResult& g) {
    if (std::none_of(g.medians.begin(), g.medians.end(), [](const auto& v) { return v.has_value(); }))
        throw Error("grid has no feasible cell: nothing to render");
    const double cell = 28, left = 50, top = 50;
    const double w = left + cell * static_cast<double>(g.c_values.size()) + 80;
    const double h = top + cell * static_cast<double>(g.m_values.size()) + 50;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& v : g.medians)
        if (v) {
            lo = first ? *v : std::min(lo, *v);
            hi = first ? *v : std::max(hi, *v);
            first = false;
        }
    const double span = hi - lo > 1e-12 ? hi - lo : 1.0;

    Svg svg(w, h);
    svg.text(w / 2, 20, "Median silhouette by M (rows) and C (columns), subset " + std::to_string(g.subset), 13);
    for (std::size_t ci = 0; ci < g.c_values.size(); ++ci)
        svg.text(left + cell * (static_cast<double>(ci) + 0.5), top - 6, std::to_string(g.c_values[ci]), 10);
    for (std::size_t mi = 0; mi < g.m_values.size(); ++mi) {
        const double y = top + cell * static_cast<double>(mi);
        svg.text(left - 6, y + cell / 2 + 4, std::to_string(g.m_values[mi]), 10, "end");
        for (std::size_t ci = 0; ci < g.c_values.size(); ++ci) {
            const auto& v = g.medians[mi * g.c_values.size() + ci];
            const double x = left + cell * static_cast<double>(ci);
            svg.rect(x, y, cell, cell, v ? ramp((*v - lo) / span) : "white", "#dddddd", 0.5);
        }
    }
    const auto bm = std::find(g.m_values.begin(), g.m_values.end(), g.best_m) - g.m_values.begin();
    const auto bc = std::find(g.c_values.begin(), g.c_values.end(), g.best_c) - g.c_values.begin();
    svg.rect(left + cell * static_cast<double>(bc), top + cell * static_cast<double>(bm), cell, cell, "none", "black",
             3);
    svg.text(left + cell * static_cast<double>(g.c_values.size()) / 2, h - 14, "C", 12);
    svg.text(16, top + cell * static_cast<double>(g.m_values.size()) / 2, "M", 12);
    colorbar(svg, left + cell * static_cast<double>(g.c_values.size()) + 16, top, cell * 6, lo, hi);
    return svg.finish();
}

std::string render_dendrogram_svg(const QuartetTree& tree, const std::vector<std::string>& names,
                                  const std::vector<Label>& labels, const std::string& title) {
    const std::size_t n = tree.leaf_count();
    if (n < 2 || names.size() != n || labels.size() != n) throw Error("dendrogram needs named, labeled leaves");
    const int root = static_cast<int>(n);  // first internal node
    std::vector<int> leaves_below(tree.node_count(), 0);
    std::function<int(int, int)> count = [&](int v, int parent) {
        int c = tree.is_leaf(v) ? 1 : 0;
        for (int w : tree.neighbors(v))
            if (w != parent) c += count(w, v);
        return leaves_below[static_cast<std::size_t>(v)] = c;
    };
    count(root, -1);

    std::vector<Point2> pos(tree.node_count());
    std::function<void(int, int, double, double)> layout = [&](int v, int parent, double a0, double a1) {
        double a = a0;
        for (int w : tree.neighbors(v)) {
            if (w == parent) continue;
            const double share = (a1 - a0) * leaves_below[static_cast<std::size_t>(w)] /
                                 std::max(1, leaves_below[static_cast<std::size_t>(v)] - (tree.is_leaf(v) ? 1 : 0));
            const double mid = a + share / 2;
            pos[static_cast<std::size_t>(w)] = {pos[static_cast<std::size_t>(v)].x + std::cos(mid),
                                                pos[static_cast<std::size_t>(v)].y + std::sin(mid)};
            layout(w, v, a, a + share);
            a += share;
        }
    };
    layout(root, -1, 0.0, 2.0 * std::numbers::pi);

    double minx = 0, maxx = 0, miny = 0, maxy = 0;
    for (const auto& p : pos) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double size = 560, margin = 50;
    const double scale = (size - 2 * margin) / std::max({maxx - minx, maxy - miny, 1e-9});
    auto sx = [&](double x) { return margin + (x - minx) * scale; };
    auto sy = [&](double y) { return margin + 20 + (maxy - y) * scale; };

    Svg svg(size, size + 40);
    svg.text(size / 2, 22, title, 13);
    for (const auto& [u, v] : tree.edges())
        svg.line(sx(pos[static_cast<std::size_t>(u)].x), sy(pos[static_cast<std::size_t>(u)].y),
                 sx(pos[static_cast<std::size_t>(v)].x), sy(pos[static_cast<std::size_t>(v)].y), "#555555", 1.5);
    for (std::size_t i = 0; i < n; ++i) {
        svg.circle(sx(pos[i].x), sy(pos[i].y), 5, label_color(labels[i]));
        svg.text(sx(pos[i].x), sy(pos[i].y) - 8, names[i], 9);
    }
    legend(svg, 20, size + 24);
    return svg.finish();
}

std::string render_projection_svg(const Projection2D& p, const std::string& title) {
    const std::size_t n = p.points.size();
    if (n == 0 || p.ids.size() != n || p.labels.size() != n) throw Error("projection has no points to render");
    double minx = p.points[0].x, maxx = minx, miny = p.points[0].y, maxy = miny;
    for (const auto& q : p.points) {
        minx = std::min(minx, q.x);
        maxx = std::max(maxx, q.x);
        miny = std::min(miny, q.y);
        maxy = std::max(maxy, q.y);
    }
    const double size = 520, margin = 50;
    const double scale = (size - 2 * margin) / std::max({maxx - minx, maxy - miny, 1e-9});
    auto sx = [&](double x) { return margin + (x - minx) * scale; };
    auto sy = [&](double y) { return margin + 20 + (maxy - y) * scale; };

    Svg svg(size, size + 40);
    svg.text(size / 2, 22, title, 13);
    for (std::size_t i = 0; i < n; ++i) {
        svg.circle(sx(p.points[i].x), sy(p.points[i].y), 5, label_color(p.labels[i]));
        svg.text(sx(p.points[i].x), sy(p.points[i].y) - 8, p.ids[i], 9);
    }
    legend(svg, 20, size + 24);
    return svg.finish();
}

std::vector<fs::path> render(const fs::path& result_json, const fs::path& out_dir,
                             const std::vector<ElectrodePosition>& montage) {
    std::ifstream f(result_json);
    if (!f) throw Error("cannot open " + result_json.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw FormatError(result_json.string(), e.what());
    }
    const fs::path dir = out_dir.empty() ? result_json.parent_path() : out_dir;
    const std::string stem = result_json.stem().string();
    const std::string type = j.value("type", "");

    std::vector<std::pair<fs::path, std::string>> files;
    if (type == "electrode_scores") {
        const auto t = electrode_table_from_json(j);
        files.emplace_back(dir / (stem + "_boxplot.svg"), render_boxplot_svg(t));
        files.emplace_back(dir / (stem + "_scalp.svg"), render_scalp_svg(t, montage));
        files.emplace_back(dir / (stem + ".csv"), to_csv(t));
    } else if (type == "grid") {
        const auto g = grid_from_json(j);
        files.emplace_back(dir / (stem + "_heatmap.svg"), render_heatmap_svg(g));
        files.emplace_back(dir / (stem + ".csv"), to_csv(g));
    } else if (type == "run") {
        const auto ids = j.at("ids").get<std::vector<std::string>>();
        if (ids.size() < 4) throw Error("run result has fewer than 4 objects: nothing to render");
        std::vector<Label> labels;
        for (const auto& l : j.at("labels")) labels.push_back(label_from_string(l.get<std::string>()));
        std::vector<std::string> leaf_names;
        const QuartetTree tree = QuartetTree::parse_newick(j.at("newick").get<std::string>(), leaf_names);
        std::vector<Label> leaf_labels;
        for (const auto& name : leaf_names) {
            const auto it = std::find(ids.begin(), ids.end(), name);
            if (it == ids.end()) throw Error("tree leaf '" + name + "' is not a run object");
            leaf_labels.push_back(labels[static_cast<std::size_t>(it - ids.begin())]);
        }
        Projection2D proj;
        proj.ids = ids;
        proj.labels = labels;
        for (const auto& pt : j.at("projection")) proj.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
        const double sc_tree = j.at("silhouette_tree").at("overall").get<double>();
        const double sc_proj = j.at("silhouette_projection").at("overall").get<double>();
        files.emplace_back(dir / (stem + "_dendrogram.svg"),
                           render_dendrogram_svg(tree, leaf_names, leaf_labels, "Quartet tree, S(T) = " +
                                                 num(j.at("tree_score").get<double>()) + ", SC = " + num(sc_tree)));
        files.emplace_back(dir / (stem + "_projection.svg"),
                           render_projection_svg(proj, "Projection, SC = " + num(sc_proj)));
        std::ostringstream csv;
        csv << "id,label,x,y\n";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", proj.points[i].x, proj.points[i].y);
            csv << ids[i] << ',' << to_string(labels[i]) << ',' << buf << '\n';
        }
        files.emplace_back(dir / (stem + "_projection.csv"), csv.str());
    } else {
        throw Error(result_json.string() + ": unknown result type '" + type + "'");
    }
    write_files_atomic(files);
    std::vector<fs::path> written;
    for (const auto& [p, content] : files) written.push_back(p);
    return written;
}

}  // namespace ncderp
