#include "ncderp/silhouette.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"

#include "ncderp/error.hpp"

namespace ncderp {

std::string to_string(SilhouetteVariant v) {
    return v == SilhouetteVariant::euclidean ? "euclidean" : "dendrogram-path";
}

std::vector<double> silhouette_values(std::span<const double> dist, std::span<const int> classes,
                                      std::vector<bool>* flagged) {
    const std::size_t n = classes.size();
    if (dist.size() != n * n) throw Error("distance table does not match class count");
    std::map<int, std::size_t> class_size;
    for (int c : classes) ++class_size[c];
    if (class_size.size() < 2) throw Error("silhouette needs at least two classes");

    std::vector<double> s(n, 0.0);
    if (flagged) flagged->assign(n, false);
    std::map<int, double> sums;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& [c, v] : sums) v = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[classes[j]] += dist[i * n + j];
        const std::size_t own = class_size[classes[i]];
        if (own < 2) {
            if (flagged) (*flagged)[i] = true;
            continue;
        }
        const double a = sums[classes[i]] / static_cast<double>(own - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [c, size] : class_size)
            if (c != classes[i]) b = std::min(b, sums[c] / static_cast<double>(size));
        const double den = std::max(a, b);
        if (!(den > 0.0)) {
            if (flagged) (*flagged)[i] = true;
            continue;
        }
        s[i] = (b - a) / den;
    }
    return s;
}

namespace {

SilhouetteReport make_report(const std::vector<std::string>& ids, const std::vector<Label>& labels,
                             std::span<const double> dist, SilhouetteVariant variant) {
    std::vector<int> classes(labels.size());
    std::transform(labels.begin(), labels.end(), classes.begin(), [](Label l) { return static_cast<int>(l); });
    std::vector<bool> flagged;
    const auto values = silhouette_values(dist, classes, &flagged);
    SilhouetteReport r;
    r.variant = variant;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        r.per_object.push_back({ids[i], labels[i], values[i], flagged[i]});
        sum += values[i];
    }
    r.overall = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    return r;
}

}  // namespace

SilhouetteReport silhouette_euclidean(const Projection2D& p) {
    const std::size_t n = p.points.size();
    if (p.ids.size() != n || p.labels.size() != n) throw Error("projection ids, labels and points are misaligned");
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = distance(p.points[i], p.points[j]);
    return make_report(p.ids, p.labels, dist, SilhouetteVariant::euclidean);
}

std::vector<double> dendrogram_distances(const QuartetTree& tree) {
    const auto edges = tree.leaf_path_lengths();
    std::vector<double> out(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) out[k] = edges[k] > 0 ? edges[k] - 1.0 : 0.0;
    return out;
}

SilhouetteReport silhouette_dendrogram(const QuartetTree& tree, const std::vector<std::string>& ids,
                                       const std::vector<Label>& labels) {
    if (labels.size() != tree.leaf_count()) throw Error("unlabeled leaf: label count does not match leaf count");
    if (ids.size() != tree.leaf_count()) throw Error("leaf id count does not match leaf count");
    return make_report(ids, labels, dendrogram_distances(tree), SilhouetteVariant::dendrogram_path);
}

std::string report_to_json(const SilhouetteReport& r) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& e : r.per_object)
        per.push_back({{"id", e.id}, {"label", to_string(e.label)}, {"s", e.s}, {"flagged", e.flagged}});
    nlohmann::json doc{{"variant", to_string(r.variant)}, {"overall", r.overall}, {"per_object", per}};
    return doc.dump(2);
}

}  // namespace ncderp
