#pragma once

#include <span>
#include <string>
#include <vector>

#include "ncderp/projection.hpp"
#include "ncderp/quartet_tree.hpp"

namespace ncderp {

enum class SilhouetteVariant { euclidean, dendrogram_path };

std::string to_string(SilhouetteVariant v);

struct SilhouetteEntry {
    std::string id;
    Label label = Label::NonP300;
    double s = 0.0;
    bool flagged = false;  // singleton class or a = b = 0; s forced to 0
};

struct SilhouetteReport {
    std::vector<SilhouetteEntry> per_object;
    double overall = 0.0;
    SilhouetteVariant variant = SilhouetteVariant::euclidean;
};

/// Silhouette values for an arbitrary number of classes over a row-major
/// n*n distance table. a(i) is the mean distance to the other members of
/// i's class, b(i) the smallest mean distance to another class, and
/// s(i) = (b - a) / max(a, b). Singletons and a = b = 0 give s = 0 with the
/// flag set. Throws when fewer than two classes are present.
std::vector<double> silhouette_values(std::span<const double> dist, std::span<const int> classes,
                                      std::vector<bool>* flagged = nullptr);

SilhouetteReport silhouette_euclidean(const Projection2D& p);

/// Leaf distance = number of intermediate nodes on the tree path (endpoints
/// excluded), so sibling leaves are at distance 1. Row-major n*n.
std::vector<double> dendrogram_distances(const QuartetTree& tree);

/// `labels[i]` and `ids[i]` belong to leaf i.
SilhouetteReport silhouette_dendrogram(const QuartetTree& tree, const std::vector<std::string>& ids,
                                       const std::vector<Label>& labels);

std::string report_to_json(const SilhouetteReport& r);

}  // namespace ncderp
