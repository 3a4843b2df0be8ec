#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ncderp/compressor.hpp"
#include "ncderp/encode.hpp"

namespace ncderp {

/// Normalized Compression Distance. Both concatenation orders are
/// compressed and the larger conditional size is used, so the result is
/// exactly symmetric whatever the compressor does.
double ncd(std::string_view x, std::string_view y, const Compressor& c);

/// Symmetric n x n matrix of pairwise NCD values with object identities.
/// The diagonal holds self-NCD and is ignored by clustering consumers.
struct DistanceMatrix {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<double> values;  // row-major n*n

    std::size_t size() const { return ids.size(); }
    double operator()(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }

    bool operator==(const DistanceMatrix&) const = default;
};

DistanceMatrix make_matrix(std::vector<std::string> ids, std::vector<Label> labels);

/// Pairwise NCD matrix, pairs computed in parallel. Each pair's value is
/// computed independently and written to its own cells, so the result does
/// not depend on scheduling. Throws on duplicate ids or fewer than 2 objects.
DistanceMatrix distance_matrix(const std::vector<AsciiObject>& objects, const Compressor& c);

namespace serial {

DistanceMatrix distance_matrix(const std::vector<AsciiObject>& objects, const Compressor& c);

}  // namespace serial

/// Largest off-diagonal excess over 1 (the epsilon of the NCD upper bound).
double max_epsilon(const DistanceMatrix& m);

/// Throws when any off-diagonal value is negative or exceeds 1.2; returns a
/// warning message (empty when clean) when epsilon lies in (0.1, 0.2].
std::string check_range(const DistanceMatrix& m);

struct GroupDistanceSummary {
    std::map<Label, double> intra;  // mean off-diagonal NCD within each class
    double intra_pooled = 0.0;      // mean over every same-class pair
    double inter = 0.0;             // mean over every cross-class pair
    double diff = 0.0;              // inter - intra_pooled
};

GroupDistanceSummary group_distance_summary(const DistanceMatrix& m);

/// CSV with ids in the first row and column, cells printed with 9
/// significant digits. Labels go to a sidecar JSON (`<csv>.labels.json`).
void write_matrix_csv(const DistanceMatrix& m, const std::filesystem::path& csv);
DistanceMatrix read_matrix_csv(const std::filesystem::path& csv);
std::filesystem::path labels_sidecar(const std::filesystem::path& csv);

}  // namespace ncderp
