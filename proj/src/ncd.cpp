#include "ncderp/ncd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ncderp/error.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

namespace {

double ncd_from_sizes(std::size_t cx, std::size_t cy, std::size_t cxy, std::size_t cyx) {
    const double num = std::max(static_cast<double>(cxy) - static_cast<double>(cx),
                                static_cast<double>(cyx) - static_cast<double>(cy));
    const double den = static_cast<double>(std::max(cx, cy));
    if (den <= 0.0) throw Error("compressor reported an empty compressed size");
    return num / den;
}

std::size_t concat_size(std::string_view x, std::string_view y, const Compressor& c) {
    std::string xy;
    xy.reserve(x.size() + y.size());
    xy.append(x).append(y);
    return c.compressed_size(xy);
}

void check_objects(const std::vector<AsciiObject>& objects) {
    if (objects.size() < 2) throw Error("distance matrix needs at least 2 objects");
    std::set<std::string> seen;
    for (const auto& o : objects) {
        if (o.bytes.empty()) throw Error("object '" + o.id + "' is empty");
        if (!seen.insert(o.id).second) throw Error("duplicate object id '" + o.id + "'");
    }
}

DistanceMatrix empty_matrix_for(const std::vector<AsciiObject>& objects) {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    for (const auto& o : objects) {
        ids.push_back(o.id);
        labels.push_back(o.label);
    }
    return make_matrix(std::move(ids), std::move(labels));
}

}  // namespace

double ncd(std::string_view x, std::string_view y, const Compressor& c) {
    if (x.empty() || y.empty()) throw Error("ncd of an empty string is undefined");
    return ncd_from_sizes(c.compressed_size(x), c.compressed_size(y), concat_size(x, y, c),
                          concat_size(y, x, c));
}

DistanceMatrix make_matrix(std::vector<std::string> ids, std::vector<Label> labels) {
    if (ids.size() != labels.size()) throw Error("ids and labels differ in length");
    DistanceMatrix m;
    m.values.assign(ids.size() * ids.size(), 0.0);
    m.ids = std::move(ids);
    m.labels = std::move(labels);
    return m;
}

DistanceMatrix distance_matrix(const std::vector<AsciiObject>& objects, const Compressor& c) {
    check_objects(objects);
    const std::size_t n = objects.size();
    DistanceMatrix m = empty_matrix_for(objects);

    std::vector<std::size_t> single(n);
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 1)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) single[i] = c.compressed_size(objects[i].bytes);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 4)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(pairs.size()); ++p) {
        const auto [i, j] = pairs[p];
        const auto& x = objects[i].bytes;
        const auto& y = objects[j].bytes;
        const std::size_t cxy = concat_size(x, y, c);
        const std::size_t cyx = i == j ? cxy : concat_size(y, x, c);
        const double v = ncd_from_sizes(single[i], single[j], cxy, cyx);
        m.at(i, j) = v;
        m.at(j, i) = v;
    }
    return m;
}

namespace serial {

DistanceMatrix distance_matrix(const std::vector<AsciiObject>& objects, const Compressor& c) {
    check_objects(objects);
    DistanceMatrix m = empty_matrix_for(objects);
    for (std::size_t i = 0; i < objects.size(); ++i)
        for (std::size_t j = i; j < objects.size(); ++j) {
            const double v = ncd(objects[i].bytes, objects[j].bytes, c);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    return m;
}

}  // namespace serial

double max_epsilon(const DistanceMatrix& m) {
    double eps = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j) eps = std::max(eps, m(i, j) - 1.0);
    return eps;
}

std::string check_range(const DistanceMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j && m(i, j) < 0.0)
                throw Error("negative NCD between '" + m.ids[i] + "' and '" + m.ids[j] + "'");
    const double eps = max_epsilon(m);
    if (eps > 0.2) throw Error("NCD exceeds 1.2 (epsilon " + std::to_string(eps) + ")");
    if (eps > 0.1) return "NCD epsilon " + std::to_string(eps) + " exceeds 0.1";
    return {};
}

GroupDistanceSummary group_distance_summary(const DistanceMatrix& m) {
    std::set<Label> present(m.labels.begin(), m.labels.end());
    if (present.size() < 2) throw Error("group distance summary needs at least two classes");
    std::map<Label, std::pair<double, std::size_t>> intra;
    double inter_sum = 0.0, intra_sum = 0.0;
    std::size_t inter_n = 0, intra_n = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (m.labels[i] == m.labels[j]) {
                auto& acc = intra[m.labels[i]];
                acc.first += m(i, j);
                ++acc.second;
                intra_sum += m(i, j);
                ++intra_n;
            } else {
                inter_sum += m(i, j);
                ++inter_n;
            }
        }
    GroupDistanceSummary s;
    for (const auto& [label, acc] : intra)
        if (acc.second > 0) s.intra[label] = acc.first / static_cast<double>(acc.second);
    if (intra_n == 0) throw Error("group distance summary needs a class with at least two objects");
    s.intra_pooled = intra_sum / static_cast<double>(intra_n);
    s.inter = inter_sum / static_cast<double>(inter_n);
    s.diff = s.inter - s.intra_pooled;
    return s;
}

std::filesystem::path labels_sidecar(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".labels.json");
    return p;
}

void write_matrix_csv(const DistanceMatrix& m, const std::filesystem::path& csv) {
    std::ostringstream out;
    out << "id";
    for (const auto& id : m.ids) out << ',' << id;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.ids[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", m(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    std::ofstream f(csv, std::ios::trunc);
    f << out.str();
    if (!f) throw Error("cannot write " + csv.string());

    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < m.size(); ++i) labels[m.ids[i]] = to_string(m.labels[i]);
    nlohmann::json doc{{"ids", m.ids}, {"labels", labels}};
    std::ofstream s(labels_sidecar(csv), std::ios::trunc);
    s << doc.dump(2) << '\n';
    if (!s) throw Error("cannot write " + labels_sidecar(csv).string());
}

DistanceMatrix read_matrix_csv(const std::filesystem::path& csv) {
    std::ifstream f(csv);
    if (!f) throw Error("cannot open " + csv.string());
    std::string line;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(in, cell, ',')) cells.push_back(cell);
        if (line_no == 1) {
            ids.assign(cells.begin() + 1, cells.end());
            continue;
        }
        const std::string where = csv.string() + ":" + std::to_string(line_no);
        if (cells.size() != ids.size() + 1) throw FormatError(where, "row width does not match header");
        if (cells[0] != ids[rows.size()]) throw FormatError(where, "row id does not match column order");
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            try {
                row.push_back(std::stod(cells[k]));
            } catch (const std::exception&) {
                throw FormatError(where, "bad number '" + cells[k] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != ids.size()) throw FormatError(csv.string(), "matrix is not square");

    std::vector<Label> labels(ids.size(), Label::NonP300);
    if (std::ifstream s(labels_sidecar(csv)); s) {
        const auto doc = nlohmann::json::parse(s);
        const auto& lab = doc.at("labels");
        for (std::size_t i = 0; i < ids.size(); ++i) labels[i] = label_from_string(lab.at(ids[i]).get<std::string>());
    }
    DistanceMatrix m = make_matrix(ids, labels);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < ids.size(); ++j) m.at(i, j) = rows[i][j];
    return m;
}

}  // namespace ncderp
