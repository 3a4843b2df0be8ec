#include "ncderp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ncderp/error.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

Point2 place_from_circles(Point2 c1, double r1, Point2 c2, double r2, bool upper) {
    const double d = distance(c1, c2);
    if (d > 0.0 && d <= r1 + r2 && d >= std::abs(r1 - r2)) {
        const double ux = (c2.x - c1.x) / d;
        const double uy = (c2.y - c1.y) / d;
        const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
        const double h = std::sqrt(std::max(0.0, r1 * r1 - a * a));
        const double sign = upper ? 1.0 : -1.0;
        return {c1.x + a * ux - sign * h * uy, c1.y + a * uy + sign * h * ux};
    }
    const double sum = r1 + r2;
    const double t = sum > 0.0 ? r1 / sum : 0.0;
    return {c1.x + t * (c2.x - c1.x), c1.y + t * (c2.y - c1.y)};
}

double raw_stress(const std::vector<Point2>& pts, const DistanceMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double e = distance(pts[i], pts[j]) - m(i, j);
            s += e * e;
        }
    return s;
}

// Stress contribution of every pair touching i or j.
double local_stress(const std::vector<Point2>& pts, const DistanceMatrix& m, std::size_t i, std::size_t j,
                    Point2 pi, Point2 pj) {
    double s = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == i || k == j) continue;
        const double ei = distance(pi, pts[k]) - m(i, k);
        const double ej = distance(pj, pts[k]) - m(j, k);
        s += ei * ei + ej * ej;
    }
    const double e = distance(pi, pj) - m(i, j);
    return s + e * e;
}

}  // namespace

Projection2D place(const DistanceMatrix& m, std::uint64_t seed) {
    const std::size_t n = m.size();
    if (n < 2) throw Error("projection needs at least 2 objects");
    Projection2D p;
    p.ids = m.ids;
    p.labels = m.labels;
    p.points.resize(n);
    p.points[1] = {m(0, 1), 0.0};

    std::mt19937_64 rng(derive_seed(seed, "proj-place"));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t q = 2; q < n; ++q) {
        std::size_t first = 0, second = 1;
        if (m(q, second) < m(q, first)) std::swap(first, second);
        for (std::size_t k = 2; k < q; ++k) {
            if (m(q, k) < m(q, first)) {
                second = first;
                first = k;
            } else if (m(q, k) < m(q, second)) {
                second = k;
            }
        }
        p.points[q] = place_from_circles(p.points[first], m(q, first), p.points[second], m(q, second), coin(rng));
    }
    return p;
}

Projection2D project(const DistanceMatrix& m, int refine_iters, std::uint64_t seed, ProjectionTrace* trace) {
    if (refine_iters < 0) throw Error("refine_iters must be >= 0");
    Projection2D p = place(m, seed);
    const std::size_t n = m.size();
    auto& pts = p.points;
    if (trace) {
        trace->stress_after_placement = stress(p, m);
        trace->stress_per_sweep.clear();
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::mt19937_64 rng(derive_seed(seed, "proj-refine"));

    for (int sweep = 0; sweep < refine_iters; ++sweep) {
        const double alpha = 0.3 * (1.0 - static_cast<double>(sweep) / refine_iters);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        for (const auto& [i, j] : pairs) {
            const double dp = distance(pts[i], pts[j]);
            if (dp <= 0.0) continue;
            const double step = alpha * (dp - m(i, j)) / 2.0;
            const double ux = (pts[j].x - pts[i].x) / dp;
            const double uy = (pts[j].y - pts[i].y) / dp;
            const Point2 ni{pts[i].x + step * ux, pts[i].y + step * uy};
            const Point2 nj{pts[j].x - step * ux, pts[j].y - step * uy};
            const double before = local_stress(pts, m, i, j, pts[i], pts[j]);
            const double after = local_stress(pts, m, i, j, ni, nj);
            if (after < before) {
                pts[i] = ni;
                pts[j] = nj;
            }
        }
        if (trace) trace->stress_per_sweep.push_back(stress(p, m));
    }
    return p;
}

double stress(const Projection2D& p, const DistanceMatrix& m) {
    if (p.ids != m.ids || p.points.size() != m.size()) throw Error("projection and matrix ids are misaligned");
    double den = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) den += m(i, j) * m(i, j);
    const double num = raw_stress(p.points, m);
    if (den <= 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return num / den;
}

void write_projection_csv(const Projection2D& p, const std::filesystem::path& csv) {
    std::ostringstream out;
    out << "id,label,x,y\n";
    char buf[64];
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.points[i].x, p.points[i].y);
        out << p.ids[i] << ',' << to_string(p.labels[i]) << ',' << buf << '\n';
    }
    std::ofstream f(csv, std::ios::trunc);
    f << out.str();
    if (!f) throw Error("cannot write " + csv.string());
}

Projection2D read_projection_csv(const std::filesystem::path& csv) {
    std::ifstream f(csv);
    if (!f) throw Error("cannot open " + csv.string());
    Projection2D p;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;
        std::istringstream in(line);
        std::string id, label, x, y;
        if (!std::getline(in, id, ',') || !std::getline(in, label, ',') || !std::getline(in, x, ',') ||
            !std::getline(in, y, ','))
            throw FormatError(csv.string() + ":" + std::to_string(line_no), "expected id,label,x,y");
        try {
            p.ids.push_back(id);
            p.labels.push_back(label_from_string(label));
            p.points.push_back({std::stod(x), std::stod(y)});
        } catch (const std::exception& e) {
            throw FormatError(csv.string() + ":" + std::to_string(line_no), e.what());
        }
    }
    return p;
}

}  // namespace ncderp
