#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ncderp/ncd.hpp"

namespace ncderp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

double distance(Point2 a, Point2 b);

struct Projection2D {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<Point2> points;

    bool operator==(const Projection2D&) const = default;
};

struct ProjectionTrace {
    double stress_after_placement = 0.0;
    std::vector<double> stress_per_sweep;  // normalized stress after each sweep
};

/// Nearest-neighbor placement followed by stress-reducing pairwise
/// relaxation. Objects are placed in matrix order: the first two on the
/// x-axis, every later one on an intersection of the circles around its two
/// nearest placed neighbors (radii = their distances; a seeded coin picks
/// the intersection; non-intersecting circles fall back to the point on the
/// center segment split in proportion to the radii). Each refinement sweep
/// visits every pair once in shuffled order and moves both points along
/// their connecting line by alpha * (d_plane - d_target) / 2, alpha falling
/// linearly from 0.3 toward 0; a move that would raise total stress is
/// skipped.
Projection2D project(const DistanceMatrix& m, int refine_iters, std::uint64_t seed,
                     ProjectionTrace* trace = nullptr);

/// Placement phase only.
Projection2D place(const DistanceMatrix& m, std::uint64_t seed);

/// Normalized stress: sum (d_plane - m)^2 / sum m^2 over i < j.
double stress(const Projection2D& p, const DistanceMatrix& m);

/// `id,label,x,y` with a header row; coordinates at 17 significant digits.
void write_projection_csv(const Projection2D& p, const std::filesystem::path& csv);
Projection2D read_projection_csv(const std::filesystem::path& csv);

}  // namespace ncderp
