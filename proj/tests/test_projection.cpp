#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "ncderp/error.hpp"
#include "ncderp/projection.hpp"

using namespace ncderp;
using testing_support::TempDir;

TEST_SUITE("projection") {

TEST_CASE("first three points reproduce their distances") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        // Triangle inequality by construction: sides from three planar points.
        const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        auto m = make_matrix({"a", "b", "c"}, {Label::P300, Label::P300, Label::NonP300});
        m.at(0, 1) = m.at(1, 0) = distance(a, b);
        m.at(0, 2) = m.at(2, 0) = distance(a, c);
        m.at(1, 2) = m.at(2, 1) = distance(b, c);
        const auto p = place(m, static_cast<std::uint64_t>(trial));
        CHECK(p.points[0] == Point2{0.0, 0.0});
        CHECK(p.points[1].y == 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(distance(p.points[i], p.points[j]) - m(i, j)) < 1e-9);
    }
}

TEST_CASE("non-intersecting circles fall back to the proportional point") {
    auto m = make_matrix({"a", "b", "c"}, std::vector<Label>(3, Label::NonP300));
    m.at(0, 1) = m.at(1, 0) = 1.0;
    m.at(0, 2) = m.at(2, 0) = 0.2;
    m.at(1, 2) = m.at(2, 1) = 0.3;  // 0.2 + 0.3 < 1: no intersection
    const auto p = place(m, 0);
    CHECK(p.points[2].x == doctest::Approx(0.4));
    CHECK(p.points[2].y == doctest::Approx(0.0));
}

TEST_CASE("refinement never raises stress") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = testing_support::random_matrix(15, rng);
        ProjectionTrace trace;
        project(m, 50, static_cast<std::uint64_t>(trial), &trace);
        REQUIRE(trace.stress_per_sweep.size() == 50);
        CHECK(trace.stress_per_sweep.front() <= trace.stress_after_placement);
        for (std::size_t k = 1; k < 50; ++k) CHECK(trace.stress_per_sweep[k] <= trace.stress_per_sweep[k - 1]);
    }
}

TEST_CASE("planar configurations are recovered up to rigid motion") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point2> truth(10);
    for (auto& q : truth) q = {u(rng), u(rng)};
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("p" + std::to_string(i));
    auto m = make_matrix(ids, std::vector<Label>(10, Label::P300));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) m.at(i, j) = distance(truth[i], truth[j]);
    ProjectionTrace trace;
    const auto p = project(m, 200, 1, &trace);
    CHECK(stress(p, m) < 0.05);
}

TEST_CASE("projection is seeded") {
    std::mt19937_64 rng(1);
    const auto m = testing_support::random_matrix(12, rng);
    CHECK(project(m, 20, 5) == project(m, 20, 5));
}

TEST_CASE("stress normalization") {
    auto m = make_matrix({"a", "b"}, {Label::P300, Label::NonP300});
    m.at(0, 1) = m.at(1, 0) = 2.0;
    Projection2D p{m.ids, m.labels, {{0, 0}, {1, 0}}};
    CHECK(stress(p, m) == doctest::Approx(0.25));
    p.ids = {"a", "z"};
    CHECK_THROWS_AS(stress(p, m), Error);
}

TEST_CASE("projection CSV round trip") {
    TempDir dir;
    std::mt19937_64 rng(6);
    const auto p = project(testing_support::random_matrix(7, rng), 10, 3);
    write_projection_csv(p, dir / "p.csv");
    CHECK(read_projection_csv(dir / "p.csv") == p);
}

}  // TEST_SUITE
