#include "sdot/laguerre.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"

using namespace sdot;
using sdot::testing::polygon_deviation;
using sdot::testing::UnitSampler;

namespace {

SourceCloud two_point_cloud() {
    return cloud_from_points(unit_square(), {{0.25, 0.5}, {0.75, 0.5}});
}

PotentialVector raw_potential(std::vector<double> v) { return PotentialVector{std::move(v)}; }

}  // namespace

TEST_CASE("single site owns the whole target") {
    SourceCloud cloud = cloud_from_points(unit_square(), {{0.3, 0.7}});
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, raw_potential({0.0}), target);
    REQUIRE(d.size() == 1);
    CHECK(d.masses[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(area(d.cells[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.dual_vertices.empty());
}

TEST_CASE("two-site Voronoi split") {
    SourceCloud cloud = two_point_cloud();
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi;
    for (Point2 p : cloud.points) phi.values.push_back(0.5 * norm2(p));
    LaguerreDiagram d = build_diagram(cloud, phi, target);
    CHECK(d.masses[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.masses[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.dual_vertices.empty());  // bisector only meets the boundary
    REQUIRE(d.adjacency.size() == 1);
    CHECK(d.adjacency[0].length == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-site weighted split matches the bisector line equation") {
    SourceCloud cloud = two_point_cloud();
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi;
    for (Point2 p : cloud.points) phi.values.push_back(0.5 * norm2(p));
    phi.values[1] += 0.1;
    // (x2 - x1).y = phi2 - phi1 with x2 - x1 = (0.5, 0) puts the cut at u = 0.7
    LaguerreDiagram d = build_diagram(cloud, phi, target);
    CHECK(d.masses[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(d.masses[1] == doctest::Approx(0.3).epsilon(1e-12));
    for (Point2 p : d.cells[0].vertices) CHECK(p.u <= 0.7 + 1e-12);
    for (Point2 p : d.cells[1].vertices) CHECK(p.u >= 0.7 - 1e-12);

    // 10^6-point assignment oracle for the same masses
    UnitSampler s(42);
    int hits = 0;
    const int samples = 1000000;
    for (int k = 0; k < samples; ++k) {
        Point2 y = s.next_point();
        double best = -1e300;
        int arg = -1;
        for (int i = 0; i < 2; ++i) {
            double val = dot(cloud.points[static_cast<std::size_t>(i)], y) -
                         phi.values[static_cast<std::size_t>(i)];
            if (val > best) {
                best = val;
                arg = i;
            }
        }
        hits += (arg == 0);
    }
    CHECK(std::abs(hits / static_cast<double>(samples) - d.masses[0]) <= 2e-3);
}

TEST_CASE("coincident sites are rejected") {
    std::vector<Point2> pts = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK_THROWS_AS(
        build_diagram(cloud_from_points(unit_square(), pts),
                      raw_potential({0.0, 0.0}), uniform_target(unit_square())),
        std::invalid_argument);
}

TEST_CASE("mass conservation and Voronoi equivalence on random clouds") {
    TargetDomain target = uniform_target(unit_square());
    for (std::uint64_t seed : {4ull, 9ull}) {
        SourceCloud cloud = random_cloud(unit_square(), 60, seed);
        PotentialVector phi = voronoi_potential(cloud);
        LaguerreDiagram d = build_diagram(cloud, phi, target);
        CHECK(std::abs(d.total_mass() - 1.0) <= 1e-10);
        // cells must equal the cloud's own Voronoi cells
        for (int i = 0; i < d.size(); ++i) {
            CHECK(polygon_deviation(d.cells[static_cast<std::size_t>(i)],
                                    cloud.cells[static_cast<std::size_t>(i)]) <= 1e-9);
        }
    }
}

TEST_CASE("shift invariance of the diagram") {
    SourceCloud cloud = random_cloud(unit_square(), 25, 8);
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi = voronoi_potential(cloud);
    PotentialVector shifted = phi;
    for (double& v : shifted.values) v += 3.7;
    LaguerreDiagram a = build_diagram(cloud, phi, target);
    LaguerreDiagram b = build_diagram(cloud, shifted, target);
    for (int i = 0; i < a.size(); ++i) {
        CHECK(polygon_deviation(a.cells[static_cast<std::size_t>(i)],
                                b.cells[static_cast<std::size_t>(i)]) <= 1e-12);
    }
}

TEST_CASE("raising a potential shrinks its own cell") {
    SourceCloud cloud = random_cloud(unit_square(), 15, 13);
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi = voronoi_potential(cloud);
    LaguerreDiagram base = build_diagram(cloud, phi, target);
    for (int i = 0; i < cloud.size(); ++i) {
        PotentialVector bumped = phi;
        bumped.values[static_cast<std::size_t>(i)] += 1e-4;
        LaguerreDiagram d = build_diagram(cloud, bumped, target);
        CHECK(d.masses[static_cast<std::size_t>(i)] <=
              base.masses[static_cast<std::size_t>(i)] + 1e-12);
    }
}

TEST_CASE("two-site Jacobian closed form") {
    SourceCloud cloud = two_point_cloud();
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi = voronoi_potential(cloud);
    LaguerreDiagram d = build_diagram(cloud, phi, target);
    MassJacobian h = mass_jacobian(d, cloud, target);
    REQUIRE(h.edge_value.size() == 1);
    // edge length 1, |x2 - x1| = 0.5, g = 1 -> off-diagonal 2, diagonal -2
    CHECK(h.edge_value[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h.diagonal[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(h.diagonal[1] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(std::abs(h.row_sum(0)) <= 1e-12);
    CHECK(std::abs(h.row_sum(1)) <= 1e-12);
}

TEST_CASE("Jacobian rows sum to zero and entries are nonnegative") {
    SourceCloud cloud = random_cloud(unit_square(), 40, 3);
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, voronoi_potential(cloud), target);
    MassJacobian h = mass_jacobian(d, cloud, target);
    for (double v : h.edge_value) CHECK(v >= 0.0);
    for (int i = 0; i < h.n; ++i) CHECK(std::abs(h.row_sum(i)) <= 1e-10);
}

TEST_CASE("Jacobian matches central finite differences of the masses") {
    SourceCloud cloud = random_cloud(unit_square(), 20, 12);
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi = voronoi_potential(cloud);
    MassJacobian h = mass_jacobian(build_diagram(cloud, phi, target), cloud, target);

    int n = cloud.size();
    std::vector<std::vector<double>> dense(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (std::size_t k = 0; k < h.edge_value.size(); ++k) {
        dense[static_cast<std::size_t>(h.edge_i[k])][static_cast<std::size_t>(h.edge_j[k])] =
            h.edge_value[k];
        dense[static_cast<std::size_t>(h.edge_j[k])][static_cast<std::size_t>(h.edge_i[k])] =
            h.edge_value[k];
    }
    for (int i = 0; i < n; ++i)
        dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] =
            h.diagonal[static_cast<std::size_t>(i)];

    const double step = 1e-6;
    double max_entry = 0.0, max_err = 0.0;
    for (int j = 0; j < n; ++j) {
        PotentialVector up = phi, down = phi;
        up.values[static_cast<std::size_t>(j)] += step;
        down.values[static_cast<std::size_t>(j)] -= step;
        std::vector<double> mu = build_diagram(cloud, up, target).masses;
        std::vector<double> md = build_diagram(cloud, down, target).masses;
        for (int i = 0; i < n; ++i) {
            double fd = (mu[static_cast<std::size_t>(i)] - md[static_cast<std::size_t>(i)]) /
                        (2.0 * step);
            max_entry = std::max(max_entry, std::abs(fd));
            max_err = std::max(
                max_err,
                std::abs(dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - fd));
        }
    }
    CHECK(max_err / max_entry <= 1e-5);
}

TEST_CASE("symmetric four-point configuration has one interior vertex") {
    SourceCloud cloud = cloud_from_points(
        unit_square(), {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}});
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, voronoi_potential(cloud), target);
    std::vector<DiagramVertex> verts = dual_vertices(d);
    REQUIRE(verts.size() == 1);
    CHECK(verts[0].position.u == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(verts[0].position.v == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(verts[0].cells.size() == 4);
}

TEST_CASE("adjacency edges lie on their bisector lines") {
    SourceCloud cloud = random_cloud(unit_square(), 35, 29);
    TargetDomain target = uniform_target(unit_square());
    PotentialVector phi = voronoi_potential(cloud);
    phi.values[3] += 0.01;
    phi.values[11] -= 0.02;
    LaguerreDiagram d = build_diagram(cloud, phi, target);
    for (const DiagramEdge& e : d.adjacency) {
        Point2 delta = cloud.points[static_cast<std::size_t>(e.j)] -
                       cloud.points[static_cast<std::size_t>(e.i)];
        double off = phi.values[static_cast<std::size_t>(e.j)] -
                     phi.values[static_cast<std::size_t>(e.i)];
        CHECK(std::abs(dot(delta, e.a) - off) <= 1e-10);
        CHECK(std::abs(dot(delta, e.b) - off) <= 1e-10);
    }
}

TEST_CASE("Euler relation for the clipped complex") {
    // V_int - E + F = 1 for the cell complex inside Y
    for (std::uint64_t seed : {1ull, 6ull, 14ull}) {
        SourceCloud cloud = random_cloud(unit_square(), 50, seed);
        TargetDomain target = uniform_target(unit_square());
        LaguerreDiagram d = build_diagram(cloud, voronoi_potential(cloud), target);
        int nonempty = 0;
        for (const ConvexPolygon& c : d.cells) nonempty += !c.empty();
        int euler = static_cast<int>(d.dual_vertices.size()) -
                    static_cast<int>(d.adjacency.size()) + nonempty;
        CHECK(euler == 1);
    }
}

TEST_CASE("desk-scale diagram at ten thousand sites") {
    SourceCloud cloud = random_cloud(unit_square(), 10000, 42);
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, voronoi_potential(cloud), target);
    CHECK(std::abs(d.total_mass() - 1.0) <= 1e-10);
    CHECK(d.min_mass() > 0.0);
    int euler = static_cast<int>(d.dual_vertices.size()) -
                static_cast<int>(d.adjacency.size()) + d.size();
    CHECK(euler == 1);
}

TEST_CASE("diagram csv dump") {
    namespace fs = std::filesystem;
    SourceCloud cloud = two_point_cloud();
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, voronoi_potential(cloud), target);
    std::string prefix = (fs::temp_directory_path() / "sdot_diag_test").string();
    write_diagram_csv(d, prefix);
    std::ifstream cells(prefix + "_cells.csv");
    std::string header;
    REQUIRE(std::getline(cells, header));
    CHECK(header == "cell_id,vertex_index,x,y");
    std::ifstream masses(prefix + "_masses.csv");
    REQUIRE(std::getline(masses, header));
    CHECK(header == "cell_id,mass");
    fs::remove(prefix + "_cells.csv");
    fs::remove(prefix + "_masses.csv");
}
