#include "sdot/periodic.hpp"
#include <numbers>
#include <map>

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"

using namespace sdot;

namespace {

Density unit_density() {
    return [](Point2) { return 1.0; };
}

}  // namespace

TEST_CASE("periodic diagram of a uniform grid is the grid of squares") {
    TorusCloud cloud = torus_grid_cloud(4, unit_density());
    REQUIRE(cloud.size() == 16);
    CHECK(cloud.mesh_norm == doctest::Approx(std::sqrt(2.0) / 4.0));
    for (double m : cloud.masses) CHECK(m == doctest::Approx(1.0 / 16.0).epsilon(1e-12));

    QuasiPeriodicPotential zero;
    zero.u.assign(16, 0.0);
    PeriodicDiagram d = periodic_diagram(cloud, zero, unit_density());
    double total = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    for (double m : d.masses) CHECK(m == doctest::Approx(1.0 / 16.0).epsilon(1e-10));
}

TEST_CASE("single torus site owns the fundamental domain") {
    TorusCloud cloud;
    cloud.points = {{0.3, 0.7}};
    cloud.masses = {1.0};
    cloud.mesh_norm = periodic_mesh_norm(cloud.points);
    CHECK(cloud.mesh_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    QuasiPeriodicPotential zero;
    zero.u = {0.0};
    PeriodicDiagram d = periodic_diagram(cloud, zero, unit_density());
    CHECK(d.masses[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two torus sites split into vertical strips") {
    TorusCloud cloud;
    cloud.points = {{0.25, 0.5}, {0.75, 0.5}};
    cloud.masses = {0.5, 0.5};
    QuasiPeriodicPotential zero;
    zero.u = {0.0, 0.0};
    PeriodicDiagram d = periodic_diagram(cloud, zero, unit_density());
    CHECK(d.masses[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(d.masses[1] == doctest::Approx(0.5).epsilon(1e-10));
    // torus bisectors at u = 0 and u = 0.5
    for (const PeriodicDiagram::Piece& piece : d.pieces) {
        for (Point2 p : piece.region.vertices) {
            if (piece.base == 0) {
                CHECK((p.u <= 0.5 + 1e-9 || p.u >= 1.0 - 1e-9));
            } else {
                CHECK((p.u >= 0.5 - 1e-9));
            }
        }
    }
}

TEST_CASE("periodic solve: uniform masses on the grid solve at u = 0") {
    TorusCloud cloud = torus_grid_cloud(8, unit_density());
    auto [u, report] = periodic_solve(cloud, cloud.masses, unit_density());
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    for (double v : u.u) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("two-site torus with uneven masses reproduces the strip widths") {
    TorusCloud cloud;
    cloud.points = {{0.25, 0.5}, {0.75, 0.5}};
    cloud.masses = {0.6, 0.4};
    auto [u, report] = periodic_solve(cloud, cloud.masses, unit_density());
    CHECK(report.converged);
    PeriodicDiagram d = periodic_diagram(cloud, u, unit_density());
    CHECK(d.masses[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(d.masses[1] == doctest::Approx(0.4).epsilon(1e-9));
    // 1D balance: strips of widths 0.6/0.4 around the sites mean the two
    // bisectors sit at u = -0.05 and u = 0.55, so
    // (x2 - x1).y = phi2 - phi1 gives u2 - u1 = 0.5*(0.55) - ... ; check via
    // the closed-form cut position instead
    bool found_interior_cut = false;
    for (const PeriodicDiagram::Edge& e : d.edges) {
        double cut_u = 0.5 * (e.a.u + e.b.u);
        if (std::abs(e.a.u - e.b.u) <= 1e-9 && cut_u > 0.1 && cut_u < 0.9) {
            CHECK(cut_u == doctest::Approx(0.55).epsilon(1e-8));
            found_interior_cut = true;
        }
    }
    CHECK(found_interior_cut);
}

TEST_CASE("translation equivariance of the periodic solve") {
    sdot::testing::UnitSampler s(7);
    TorusCloud cloud;
    for (int i = 0; i < 12; ++i) cloud.points.push_back(s.next_point());
    cloud.masses.assign(12, 1.0 / 12.0);
    auto [u0, r0] = periodic_solve(cloud, cloud.masses, unit_density());

    Point2 shift{0.31, 0.62};
    TorusCloud moved = cloud;
    for (Point2& p : moved.points) {
        p = p + shift;
        p.u -= std::floor(p.u);
        p.v -= std::floor(p.v);
    }
    auto [u1, r1] = periodic_solve(moved, moved.masses, unit_density());
    for (std::size_t i = 0; i < u0.u.size(); ++i)
        CHECK(u0.u[i] == doctest::Approx(u1.u[i]).epsilon(1e-7));
}

TEST_CASE("torus problem pushforward and h1 error of the exact data") {
    TorusProblem problem = make_torus_problem(0.5);
    // pushforward: T' (t) = 1 + beta cos(2 pi t) = marginal density, so the
    // image of f dx per axis is uniform; check by change of variables
    double mass = sdot::testing::gauss_legendre_1d(
        0.0, 1.0, [&](double t) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * t); },
        8);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    // uniform grid with beta = 0: facet targets are the cell centers, so the
    // H1 error of the identity map is bounded by the mesh norm
    TorusProblem identity = make_torus_problem(0.0);
    TorusCloud cloud = torus_grid_cloud(8, unit_density());
    auto [u, report] = periodic_solve(cloud, cloud.masses, unit_density());
    PeriodicDiagram d = periodic_diagram(cloud, u, unit_density());
    double err = torus_h1_error(periodic_transport_map(d), identity);
    CHECK(err > 0.0);
    CHECK(err <= cloud.mesh_norm);
}

TEST_CASE("periodic rate instance at one resolution") {
    TorusProblem problem = make_torus_problem(0.5);
    TorusCloud cloud = torus_grid_cloud(8, [&](Point2 p) { return problem.density(p); });
    auto [u, report] = periodic_solve(cloud, cloud.masses,
                                      [&](Point2 p) { return 1.0; });
    CHECK(report.converged);
    CHECK(report.final_residual_inf <= 1e-10);
    // solved u close to the exact quasi-periodic potential at the sites
    std::vector<double> exact(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        exact[i] = problem.u_exact(cloud.points[i]);
    mean_zero(exact);
    double dev = sdot::testing::max_abs_diff(u.u, exact);
    CHECK(dev <= 0.05 * cloud.mesh_norm);

    PeriodicDiagram d = periodic_diagram(cloud, u, [](Point2) { return 1.0; });
    double err = torus_h1_error(periodic_transport_map(d), problem);
    CHECK(err <= cloud.mesh_norm);
}

TEST_CASE("quasi-periodicity of the replicated diagram") {
    sdot::testing::UnitSampler s(15);
    TorusCloud cloud;
    for (int i = 0; i < 9; ++i) cloud.points.push_back(s.next_point());
    cloud.masses.assign(9, 1.0 / 9.0);
    auto [u, report] = periodic_solve(cloud, cloud.masses, unit_density());
    PeriodicDiagram d = periodic_diagram(cloud, u, unit_density());
    // Lipschitz sanity: every facet target stays within the fundamental cell
    // diameter plus one of its facet's sites
    for (std::size_t j = 0; j < d.facets.size(); ++j) {
        double nearest = 1e300;
        for (const PeriodicDiagram::Piece& piece : d.pieces)
            nearest = std::min(nearest, dist(d.facet_targets[j], piece.site));
        CHECK(nearest <= std::sqrt(2.0) + 1.0);
    }
}

TEST_CASE("periodic jacobian matches finite differences") {
    sdot::testing::UnitSampler s(15);
    TorusCloud cloud;
    for (int i = 0; i < 9; ++i) cloud.points.push_back(s.next_point());
    cloud.masses.assign(9, 1.0 / 9.0);
    Density g = unit_density();
    std::vector<double> u(9, 0.0);
    for (double& v : u) v = 0.02 * (s.next() - 0.5);
    mean_zero(u);

    PeriodicDiagram d = periodic_diagram(cloud, {u}, g);
    int n = 9;
    std::vector<std::vector<double>> dense(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(n)));
    std::map<std::pair<int, int>, double> acc;
    for (const PeriodicDiagram::Edge& e : d.edges) {
        acc[{std::min(e.i, e.j), std::max(e.i, e.j)}] +=
            integrate_segment(e.a, e.b, g) / dist(e.site_i, e.site_j);
    }
    for (const auto& [key, v] : acc) {
        dense[static_cast<std::size_t>(key.first)][static_cast<std::size_t>(key.second)] = v;
        dense[static_cast<std::size_t>(key.second)][static_cast<std::size_t>(key.first)] = v;
        dense[static_cast<std::size_t>(key.first)][static_cast<std::size_t>(key.first)] -= v;
        dense[static_cast<std::size_t>(key.second)][static_cast<std::size_t>(key.second)] -= v;
    }
    const double step = 1e-6;
    double max_err = 0.0, max_mag = 0.0;
    for (int j = 0; j < n; ++j) {
        std::vector<double> up = u, dn = u;
        up[static_cast<std::size_t>(j)] += step;
        dn[static_cast<std::size_t>(j)] -= step;
        std::vector<double> mu = periodic_diagram(cloud, {up}, g).masses;
        std::vector<double> md = periodic_diagram(cloud, {dn}, g).masses;
        for (int i = 0; i < n; ++i) {
            double fd = (mu[static_cast<std::size_t>(i)] - md[static_cast<std::size_t>(i)]) /
                        (2.0 * step);
            max_mag = std::max(max_mag, std::abs(fd));
            max_err = std::max(
                max_err,
                std::abs(dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - fd));
        }
    }
    CHECK(max_err / max_mag <= 1e-5);
}
