#include "sdot/reference.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sdot/solver.hpp"
#include "test_support.hpp"

using namespace sdot;
using sdot::testing::stratified_mean;

TEST_CASE("separable problem identities") {
    SeparableProblem p = make_separable_problem(0.5);
    CHECK(p.density({0.0, 0.0}) == doctest::Approx(2.25));
    CHECK(p.density({1.0, 1.0}) == doctest::Approx(0.25));
    // gradient of the potential is the map
    for (double t : {0.1, 0.3, 0.7, 0.95}) {
        double step = 1e-7;
        double fd = (p.potential({t + step, 0.4}) - p.potential({t - step, 0.4})) /
                    (2.0 * step);
        CHECK(fd == doctest::Approx(SeparableProblem::map_1d(0.5, t)).epsilon(1e-7));
    }
    // inverse map really inverts
    for (double t : {0.0, 0.2, 0.55, 1.0}) {
        double s = SeparableProblem::map_1d(0.5, t);
        CHECK(SeparableProblem::inverse_map_1d(0.5, s) == doctest::Approx(t).epsilon(1e-13));
    }
    CHECK_THROWS_AS(make_separable_problem(0.95), std::invalid_argument);
}

TEST_CASE("separable pushforward is uniform (Kolmogorov-Smirnov)") {
    // sample x ~ mu_alpha by inverse-CDF per axis, push through T, and check
    // the image marginals against the uniform CDF
    SeparableProblem p = make_separable_problem(0.5);
    sdot::testing::UnitSampler s(2024);
    const int n = 10000;
    std::vector<double> img_u, img_v;
    img_u.reserve(n);
    img_v.reserve(n);
    for (int i = 0; i < n; ++i) {
        // the marginal CDF is t + alpha t(1-t) = the 1D map itself
        Point2 x{SeparableProblem::inverse_map_1d(0.5, s.next()),
                 SeparableProblem::inverse_map_1d(0.5, s.next())};
        Point2 y = p.map(x);
        CHECK(y.u >= -1e-12);
        CHECK(y.u <= 1.0 + 1e-12);
        img_u.push_back(y.u);
        img_v.push_back(y.v);
    }
    for (std::vector<double>* axis : {&img_u, &img_v}) {
        std::sort(axis->begin(), axis->end());
        double ks = 0.0;
        for (int i = 0; i < n; ++i) {
            double emp_hi = static_cast<double>(i + 1) / n;
            double emp_lo = static_cast<double>(i) / n;
            double c = (*axis)[static_cast<std::size_t>(i)];
            ks = std::max({ks, std::abs(emp_hi - c), std::abs(c - emp_lo)});
        }
        CHECK(ks <= 2.0 / std::sqrt(static_cast<double>(n)));
    }
}

namespace {

struct Solved {
    SourceCloud cloud;
    TargetDomain target;
    PotentialVector phi;
    LaguerreDiagram diagram;
};

Solved solve_grid(double alpha, int k) {
    Solved s{grid_cloud(unit_square(), k), uniform_target(unit_square()), {}, {}};
    SeparableProblem problem = make_separable_problem(alpha);
    SourceMeasure mu{unit_square(), [problem](Point2 p) { return problem.density(p); }};
    DiscreteMeasure f = discretize(mu, s.cloud);
    auto [phi, report] = damped_newton(s.cloud, f, s.target);
    s.phi = std::move(phi);
    s.diagram = build_diagram(s.cloud, s.phi, s.target);
    return s;
}

}  // namespace

TEST_CASE("h1_error of the solved identity problem is below the mesh norm") {
    Solved s = solve_grid(0.0, 8);
    SeparableProblem problem = make_separable_problem(0.0);
    TransportMapPWC map = transport_map(s.cloud, s.phi, s.diagram);
    double err = h1_error(map, problem);
    CHECK(err > 0.0);
    CHECK(err <= s.cloud.mesh_norm);
}

TEST_CASE("l2_error of exact site values decays like h^2") {
    SeparableProblem problem = make_separable_problem(0.0);
    SourceCloud cloud = grid_cloud(unit_square(), 8);
    PotentialVector phi;
    for (Point2 p : cloud.points) phi.values.push_back(problem.potential(p));
    mean_zero(phi.values);
    PiecewiseAffineConvex pwa = extend_pwa(cloud, phi);
    double err = l2_error(pwa, problem);
    CHECK(err <= cloud.mesh_norm * cloud.mesh_norm);

    SUBCASE("insensitive to constant shifts") {
        PotentialVector shifted = phi;
        for (double& v : shifted.values) v += 5.0;
        PiecewiseAffineConvex pwa2 = extend_pwa(cloud, shifted);
        CHECK(std::abs(l2_error(pwa2, problem) - err) <= 1e-12);
    }
}

TEST_CASE("vertex_l2_error") {
    SeparableProblem problem = make_separable_problem(0.5);
    SourceCloud cloud = grid_cloud(unit_square(), 6);
    PotentialVector phi;
    for (Point2 p : cloud.points) phi.values.push_back(problem.potential(p));
    CHECK(vertex_l2_error(cloud, phi, problem) <= 1e-14);
    for (double& v : phi.values) v += 5.0;
    CHECK(vertex_l2_error(cloud, phi, problem) <= 1e-12);
}

TEST_CASE("inverse_map_error single site against Monte Carlo") {
    SeparableProblem problem = make_separable_problem(0.5);
    SourceCloud cloud = cloud_from_points(unit_square(), {{0.4, 0.6}});
    TargetDomain target = uniform_target(unit_square());
    LaguerreDiagram d = build_diagram(cloud, PotentialVector{{0.0}}, target);
    double err = inverse_map_error(cloud, d, problem);
    double oracle2 = stratified_mean(1000, 55, [&](Point2 y) {
        return norm2(Point2{0.4, 0.6} - problem.inverse_map(y));
    });
    CHECK(std::abs(err * err - oracle2) <= 1e-3);
}

TEST_CASE("inverse_map_error at the solved identity instance is below h") {
    Solved s = solve_grid(0.0, 8);
    SeparableProblem problem = make_separable_problem(0.0);
    CHECK(inverse_map_error(s.cloud, s.diagram, problem) <= s.cloud.mesh_norm);
}

TEST_CASE("fit_rate") {
    std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> linear, sqrt_rate;
    for (double h : hs) {
        linear.push_back(h);
        sqrt_rate.push_back(3.0 * std::sqrt(h));
    }
    RateFit f1 = fit_rate(hs, linear);
    CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f1.r2 == doctest::Approx(1.0).epsilon(1e-12));
    RateFit f2 = fit_rate(hs, sqrt_rate);
    CHECK(f2.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f2.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    std::vector<double> with_zero = {0.1, 0.0, 0.2, 0.3};
    CHECK_THROWS_AS(fit_rate(hs, with_zero), std::invalid_argument);
    std::vector<double> two = {0.1, 0.2};
    CHECK_THROWS_AS(fit_rate(two, two), std::invalid_argument);
}

TEST_CASE("stability experiment closed forms") {
    std::vector<std::pair<double, double>> pairs = {
        {0.3, 0.3}, {0.0, 0.1}, {0.0, 0.2}, {0.0, 0.3}, {0.0, 0.4}, {0.0, 0.5}};
    StabilityReport report = stability_experiment(pairs, 4);
    REQUIRE(report.rows.size() == 6);

    CHECK(report.rows[0].d_l2_closed == 0.0);
    CHECK(report.rows[0].d_l2_quadrature <= 1e-12);
    CHECK(report.rows[0].w1_bound == 0.0);

    // (0, 0.5): closed form 0.5/sqrt(15)
    const StabilityRow& last = report.rows.back();
    CHECK(last.d_l2_closed == doctest::Approx(0.5 / std::sqrt(15.0)).epsilon(1e-14));
    CHECK(std::abs(last.d_l2_quadrature - last.d_l2_closed) <= 1e-8);
    CHECK(last.w1_bound == doctest::Approx(0.5 / 3.0).epsilon(1e-14));

    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        CHECK(std::abs(report.rows[i].d_l2_quadrature - report.rows[i].d_l2_closed) <=
              1e-8);
        lo = std::min(lo, report.rows[i].ratio);
        hi = std::max(hi, report.rows[i].ratio);
    }
    CHECK(hi / lo <= 3.0);
    CHECK(report.fitted_constant == doctest::Approx(hi));
}

TEST_CASE("rate csv format") {
    namespace fs = std::filesystem;
    RateReport report;
    for (int k : {2, 4, 8}) {
        RateRow row;
        row.h = std::sqrt(2.0) / k;
        row.n = k * k;
        row.h1_error = row.h;
        row.l2_error = row.h * row.h;
        row.map_l2 = row.h;
        row.vertex_l2 = row.h;
        row.inverse_map_l2 = std::sqrt(row.h);
        row.w1_bound = 0.38 * row.h;
        row.newton_iters = 3;
        row.residual_inf = 1e-12;
        report.rows.push_back(row);
    }
    CHECK(report.fit("h1_error").slope == doctest::Approx(1.0));
    CHECK(report.fit("inverse_map_l2").slope == doctest::Approx(0.5));

    fs::path path = fs::temp_directory_path() / "sdot_rates_test.csv";
    write_rate_csv(report, path.string(),
                   {"h1_error", "l2_error", "map_l2", "vertex_l2", "inverse_map_l2"});
    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "h,N,h1_error,l2_error,map_l2,vertex_l2,inverse_map_l2,w1_bound,"
          "newton_iters,residual_inf");
    int rows = 0;
    bool slope_row = false, r2_row = false;
    for (std::string line; std::getline(in, line);) {
        rows += !line.empty();
        slope_row = slope_row || line.rfind("slope,", 0) == 0;
        r2_row = r2_row || line.rfind("r2,", 0) == 0;
    }
    CHECK(rows == 5);  // 3 data rows + 2 footer rows
    CHECK(slope_row);
    CHECK(r2_row);
    fs::remove(path);
}
