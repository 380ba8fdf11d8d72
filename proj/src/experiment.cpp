#include "sdot/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "sdot/convexity.hpp"

namespace sdot {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> parse_int_list(const json& value, const std::string& field) {
    if (!value.is_array() || value.empty())
        throw ConfigError("field '" + field + "' must be a nonempty array of integers");
    std::vector<int> out;
    int prev = 0;
    for (const json& item : value) {
        if (!item.is_number_integer() || item.get<int>() < 1)
            throw ConfigError("field '" + field + "' must contain positive integers");
        int v = item.get<int>();
        if (!out.empty() && v <= prev)
            throw ConfigError("field '" + field + "' must be strictly increasing");
        out.push_back(v);
        prev = v;
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    ExperimentConfig config;
    std::string mode = root.value("mode", "");
    if (mode == "solve") config.mode = ExperimentConfig::Mode::solve;
    else if (mode == "rates") config.mode = ExperimentConfig::Mode::rates;
    else if (mode == "stability") config.mode = ExperimentConfig::Mode::stability;
    else if (mode == "periodic-rates") config.mode = ExperimentConfig::Mode::periodic_rates;
    else throw ConfigError("field 'mode' must be solve|rates|stability|periodic-rates");

    if (root.contains("alpha")) {
        config.alpha = root["alpha"].get<double>();
        if (!(std::abs(config.alpha) <= 0.9))
            throw ConfigError("field 'alpha' must satisfy |alpha| <= 0.9");
    }
    if (root.contains("beta")) {
        config.beta = root["beta"].get<double>();
        if (!(std::abs(config.beta) < 1.0))
            throw ConfigError("field 'beta' must satisfy |beta| < 1");
    }
    if (root.contains("grid")) config.grid_ks = parse_int_list(root["grid"], "grid");
    if (root.contains("random")) config.random_ns = parse_int_list(root["random"], "random");
    if (root.contains("seed")) config.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("masses")) {
        std::string masses = root["masses"].get<std::string>();
        if (masses == "equal") config.equal_masses = true;
        else if (masses == "density") config.equal_masses = false;
        else throw ConfigError("field 'masses' must be equal|density");
    }
    if (root.contains("pairs")) {
        if (!root["pairs"].is_array() || root["pairs"].empty())
            throw ConfigError("field 'pairs' must be a nonempty array of [a, a'] pairs");
        for (const json& p : root["pairs"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError("field 'pairs' must contain [a, a'] pairs");
            double a0 = p[0].get<double>(), a1 = p[1].get<double>();
            if (std::abs(a0) > 0.9 || std::abs(a1) > 0.9)
                throw ConfigError("field 'pairs' entries must satisfy |alpha| <= 0.9");
            config.stability_pairs.emplace_back(a0, a1);
        }
    }
    if (root.contains("stability_quadrature")) {
        config.stability_quadrature = root["stability_quadrature"].get<int>();
        if (config.stability_quadrature < 1)
            throw ConfigError("field 'stability_quadrature' must be >= 1");
    }
    if (root.contains("solver")) {
        const json& s = root["solver"];
        config.solver.tol_residual = s.value("tol_residual", config.solver.tol_residual);
        config.solver.max_iters = s.value("max_iters", config.solver.max_iters);
        config.solver.epsilon0_factor =
            s.value("epsilon0_factor", config.solver.epsilon0_factor);
        config.solver.backtrack_factor =
            s.value("backtrack_factor", config.solver.backtrack_factor);
        config.solver.min_step = s.value("min_step", config.solver.min_step);
        if (!(config.solver.tol_residual > 0.0) || config.solver.max_iters < 1 ||
            !(config.solver.epsilon0_factor > 0.0 && config.solver.epsilon0_factor < 1.0) ||
            !(config.solver.backtrack_factor > 0.0 && config.solver.backtrack_factor < 1.0))
            throw ConfigError("field 'solver' has out-of-range entries");
    }
    if (root.contains("out")) config.out_dir = root["out"].get<std::string>();
    config.dump_diagram = root.value("dump_diagram", false);
    config.dump_map = root.value("dump_map", false);
    if (root.contains("threads")) {
        config.threads = root["threads"].get<int>();
        if (config.threads < 1) throw ConfigError("field 'threads' must be >= 1");
    }

    bool needs_cloud = config.mode == ExperimentConfig::Mode::solve;
    if (config.mode == ExperimentConfig::Mode::rates ||
        config.mode == ExperimentConfig::Mode::periodic_rates) {
        if (config.grid_ks.empty())
            throw ConfigError("field 'grid' is required for rate experiments");
    } else if (needs_cloud && config.grid_ks.empty() && config.random_ns.empty()) {
        throw ConfigError("solve mode needs a 'grid' or 'random' cloud list");
    }
    if (config.mode == ExperimentConfig::Mode::stability && config.stability_pairs.empty()) {
        for (double t : {0.1, 0.2, 0.3, 0.4, 0.5}) config.stability_pairs.emplace_back(0.0, t);
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig config = parse_config_text(buf.str());
    if (const char* env_seed = std::getenv("MA_SEED")) {
        config.seed = std::strtoull(env_seed, nullptr, 10);
    }
    return config;
}

SolvedGridInstance solve_separable_grid(double alpha, int k,
                                        const SolveSettings& settings) {
    SeparableProblem problem = make_separable_problem(alpha);
    SolvedGridInstance out;
    out.k = k;
    out.cloud = grid_cloud(unit_square(), k);
    out.target = uniform_target(unit_square());
    SourceMeasure mu{unit_square(), [problem](Point2 p) { return problem.density(p); }};
    out.f = discretize(mu, out.cloud);
    auto [phi, report] = damped_newton(out.cloud, out.f, out.target, settings);
    out.phi = std::move(phi);
    out.report = std::move(report);
    out.diagram = build_diagram(out.cloud, out.phi, out.target);
    out.w1_bound = w1_upper_bound(mu, out.cloud);
    out.collar_area = area(unit_square()) - area(convex_hull(out.cloud.points));
    return out;
}

RateRow rate_row(const SolvedGridInstance& instance, const SeparableProblem& problem) {
    RateRow row;
    row.h = instance.cloud.mesh_norm;
    row.n = instance.cloud.size();
    PiecewiseAffineConvex pwa = extend_pwa(instance.cloud, instance.phi);
    TransportMapPWC map = transport_map(pwa, instance.diagram);

    // facet-sum metric straight from the hull complex
    double err2 = 0.0;
    for (const PwaFacet& facet : pwa.facets) {
        Point2 y = pwa.pieces[static_cast<std::size_t>(facet.piece)].gradient;
        err2 += integrate(facet.region,
                          [&](Point2 x) { return norm2(y - problem.map(x)); });
    }
    row.h1_error = std::sqrt(std::max(0.0, err2));
    row.map_l2 = h1_error(map, problem);
    if (std::abs(row.h1_error - row.map_l2) > 1e-12 * (1.0 + row.h1_error))
        throw std::logic_error("transport-map metric deviates from the facet sum");

    row.l2_error = l2_error(pwa, problem);
    row.vertex_l2 = vertex_l2_error(instance.cloud, instance.phi, problem);
    row.inverse_map_l2 = inverse_map_error(instance.cloud, instance.diagram, problem);
    row.w1_bound = instance.w1_bound;
    row.newton_iters = instance.report.iterations;
    row.residual_inf = instance.report.final_residual_inf;
    return row;
}

namespace {

template <typename Task>
auto run_over_ks(const std::vector<int>& ks, int threads, Task task)
    -> std::vector<decltype(task(1))> {
    std::vector<decltype(task(1))> results(ks.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < ks.size(); ++i) results[i] = task(ks[i]);
        return results;
    }
    std::vector<std::future<decltype(task(1))>> futures;
    futures.reserve(ks.size());
    for (int k : ks) futures.push_back(std::async(std::launch::async, task, k));
    for (std::size_t i = 0; i < ks.size(); ++i) results[i] = futures[i].get();
    return results;
}

}  // namespace

RateReport run_rates(double alpha, const std::vector<int>& ks,
                     const SolveSettings& settings, int threads) {
    SeparableProblem problem = make_separable_problem(alpha);
    RateReport report;
    report.rows = run_over_ks(ks, threads, [&](int k) {
        return rate_row(solve_separable_grid(alpha, k, settings), problem);
    });
    return report;
}

SolvedTorusInstance solve_torus_grid(double beta, int k, const SolveSettings& settings) {
    TorusProblem problem = make_torus_problem(beta);
    SolvedTorusInstance out;
    out.k = k;
    out.cloud = torus_grid_cloud(k, [problem](Point2 p) { return problem.density(p); });
    auto [u, report] = periodic_solve(out.cloud, out.cloud.masses,
                                      [](Point2) { return 1.0; }, settings);
    out.u = std::move(u);
    out.report = std::move(report);
    out.diagram = periodic_diagram(out.cloud, out.u, [](Point2) { return 1.0; });
    return out;
}

RateReport run_periodic_rates(double beta, const std::vector<int>& ks,
                              const SolveSettings& settings, int threads) {
    TorusProblem problem = make_torus_problem(beta);
    RateReport report;
    report.rows = run_over_ks(ks, threads, [&](int k) {
        SolvedTorusInstance instance = solve_torus_grid(beta, k, settings);
        RateRow row;
        row.h = instance.cloud.mesh_norm;
        row.n = instance.cloud.size();
        row.h1_error = torus_h1_error(periodic_transport_map(instance.diagram), problem);
        row.l2_error = kNaN;
        row.map_l2 = kNaN;
        std::vector<double> exact(instance.cloud.points.size());
        for (std::size_t i = 0; i < exact.size(); ++i)
            exact[i] = problem.u_exact(instance.cloud.points[i]);
        mean_zero(exact);
        std::vector<double> solved = instance.u.u;
        mean_zero(solved);
        double sum2 = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i)
            sum2 += (solved[i] - exact[i]) * (solved[i] - exact[i]);
        row.vertex_l2 = std::sqrt(sum2 / static_cast<double>(exact.size()));
        row.inverse_map_l2 = kNaN;
        // W1(mu, mu_h) bound over the periodic Voronoi squares
        double w1 = 0.0;
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i < k; ++i) {
                ConvexPolygon cell = make_rectangle(
                    static_cast<double>(i) / k, static_cast<double>(j) / k,
                    static_cast<double>(i + 1) / k, static_cast<double>(j + 1) / k);
                Point2 center{(i + 0.5) / k, (j + 0.5) / k};
                w1 += integrate_from(cell, center, [&](Point2 p) {
                    return dist(p, center) * problem.density(p);
                }, 1);
            }
        }
        row.w1_bound = w1;
        row.newton_iters = instance.report.iterations;
        row.residual_inf = instance.report.final_residual_inf;
        return row;
    });
    return report;
}

namespace {

void dump_solve_artifacts(const ExperimentConfig& config,
                          const std::filesystem::path& dir, const std::string& label,
                          const SourceCloud& cloud, const PotentialVector& phi,
                          const LaguerreDiagram& diagram, const SolveReport& report) {
    write_trace_csv(report, (dir / ("trace_" + label + ".csv")).string());
    if (config.dump_diagram)
        write_diagram_csv(diagram, (dir / ("diagram_" + label)).string());
    if (config.dump_map) {
        try {
            TransportMapPWC map = transport_map(cloud, phi, diagram);
            write_map_csv(map, (dir / ("map_" + label)).string());
        } catch (const std::exception& err) {
            std::cerr << "map dump skipped for " << label << ": " << err.what() << "\n";
        }
    }
}

int run_loaded(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    fs::path dir(config.out_dir);
    fs::create_directories(dir);

    switch (config.mode) {
        case ExperimentConfig::Mode::rates: {
            RateReport report = run_rates(config.alpha, config.grid_ks, config.solver,
                                          config.threads);
            write_rate_csv(report, (dir / "report.csv").string(),
                           {"h1_error", "l2_error", "map_l2", "vertex_l2",
                            "inverse_map_l2", "w1_bound"});
            if (config.dump_diagram || config.dump_map) {
                for (int k : config.grid_ks) {
                    SolvedGridInstance inst =
                        solve_separable_grid(config.alpha, k, config.solver);
                    dump_solve_artifacts(config, dir, "k" + std::to_string(k), inst.cloud,
                                         inst.phi, inst.diagram, inst.report);
                }
            }
            for (const RateRow& row : report.rows)
                std::cout << "rates: h=" << row.h << " N=" << row.n
                          << " h1=" << row.h1_error << " iters=" << row.newton_iters
                          << "\n";
            if (report.rows.size() >= 3)
                std::cout << "rates: h1 slope " << report.fit("h1_error").slope
                          << ", l2 slope " << report.fit("l2_error").slope << "\n";
            return 0;
        }
        case ExperimentConfig::Mode::periodic_rates: {
            RateReport report = run_periodic_rates(config.beta, config.grid_ks,
                                                   config.solver, config.threads);
            write_rate_csv(report, (dir / "report.csv").string(),
                           {"h1_error", "vertex_l2", "w1_bound"});
            if (config.dump_diagram) {
                for (int k : config.grid_ks) {
                    SolvedTorusInstance inst = solve_torus_grid(config.beta, k, config.solver);
                    std::vector<ConvexPolygon> pieces;
                    std::vector<double> masses;
                    for (const PeriodicDiagram::Piece& piece : inst.diagram.pieces) {
                        pieces.push_back(piece.region);
                        masses.push_back(piece.mass);
                    }
                    std::string prefix =
                        (dir / ("diagram_k" + std::to_string(k))).string();
                    write_cells_csv(prefix + "_cells.csv", pieces, true);
                    write_cell_masses_csv(prefix + "_masses.csv", masses, true);
                }
            }
            if (report.rows.size() >= 3)
                std::cout << "periodic rates: h1 slope " << report.fit("h1_error").slope
                          << "\n";
            return 0;
        }
        case ExperimentConfig::Mode::stability: {
            StabilityReport report =
                stability_experiment(config.stability_pairs, config.stability_quadrature);
            write_stability_csv(report, (dir / "stability.csv").string());
            std::cout << "stability: fitted constant " << report.fitted_constant << "\n";
            return 0;
        }
        case ExperimentConfig::Mode::solve:
            break;
    }

    // solve mode
    RateReport report;
    TargetDomain target = uniform_target(unit_square());
    SeparableProblem problem = make_separable_problem(config.alpha);
    SourceMeasure mu{unit_square(), [problem](Point2 p) { return problem.density(p); }};
    auto solve_one = [&](const SourceCloud& cloud, const std::string& label) {
        DiscreteMeasure f;
        if (config.equal_masses) {
            f.points = cloud.points;
            f.masses.assign(cloud.points.size(),
                            1.0 / static_cast<double>(cloud.points.size()));
        } else {
            f = discretize(mu, cloud);
        }
        auto [phi, solve_report] = damped_newton(cloud, f, target, config.solver);
        LaguerreDiagram diagram = build_diagram(cloud, phi, target);
        dump_solve_artifacts(config, dir, label, cloud, phi, diagram, solve_report);
        RateRow row;
        row.h = cloud.mesh_norm;
        row.n = cloud.size();
        row.h1_error = kNaN;
        row.l2_error = kNaN;
        row.map_l2 = kNaN;
        row.vertex_l2 = kNaN;
        row.inverse_map_l2 = kNaN;
        row.w1_bound = config.equal_masses ? kNaN : w1_upper_bound(mu, cloud);
        row.newton_iters = solve_report.iterations;
        row.residual_inf = solve_report.final_residual_inf;
        report.rows.push_back(row);
        std::cout << "solve " << label << ": iters=" << row.newton_iters
                  << " residual=" << row.residual_inf
                  << " boundary_distance=" << cloud.boundary_distance << "\n";
    };
    for (int k : config.grid_ks)
        solve_one(grid_cloud(unit_square(), k), "k" + std::to_string(k));
    for (int n : config.random_ns)
        solve_one(random_cloud(unit_square(), n, config.seed), "n" + std::to_string(n));
    write_rate_csv(report, (dir / "report.csv").string(), {});
    return 0;
}

}  // namespace

int run_experiment(const std::string& config_path, const std::string& out_override,
                   int threads_override) {
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    }
    if (!out_override.empty()) config.out_dir = out_override;
    if (threads_override > 0) config.threads = threads_override;
    try {
        return run_loaded(config);
    } catch (const SolveError& err) {
        std::cerr << "solver failed: " << err.what() << " after "
                  << err.report.iterations << " iterations, residual "
                  << err.report.final_residual_inf << "\n";
        std::filesystem::create_directories(config.out_dir);
        write_trace_csv(err.report,
                        (std::filesystem::path(config.out_dir) / "trace_failed.csv").string());
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
}

}  // namespace sdot
