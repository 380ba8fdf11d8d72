#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdot/periodic.hpp"
#include "sdot/reference.hpp"
#include "sdot/solver.hpp"

namespace sdot {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    enum class Mode { solve, rates, stability, periodic_rates };

    Mode mode = Mode::rates;
    double alpha = 0.5;  // separable reference problems
    double beta = 0.5;   // torus reference problems
    std::vector<int> grid_ks;
    std::vector<int> random_ns;
    std::uint64_t seed = 7;
    bool equal_masses = true;  // solve mode: f_i = 1/N instead of discretized density
    std::vector<std::pair<double, double>> stability_pairs;
    int stability_quadrature = 16;
    SolveSettings solver;
    std::string out_dir = ".";
    bool dump_diagram = false;
    bool dump_map = false;
    int threads = 1;
};

// Parses and validates the JSON config; throws ConfigError with the
// offending field in the message.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct SolvedGridInstance {
    int k = 0;
    SourceCloud cloud;
    TargetDomain target;
    DiscreteMeasure f;
    PotentialVector phi;
    SolveReport report;
    LaguerreDiagram diagram;
    double w1_bound = 0.0;
    double collar_area = 0.0;  // area(X) - area(X_h), reported as a diagnostic
};

SolvedGridInstance solve_separable_grid(double alpha, int k,
                                        const SolveSettings& settings);

RateRow rate_row(const SolvedGridInstance& instance, const SeparableProblem& problem);

RateReport run_rates(double alpha, const std::vector<int>& ks,
                     const SolveSettings& settings, int threads = 1);

struct SolvedTorusInstance {
    int k = 0;
    TorusCloud cloud;
    QuasiPeriodicPotential u;
    SolveReport report;
    PeriodicDiagram diagram;
};

SolvedTorusInstance solve_torus_grid(double beta, int k, const SolveSettings& settings);

RateReport run_periodic_rates(double beta, const std::vector<int>& ks,
                              const SolveSettings& settings, int threads = 1);

// Runs the configured experiment and writes report/dump CSVs into the output
// directory. Returns 0 on success, 2 on config errors, 3 on solver failures.
int run_experiment(const std::string& config_path, const std::string& out_override = "",
                   int threads_override = 0);

}  // namespace sdot
