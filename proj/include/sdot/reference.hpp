#pragma once

#include <string>
#include <vector>

#include "sdot/convexity.hpp"
#include "sdot/laguerre.hpp"

namespace sdot {

// Separable analytic problem on the unit square with closed-form potential,
// map and inverse map; the target is the uniform measure, so the optimal map
// pushes f_alpha forward to Lebesgue:
//   f_alpha(x)   = prod_k (1 + alpha (1 - 2 x_k))
//   phi_alpha(x) = sum_k (x_k^2/2 + alpha (x_k^2/2 - x_k^3/3))
//   T_k(t)       = t + alpha t (1 - t)
struct SeparableProblem {
    double alpha = 0.0;

    double density(Point2 p) const;
    double potential(Point2 p) const;
    Point2 map(Point2 p) const;
    Point2 inverse_map(Point2 p) const;

    static double map_1d(double alpha, double t);
    static double inverse_map_1d(double alpha, double s);
};

// Validates |alpha| <= 0.9 and the construction identities (unit mass,
// det D^2 phi = f on a sample grid).
SeparableProblem make_separable_problem(double alpha);

double h1_error(const TransportMapPWC& map, const SeparableProblem& problem);
double l2_error(const PiecewiseAffineConvex& pwa, const SeparableProblem& problem);
double vertex_l2_error(const SourceCloud& cloud, const PotentialVector& phi,
                       const SeparableProblem& problem);
double inverse_map_error(const SourceCloud& cloud, const LaguerreDiagram& diagram,
                         const SeparableProblem& problem);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least squares of log e against log h.
RateFit fit_rate(const std::vector<double>& hs, const std::vector<double>& errors);

struct RateRow {
    double h = 0.0;
    int n = 0;
    double h1_error = 0.0;
    double l2_error = 0.0;
    double map_l2 = 0.0;
    double vertex_l2 = 0.0;
    double inverse_map_l2 = 0.0;
    double w1_bound = 0.0;
    int newton_iters = 0;
    double residual_inf = 0.0;
};

struct RateReport {
    std::vector<RateRow> rows;

    std::vector<double> column(const std::string& name) const;
    RateFit fit(const std::string& name) const;
};

// CSV columns h,N,h1_error,l2_error,map_l2,vertex_l2,inverse_map_l2,
// w1_bound,newton_iters,residual_inf plus slope/r2 footer rows.
void write_rate_csv(const RateReport& report, const std::string& path,
                    const std::vector<std::string>& fitted_columns);

struct StabilityRow {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double d_l2_closed = 0.0;  // |a - a'| / sqrt(15)
    double d_l2_quadrature = 0.0;
    double w1_bound = 0.0;     // componentwise 1D transport
    double ratio = 0.0;        // d_l2 / sqrt(w1)
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double fitted_constant = 0.0;  // max ratio across rows with alpha0 != alpha1
};

// d_L2(T_alpha, T_alpha') against the W1 distance of the sources; k sets the
// number of quadrature panels per axis.
StabilityReport stability_experiment(
    const std::vector<std::pair<double, double>>& alpha_pairs, int k);

void write_stability_csv(const StabilityReport& report, const std::string& path);

}  // namespace sdot
