#include "sdot/reference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace sdot {

double SeparableProblem::map_1d(double alpha, double t) {
    return t + alpha * t * (1.0 - t);
}

double SeparableProblem::inverse_map_1d(double alpha, double s) {
    // root in [0,1] of alpha t^2 - (1+alpha) t + s = 0, in a form stable as
    // alpha -> 0
    double b = 1.0 + alpha;
    double disc = b * b - 4.0 * alpha * s;
    return 2.0 * s / (b + std::sqrt(disc));
}

double SeparableProblem::density(Point2 p) const {
    return (1.0 + alpha * (1.0 - 2.0 * p.u)) * (1.0 + alpha * (1.0 - 2.0 * p.v));
}

double SeparableProblem::potential(Point2 p) const {
    auto phi1 = [this](double t) {
        return 0.5 * t * t + alpha * (0.5 * t * t - t * t * t / 3.0);
    };
    return phi1(p.u) + phi1(p.v);
}

Point2 SeparableProblem::map(Point2 p) const {
    return {map_1d(alpha, p.u), map_1d(alpha, p.v)};
}

Point2 SeparableProblem::inverse_map(Point2 p) const {
    return {inverse_map_1d(alpha, p.u), inverse_map_1d(alpha, p.v)};
}

SeparableProblem make_separable_problem(double alpha) {
    if (!(std::abs(alpha) <= 0.9))
        throw std::invalid_argument("separable problem needs |alpha| <= 0.9");
    SeparableProblem problem{alpha};
    // construction identities: unit mass and det D^2 phi = f on a grid
    double mass = integrate(unit_square(), [&](Point2 p) { return problem.density(p); });
    if (std::abs(mass - 1.0) > 1e-12)
        throw std::logic_error("separable problem: density does not have unit mass");
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            Point2 p{(i + 0.5) / 100.0, (j + 0.5) / 100.0};
            double hess = (1.0 + alpha * (1.0 - 2.0 * p.u)) *
                          (1.0 + alpha * (1.0 - 2.0 * p.v));
            if (std::abs(hess - problem.density(p)) > 1e-12)
                throw std::logic_error("separable problem: Monge-Ampere identity fails");
        }
    }
    return problem;
}

double h1_error(const TransportMapPWC& map, const SeparableProblem& problem) {
    double err2 = 0.0;
    for (std::size_t j = 0; j < map.facets.size(); ++j) {
        Point2 y = map.targets[j];
        err2 += integrate(map.facets[j],
                          [&](Point2 x) { return norm2(y - problem.map(x)); });
    }
    return std::sqrt(std::max(0.0, err2));
}

double l2_error(const PiecewiseAffineConvex& pwa, const SeparableProblem& problem) {
    double domain_area = 0.0, mean_diff = 0.0;
    for (const PwaFacet& facet : pwa.facets) {
        const AffinePiece& piece = pwa.pieces[static_cast<std::size_t>(facet.piece)];
        domain_area += area(facet.region);
        mean_diff += integrate(facet.region, [&](Point2 x) {
            return dot(piece.gradient, x) + piece.intercept - problem.potential(x);
        });
    }
    double shift = mean_diff / domain_area;
    double err2 = 0.0;
    for (const PwaFacet& facet : pwa.facets) {
        const AffinePiece& piece = pwa.pieces[static_cast<std::size_t>(facet.piece)];
        err2 += integrate(facet.region, [&](Point2 x) {
            double d = dot(piece.gradient, x) + piece.intercept - problem.potential(x) -
                       shift;
            return d * d;
        });
    }
    return std::sqrt(std::max(0.0, err2));
}

double vertex_l2_error(const SourceCloud& cloud, const PotentialVector& phi,
                       const SeparableProblem& problem) {
    std::size_t n = cloud.points.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i)
        diff[i] = phi.values[i] - problem.potential(cloud.points[i]);
    mean_zero(diff);
    double sum2 = 0.0;
    for (double d : diff) sum2 += d * d;
    return std::sqrt(sum2 / static_cast<double>(n));
}

double inverse_map_error(const SourceCloud& cloud, const LaguerreDiagram& diagram,
                         const SeparableProblem& problem) {
    double err2 = 0.0;
    for (std::size_t i = 0; i < diagram.cells.size(); ++i) {
        Point2 xi = cloud.points[i];
        // one subdivision level: the inverse map carries a square root
        err2 += integrate(
            diagram.cells[i],
            [&](Point2 y) { return norm2(xi - problem.inverse_map(y)); }, 1);
    }
    return std::sqrt(std::max(0.0, err2));
}

RateFit fit_rate(const std::vector<double>& hs, const std::vector<double>& errors) {
    if (hs.size() != errors.size() || hs.size() < 3)
        throw std::invalid_argument("fit_rate needs at least 3 points");
    std::size_t n = hs.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hs[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("fit_rate needs positive values");
        x[i] = std::log(hs[i]);
        y[i] = std::log(errors[i]);
    }
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<double> RateReport::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const RateRow& r : rows) {
        if (name == "h1_error") out.push_back(r.h1_error);
        else if (name == "l2_error") out.push_back(r.l2_error);
        else if (name == "map_l2") out.push_back(r.map_l2);
        else if (name == "vertex_l2") out.push_back(r.vertex_l2);
        else if (name == "inverse_map_l2") out.push_back(r.inverse_map_l2);
        else if (name == "w1_bound") out.push_back(r.w1_bound);
        else throw std::invalid_argument("unknown rate column " + name);
    }
    return out;
}

RateFit RateReport::fit(const std::string& name) const {
    std::vector<double> hs;
    hs.reserve(rows.size());
    for (const RateRow& r : rows) hs.push_back(r.h);
    return fit_rate(hs, column(name));
}

void write_rate_csv(const RateReport& report, const std::string& path,
                    const std::vector<std::string>& fitted_columns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "h,N,h1_error,l2_error,map_l2,vertex_l2,inverse_map_l2,w1_bound,"
           "newton_iters,residual_inf\n";
    auto cell = [&out](double v) {
        out << ',';
        if (!std::isnan(v)) out << v;  // NaN marks a metric the mode does not produce
    };
    for (const RateRow& r : report.rows) {
        out << r.h << ',' << r.n;
        cell(r.h1_error);
        cell(r.l2_error);
        cell(r.map_l2);
        cell(r.vertex_l2);
        cell(r.inverse_map_l2);
        cell(r.w1_bound);
        out << ',' << r.newton_iters << ',' << r.residual_inf << '\n';
    }
    if (report.rows.size() < 3) return;  // no slope fit from fewer points
    auto footer = [&](const std::string& tag, auto select) {
        out << tag << ",";
        for (const std::string& name :
             {std::string("h1_error"), std::string("l2_error"), std::string("map_l2"),
              std::string("vertex_l2"), std::string("inverse_map_l2"),
              std::string("w1_bound")}) {
            bool fitted = std::find(fitted_columns.begin(), fitted_columns.end(), name) !=
                          fitted_columns.end();
            out << ',';
            if (fitted) out << select(report.fit(name));
        }
        out << ",,\n";
    };
    footer("slope", [](const RateFit& f) { return f.slope; });
    footer("r2", [](const RateFit& f) { return f.r2; });
}

namespace {

// 1D W1 distance between the separable marginals: int |F_a - F_a'| dt with
// F_a(t) = t + a t (1 - t), so the integrand is |a - a'| t (1 - t).
double marginal_w1(double a0, double a1) { return std::abs(a0 - a1) / 6.0; }

}  // namespace

StabilityReport stability_experiment(
    const std::vector<std::pair<double, double>>& alpha_pairs, int k) {
    if (k < 1) throw std::invalid_argument("stability_experiment: k must be >= 1");
    StabilityReport report;
    for (auto [a0, a1] : alpha_pairs) {
        SeparableProblem p0 = make_separable_problem(a0);
        SeparableProblem p1 = make_separable_problem(a1);
        StabilityRow row;
        row.alpha0 = a0;
        row.alpha1 = a1;
        row.d_l2_closed = std::abs(a0 - a1) / std::sqrt(15.0);

        // composite quadrature over k x k panels, degree-4 rule per panel;
        // the integrand |T_a - T_a'|^2 is a quartic, so panels are exact
        double d2 = 0.0;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                ConvexPolygon panel =
                    make_rectangle(static_cast<double>(i) / k, static_cast<double>(j) / k,
                                   static_cast<double>(i + 1) / k,
                                   static_cast<double>(j + 1) / k);
                d2 += integrate(panel, [&](Point2 x) {
                    return norm2(p0.map(x) - p1.map(x));
                });
            }
        }
        row.d_l2_quadrature = std::sqrt(std::max(0.0, d2));
        row.w1_bound = 2.0 * marginal_w1(a0, a1);  // componentwise 1D transport
        row.ratio = row.w1_bound > 0.0 ? row.d_l2_closed / std::sqrt(row.w1_bound) : 0.0;
        report.rows.push_back(row);
        if (a0 != a1) report.fitted_constant = std::max(report.fitted_constant, row.ratio);
    }
    return report;
}

void write_stability_csv(const StabilityReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "alpha0,alpha1,d_l2_closed,d_l2_quadrature,w1_bound,ratio\n";
    for (const StabilityRow& r : report.rows) {
        out << r.alpha0 << ',' << r.alpha1 << ',' << r.d_l2_closed << ','
            << r.d_l2_quadrature << ',' << r.w1_bound << ',' << r.ratio << '\n';
    }
    out << "fitted_constant,,,,," << report.fitted_constant << '\n';
}

}  // namespace sdot
