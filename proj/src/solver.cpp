#include "sdot/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace sdot {

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double min_of(const std::vector<double>& a) {
    return *std::min_element(a.begin(), a.end());
}

// Solves (-H) d = r on the mean-zero subspace by pinning unknown 0, then
// verifies the residual of the full singular system.
std::vector<double> newton_direction(const MassJacobian& h, const std::vector<double>& r) {
    int n = h.n;
    if (n == 1) return {0.0};
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(h.edge_value.size() * 4 + static_cast<std::size_t>(n));
    auto add = [&](int i, int j, double v) {
        if (i == 0 || j == 0) return;  // pinned
        trips.emplace_back(i - 1, j - 1, v);
    };
    for (std::size_t k = 0; k < h.edge_value.size(); ++k) {
        add(h.edge_i[k], h.edge_j[k], -h.edge_value[k]);
        add(h.edge_j[k], h.edge_i[k], -h.edge_value[k]);
    }
    for (int i = 0; i < n; ++i) add(i, i, -h.diagonal[static_cast<std::size_t>(i)]);

    Eigen::SparseMatrix<double> k(n - 1, n - 1);
    k.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd rhs(n - 1);
    for (int i = 1; i < n; ++i) rhs[i - 1] = r[static_cast<std::size_t>(i)];

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("linear solve failed");
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("linear solve failed");

    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i < n; ++i) d[static_cast<std::size_t>(i)] = sol[i - 1];

    // residual of the full system K d = r (the pinned row must come out
    // consistent because both K and r annihilate constants)
    std::vector<double> kd(static_cast<std::size_t>(n), 0.0);
    for (std::size_t e = 0; e < h.edge_value.size(); ++e) {
        int i = h.edge_i[e], j = h.edge_j[e];
        kd[static_cast<std::size_t>(i)] -= h.edge_value[e] * d[static_cast<std::size_t>(j)];
        kd[static_cast<std::size_t>(j)] -= h.edge_value[e] * d[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i)
        kd[static_cast<std::size_t>(i)] -= h.diagonal[static_cast<std::size_t>(i)] *
                                           d[static_cast<std::size_t>(i)];
    double scale = 0.0, resid = 0.0;
    for (int i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(r[static_cast<std::size_t>(i)]));
        resid = std::max(resid, std::abs(kd[static_cast<std::size_t>(i)] -
                                         r[static_cast<std::size_t>(i)]));
    }
    if (resid > 1e-6 * std::max(scale, 1e-300))
        throw std::runtime_error("linear solve failed");
    mean_zero(d);
    return d;
}

class LaguerreSystem final : public MassSystem {
  public:
    LaguerreSystem(const SourceCloud& cloud, const TargetDomain& target)
        : cloud_(cloud), target_(target) {}

    int size() const override { return cloud_.size(); }

    void set_potential(const std::vector<double>& phi) override {
        diagram_ = build_diagram(cloud_, PotentialVector{phi}, target_);
        phi_ = phi;
    }

    const std::vector<double>& masses() const override { return diagram_.masses; }

    double energy_base() const override {
        double e = 0.0;
        for (int i = 0; i < diagram_.size(); ++i) {
            auto k = static_cast<std::size_t>(i);
            e += diagram_.masses[k] *
                 (dot(cloud_.points[k], diagram_.centroids[k]) - phi_[k]);
        }
        return e;
    }

    MassJacobian jacobian() const override {
        return mass_jacobian(diagram_, cloud_, target_);
    }

    const LaguerreDiagram& diagram() const { return diagram_; }

  private:
    const SourceCloud& cloud_;
    const TargetDomain& target_;
    LaguerreDiagram diagram_;
    std::vector<double> phi_;
};

}  // namespace

std::pair<std::vector<double>, SolveReport> damped_newton_core(
    MassSystem& system, const std::vector<double>& f, const std::vector<double>& phi0,
    const SolveSettings& settings) {
    int n = system.size();
    if (static_cast<int>(f.size()) != n || static_cast<int>(phi0.size()) != n)
        throw std::invalid_argument("size mismatch");
    if (!(settings.tol_residual > 0.0) || settings.max_iters < 1 ||
        !(settings.epsilon0_factor > 0.0 && settings.epsilon0_factor < 1.0) ||
        !(settings.backtrack_factor > 0.0 && settings.backtrack_factor < 1.0) ||
        !(settings.min_step > 0.0))
        throw std::invalid_argument("invalid solver settings");
    double fsum = std::accumulate(f.begin(), f.end(), 0.0);
    if (std::abs(fsum - 1.0) > 1e-9)
        throw std::invalid_argument("masses must sum to one");

    SolveReport report;
    std::vector<double> phi = phi0;
    mean_zero(phi);
    system.set_potential(phi);
    std::vector<double> m = system.masses();
    if (min_of(m) <= 0.0) throw SolveError("infeasible initialization", report);

    double eps0 = settings.epsilon0_factor * std::min(min_of(f), min_of(m));
    double resid = linf(m, f);
    double e = system.energy_base() +
               std::inner_product(f.begin(), f.end(), phi.begin(), 0.0);
    report.residuals.push_back(resid);
    report.step_sizes.push_back(0.0);
    report.energies.push_back(e);
    report.min_masses.push_back(min_of(m));

    for (int iter = 1; iter <= settings.max_iters; ++iter) {
        if (resid <= settings.tol_residual) {
            report.converged = true;
            break;
        }
        MassJacobian h = system.jacobian();
        std::vector<double> r(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto k = static_cast<std::size_t>(i);
            r[k] = m[k] - f[k];
        }
        std::vector<double> d = newton_direction(h, r);

        double tau = 1.0;
        while (true) {
            std::vector<double> trial = phi;
            for (int i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] += tau * d[static_cast<std::size_t>(i)];
            mean_zero(trial);
            system.set_potential(trial);
            const std::vector<double>& mt = system.masses();
            double trial_resid = linf(mt, f);
            if (min_of(mt) >= eps0 && trial_resid <= (1.0 - 0.5 * tau) * resid) {
                phi = std::move(trial);
                m = mt;
                resid = trial_resid;
                break;
            }
            tau *= settings.backtrack_factor;
            if (tau < settings.min_step) {
                report.iterations = iter;
                report.final_residual_inf = resid;
                throw SolveError("stalled", report);
            }
        }
        e = system.energy_base() +
            std::inner_product(f.begin(), f.end(), phi.begin(), 0.0);
        report.residuals.push_back(resid);
        report.step_sizes.push_back(tau);
        report.energies.push_back(e);
        report.min_masses.push_back(min_of(m));
        report.iterations = iter;
        if (resid <= settings.tol_residual) {
            report.converged = true;
            break;
        }
    }
    report.final_residual_inf = resid;
    if (!report.converged) {
        throw SolveError("max iterations exceeded", report);
    }
    // leave the system at the solution so callers can reuse its diagram
    system.set_potential(phi);
    return {phi, report};
}

double energy(const SourceCloud& cloud, const PotentialVector& phi,
              const TargetDomain& target, const DiscreteMeasure& f) {
    LaguerreSystem system(cloud, target);
    system.set_potential(phi.values);
    return system.energy_base() +
           std::inner_product(f.masses.begin(), f.masses.end(), phi.values.begin(), 0.0);
}

std::vector<double> gradient(const SourceCloud& cloud, const PotentialVector& phi,
                             const TargetDomain& target, const DiscreteMeasure& f) {
    LaguerreSystem system(cloud, target);
    system.set_potential(phi.values);
    const std::vector<double>& m = system.masses();
    std::vector<double> g(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) g[i] = f.masses[i] - m[i];
    return g;
}

std::pair<PotentialVector, SolveReport> damped_newton(
    const SourceCloud& cloud, const DiscreteMeasure& f, const TargetDomain& target,
    const SolveSettings& settings, const PotentialVector* initial) {
    for (double fi : f.masses) {
        if (!(fi > 0.0)) throw std::invalid_argument("all target masses must be positive");
    }
    LaguerreSystem system(cloud, target);
    std::vector<double> phi0 =
        initial != nullptr ? initial->values : voronoi_potential(cloud).values;
    auto [phi, report] = damped_newton_core(system, f.masses, phi0, settings);
    return {PotentialVector{std::move(phi)}, std::move(report)};
}

PotentialVector brute_force_solve(const SourceCloud& cloud, const DiscreteMeasure& f,
                                  const TargetDomain& target) {
    int n = cloud.size();
    if (n > 4) throw std::invalid_argument("brute_force_solve: N must be <= 4");

    LaguerreSystem system(cloud, target);
    auto energy_at = [&](const std::vector<double>& phi) {
        system.set_potential(phi);
        return system.energy_base() +
               std::inner_product(f.masses.begin(), f.masses.end(), phi.begin(), 0.0);
    };
    auto residual_at = [&](const std::vector<double>& phi) {
        system.set_potential(phi);
        const std::vector<double>& m = system.masses();
        double r = 0.0;
        for (int i = 0; i < n; ++i)
            r = std::max(r, std::abs(m[static_cast<std::size_t>(i)] -
                                     f.masses[static_cast<std::size_t>(i)]));
        return r;
    };

    std::vector<double> phi = voronoi_potential(cloud).values;
    if (n == 1) return PotentialVector{{0.0}};

    constexpr double kGolden = 0.6180339887498949;
    const double span = 0.5 + 0.5 * diameter(target.boundary) * diameter(target.boundary);
    const int max_cycles = 5000;
    bool done = false;
    for (int cycle = 0; cycle < max_cycles && !done; ++cycle) {
        for (int c = 0; c < n; ++c) {
            auto k = static_cast<std::size_t>(c);
            std::vector<double> probe = phi;
            auto f1d = [&](double t) {
                probe[k] = t;
                return energy_at(probe);
            };
            double a = phi[k] - span, b = phi[k] + span;
            double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
            double f1 = f1d(x1), f2 = f1d(x2);
            for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
                if (f1 <= f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - kGolden * (b - a);
                    f1 = f1d(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + kGolden * (b - a);
                    f2 = f1d(x2);
                }
            }
            phi[k] = 0.5 * (a + b);
        }
        mean_zero(phi);
        done = residual_at(phi) <= 1e-8;
    }
    if (!done) throw std::runtime_error("brute force failed to converge");
    mean_zero(phi);
    return PotentialVector{std::move(phi)};
}

void write_trace_csv(const SolveReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "iter,residual_inf,step,energy,min_mass\n";
    for (std::size_t i = 0; i < report.residuals.size(); ++i) {
        out << i << ',' << report.residuals[i] << ',' << report.step_sizes[i] << ','
            << report.energies[i] << ',' << report.min_masses[i] << '\n';
    }
}

}  // namespace sdot
