#pragma once

#include <string>
#include <vector>

#include "sdot/laguerre.hpp"

namespace sdot {

struct SolveSettings {
    double tol_residual = 1e-10;   // l-inf on m(phi) - f
    int max_iters = 100;
    double epsilon0_factor = 0.5;  // mass floor = factor * min(min f, min m(phi0))
    double backtrack_factor = 0.5;
    double min_step = 1e-7;
};

struct SolveReport {
    int iterations = 0;
    double final_residual_inf = 0.0;
    bool converged = false;
    // per accepted iterate, entry 0 is the initial state (step 0)
    std::vector<double> residuals;
    std::vector<double> step_sizes;
    std::vector<double> energies;
    std::vector<double> min_masses;
};

class SolveError : public std::runtime_error {
  public:
    SolveError(const std::string& what, SolveReport report)
        : std::runtime_error(what), report(std::move(report)) {}
    SolveReport report;
};

// Interface the damped Newton loop iterates on; implemented by the planar
// Laguerre system here and the torus system in the periodic module.
class MassSystem {
  public:
    virtual ~MassSystem() = default;
    virtual int size() const = 0;
    // rebuild the diagram at phi
    virtual void set_potential(const std::vector<double>& phi) = 0;
    virtual const std::vector<double>& masses() const = 0;
    // integral part of the dual energy: sum_i int_{cell_i} (x_i.y - phi_i) g dy
    virtual double energy_base() const = 0;
    virtual MassJacobian jacobian() const = 0;
};

// Minimizes E(phi) = int_Y max_i(x_i.y - phi_i) g dy + sum f_i phi_i with a
// damped Newton iteration; a step is accepted when every cell mass stays
// above the epsilon_0 floor and the residual drops by the (1 - tau/2) factor.
std::pair<std::vector<double>, SolveReport> damped_newton_core(
    MassSystem& system, const std::vector<double>& f, const std::vector<double>& phi0,
    const SolveSettings& settings);

double energy(const SourceCloud& cloud, const PotentialVector& phi,
              const TargetDomain& target, const DiscreteMeasure& f);
std::vector<double> gradient(const SourceCloud& cloud, const PotentialVector& phi,
                             const TargetDomain& target, const DiscreteMeasure& f);

std::pair<PotentialVector, SolveReport> damped_newton(
    const SourceCloud& cloud, const DiscreteMeasure& f, const TargetDomain& target,
    const SolveSettings& settings = {}, const PotentialVector* initial = nullptr);

// Independent oracle for tiny instances: golden-section coordinate descent
// on the dual energy down to residual 1e-8.
PotentialVector brute_force_solve(const SourceCloud& cloud, const DiscreteMeasure& f,
                                  const TargetDomain& target);

// CSV trace: iter,residual_inf,step,energy,min_mass.
void write_trace_csv(const SolveReport& report, const std::string& path);

}  // namespace sdot
