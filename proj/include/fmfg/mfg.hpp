#pragma once

// Coupled stationary mean field game on the periodic torus: value equation
// (-Delta)^s u + H(grad u) + lambda = f(x, m), transport equation
// (-Delta)^s m - div(m grad_H(grad u)) = 0, unit-mass density. Solved by a
// damped best-response iteration with mollifier continuation for local
// couplings; acceptance is certified by the sup-norm residuals of the two
// equations, never by iterate distance.

#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fmfg/coupling.hpp"
#include "fmfg/field.hpp"
#include "fmfg/fokker_planck.hpp"
#include "fmfg/hamiltonian.hpp"
#include "fmfg/hjb.hpp"

namespace fmfg {

struct SolverConfig {
  double damping = 0.5;     // relaxation weight on the best response, in (0, 1]
  int max_outer = 200;      // density updates allowed per continuation stage
  double tol_outer = 1e-6;  // target for max(value residual, transport residual)
  // mollifier widths for local couplings, walked in order with the previous
  // stage seeding the next; 0 means the unmollified coupling
  std::vector<double> eps_schedule = {0.1, 0.05, 0.02, 0.01, 0.0};
  FpConfig fp;
  HjbConfig hjb;
};

struct MfgProblem {
  double s = 0.75;  // in (1/2, 1)
  Hamiltonian hamiltonian;
  std::variant<LocalCoupling, NonlocalCoupling> coupling;
  PeriodicGrid grid;
  SolverConfig solver;
};

// hard violations (solve_fixed_point refuses to start); empty means valid
std::vector<std::string> validate_problem(const MfgProblem& p);

// regime warnings (growth conditions out of range, schedule quirks); the
// solver still runs these problems and reports the notes in the diagnostics
std::vector<std::string> problem_advisories(const MfgProblem& p);

struct MfgStage {
  double eps = 0.0;
  int iterations = 0;  // density updates spent in this stage
  double residual = 0.0;
};

struct MfgDiagnostics {
  double hjb_residual = 0.0;
  double fp_residual = 0.0;
  int outer_iterations = 0;
  double duality_gap = std::numeric_limits<double>::quiet_NaN();   // local couplings only
  double energy_value = std::numeric_limits<double>::quiet_NaN();  // local couplings only
  // min over accepted iterates of min(lambda - lo, hi - lambda) against the
  // coupling bounds of that iterate; nonnegative up to solver tolerance
  double sandwich_slack_min = 0.0;
  std::vector<double> lambda_history;
  std::vector<MfgStage> stages;
  std::vector<std::string> advisories;
};

struct MfgSolution {
  SpectralField u;  // mean zero
  double lambda = 0.0;
  SpectralField m;  // c_0 pinned to 1 exactly
  VectorField w;    // -m grad_H(grad u), dealiased product
  MfgDiagnostics diagnostics;
};

struct MfgError : std::runtime_error {
  struct StageTrace {
    double eps = 0.0;
    std::vector<double> residuals;
  };
  std::vector<StageTrace> history;
  MfgError(const std::string& what, std::vector<StageTrace> trace)
      : std::runtime_error(what), history(std::move(trace)) {}
};

// one best-response application: evaluate the coupling at the frozen density
// (mollified when eps > 0 and the coupling is local), solve the value
// equation, transport along the optimal drift -grad_H(grad u)
SpectralField schauder_map(const MfgProblem& p, const SpectralField& m, double eps);

// damped iteration m <- (1 - tau) m + tau T(m) along the continuation
// schedule; default seed is the uniform density
MfgSolution solve_fixed_point(const MfgProblem& p, const SpectralField* seed = nullptr);

struct SystemResidual {
  double hjb = 0.0;
  double fp = 0.0;
  double mass_defect = 0.0;
};
// recomputes both equation residuals for the unmollified coupling
SystemResidual system_residual(const MfgSolution& sol, const MfgProblem& p);

struct UniquenessReport {
  bool monotone_hypothesis = false;
  int seeds_attempted = 0;
  int seeds_converged = 0;
  double max_m_gap = 0.0;
  double max_lambda_gap = 0.0;
  double max_u_gap = 0.0;
  std::vector<std::string> findings;
};
UniquenessReport uniqueness_probe(const MfgProblem& p, const std::vector<SpectralField>& seeds);

// -m grad_H(grad u); solutions carry exactly this field as w
VectorField congestion_flux(const SpectralField& m, const SpectralField& u, const Hamiltonian& h);

// grid quadrature of m L(-w/m) with the vanishing-density conventions: zero
// where both m and w vanish, +infinity where w survives on vanishing m
double transport_energy(const SpectralField& m, const VectorField& w, const Hamiltonian& h,
                        double clamp = 1e-10);

// grid quadrature of the coupling primitive c m^q / q + V m
double coupling_energy(const LocalCoupling& f, const SpectralField& m);

}  // namespace fmfg
