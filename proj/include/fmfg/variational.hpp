#pragma once

// Energy formulation of the stationary game: flow pairs (m, w) coupled by the
// continuity constraint (-Delta)^s m + div w = 0 with unit mass, the energy
// E(m, w) = int m L(-w/m) + F(x, m), its direct minimization by a reduced
// gradient scheme in the flux variable, and the duality diagnostics that tie
// minimizers to fixed-point solutions.

#include <stdexcept>
#include <string>
#include <vector>

#include "fmfg/mfg.hpp"

namespace fmfg {

// a feasible point of the constrained class: nonnegative unit-mass density,
// flux satisfying the continuity constraint, cached kinetic term
struct FlowPair {
  SpectralField m;
  VectorField w;
  double kinetic = 0.0;  // int m L(-w/m), grid quadrature
};

struct VariationalConfig {
  double gtol = 1e-8;       // sup-norm target for the reduced gradient
  double energy_tol = 1e-14;  // relative decrease treated as stagnation
  int max_iter = 5000;
  double clamp = 1e-10;     // kinetic denominator clamp at small m
  double pos_tol = 1e-8;    // lifted densities below -pos_tol reject the step
  double step_init = 1.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  double step_min = 1e-14;
};

struct VariationalDiagnostics {
  int iterations = 0;
  double grad_norm = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;  // coupling part int F(x, m)
  std::vector<double> energy_history;
};

struct VariationalError : std::runtime_error {
  VariationalError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), energy_history(std::move(history)) {}
  std::vector<double> energy_history;
};

// density induced by a flux: the unique unit-mass solution of
// (-Delta)^s m = -div w
SpectralField lift_density(const VectorField& w, double s);

// sup over Fourier modes of |(2 pi |k|)^{2s} m_k + (div w)_k|, the weak-form
// continuity defect; identically ~0 for lifted pairs
double constraint_residual(const SpectralField& m, const VectorField& w, double s);

// assemble a pair and cache its kinetic term (no constraint check here)
FlowPair make_flow_pair(SpectralField m, VectorField w, const Hamiltonian& h,
                        double clamp = 1e-10);
FlowPair lift_flow_pair(const VectorField& w, double s, const Hamiltonian& h,
                        double clamp = 1e-10);

// E(m, w) by grid quadrature with the vacuum conventions: node contribution 0
// when (m, w) = (0, 0), +infinity when m = 0 but w != 0. Pairs violating the
// continuity constraint beyond constraint_tol (absolute, on mode magnitudes)
// or dipping below -1e-8 in m are rejected.
double energy(const FlowPair& pair, const Hamiltonian& h, const LocalCoupling& coupling,
              double s, double constraint_tol = 1e-8);

// direct minimization of the reduced energy w -> E(lift(w), w) by gradient
// descent with Barzilai-Borwein steps and Armijo backtracking; every iterate
// is exactly feasible and unit-mass. Requires a local coupling.
FlowPair minimize_energy(const MfgProblem& p, const VariationalConfig& cfg = {},
                         VariationalDiagnostics* diag = nullptr);

// |lambda - int [m L(-w/m) + f(x, m) m]|; vanishes discretely at exact
// solutions, certifying the duality chain
double duality_gap(const MfgSolution& sol, const LocalCoupling& coupling,
                   const Hamiltonian& h);

// ||w + m grad_H(grad u)||_inf recomputed from the fields
double optimality_check(const MfgSolution& sol, const Hamiltonian& h);

}  // namespace fmfg
