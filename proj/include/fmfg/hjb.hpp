#pragma once

// Ergodic fractional Hamilton-Jacobi solver: finds the unique pair (u, lambda)
// with (-Delta)^s u + H(grad u) + lambda = f, u periodic and mean-zero. The
// evolution problem is marched by an exponential integrating-factor scheme
// (diffusion exact in the spectral basis, nonlinearity explicit and dealiased)
// until the ergodic drift stabilizes, then the stationary residual is polished
// by a damped quasi-Newton iteration preconditioned with the linear part.

#include <stdexcept>
#include <string>
#include <vector>

#include "fmfg/field.hpp"
#include "fmfg/hamiltonian.hpp"

namespace fmfg {

struct HjbConfig {
  double tol = 1e-8;          // target for |(-Delta)^s u + H(grad u) + lambda - f|_inf, measured
                              // after dropping unmatched-frequency bins (outside the trial space)
  double grad_cap = 1e3;      // |grad v|_inf beyond this aborts as blow-up
  double max_time = 1e4;      // marching time budget
  double dt_initial = 0.0;    // <= 0 selects min(0.1, 1/osc(f)), osc shift-invariant
  int anderson_depth = 5;
  double refine_damping = 0.8;
  int max_refine = 300;
};

struct ErgodicSolution {
  SpectralField u;            // mean-zero, undetermined Nyquist-only modes pinned to zero
  double lambda = 0.0;
  double grad_norm = 0.0;
  double residual = 0.0;
  int iterations = 0;         // accepted marching steps plus refinement steps
};

struct LambdaBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// marching blow-up or refinement stall, with the ergodic-constant trace
struct HjbError : std::runtime_error {
  std::vector<double> lambda_history;
  HjbError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), lambda_history(std::move(history)) {}
};

struct GradientEstimateReport {
  double grad_norm = 0.0;
  double u_norm = 0.0;
  double f_norm = 0.0;
  double grad_f_norm = 0.0;
  double lambda_abs = 0.0;
  std::string regime;
};

// pointwise H(grad u) and grad_H(grad u), dealiased through the padded grid
SpectralField hamiltonian_of_gradient(const SpectralField& u, const Hamiltonian& h,
                                      bool dealias = true);
VectorField hamiltonian_gradient(const SpectralField& u, const Hamiltonian& h,
                                 bool dealias = true);

// `initial` seeds the marching profile (mean mode repinned); default starts at 0
ErgodicSolution solve_ergodic(const SpectralField& f, const Hamiltonian& h, double s,
                              const HjbConfig& cfg = {}, const SpectralField* initial = nullptr);

// lo = min f - H(0), hi = max f - H(0); every accepted lambda lies between them
LambdaBounds lambda_bounds(const SpectralField& f, const Hamiltonian& h);

// sup norm of (-Delta)^s u + H(grad u) + lambda - f inside the resolvable
// band; the mean bin stays in and carries the lambda mismatch
double ergodic_residual(const SpectralField& u, double lambda, const SpectralField& f,
                        const Hamiltonian& h, double s);

GradientEstimateReport gradient_estimate_diag(const ErgodicSolution& sol, const SpectralField& f,
                                              const Hamiltonian& h, double s);

}  // namespace fmfg
