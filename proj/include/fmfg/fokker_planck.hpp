#pragma once

// Stationary fractional Fokker-Planck solves on the periodic torus: the
// constructive div-source problem (-Delta)^s m = div w with exact unit mass,
// and the full drift problem (-Delta)^s m + div(b m) = 0 via damped Picard
// iteration on the constructive map, Anderson-accelerated.

#include <stdexcept>
#include <string>
#include <vector>

#include "fmfg/field.hpp"

namespace fmfg {

struct FpConfig {
  double tol = 1e-9;       // residual target, scaled by (1 + |b|_inf)
  int max_iter = 500;
  double pos_tol = 1e-8;   // negative minima beyond this flag under-resolution
  double damping = 0.5;
  int anderson_depth = 5;
};

struct FpDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  double min_m = 0.0;
  double max_m = 0.0;
  bool positivity_flagged = false;
  std::vector<double> residual_history;
};

// non-convergence report with the full residual trace
struct FpError : std::runtime_error {
  std::vector<double> residual_history;
  FpError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
};

// the density with Fourier coefficients (1, 0, 0, ...): m == 1, c_0 == 1 bitwise
SpectralField unit_density(const PeriodicGrid& grid);

// m = 1 + (-Delta)^{1-s} u with -Delta u = div w, so (-Delta)^s m = div w and
// the k = 0 coefficient is set to 1 exactly
SpectralField solve_div_source(const VectorField& w, double s);

// solves (-Delta)^s m + div(b m) = 0 with unit mass; repeated application of
// solve_div_source with w = -b m, damped and Anderson-mixed
SpectralField solve_stationary_fp(const VectorField& b, double s, const FpConfig& cfg = {},
                                  FpDiagnostics* diag = nullptr,
                                  const SpectralField* initial = nullptr);

// |(-Delta)^s m + div(b m)|_inf with dealiased products
double fp_residual(const SpectralField& m, const VectorField& b, double s);

}  // namespace fmfg
