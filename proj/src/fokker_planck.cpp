#include "fmfg/fokker_planck.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "fmfg/anderson.hpp"
#include "fmfg/spectral.hpp"

namespace fmfg {

namespace {

void validate_s(double s) {
  if (!(s > 0.5 && s <= 1.0))
    throw std::invalid_argument("fokker-planck solves need s in (1/2, 1]");
}

void validate_cfg(const FpConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("fp tolerance must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("fp max_iter must be at least 1");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw std::invalid_argument("fp damping must lie in (0, 1]");
  if (cfg.anderson_depth < 0) throw std::invalid_argument("fp anderson depth must be >= 0");
  if (cfg.pos_tol < 0.0) throw std::invalid_argument("fp pos_tol must be nonnegative");
}

// exact unit mass: copy coefficients, pin c_0 = 1
SpectralField with_unit_mass(const SpectralField& f) {
  std::vector<cdouble> c = f.coeffs();
  c[0] = 1.0;
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

VectorField negated_flux(const VectorField& b, const SpectralField& m) {
  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(b.dim()));
  for (int d = 0; d < b.dim(); ++d) {
    SpectralField prod = multiply(b[d], m, true);
    comps.push_back(axpby_fields(-1.0, prod, 0.0, prod));
  }
  return VectorField(std::move(comps));
}

}  // namespace

SpectralField unit_density(const PeriodicGrid& grid) {
  std::vector<cdouble> c(grid.size(), cdouble(0.0, 0.0));
  c[0] = 1.0;
  return SpectralField::from_coeffs(grid, std::move(c));
}

SpectralField solve_div_source(const VectorField& w, double s) {
  validate_s(s);
  if (!w.finite()) throw std::invalid_argument("div-source data must be finite");
  SpectralField u = solve_poisson_div(w);
  SpectralField t = s == 1.0 ? std::move(u) : fractional_laplacian(u, 1.0 - s);
  return with_unit_mass(t);
}

double fp_residual(const SpectralField& m, const VectorField& b, double s) {
  validate_s(s);
  if (b.grid() != m.grid())
    throw std::invalid_argument("density and drift live on different grids");
  std::vector<SpectralField> flux;
  flux.reserve(static_cast<std::size_t>(b.dim()));
  for (int d = 0; d < b.dim(); ++d) flux.push_back(multiply(b[d], m, true));
  const SpectralField r =
      axpby_fields(1.0, fractional_laplacian(m, s), 1.0, divergence(VectorField(std::move(flux))));
  return r.max_abs();
}

SpectralField solve_stationary_fp(const VectorField& b, double s, const FpConfig& cfg,
                                  FpDiagnostics* diag, const SpectralField* initial) {
  validate_s(s);
  validate_cfg(cfg);
  if (!b.finite()) throw std::invalid_argument("drift must be finite");
  const PeriodicGrid grid = b.grid();
  if (initial != nullptr && initial->grid() != grid)
    throw std::invalid_argument("initial density lives on a different grid");

  SpectralField m = initial != nullptr ? with_unit_mass(*initial) : unit_density(grid);
  const double target = cfg.tol * (1.0 + b.max_norm());

  AndersonAccelerator mixer(grid.size(), cfg.anderson_depth, cfg.damping);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.max_iter) + 1);

  auto finish = [&](int iterations, double residual) {
    if (diag != nullptr) {
      diag->iterations = iterations;
      diag->residual = residual;
      diag->min_m = m.min_value();
      diag->max_m = m.max_value();
      diag->positivity_flagged = diag->min_m < -cfg.pos_tol;
      diag->residual_history = history;
    }
  };

  for (int it = 0; it <= cfg.max_iter; ++it) {
    const double res = fp_residual(m, b, s);
    history.push_back(res);
    if (res <= target) {
      finish(it, res);
      return m;
    }
    if (it == cfg.max_iter) break;
    const SpectralField picard = solve_div_source(negated_flux(b, m), s);
    std::vector<double> mixed = mixer.next(m.values(), picard.values());
    m = with_unit_mass(SpectralField::from_values(grid, std::move(mixed)));
  }

  finish(cfg.max_iter, history.back());
  std::ostringstream msg;
  msg << "stationary fokker-planck iteration stalled at residual " << history.back()
      << " (target " << target << ") after " << cfg.max_iter << " iterations";
  throw FpError(msg.str(), std::move(history));
}

}  // namespace fmfg
