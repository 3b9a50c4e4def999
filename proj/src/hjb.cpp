#include "fmfg/hjb.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "fmfg/anderson.hpp"
#include "fmfg/spectral.hpp"

namespace fmfg {

namespace {

void validate_s(double s) {
  if (!(s > 0.5 && s <= 1.0))
    throw std::invalid_argument("ergodic hjb solves need s in (1/2, 1]");
}

// multiplier (2 pi |k|)^{2s} with the derivative wavenumber convention, so it
// matches fractional_laplacian bin for bin
std::vector<double> symbol_table(const PeriodicGrid& g, double s) {
  std::vector<double> mu(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.unflatten(i);
    double k2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double k = wavenumber_deriv(idx[static_cast<std::size_t>(d)], g.n);
      k2 += k * k;
    }
    mu[i] = k2 == 0.0 ? 0.0 : std::pow(two_pi * two_pi * k2, s);
  }
  return mu;
}

// zero the mean mode and every bin the derivative convention cannot see
SpectralField project_solvable(const PeriodicGrid& g, std::vector<cdouble> c,
                               const std::vector<double>& mu) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (mu[i] == 0.0) c[i] = 0.0;
  return SpectralField::from_coeffs(g, std::move(c));
}

SpectralField eval_H_on_grads(const VectorField& grad, const Hamiltonian& h, bool dealias) {
  std::vector<const SpectralField*> in;
  in.reserve(static_cast<std::size_t>(grad.dim()));
  for (int d = 0; d < grad.dim(); ++d) in.push_back(&grad[d]);
  const Hamiltonian hh = h;
  const int dim = grad.dim();
  return map_fields(std::span<const SpectralField* const>(in),
                    [hh, dim](const double* v) {
                      double r2 = 0.0;
                      for (int d = 0; d < dim; ++d) r2 += v[d] * v[d];
                      return hh.eval_radial(std::sqrt(r2));
                    },
                    dealias);
}

struct StepTables {
  double dt = 0.0;
  std::vector<double> decay;  // exp(-mu dt)
  std::vector<double> gain;   // (1 - exp(-mu dt)) / mu, dt at mu = 0
};

StepTables make_tables(const std::vector<double>& mu, double dt) {
  StepTables t;
  t.dt = dt;
  t.decay.resize(mu.size());
  t.gain.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double z = mu[i] * dt;
    t.decay[i] = std::exp(-z);
    t.gain[i] = mu[i] == 0.0 ? dt : -std::expm1(-z) / mu[i];
  }
  return t;
}

std::string blowup_message(double grad_norm, double cap) {
  std::ostringstream msg;
  msg << "gradient norm " << grad_norm << " exceeded the blow-up cap " << cap
      << " while marching; retry with a smaller initial time step or a positive smoothing_delta";
  return msg.str();
}

}  // namespace

SpectralField hamiltonian_of_gradient(const SpectralField& u, const Hamiltonian& h,
                                      bool dealias) {
  return eval_H_on_grads(gradient(u), h, dealias);
}

VectorField hamiltonian_gradient(const SpectralField& u, const Hamiltonian& h, bool dealias) {
  const VectorField grad = gradient(u);
  std::vector<const SpectralField*> in;
  in.reserve(static_cast<std::size_t>(grad.dim()));
  for (int d = 0; d < grad.dim(); ++d) in.push_back(&grad[d]);
  const Hamiltonian hh = h;
  const int dim = grad.dim();
  return map_fields_vector(std::span<const SpectralField* const>(in), dim,
                           [hh, dim](const double* v, double* out) {
                             double r2 = 0.0;
                             for (int d = 0; d < dim; ++d) r2 += v[d] * v[d];
                             const double g = hh.grad_factor(std::sqrt(r2));
                             for (int d = 0; d < dim; ++d) out[d] = g * v[d];
                           },
                           dealias);
}

LambdaBounds lambda_bounds(const SpectralField& f, const Hamiltonian& h) {
  const double h0 = h.eval_radial(0.0);
  return {f.min_value() - h0, f.max_value() - h0};
}

double ergodic_residual(const SpectralField& u, double lambda, const SpectralField& f,
                        const Hamiltonian& h, double s) {
  validate_s(s);
  if (u.grid() != f.grid())
    throw std::invalid_argument("ergodic residual needs matching grids");
  const std::vector<double> mu = symbol_table(u.grid(), s);
  SpectralField r = axpby_fields(1.0, fractional_laplacian(u, s), 1.0,
                                 eval_H_on_grads(gradient(u), h, true));
  r = add_constant(r, lambda);
  r = axpby_fields(1.0, r, -1.0, f);
  std::vector<cdouble> rc = r.coeffs();
  for (std::size_t i = 1; i < rc.size(); ++i)
    if (mu[i] == 0.0) rc[i] = 0.0;
  return SpectralField::from_coeffs(u.grid(), std::move(rc)).max_abs();
}

ErgodicSolution solve_ergodic(const SpectralField& f, const Hamiltonian& h, double s,
                              const HjbConfig& cfg, const SpectralField* initial) {
  validate_s(s);
  if (!f.finite()) throw std::invalid_argument("ergodic data must be finite");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("hjb tolerance must be positive");
  if (!(cfg.grad_cap > 0.0)) throw std::invalid_argument("hjb grad_cap must be positive");
  if (!(cfg.max_time > 0.0)) throw std::invalid_argument("hjb max_time must be positive");
  if (!(cfg.refine_damping > 0.0 && cfg.refine_damping <= 1.0))
    throw std::invalid_argument("hjb refine_damping must lie in (0, 1]");
  if (cfg.max_refine < 1)
    throw std::invalid_argument("hjb max_refine must be at least 1");

  const PeriodicGrid grid = f.grid();
  const std::vector<double> mu = symbol_table(grid, s);
  const double mean_f = f.mean();
  const double osc = add_constant(f, -mean_f).max_abs();

  double dt = cfg.dt_initial > 0.0 ? cfg.dt_initial : std::min(0.1, 1.0 / std::max(osc, 1e-12));
  const double dt_min = 1e-10;
  StepTables tables = make_tables(mu, dt);

  if (initial != nullptr && initial->grid() != grid)
    throw std::invalid_argument("initial profile lives on a different grid");

  std::vector<double> lambda_history;
  SpectralField v = initial != nullptr
                        ? project_solvable(grid, initial->coeffs(), mu)
                        : project_solvable(grid, std::vector<cdouble>(grid.size()), mu);
  SpectralField saved = v;
  double prev_res = std::numeric_limits<double>::infinity();
  double prev_lambda = std::numeric_limits<double>::quiet_NaN();
  int stable = 0;
  int steps = 0;
  double t = 0.0;
  double lambda = mean_f - h.eval_radial(0.0);

  while (t < cfg.max_time && steps < 200000) {
    const VectorField grad = gradient(v);
    const double gn = grad.max_norm();
    if (gn > cfg.grad_cap) throw HjbError(blowup_message(gn, cfg.grad_cap), lambda_history);

    const SpectralField hg = eval_H_on_grads(grad, h, true);
    const SpectralField n = axpby_fields(1.0, f, -1.0, hg);
    const double lambda_t = n.coeffs()[0].real();

    // stationary residual of the current profile
    std::vector<cdouble> rc(grid.size());
    const auto& vc = v.coeffs();
    const auto& nc = n.coeffs();
    for (std::size_t i = 0; i < rc.size(); ++i)
      rc[i] = mu[i] == 0.0 ? cdouble(0.0, 0.0) : mu[i] * vc[i] - nc[i];
    const double res = SpectralField::from_coeffs(grid, std::move(rc)).max_abs();

    if (res > prev_res * (1.0 + 1e-12) && dt > dt_min) {
      dt *= 0.5;
      tables = make_tables(mu, dt);
      v = saved;
      stable = 0;
      continue;
    }

    ++steps;
    lambda = lambda_t;
    lambda_history.push_back(lambda);
    if (std::isfinite(prev_lambda) &&
        std::abs(lambda - prev_lambda) <= cfg.tol * (1.0 + std::abs(lambda)))
      ++stable;
    else
      stable = 0;
    prev_lambda = lambda;
    if (stable >= 3 || res <= cfg.tol) break;

    saved = v;
    prev_res = res;
    std::vector<cdouble> next(grid.size());
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = tables.decay[i] * vc[i] + tables.gain[i] * nc[i];
    v = project_solvable(grid, std::move(next), mu);
    t += dt;
  }

  // quasi-Newton polish: delta_lambda = -mean R, delta_u = -R / mu modewise.
  // The residual is measured inside the resolvable band: bins with mu = 0 are
  // outside the trial space, so a nonsmooth H(grad u) parks truncation-level
  // content there that no profile can cancel and that vanishes under grid
  // refinement. The mean bin stays in; it tracks the lambda mismatch.
  AndersonAccelerator mixer(grid.size() + 1, cfg.anderson_depth, cfg.refine_damping);
  SpectralField u = v;
  SpectralField best_u = u;
  double best_lambda = lambda;
  double best_res = std::numeric_limits<double>::infinity();
  const double floor = 1e-13 * (1.0 + f.max_abs());
  int refine_steps = 0;
  int stall = 0;

  for (int it = 0; it < cfg.max_refine; ++it) {
    const VectorField grad = gradient(u);
    const double gn = grad.max_norm();
    if (gn > cfg.grad_cap) throw HjbError(blowup_message(gn, cfg.grad_cap), lambda_history);

    const SpectralField hg = eval_H_on_grads(grad, h, true);
    SpectralField r = axpby_fields(1.0, fractional_laplacian(u, s), 1.0, hg);
    r = add_constant(r, lambda);
    r = axpby_fields(1.0, r, -1.0, f);
    std::vector<cdouble> rproj = r.coeffs();
    for (std::size_t i = 1; i < rproj.size(); ++i)
      if (mu[i] == 0.0) rproj[i] = 0.0;
    r = SpectralField::from_coeffs(grid, std::move(rproj));
    const double res = r.max_abs();
    ++refine_steps;
    lambda_history.push_back(lambda);

    if (res < best_res)
      stall = 0;
    else
      ++stall;
    if (res < best_res) {
      best_res = res;
      best_u = u;
      best_lambda = lambda;
    }
    if (best_res <= floor) break;
    if (best_res <= cfg.tol && stall >= 5) break;
    if (best_res > cfg.tol && stall >= 25) break;

    const auto& rc2 = r.coeffs();
    std::vector<cdouble> uc = u.coeffs();
    const double dlambda = -rc2[0].real();
    for (std::size_t i = 0; i < uc.size(); ++i)
      if (mu[i] != 0.0) uc[i] -= rc2[i] / mu[i];
    const SpectralField gu = project_solvable(grid, std::move(uc), mu);

    const auto& xv = u.values();
    const auto& gv = gu.values();
    std::vector<double> x(grid.size() + 1), gx(grid.size() + 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      x[i] = xv[i];
      gx[i] = gv[i];
    }
    x[grid.size()] = lambda;
    gx[grid.size()] = lambda + dlambda;
    std::vector<double> mixed = mixer.next(x, gx);
    lambda = mixed[grid.size()];
    mixed.resize(grid.size());
    u = project_solvable(grid,
                         SpectralField::from_values(grid, std::move(mixed)).coeffs(), mu);
  }

  if (!(best_res <= cfg.tol)) {
    std::ostringstream msg;
    msg << "ergodic iteration stalled at residual " << best_res << " (target " << cfg.tol
        << ") after " << steps << " marching steps and " << refine_steps << " refinements";
    throw HjbError(msg.str(), std::move(lambda_history));
  }

  ErgodicSolution sol;
  sol.u = best_u;
  sol.lambda = best_lambda;
  sol.grad_norm = gradient(best_u).max_norm();
  sol.residual = best_res;
  sol.iterations = steps + refine_steps;
  return sol;
}

GradientEstimateReport gradient_estimate_diag(const ErgodicSolution& sol, const SpectralField& f,
                                              const Hamiltonian& h, double s) {
  validate_s(s);
  GradientEstimateReport rep;
  rep.grad_norm = gradient(sol.u).max_norm();
  rep.u_norm = sol.u.max_abs();
  rep.f_norm = f.max_abs();
  rep.grad_f_norm = gradient(f).max_norm();
  rep.lambda_abs = std::abs(sol.lambda);
  rep.regime = h.gamma <= 2.0 * s ? "Ishii-Lions regime (gamma <= 2s)" : "Bernstein regime only";
  return rep;
}

}  // namespace fmfg
