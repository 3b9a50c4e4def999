#include "fmfg/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "fmfg/spectral.hpp"

namespace fmfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorField negated(VectorField g) {
  for (int d = 0; d < g.dim(); ++d) g[d] = axpby_fields(-1.0, g[d], 0.0, g[d]);
  return g;
}

SpectralField clamp_nonneg(const SpectralField& m) {
  if (m.min_value() >= 0.0) return m;
  std::vector<double> v = m.values();
  for (double& x : v) x = std::max(x, 0.0);
  return SpectralField::from_values(m.grid(), std::move(v));
}

// radius of grad_L(q): the r solving grad_factor(r) r = |q| (radial inverse
// of grad_H); closed form for the unsmoothed power family
double conj_grad_radius(const Hamiltonian& h, double qn) {
  if (qn <= 0.0) return 0.0;
  if (h.smoothing_delta == 0.0)
    return std::pow(qn / (h.gamma * h.coeff), 1.0 / (h.gamma - 1.0));
  double hi = 1.0;
  while (h.grad_factor(hi) * hi < qn) {
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h.grad_factor(mid) * mid < qn ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double quad_inner(const VectorField& a, const VectorField& b) {
  double acc = 0.0;
  for (int d = 0; d < a.dim(); ++d) acc += inner(a[d], b[d]);
  return acc;
}

// energy of an exactly feasible iterate: positivity rejection by +inf, no
// constraint recheck
double iterate_energy(const SpectralField& m, const VectorField& w, const Hamiltonian& h,
                      const LocalCoupling& lc, double clamp, double pos_tol) {
  if (m.min_value() < -pos_tol) return kInf;
  const double kin = transport_energy(m, w, h, clamp);
  if (!std::isfinite(kin)) return kInf;
  return kin + coupling_energy(lc, m);
}

// gradient of w -> E(lift(w), w): the flux channel grad_L(-w/m) reversed plus
// the density channel pulled back through the lift, grad (-Delta)^{-s} dE/dm
VectorField reduced_gradient(const SpectralField& m, const VectorField& w,
                             const Hamiltonian& h, const LocalCoupling& lc, double s,
                             double clamp) {
  const PeriodicGrid g = m.grid();
  const int dim = g.dim;
  const std::vector<double>& mv = m.values();
  std::vector<const std::vector<double>*> wv;
  wv.reserve(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) wv.push_back(&w[d].values());

  std::vector<std::vector<double>> gk(static_cast<std::size_t>(dim),
                                      std::vector<double>(mv.size(), 0.0));
  std::vector<double> dedm(mv.size());
  const SpectralField* V = lc.potential ? &*lc.potential : nullptr;
  const std::vector<double>* Vv = V ? &V->values() : nullptr;

  for (std::size_t i = 0; i < mv.size(); ++i) {
    const double me = std::max(mv[i], clamp);
    double w2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double x = (*wv[static_cast<std::size_t>(d)])[i];
      w2 += x * x;
    }
    const double wn = std::sqrt(w2);
    const double qn = wn / me;
    const double rs = conj_grad_radius(h, qn);
    if (wn > 0.0) {
      const double fac = rs / wn;
      for (int d = 0; d < dim; ++d)
        gk[static_cast<std::size_t>(d)][i] = fac * (*wv[static_cast<std::size_t>(d)])[i];
    }
    // dE/dm = f(x, m) - H(grad_L(-w/m)); H(p*) = |p*| q - L(q) radially
    dedm[i] = lc.profile(mv[i]) + (Vv ? (*Vv)[i] : 0.0) - (rs * qn - h.conjugate_radial(qn));
  }

  const SpectralField psi =
      inverse_fractional_laplacian(SpectralField::from_values(g, std::move(dedm)), s);
  const VectorField gpsi = gradient(psi);
  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d)
    comps.push_back(axpby_fields(
        1.0, SpectralField::from_values(g, std::move(gk[static_cast<std::size_t>(d)])), 1.0,
        gpsi[d]));
  return VectorField(std::move(comps));
}

}  // namespace

SpectralField lift_density(const VectorField& w, double s) {
  return solve_div_source(negated(w), s);
}

double constraint_residual(const SpectralField& m, const VectorField& w, double s) {
  if (w.grid() != m.grid()) throw std::invalid_argument("flow pair on mixed grids");
  const SpectralField r = axpby_fields(1.0, fractional_laplacian(m, s), 1.0, divergence(w));
  double worst = 0.0;
  for (const cdouble& c : r.coeffs()) worst = std::max(worst, std::abs(c));
  return worst;
}

FlowPair make_flow_pair(SpectralField m, VectorField w, const Hamiltonian& h, double clamp) {
  FlowPair pair;
  pair.kinetic = transport_energy(m, w, h, clamp);
  pair.m = std::move(m);
  pair.w = std::move(w);
  return pair;
}

FlowPair lift_flow_pair(const VectorField& w, double s, const Hamiltonian& h, double clamp) {
  return make_flow_pair(lift_density(w, s), w, h, clamp);
}

double energy(const FlowPair& pair, const Hamiltonian& h, const LocalCoupling& coupling,
              double s, double constraint_tol) {
  const double defect = constraint_residual(pair.m, pair.w, s);
  if (defect > constraint_tol) {
    std::ostringstream o;
    o << "flow pair violates the continuity constraint: mode defect " << defect
      << " exceeds " << constraint_tol;
    throw std::invalid_argument(o.str());
  }
  if (pair.m.min_value() < -1e-8)
    throw std::invalid_argument("flow density must be nonnegative");
  const double kin = transport_energy(pair.m, pair.w, h);
  if (!std::isfinite(kin)) return kInf;
  return kin + coupling_energy(coupling, pair.m);
}

FlowPair minimize_energy(const MfgProblem& p, const VariationalConfig& cfg,
                         VariationalDiagnostics* diag) {
  const LocalCoupling* lc = std::get_if<LocalCoupling>(&p.coupling);
  if (lc == nullptr)
    throw std::invalid_argument("energy minimization needs a local coupling");
  if (!(cfg.gtol > 0.0)) throw std::invalid_argument("gtol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(cfg.clamp > 0.0)) throw std::invalid_argument("clamp must be positive");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw std::invalid_argument("shrink must lie in (0, 1)");
  if (!(cfg.armijo > 0.0 && cfg.armijo < 1.0))
    throw std::invalid_argument("armijo must lie in (0, 1)");
  if (!(cfg.step_init > 0.0)) throw std::invalid_argument("step_init must be positive");

  VectorField w(p.grid, 0.0);
  SpectralField m = lift_density(w, p.s);
  double e = iterate_energy(m, w, p.hamiltonian, *lc, cfg.clamp, cfg.pos_tol);
  std::vector<double> hist{e};

  VectorField step_s, grad_old;
  bool have_prev = false;
  int stagnant = 0;

  for (int it = 0; it < cfg.max_iter; ++it) {
    const VectorField grad = reduced_gradient(m, w, p.hamiltonian, *lc, p.s, cfg.clamp);
    const double gn = grad.max_norm();
    if (gn <= cfg.gtol) {
      FlowPair pair = make_flow_pair(std::move(m), std::move(w), p.hamiltonian, cfg.clamp);
      if (diag) {
        diag->iterations = it;
        diag->grad_norm = gn;
        diag->energy = e;
        diag->kinetic = pair.kinetic;
        diag->potential = e - pair.kinetic;
        diag->energy_history = std::move(hist);
      }
      return pair;
    }

    double t = cfg.step_init;
    if (have_prev) {
      // Barzilai-Borwein: t = <s, s> / <s, y> with y the gradient change
      double den = 0.0;
      for (int d = 0; d < grad.dim(); ++d)
        den += inner(step_s[d], axpby_fields(1.0, grad[d], -1.0, grad_old[d]));
      const double num = quad_inner(step_s, step_s);
      if (den > 0.0) t = std::clamp(num / den, 1e-10, 1e6);
    }

    const double gg = quad_inner(grad, grad);
    bool accepted = false;
    bool saw_inf = false;
    SpectralField m_try;
    std::vector<SpectralField> w_try;
    double e_try = kInf;
    for (; t >= cfg.step_min; t *= cfg.shrink) {
      w_try.clear();
      for (int d = 0; d < grad.dim(); ++d)
        w_try.push_back(axpby_fields(1.0, w[d], -t, grad[d]));
      std::vector<SpectralField> wc = w_try;
      const VectorField cand(std::move(wc));
      m_try = lift_density(cand, p.s);
      e_try = iterate_energy(m_try, cand, p.hamiltonian, *lc, cfg.clamp, cfg.pos_tol);
      if (!std::isfinite(e_try)) {
        saw_inf = true;
        continue;
      }
      if (e_try <= e - cfg.armijo * t * gg) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream o;
      if (saw_inf)
        o << "energy stayed infinite along the descent direction (flux on vanishing "
             "density); consider a larger clamp or a mollified coupling stage";
      else
        o << "line search failed to decrease the energy below " << e
          << " at gradient norm " << gn;
      throw VariationalError(o.str(), std::move(hist));
    }

    std::vector<SpectralField> sc;
    sc.reserve(w_try.size());
    for (int d = 0; d < grad.dim(); ++d)
      sc.push_back(axpby_fields(1.0, w_try[static_cast<std::size_t>(d)], -1.0, w[d]));
    step_s = VectorField(std::move(sc));
    grad_old = grad;
    have_prev = true;

    w = VectorField(std::move(w_try));
    m = std::move(m_try);
    const double drop = e - e_try;
    e = e_try;
    hist.push_back(e);
    stagnant = drop < cfg.energy_tol * (1.0 + std::abs(e)) ? stagnant + 1 : 0;
    if (stagnant >= 30) {
      std::ostringstream o;
      o << "energy stagnated above the gradient tolerance: gradient norm " << gn
        << " after " << it + 1 << " accepted steps";
      throw VariationalError(o.str(), std::move(hist));
    }
  }
  std::ostringstream o;
  o << "energy minimization did not reach gradient tolerance " << cfg.gtol << " within "
    << cfg.max_iter << " iterations";
  throw VariationalError(o.str(), std::move(hist));
}

double duality_gap(const MfgSolution& sol, const LocalCoupling& coupling,
                   const Hamiltonian& h) {
  const double kin = transport_energy(sol.m, sol.w, h);
  const SpectralField fm = eval_local(coupling, clamp_nonneg(sol.m), false);
  return std::abs(sol.lambda - kin - inner(fm, sol.m));
}

double optimality_check(const MfgSolution& sol, const Hamiltonian& h) {
  const VectorField gh = hamiltonian_gradient(sol.u, h);
  if (gh.dim() != sol.w.dim() || gh.grid() != sol.w.grid())
    throw std::invalid_argument("solution fields on mixed grids");
  double worst = 0.0;
  for (int d = 0; d < gh.dim(); ++d) {
    const SpectralField prod = multiply(sol.m, gh[d], true);
    worst = std::max(worst, axpby_fields(1.0, sol.w[d], 1.0, prod).max_abs());
  }
  return worst;
}

}  // namespace fmfg
