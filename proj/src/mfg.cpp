#include "fmfg/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "fmfg/spectral.hpp"

namespace fmfg {

namespace {

SpectralField clamp_nonneg(const SpectralField& m) {
  if (m.min_value() >= 0.0) return m;
  std::vector<double> v = m.values();
  for (double& x : v) x = std::max(x, 0.0);
  return SpectralField::from_values(m.grid(), std::move(v));
}

SpectralField pin_unit_mass(const SpectralField& m) {
  std::vector<cdouble> c = m.coeffs();
  c[0] = cdouble(1.0, 0.0);
  return SpectralField::from_coeffs(m.grid(), std::move(c));
}

const LocalCoupling* local_part(const MfgProblem& p) {
  return std::get_if<LocalCoupling>(&p.coupling);
}

SpectralField coupling_field(const MfgProblem& p, const SpectralField& m, double eps) {
  const SpectralField mc = clamp_nonneg(m);
  if (const LocalCoupling* lc = local_part(p))
    return eps > 0.0 ? mollified_coupling(*lc, mc, eps) : eval_local(*lc, mc);
  return eval_nonlocal(std::get<NonlocalCoupling>(p.coupling), mc);
}

VectorField negated(VectorField g) {
  for (int d = 0; d < g.dim(); ++d) g[d] = axpby_fields(-1.0, g[d], 0.0, g[d]);
  return g;
}

struct BestResponse {
  SpectralField f;
  ErgodicSolution value;
  VectorField drift;  // -grad_H(grad u)
};

BestResponse best_response(const MfgProblem& p, const SpectralField& m, double eps,
                           const SpectralField* warm_u,
                           const std::vector<MfgError::StageTrace>& trace) {
  BestResponse br;
  br.f = coupling_field(p, m, eps);
  try {
    br.value = solve_ergodic(br.f, p.hamiltonian, p.s, p.solver.hjb, warm_u);
  } catch (const HjbError& e) {
    throw MfgError(std::string("HJB stage failed: ") + e.what(), trace);
  }
  br.drift = negated(hamiltonian_gradient(br.value.u, p.hamiltonian));
  return br;
}

bool monotone_pairing_declared(const MfgProblem& p) {
  if (const LocalCoupling* lc = local_part(p)) return lc->monotone_increasing;
  const NonlocalCoupling& nc = std::get<NonlocalCoupling>(p.coupling);
  bool outer_up = true;
  switch (nc.outer.kind) {
    case OuterMap::Kind::identity: outer_up = true; break;
    case OuterMap::Kind::affine: outer_up = nc.outer.b >= 0.0; break;
    case OuterMap::Kind::saturating: outer_up = nc.outer.a * nc.outer.b >= 0.0; break;
  }
  if (!outer_up) return false;
  // the pairing needs a positive-semidefinite kernel on top of the monotone
  // outer map; on the torus that is nonnegativity of its Fourier coefficients
  for (const cdouble& c : nc.kernel.coeffs())
    if (c.real() < -1e-12 || std::abs(c.imag()) > 1e-12) return false;
  return true;
}

}  // namespace

std::vector<std::string> validate_problem(const MfgProblem& p) {
  std::vector<std::string> bad;
  if (!(p.s > 0.5 && p.s < 1.0)) bad.push_back("s must lie in (1/2, 1)");
  if (p.grid.n < 4 || p.grid.n % 2 != 0 || p.grid.dim < 1 || p.grid.dim > 3)
    bad.push_back("grid must have an even extent of at least 4 in dimension 1, 2 or 3");
  if (!(p.solver.damping > 0.0 && p.solver.damping <= 1.0))
    bad.push_back("damping must lie in (0, 1]");
  if (p.solver.max_outer < 1) bad.push_back("max_outer must be at least 1");
  if (!(p.solver.tol_outer > 0.0)) bad.push_back("tol_outer must be positive");
  for (std::size_t i = 0; i < p.solver.eps_schedule.size(); ++i) {
    if (!(p.solver.eps_schedule[i] >= 0.0)) {
      bad.push_back("eps_schedule entries must be nonnegative");
      break;
    }
    if (i > 0 && p.solver.eps_schedule[i] > p.solver.eps_schedule[i - 1]) {
      bad.push_back("eps_schedule must be nonincreasing");
      break;
    }
  }
  return bad;
}

std::vector<std::string> problem_advisories(const MfgProblem& p) {
  std::vector<std::string> notes;
  const LocalCoupling* lc = local_part(p);
  if (lc == nullptr) return notes;
  if (lc->c != 0.0) {
    const GrowthReport g = validate_growth(p.s, p.hamiltonian.gamma, lc->q, p.grid.dim);
    if (!g.passed) {
      std::ostringstream o;
      o << "growth conditions fail for q = " << lc->q << ", gamma = " << p.hamiltonian.gamma
        << ", s = " << p.s << ", N = " << p.grid.dim << " (q bound " << g.q_growth_bound
        << ", gamma bound " << g.gamma_bound << "); convergence is not guaranteed";
      notes.push_back(o.str());
    }
  }
  if (!p.solver.eps_schedule.empty() && p.solver.eps_schedule.back() != 0.0)
    notes.push_back(
        "eps_schedule does not end at zero; the returned solution solves the "
        "mollified system at the final width");
  return notes;
}

SpectralField schauder_map(const MfgProblem& p, const SpectralField& m, double eps) {
  const std::vector<std::string> bad = validate_problem(p);
  if (!bad.empty()) throw std::invalid_argument("invalid problem: " + bad.front());
  if (!(eps >= 0.0)) throw std::invalid_argument("mollifier width must be nonnegative");
  if (m.grid() != p.grid) throw std::invalid_argument("density lives on a different grid");
  const SpectralField md = pin_unit_mass(m);
  BestResponse br = best_response(p, md, eps, nullptr, {});
  try {
    return solve_stationary_fp(br.drift, p.s, p.solver.fp, nullptr, &md);
  } catch (const FpError& e) {
    throw MfgError(std::string("FP stage failed: ") + e.what(), {});
  }
}

MfgSolution solve_fixed_point(const MfgProblem& p, const SpectralField* seed) {
  {
    const std::vector<std::string> bad = validate_problem(p);
    if (!bad.empty()) {
      std::string all = "invalid problem:";
      for (const std::string& b : bad) all += " " + b + ";";
      throw std::invalid_argument(all);
    }
  }
  const bool local = local_part(p) != nullptr;
  std::vector<double> schedule = local ? p.solver.eps_schedule : std::vector<double>{0.0};
  if (schedule.empty()) schedule = {0.0};

  SpectralField m;
  if (seed != nullptr) {
    if (seed->grid() != p.grid)
      throw std::invalid_argument("seed density lives on a different grid");
    m = pin_unit_mass(*seed);
    if (m.min_value() < -p.solver.fp.pos_tol)
      throw std::invalid_argument("seed density must be nonnegative");
  } else {
    m = unit_density(p.grid);
  }

  MfgDiagnostics diag;
  diag.advisories = problem_advisories(p);
  diag.sandwich_slack_min = std::numeric_limits<double>::infinity();
  std::vector<MfgError::StageTrace> trace;

  ErgodicSolution value;
  VectorField drift;
  double fp_res = 0.0;
  SpectralField warm_u;
  bool have_warm = false;

  for (double eps : schedule) {
    trace.push_back({eps, {}});
    bool stage_done = false;
    for (int it = 0; it <= p.solver.max_outer; ++it) {
      BestResponse br = best_response(p, m, eps, have_warm ? &warm_u : nullptr, trace);
      value = std::move(br.value);
      drift = std::move(br.drift);
      warm_u = value.u;
      have_warm = true;

      const LambdaBounds lb = lambda_bounds(br.f, p.hamiltonian);
      diag.sandwich_slack_min =
          std::min(diag.sandwich_slack_min,
                   std::min(value.lambda - lb.lo, lb.hi - value.lambda));
      diag.lambda_history.push_back(value.lambda);

      fp_res = fp_residual(m, drift, p.s);
      const double metric = std::max(value.residual, fp_res);
      trace.back().residuals.push_back(metric);
      if (metric <= p.solver.tol_outer) {
        diag.stages.push_back({eps, it, metric});
        stage_done = true;
        break;
      }
      if (it == p.solver.max_outer) break;

      SpectralField target;
      try {
        target = solve_stationary_fp(drift, p.s, p.solver.fp, nullptr, &m);
      } catch (const FpError& e) {
        throw MfgError(std::string("FP stage failed: ") + e.what(), trace);
      }
      m = pin_unit_mass(axpby_fields(1.0 - p.solver.damping, m, p.solver.damping, target));
      ++diag.outer_iterations;
      if (m.min_value() < -p.solver.fp.pos_tol) {
        std::ostringstream o;
        o << "density positivity lost at continuation stage eps = " << eps
          << ": min m = " << m.min_value();
        throw MfgError(o.str(), trace);
      }
    }
    if (!stage_done) {
      std::ostringstream o;
      o << "outer iteration failed to reach residual " << p.solver.tol_outer << " within "
        << p.solver.max_outer << " updates at continuation stage eps = " << eps
        << "; last residual " << trace.back().residuals.back();
      throw MfgError(o.str(), trace);
    }
  }

  MfgSolution sol;
  sol.u = value.u;
  sol.lambda = value.lambda;
  sol.m = m;
  sol.w = congestion_flux(m, value.u, p.hamiltonian);
  diag.hjb_residual = value.residual;
  diag.fp_residual = fp_res;
  if (const LocalCoupling* lc = local_part(p)) {
    const double kinetic = transport_energy(sol.m, sol.w, p.hamiltonian);
    diag.energy_value = kinetic + coupling_energy(*lc, sol.m);
    const SpectralField fm = eval_local(*lc, clamp_nonneg(sol.m), false);
    diag.duality_gap = std::abs(sol.lambda - kinetic - inner(fm, sol.m));
  }
  sol.diagnostics = std::move(diag);
  return sol;
}

SystemResidual system_residual(const MfgSolution& sol, const MfgProblem& p) {
  if (sol.m.grid() != p.grid || sol.u.grid() != p.grid)
    throw std::invalid_argument("solution and problem grids differ");
  SystemResidual r;
  const SpectralField f = coupling_field(p, sol.m, 0.0);
  r.hjb = ergodic_residual(sol.u, sol.lambda, f, p.hamiltonian, p.s);
  r.fp = fp_residual(sol.m, negated(hamiltonian_gradient(sol.u, p.hamiltonian)), p.s);
  r.mass_defect = std::abs(sol.m.coeffs()[0] - cdouble(1.0, 0.0));
  return r;
}

UniquenessReport uniqueness_probe(const MfgProblem& p, const std::vector<SpectralField>& seeds) {
  UniquenessReport rep;
  rep.monotone_hypothesis = monotone_pairing_declared(p);
  if (!rep.monotone_hypothesis) rep.findings.push_back("monotonicity hypothesis not met");
  rep.seeds_attempted = static_cast<int>(seeds.size());
  std::vector<MfgSolution> sols;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      sols.push_back(solve_fixed_point(p, &seeds[i]));
    } catch (const std::exception& e) {
      std::ostringstream o;
      o << "seed " << i << " failed to converge: " << e.what();
      rep.findings.push_back(o.str());
    }
  }
  rep.seeds_converged = static_cast<int>(sols.size());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      rep.max_m_gap = std::max(rep.max_m_gap,
                               axpby_fields(1.0, sols[i].m, -1.0, sols[j].m).max_abs());
      rep.max_u_gap = std::max(rep.max_u_gap,
                               axpby_fields(1.0, sols[i].u, -1.0, sols[j].u).max_abs());
      rep.max_lambda_gap = std::max(rep.max_lambda_gap, std::abs(sols[i].lambda - sols[j].lambda));
    }
  }
  if (rep.seeds_converged >= 2 &&
      (rep.max_m_gap > 10.0 * p.solver.tol_outer ||
       rep.max_lambda_gap > 10.0 * p.solver.tol_outer))
    rep.findings.push_back("solutions from different seeds disagree beyond ten times tol_outer");
  return rep;
}

VectorField congestion_flux(const SpectralField& m, const SpectralField& u, const Hamiltonian& h) {
  if (m.grid() != u.grid()) throw std::invalid_argument("flux needs matching grids");
  const VectorField g = hamiltonian_gradient(u, h);
  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(g.dim()));
  for (int d = 0; d < g.dim(); ++d) {
    SpectralField prod = multiply(m, g[d], true);
    comps.push_back(axpby_fields(-1.0, prod, 0.0, prod));
  }
  return VectorField(std::move(comps));
}

double transport_energy(const SpectralField& m, const VectorField& w, const Hamiltonian& h,
                        double clamp) {
  if (!(clamp > 0.0)) throw std::invalid_argument("transport clamp must be positive");
  if (w.dim() != m.grid().dim || w.grid() != m.grid())
    throw std::invalid_argument("transport energy needs matching shapes");
  const std::vector<double>& mv = m.values();
  std::vector<const std::vector<double>*> wv;
  wv.reserve(static_cast<std::size_t>(w.dim()));
  for (int d = 0; d < w.dim(); ++d) wv.push_back(&w[d].values());
  double acc = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) {
    double w2 = 0.0;
    for (int d = 0; d < w.dim(); ++d) {
      const double x = (*wv[static_cast<std::size_t>(d)])[i];
      w2 += x * x;
    }
    const double wn = std::sqrt(w2);
    const double mi = mv[i];
    if (mi <= 0.0) {
      if (wn > clamp) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double me = std::max(mi, clamp);
    acc += me * h.conjugate_radial(wn / me);
  }
  return acc / static_cast<double>(mv.size());
}

double coupling_energy(const LocalCoupling& f, const SpectralField& m) {
  if (f.potential && f.potential->grid() != m.grid())
    throw std::invalid_argument("potential lives on a different grid");
  const std::vector<double>& mv = m.values();
  double acc = 0.0;
  for (double x : mv) acc += f.c * std::pow(std::max(x, 0.0), f.q) / f.q;
  double e = acc / static_cast<double>(mv.size());
  if (f.potential) e += inner(*f.potential, m);
  return e;
}

}  // namespace fmfg
