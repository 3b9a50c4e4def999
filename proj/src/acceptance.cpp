#include "fmfg/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "fmfg/coupling.hpp"
#include "fmfg/fokker_planck.hpp"
#include "fmfg/hamiltonian.hpp"
#include "fmfg/hjb.hpp"
#include "fmfg/mfg.hpp"
#include "fmfg/spectral.hpp"
#include "fmfg/variational.hpp"

namespace fmfg {
namespace {

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

// collects pass/fail checks for one criterion; the detail line carries either
// every failure or the tightest passing margin, in deterministic text
class Criterion {
 public:
  Criterion(int index, const char* name) {
    res_.index = index;
    res_.name = name;
    res_.passed = true;
  }

  void bound(const std::string& label, double value, double tol) {
    if (!(value <= tol)) {
      res_.passed = false;
      fails_.push_back(label + " = " + num(value) + " exceeds " + num(tol));
    } else if (tol > 0.0 && value / tol > worst_ratio_) {
      worst_ratio_ = value / tol;
      worst_ = label + " = " + num(value) + " (tol " + num(tol) + ")";
    }
  }

  void exact(const std::string& label, bool ok) {
    if (!ok) {
      res_.passed = false;
      fails_.push_back(label + " failed");
    }
  }

  CriterionResult finish() {
    if (res_.passed) {
      res_.detail = worst_.empty() ? "all checks exact" : "worst margin: " + worst_;
    } else {
      std::string d;
      for (const std::string& f : fails_) d += (d.empty() ? "" : "; ") + f;
      res_.detail = d;
    }
    return res_;
  }

 private:
  CriterionResult res_;
  std::vector<std::string> fails_;
  std::string worst_;
  double worst_ratio_ = -1.0;
};

SpectralField cos_wave(const PeriodicGrid& g, int axis, int k, double amp, double shift = 0.0) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = amp * std::cos(two_pi * (k * g.point(i)[static_cast<std::size_t>(axis)]) + shift);
  return SpectralField::from_values(g, std::move(v));
}

SpectralField sin_wave(const PeriodicGrid& g, int axis, int k, double amp) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = amp * std::sin(two_pi * (k * g.point(i)[static_cast<std::size_t>(axis)]));
  return SpectralField::from_values(g, std::move(v));
}

// squared euclidean wavenumber of a flat coefficient index, and whether every
// axis stays strictly inside the resolvable band
struct ModeInfo {
  double k2 = 0.0;
  bool resolved = true;
  bool zero = true;
};
ModeInfo mode_info(const PeriodicGrid& g, std::size_t flat) {
  ModeInfo mi;
  auto j = g.unflatten(flat);
  for (int d = 0; d < g.dim; ++d) {
    int k = wavenumber(j[static_cast<std::size_t>(d)], g.n);
    mi.k2 += static_cast<double>(k) * k;
    if (k == -g.n / 2) mi.resolved = false;
    if (k != 0) mi.zero = false;
  }
  return mi;
}

void symbol_relation(Criterion& c, const PeriodicGrid& g, double s, const char* tag) {
  std::vector<cdouble> coeffs(g.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    ModeInfo mi = mode_info(g, i);
    coeffs[i] = cdouble(1.0 / (1.0 + mi.k2), 0.0);
  }
  SpectralField f = SpectralField::from_coeffs(g, coeffs);
  SpectralField out = fractional_laplacian(f, s);
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    ModeInfo mi = mode_info(g, i);
    if (!mi.resolved || mi.zero) continue;
    double mu = std::pow(two_pi * two_pi * mi.k2, s);
    double rel = std::abs(out.coeffs()[i] - mu * coeffs[i]) / (mu * std::abs(coeffs[i]));
    worst = std::max(worst, rel);
  }
  c.bound(std::string("plane-wave symbol relative error, ") + tag, worst, 1e-12);
}

CriterionResult criterion_spectral(std::uint64_t seed) {
  Criterion c(1, "spectral symbol exactness");
  symbol_relation(c, PeriodicGrid(1, 64), 0.6, "1-D s=0.6");
  symbol_relation(c, PeriodicGrid(1, 64), 0.75, "1-D s=0.75");
  symbol_relation(c, PeriodicGrid(1, 64), 0.9, "1-D s=0.9");
  symbol_relation(c, PeriodicGrid(2, 16), 0.75, "2-D s=0.75");
  symbol_relation(c, PeriodicGrid(1, 64), 1.0, "1-D s=1 vs classical");

  // independent dense-matrix application on 32 points
  PeriodicGrid g(1, 32);
  SpectralField f = band_limited_random(g, 10, seed + 11);
  SpectralField fast = fractional_laplacian(f, 0.75);
  int n = g.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double entry = 0.0;
      for (int k = 1; k <= n / 2 - 1; ++k)
        entry += 2.0 * std::pow(two_pi * k, 1.5) * std::cos(two_pi * k * (i - j) / double(n));
      acc += entry / n * f.values()[static_cast<std::size_t>(j)];
    }
    worst = std::max(worst, std::abs(acc - fast.values()[static_cast<std::size_t>(i)]));
  }
  c.bound("dense-matrix oracle mismatch", worst / std::max(1.0, fast.max_abs()), 1e-12);
  return c.finish();
}

CriterionResult criterion_transport() {
  Criterion c(2, "stationary transport suite");
  FpConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iter = 4000;

  struct Case {
    const char* name;
    VectorField b;
    bool min_mandated;  // sup norm of the drift stays within 5
  };
  std::vector<Case> cases;
  PeriodicGrid g1(1, 256);
  cases.push_back({"zero drift", VectorField(g1, 0.0), true});
  cases.push_back({"constant drift", VectorField(g1, 0.3), true});
  cases.push_back(
      {"gradient drift", VectorField(std::vector<SpectralField>{sin_wave(g1, 0, 1, two_pi)}),
       false});
  PeriodicGrid g2(2, 128);
  SpectralField bx = axpby_fields(1.0, sin_wave(g2, 0, 1, 1.5), 1.0, cos_wave(g2, 1, 1, 0.8));
  SpectralField by = axpby_fields(1.0, cos_wave(g2, 0, 2, 0.7), 1.0, sin_wave(g2, 1, 1, -1.2));
  cases.push_back({"two-mode 2-D drift", VectorField(std::vector<SpectralField>{bx, by}), true});

  for (Case& cs : cases) {
    FpDiagnostics d;
    SpectralField m = solve_stationary_fp(cs.b, 0.75, cfg, &d);
    cdouble c0 = m.coeffs()[0];
    c.exact(std::string(cs.name) + ": mass pinned bitwise",
            c0.real() == 1.0 && c0.imag() == 0.0);
    c.bound(std::string(cs.name) + ": transport residual", fp_residual(m, cs.b, 0.75), 1e-8);
    if (cs.min_mandated)
      c.exact(std::string(cs.name) + ": strictly positive density (min " + num(m.min_value()) + ")",
              m.min_value() > 0.0);
  }
  return c.finish();
}

CriterionResult criterion_gibbs() {
  Criterion c(3, "classical Gibbs limit");
  PeriodicGrid g(1, 256);
  VectorField b(std::vector<SpectralField>{sin_wave(g, 0, 1, two_pi)});  // -grad of cos(2 pi x)

  std::vector<double> gibbs(g.size());
  for (std::size_t i = 0; i < gibbs.size(); ++i)
    gibbs[i] = std::exp(-std::cos(two_pi * g.point(i)[0]));
  double z = 0.0;
  for (double v : gibbs) z += v;
  z /= static_cast<double>(gibbs.size());
  for (double& v : gibbs) v /= z;

  FpConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iter = 6000;
  double svals[] = {0.8, 0.9, 0.95, 0.99};
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    SpectralField m = solve_stationary_fp(b, svals[k], cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < gibbs.size(); ++i)
      err = std::max(err, std::abs(m.values()[i] - gibbs[i]));
    if (k > 0)
      c.exact("distance to the Gibbs density decreases at s = " + num(svals[k]) + " (" +
                  num(err) + " < " + num(prev) + ")",
              err < prev);
    prev = err;
  }
  c.bound("distance to the Gibbs density at s = 0.99", prev, 5e-2);
  return c.finish();
}

CriterionResult criterion_value_equation(std::uint64_t seed) {
  Criterion c(4, "ergodic value equation");
  Hamiltonian h = Hamiltonian::power(2.0, 0.5);
  HjbConfig cfg;
  cfg.tol = 1e-9;

  PeriodicGrid g(1, 128);
  ErgodicSolution flat = solve_ergodic(SpectralField(g, 0.7), h, 0.75, cfg);
  c.bound("constant data: |lambda - c|", std::abs(flat.lambda - 0.7), 1e-12);
  c.bound("constant data: sup |u|", flat.u.max_abs(), 1e-12);

  std::vector<SpectralField> suite;
  suite.push_back(cos_wave(g, 0, 1, 1.0));
  suite.push_back(axpby_fields(1.0, cos_wave(g, 0, 1, 0.5, 0.3), 1.0, sin_wave(g, 0, 2, 0.2)));
  suite.push_back(band_limited_random(g, 3, seed + 17));
  int idx = 0;
  for (const SpectralField& f : suite) {
    ++idx;
    for (double s : {0.6, 0.75, 0.9}) {
      ErgodicSolution sol = solve_ergodic(f, h, s, cfg);
      LambdaBounds lb = lambda_bounds(f, h);
      c.bound("data " + std::to_string(idx) + " s = " + num(s) + ": lambda below the floor",
              lb.lo - sol.lambda, 1e-12);
      c.bound("data " + std::to_string(idx) + " s = " + num(s) + ": lambda above the ceiling",
              sol.lambda - lb.hi, 1e-12);
    }
  }

  ErgodicSolution base = solve_ergodic(suite[0], h, 0.75, cfg);
  ErgodicSolution lifted = solve_ergodic(add_constant(suite[0], 0.83), h, 0.75, cfg);
  c.bound("shift covariance in lambda", std::abs(lifted.lambda - base.lambda - 0.83), 1e-12);
  double udiff = 0.0;
  for (std::size_t i = 0; i < base.u.size(); ++i)
    udiff = std::max(udiff, std::abs(lifted.u.values()[i] - base.u.values()[i]));
  c.bound("shift covariance in u", udiff, 1e-12);

  SpectralField warm = cos_wave(g, 0, 1, 0.2);
  ErgodicSolution other = solve_ergodic(suite[0], h, 0.75, cfg, &warm);
  c.bound("initialization independence in lambda", std::abs(other.lambda - base.lambda), 1e-7);
  udiff = 0.0;
  for (std::size_t i = 0; i < base.u.size(); ++i)
    udiff = std::max(udiff, std::abs(other.u.values()[i] - base.u.values()[i]));
  c.bound("initialization independence in u", udiff, 1e-7);

  HjbConfig fine = cfg;
  fine.tol = 1e-10;
  double l256 = solve_ergodic(cos_wave(PeriodicGrid(1, 256), 0, 1, 1.0), h, 1.0, fine).lambda;
  double l1024 = solve_ergodic(cos_wave(PeriodicGrid(1, 1024), 0, 1, 1.0), h, 1.0, fine).lambda;
  c.bound("classical self-convergence |lambda(256) - lambda(1024)|", std::abs(l256 - l1024), 1e-6);
  return c.finish();
}

MfgProblem perturbed_problem(int n, double tol_outer) {
  MfgProblem p;
  p.s = 0.75;
  p.grid = PeriodicGrid(1, n);
  p.hamiltonian = Hamiltonian::power(2.0, 0.5);
  p.coupling = LocalCoupling::make(1.0, 2.0, 0.0, cos_wave(p.grid, 0, 1, 0.01));
  p.solver.tol_outer = tol_outer;
  p.solver.fp.tol = 1e-11;
  p.solver.hjb.tol = 1e-10;
  return p;
}

CriterionResult criterion_fixed_point() {
  Criterion c(5, "coupled fixed point");
  for (double s : {0.6, 0.75, 0.9}) {
    MfgProblem p;
    p.s = s;
    p.grid = PeriodicGrid(1, 32);
    p.hamiltonian = Hamiltonian::power(2.0, 0.5);
    p.coupling = LocalCoupling::make(1.0, 2.0);
    MfgSolution sol = solve_fixed_point(p);
    SystemResidual sr = system_residual(sol, p);
    std::string tag = "uniform problem s = " + num(s);
    c.bound(tag + ": |lambda - 1|", std::abs(sol.lambda - 1.0), 1e-10);
    c.bound(tag + ": sup |u|", sol.u.max_abs(), 1e-10);
    double mdev = 0.0;
    for (double v : sol.m.values()) mdev = std::max(mdev, std::abs(v - 1.0));
    c.bound(tag + ": sup |m - 1|", mdev, 1e-10);
    c.bound(tag + ": value residual", sr.hjb, 1e-10);
    c.bound(tag + ": transport residual", sr.fp, 1e-10);
    c.exact(tag + ": unit mass bitwise", sr.mass_defect == 0.0);
  }

  MfgProblem p = perturbed_problem(64, 1e-8);
  MfgSolution sol = solve_fixed_point(p);
  SystemResidual sr = system_residual(sol, p);
  c.bound("perturbed problem: value residual", sr.hjb, 1e-6);
  c.bound("perturbed problem: transport residual", sr.fp, 1e-6);
  c.exact("perturbed problem: unit mass bitwise", sr.mass_defect == 0.0);
  c.bound("perturbed problem: worst sandwich slack over the outer iterates",
          -sol.diagnostics.sandwich_slack_min, 1e-10);
  return c.finish();
}

CriterionResult criterion_duality() {
  Criterion c(6, "duality and optimality");
  MfgProblem p = perturbed_problem(64, 1e-8);
  const LocalCoupling& lc = *std::get_if<LocalCoupling>(&p.coupling);

  MfgSolution fixed = solve_fixed_point(p);
  c.bound("fixed point: duality gap |lambda - J|", fixed.diagnostics.duality_gap, 1e-4);

  VariationalConfig vc;
  vc.gtol = 1e-9;
  VariationalDiagnostics vd;
  FlowPair pair = minimize_energy(p, vc, &vd);
  double mdiff = 0.0;
  for (std::size_t i = 0; i < pair.m.size(); ++i)
    mdiff = std::max(mdiff, std::abs(pair.m.values()[i] - fixed.m.values()[i]));
  c.bound("cross-method density gap", mdiff, 1e-3);

  ErgodicSolution value = solve_ergodic(eval_local(lc, pair.m), p.hamiltonian, p.s, p.solver.hjb);
  c.bound("cross-method ergodic constant gap", std::abs(value.lambda - fixed.lambda), 1e-3);

  MfgSolution hybrid;
  hybrid.u = value.u;
  hybrid.lambda = value.lambda;
  hybrid.m = pair.m;
  hybrid.w = pair.w;
  c.bound("variational minimizer: optimality defect", optimality_check(hybrid, p.hamiltonian),
          1e-4);
  return c.finish();
}

CriterionResult criterion_uniqueness() {
  Criterion c(7, "uniqueness probe");
  MfgProblem p = perturbed_problem(64, 1e-9);
  std::vector<SpectralField> seeds;
  seeds.push_back(unit_density(p.grid));
  SpectralField tilted = add_constant(cos_wave(p.grid, 0, 1, 0.3), 1.0);
  tilted.mutate_coeffs()[0] = cdouble(1.0, 0.0);
  seeds.push_back(tilted);
  UniquenessReport rep = uniqueness_probe(p, seeds);
  c.exact("monotone coupling recognized", rep.monotone_hypothesis);
  c.exact("both seeds converged", rep.seeds_converged == 2);
  c.exact("no findings", rep.findings.empty());
  c.bound("pairwise density gap", rep.max_m_gap, 1e-6);
  c.bound("pairwise ergodic constant gap", rep.max_lambda_gap, 1e-8);
  return c.finish();
}

CriterionResult criterion_exponents(std::uint64_t seed) {
  Criterion c(8, "exponent identities");
  AprioriExponents e = a_priori_exponents(0.75, 2.0, 1.5, 1, 1.5);
  c.bound("|r_p - 6/5|", std::abs(e.r_p - 1.2), 1e-12);
  c.bound("|theta - 1/2|", std::abs(e.theta - 0.5), 1e-12);
  c.bound("|delta - 1|", std::abs(e.delta - 1.0), 1e-12);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int accepted = 0, guard = 0;
  double worst = 0.0;
  while (accepted < 100 && guard++ < 100000) {
    int N = 1 + static_cast<int>(u01(rng) * 3.0);
    double s = 0.55 + 0.43 * u01(rng);
    double gmax = N == 1 ? 2.0 * s : static_cast<double>(N) / (N - 2.0 * s + 1.0);
    double gamma = 1.0 + (gmax - 1.0) * (0.05 + 0.9 * u01(rng));
    double gp = gamma / (gamma - 1.0);
    double qmax = 1.0 + (2.0 * s - 1.0) * gamma / (N * (gamma - 1.0));
    double q = 1.0 + (qmax - 1.0) * (0.05 + 0.9 * u01(rng));
    if (!validate_growth(s, gamma, q, N).passed) continue;
    ++accepted;
    double pexp = 1.0 + 2.0 * u01(rng);
    AprioriExponents ex = a_priori_exponents(s, gamma, q, N, pexp);
    double lhs = (1.0 - ex.theta / gamma) * gp / ex.theta;
    double rhs = (1.0 + ex.delta) * q;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  c.exact("collected 100 admissible parameter points", accepted == 100);
  c.bound("exponent identity relative defect over the sample", worst, 1e-12);
  return c.finish();
}

CriterionResult criterion_legendre(std::uint64_t seed) {
  Criterion c(9, "convex conjugate layer");
  std::mt19937_64 rng(seed ^ 0xc2b2ae3d27d4eb4full);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double gammas[] = {1.5, 2.0, 3.0, 1.2};
  int fy_violations = 0, env_violations = 0;
  double worst_fy = 0.0, worst_env = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Hamiltonian h = Hamiltonian::power(gammas[i % 4], 0.3 + u01(rng),
                                       (i % 3 == 0) ? 0.1 * u01(rng) : 0.0);
    int dim = 1 + i % 3;
    double m = (i % 20 == 0) ? 0.0 : 2.0 * u01(rng);
    double p[3], w[3], q[3];
    for (int d = 0; d < dim; ++d) {
      p[d] = 10.0 * u01(rng) - 5.0;
      w[d] = 10.0 * u01(rng) - 5.0;
      q[d] = 10.0 * u01(rng) - 5.0;
    }
    double fy = legendre_residual(h, m, std::span<const double>(p, static_cast<std::size_t>(dim)),
                                  std::span<const double>(w, static_cast<std::size_t>(dim)));
    if (fy < -1e-10) ++fy_violations;
    if (std::isfinite(fy)) worst_fy = std::min(worst_fy, fy);

    // envelope audited on the closed-form conjugates; the smoothed family
    // resolves its conjugate by bisection and would blur a 1e-10 threshold
    Hamiltonian h0 = Hamiltonian::power(h.gamma, h.coeff, 0.0);
    double qn = 0.0;
    for (int d = 0; d < dim; ++d) qn += q[d] * q[d];
    qn = std::sqrt(qn);
    double cl = h0.envelope_constant();
    double lv = h0.conjugate_radial(qn);
    double lo = cl * std::pow(qn, h0.conjugate_exponent()) - 1.0 / cl;
    double hi = (std::pow(qn, h0.conjugate_exponent()) + 1.0) / cl;
    double defect = std::max(lo - lv, lv - hi);
    if (defect > 1e-10) ++env_violations;
    worst_env = std::max(worst_env, defect);
  }
  c.exact("no Fenchel-Young violations beyond 1e-10 in 10000 samples", fy_violations == 0);
  c.bound("most negative Fenchel-Young residual", -worst_fy, 1e-10);
  c.exact("no envelope violations beyond 1e-10 in 10000 samples", env_violations == 0);
  c.bound("worst envelope defect", std::max(worst_env, 0.0), 1e-10);
  return c.finish();
}

// a solver failure inside one criterion must fail that criterion, not the run
template <typename F>
CriterionResult guarded(int index, const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    CriterionResult r;
    r.index = index;
    r.name = name;
    r.passed = false;
    r.detail = std::string("aborted: ") + e.what();
    return r;
  }
}

std::vector<CriterionResult> run_once(std::uint64_t seed) {
  std::vector<CriterionResult> out;
  out.push_back(guarded(1, "spectral symbol exactness", [&] { return criterion_spectral(seed); }));
  out.push_back(guarded(2, "stationary transport suite", [] { return criterion_transport(); }));
  out.push_back(guarded(3, "classical Gibbs limit", [] { return criterion_gibbs(); }));
  out.push_back(
      guarded(4, "ergodic value equation", [&] { return criterion_value_equation(seed); }));
  out.push_back(guarded(5, "coupled fixed point", [] { return criterion_fixed_point(); }));
  out.push_back(guarded(6, "duality and optimality", [] { return criterion_duality(); }));
  out.push_back(guarded(7, "uniqueness probe", [] { return criterion_uniqueness(); }));
  out.push_back(guarded(8, "exponent identities", [&] { return criterion_exponents(seed); }));
  out.push_back(guarded(9, "convex conjugate layer", [&] { return criterion_legendre(seed); }));
  return out;
}

std::string serialize_results(const std::vector<CriterionResult>& rs) {
  std::string s;
  for (const CriterionResult& r : rs) {
    s += std::to_string(r.index) + "|" + r.name + "|" + (r.passed ? "pass" : "fail") + "|" +
         r.detail + "\n";
  }
  return s;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed) {
  std::vector<CriterionResult> results = run_once(seed);
  std::vector<CriterionResult> rerun = run_once(seed);

  Criterion c(10, "determinism");
  std::string a = serialize_results(results);
  std::string b = serialize_results(rerun);
  c.exact("two full runs with the same seed serialize byte-identically (" +
              std::to_string(a.size()) + " bytes)",
          a == b);
  results.push_back(c.finish());
  return results;
}

}  // namespace fmfg
