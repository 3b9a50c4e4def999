#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fmfg/spectral.hpp"
#include "fmfg/variational.hpp"

using namespace fmfg;

namespace {

SpectralField wave(const PeriodicGrid& g, int k, double amp, double shift = 0.0) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = shift + amp * std::cos(two_pi * k * g.point(i)[0]);
  return SpectralField::from_values(g, std::move(v));
}

VectorField single_mode_flux(const PeriodicGrid& g, double amp) {
  std::vector<SpectralField> comps;
  for (int d = 0; d < g.dim; ++d) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto x = g.point(i);
      double val = amp * std::sin(two_pi * x[0]);
      for (int e = 1; e < g.dim; ++e) val *= std::cos(two_pi * x[static_cast<std::size_t>(e)]);
      v[i] = val / (d + 1.0);
    }
    comps.push_back(SpectralField::from_values(g, std::move(v)));
  }
  return VectorField(std::move(comps));
}

double quad_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

MfgProblem perturbed_problem(int n, double a) {
  MfgProblem p;
  p.s = 0.75;
  p.grid = PeriodicGrid{1, n};
  p.hamiltonian = Hamiltonian::power(2.0, 0.5);
  p.coupling = LocalCoupling::make(1.0, 2.0, 0.0, wave(p.grid, 1, a));
  return p;
}

}  // namespace

TEST_CASE("uniform pairs have closed form energy") {
  const PeriodicGrid g{1, 32};
  const Hamiltonian h = Hamiltonian::power(2.0, 0.5);
  const FlowPair pair = lift_flow_pair(VectorField(g, 0.0), 0.75, h);

  CHECK(pair.kinetic == 0.0);
  CHECK(pair.m.coeffs()[0].real() == 1.0);
  CHECK(constraint_residual(pair.m, pair.w, 0.75) <= 1e-14);

  CHECK(energy(pair, h, LocalCoupling::make(1.0, 2.0), 0.75) ==
        doctest::Approx(0.5).epsilon(1e-13));
  const LocalCoupling gen = LocalCoupling::make(2.0, 3.0, 0.0, wave(g, 1, 1.0, 0.3));
  CHECK(energy(pair, h, gen, 0.75) == doctest::Approx(2.0 / 3.0 + 0.3).epsilon(1e-12));
}

TEST_CASE("lifted pairs satisfy the constraint identities") {
  const Hamiltonian h = Hamiltonian::power(2.0, 0.5);

  SUBCASE("one dimension") {
    const PeriodicGrid g{1, 64};
    const VectorField w = single_mode_flux(g, 0.1);
    for (double s : {0.6, 0.75, 0.9}) {
      const SpectralField m = lift_density(w, s);
      CHECK(constraint_residual(m, w, s) <= 1e-12);
      CHECK(m.coeffs()[0].real() == 1.0);
    }
  }

  SUBCASE("two dimensions") {
    const PeriodicGrid g{2, 16};
    const VectorField w = single_mode_flux(g, 0.05);
    const SpectralField m = lift_density(w, 0.8);
    CHECK(constraint_residual(m, w, 0.8) <= 1e-12);
    CHECK(m.min_value() > 0.0);
    const FlowPair pair = make_flow_pair(m, w, h);
    CHECK(std::isfinite(energy(pair, h, LocalCoupling::make(1.0, 2.0), 0.8)));
  }

  SUBCASE("infeasible pairs are rejected") {
    const PeriodicGrid g{1, 32};
    const FlowPair bad = make_flow_pair(unit_density(g), single_mode_flux(g, 0.2), h);
    CHECK_THROWS_AS(energy(bad, h, LocalCoupling::make(1.0, 2.0), 0.75),
                    std::invalid_argument);
  }
}

TEST_CASE("energy matches a fine grid quadrature") {
  const PeriodicGrid g{1, 64};
  const Hamiltonian h = Hamiltonian::power(2.0, 0.5);
  const LocalCoupling lc = LocalCoupling::make(1.0, 2.0);
  const double s = 0.75;

  const VectorField w = single_mode_flux(g, 0.3);
  const FlowPair pair = lift_flow_pair(w, s, h);
  REQUIRE(pair.m.min_value() > 0.5);
  const double coarse = energy(pair, h, lc, s);

  const int fine = 512;
  const SpectralField mf = pad_field(pair.m, fine);
  const VectorField wf(std::vector<SpectralField>{pad_field(pair.w[0], fine)});
  const double oracle = transport_energy(mf, wf, h) + coupling_energy(lc, mf);
  CHECK(coarse == doctest::Approx(oracle).epsilon(1e-8));

  // the cached kinetic term is the same quadrature
  CHECK(pair.kinetic == transport_energy(pair.m, pair.w, h));
}

TEST_CASE("x independent problems minimize to the uniform pair") {
  MfgProblem p;
  p.s = 0.75;
  p.grid = PeriodicGrid{1, 32};
  p.hamiltonian = Hamiltonian::power(2.0, 0.5);
  p.coupling = LocalCoupling::make(1.0, 2.0);

  VariationalDiagnostics diag;
  const FlowPair pair = minimize_energy(p, {}, &diag);
  CHECK(diag.iterations == 0);
  CHECK(diag.grad_norm <= 1e-12);
  CHECK(axpby_fields(1.0, pair.m, -1.0, unit_density(p.grid)).max_abs() <= 1e-12);
  CHECK(pair.w.max_norm() <= 1e-12);
  CHECK(diag.energy == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(diag.potential == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(diag.kinetic <= 1e-15);
}

TEST_CASE("the minimizer agrees with the fixed point solution") {
  MfgProblem p = perturbed_problem(64, 1e-2);
  const MfgSolution sol = solve_fixed_point(p);

  VariationalConfig cfg;
  cfg.gtol = 1e-9;
  VariationalDiagnostics diag;
  const FlowPair pair = minimize_energy(p, cfg, &diag);
  const LocalCoupling& lc = std::get<LocalCoupling>(p.coupling);

  // accepted steps never increase the energy
  REQUIRE(diag.energy_history.size() >= 2);
  for (std::size_t i = 0; i + 1 < diag.energy_history.size(); ++i)
    CHECK(diag.energy_history[i + 1] <= diag.energy_history[i]);
  CHECK(diag.iterations < 200);
  CHECK(diag.grad_norm <= cfg.gtol);

  // cross-method agreement in density and flux
  CHECK(axpby_fields(1.0, pair.m, -1.0, sol.m).max_abs() <= 1e-4);
  CHECK(axpby_fields(1.0, pair.w[0], -1.0, sol.w[0]).max_abs() <= 1e-4);

  MfgSolution hybrid = sol;
  hybrid.m = pair.m;
  hybrid.w = pair.w;
  CHECK(duality_gap(hybrid, lc, p.hamiltonian) <= 1e-4);
  CHECK(optimality_check(hybrid, p.hamiltonian) <= 1e-4);

  // kinetic stays under the coercivity surrogate at the solution
  const double cl = p.hamiltonian.envelope_constant();
  CHECK(pair.kinetic <=
        (diag.energy_history.front() + (1.0 + pair.m.max_value()) / cl) / cl);
}

TEST_CASE("fenchel young holds pointwise on the grid") {
  const PeriodicGrid g{1, 64};
  const SpectralField m = wave(g, 1, 0.3, 1.0);

  for (double gamma : {1.5, 2.0, 3.0}) {
    const Hamiltonian h = Hamiltonian::canonical(gamma);
    const SpectralField u = wave(g, 2, 0.2, 0.0);
    const VectorField gu = gradient(u);

    const auto& mv = m.values();
    const auto& gv = gu[0].values();

    // arbitrary feasible flux: inequality with equality only at the conjugate
    const VectorField w = single_mode_flux(g, 0.15);
    const auto& wv = w[0].values();
    std::vector<double> lhs(mv.size()), rhs(mv.size());
    for (std::size_t i = 0; i < mv.size(); ++i) {
      lhs[i] = mv[i] * h.conjugate_radial(std::abs(wv[i]) / mv[i]);
      rhs[i] = -gv[i] * wv[i] - mv[i] * h.eval_radial(std::abs(gv[i]));
      CHECK(lhs[i] >= rhs[i] - 1e-12);
    }
    CHECK(quad_mean(lhs) >= quad_mean(rhs) - 1e-12);

    // equality at w = -m grad_H(grad u), argmax taken pointwise
    double worst = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i) {
      const double weq = -mv[i] * h.grad_factor(std::abs(gv[i])) * gv[i];
      const double le = mv[i] * h.conjugate_radial(std::abs(weq) / mv[i]);
      const double re = -gv[i] * weq - mv[i] * h.eval_radial(std::abs(gv[i]));
      worst = std::max(worst, std::abs(le - re));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("duality gap flags a corrupted flux") {
  MfgProblem p = perturbed_problem(64, 1e-2);
  const LocalCoupling& lc = std::get<LocalCoupling>(p.coupling);
  const MfgSolution sol = solve_fixed_point(p);

  CHECK(duality_gap(sol, lc, p.hamiltonian) <= 1e-4);
  CHECK(optimality_check(sol, p.hamiltonian) <= 1e-12);

  MfgSolution off = sol;
  off.m = wave(p.grid, 1, 0.5, 1.0);
  off.w = VectorField(p.grid, 0.0);
  CHECK(duality_gap(off, lc, p.hamiltonian) >= 0.05);

  // with w = 0 the optimality defect is exactly the congestion term
  MfgSolution still = sol;
  still.w = VectorField(p.grid, 0.0);
  const SpectralField prod =
      multiply(sol.m, hamiltonian_gradient(sol.u, p.hamiltonian)[0], true);
  CHECK(optimality_check(still, p.hamiltonian) == prod.max_abs());
}

TEST_CASE("minimization failure modes are reported") {
  MfgProblem p = perturbed_problem(32, 1e-2);

  SUBCASE("iteration budget exhaustion carries the energy history") {
    VariationalConfig cfg;
    cfg.max_iter = 1;
    cfg.gtol = 1e-14;
    try {
      minimize_energy(p, cfg);
      FAIL("expected a budget failure");
    } catch (const VariationalError& e) {
      CHECK(std::string(e.what()).find("did not reach") != std::string::npos);
      CHECK(e.energy_history.size() == 2);
    }
  }

  SUBCASE("nonlocal couplings are rejected") {
    NonlocalCoupling nc;
    nc.kernel = unit_density(p.grid);
    p.coupling = nc;
    CHECK_THROWS_AS(minimize_energy(p), std::invalid_argument);
  }

  SUBCASE("config validation") {
    VariationalConfig cfg;
    cfg.shrink = 1.5;
    CHECK_THROWS_AS(minimize_energy(p, cfg), std::invalid_argument);
    cfg = {};
    cfg.gtol = 0.0;
    CHECK_THROWS_AS(minimize_energy(p, cfg), std::invalid_argument);
    cfg = {};
    cfg.clamp = -1.0;
    CHECK_THROWS_AS(minimize_energy(p, cfg), std::invalid_argument);
  }
}
