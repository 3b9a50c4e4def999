#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fmfg/fokker_planck.hpp"
#include "fmfg/spectral.hpp"
#include "test_util.hpp"

using fmfg::FpConfig;
using fmfg::FpDiagnostics;
using fmfg::PeriodicGrid;
using fmfg::SpectralField;
using fmfg::VectorField;
using testutil::field_from;
using testutil::max_diff;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

VectorField single_field(SpectralField f) {
  std::vector<SpectralField> comps;
  comps.push_back(std::move(f));
  return VectorField(std::move(comps));
}

bool unit_mass_bitwise(const SpectralField& m) {
  const auto c0 = m.coeffs()[0];
  return c0.real() == 1.0 && c0.imag() == 0.0;
}

SpectralField abs_field(const SpectralField& f) {
  std::vector<double> v = f.values();
  for (double& x : v) x = std::abs(x);
  return SpectralField::from_values(f.grid(), std::move(v));
}

// 1D drift pulling toward the well of W(x) = cos(2 pi x)
VectorField gibbs_drift(const PeriodicGrid& g) {
  return single_field(
      field_from(g, [](std::array<double, 3> x) { return kTau * std::sin(kTau * x[0]); }));
}

SpectralField gibbs_density(const PeriodicGrid& g) {
  SpectralField unnorm =
      field_from(g, [](std::array<double, 3> x) { return std::exp(-std::cos(kTau * x[0])); });
  const double z = unnorm.mean();
  return fmfg::axpby_fields(1.0 / z, unnorm, 0.0, unnorm);
}

}  // namespace

TEST_CASE("div-source solve reproduces the single-mode closed form") {
  const PeriodicGrid g{1, 64};
  const VectorField zero(g, 0.0);
  const SpectralField trivial = fmfg::solve_div_source(zero, 0.75);
  CHECK(unit_mass_bitwise(trivial));
  CHECK(max_diff(trivial, fmfg::unit_density(g)) == 0.0);

  const VectorField w = single_field(
      field_from(g, [](std::array<double, 3> x) { return std::cos(kTau * x[0]); }));
  for (double s : {0.6, 0.75, 0.9, 1.0}) {
    const SpectralField m = fmfg::solve_div_source(w, s);
    CHECK(unit_mass_bitwise(m));
    const SpectralField expect = field_from(g, [s](std::array<double, 3> x) {
      return 1.0 - std::pow(kTau, 1.0 - 2.0 * s) * std::sin(kTau * x[0]);
    });
    CHECK(max_diff(m, expect) <= 1e-13);
    // discrete equation: (-Delta)^s m = div w
    const SpectralField resid =
        fmfg::axpby_fields(1.0, fmfg::fractional_laplacian(m, s), -1.0, fmfg::divergence(w));
    CHECK(resid.max_abs() <= 1e-10 * w.max_norm());
  }

  CHECK_THROWS_AS((void)fmfg::solve_div_source(w, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)fmfg::solve_div_source(w, 1.1), std::invalid_argument);
}

TEST_CASE("div-source solve is linear around the unit density") {
  const PeriodicGrid g{2, 32};
  std::vector<SpectralField> comps;
  comps.push_back(fmfg::band_limited_random(g, 5, 0xa1u));
  comps.push_back(fmfg::band_limited_random(g, 5, 0xa2u));
  const VectorField w(std::move(comps));
  const double alpha = 2.7;
  std::vector<SpectralField> scaled;
  scaled.push_back(fmfg::axpby_fields(alpha, w[0], 0.0, w[0]));
  scaled.push_back(fmfg::axpby_fields(alpha, w[1], 0.0, w[1]));
  const VectorField wa(std::move(scaled));

  const double s = 0.8;
  const SpectralField m1 = fmfg::solve_div_source(w, s);
  const SpectralField m2 = fmfg::solve_div_source(wa, s);
  const SpectralField lhs = fmfg::add_constant(m2, -1.0);
  const SpectralField rhs =
      fmfg::axpby_fields(alpha, fmfg::add_constant(m1, -1.0), 0.0, m1);
  CHECK(max_diff(lhs, rhs) <= 1e-12 * (1.0 + rhs.max_abs()));
}

TEST_CASE("stability ratio is invariant under drift amplitude scaling") {
  const PeriodicGrid g{1, 64};
  const VectorField w = single_field(fmfg::band_limited_random(g, 6, 0xbeefu));
  const double s = 0.7;
  const double p = 2.0;
  const double sigma = 2.0 * s - 1.0;

  auto ratio = [&](double amp) {
    std::vector<SpectralField> comps;
    comps.push_back(fmfg::axpby_fields(amp, w[0], 0.0, w[0]));
    const VectorField ww(std::move(comps));
    const SpectralField m = fmfg::solve_div_source(ww, s);
    const double num = fmfg::bessel_norm(fmfg::add_constant(m, -1.0), sigma, p);
    const double den = fmfg::lp_norm(abs_field(ww[0]), p);
    return num / den;
  };

  const double r1 = ratio(1.0);
  const double r2 = ratio(37.5);
  const double r3 = ratio(0.004);
  CHECK(r2 == doctest::Approx(r1).epsilon(1e-13));
  CHECK(r3 == doctest::Approx(r1).epsilon(1e-13));
}

TEST_CASE("stationary fokker-planck handles trivial drifts immediately") {
  const PeriodicGrid g{1, 64};
  FpDiagnostics diag;

  const SpectralField m0 = fmfg::solve_stationary_fp(VectorField(g, 0.0), 0.75, {}, &diag);
  CHECK(unit_mass_bitwise(m0));
  CHECK(max_diff(m0, fmfg::unit_density(g)) == 0.0);
  CHECK(diag.iterations == 0);
  CHECK(diag.residual <= 1e-14);

  // constant drift: div(b * 1) = 0, so the unit density already solves it
  const SpectralField mc = fmfg::solve_stationary_fp(
      single_field(field_from(g, [](std::array<double, 3>) { return 1.7; })), 0.8, {}, &diag);
  CHECK(max_diff(mc, fmfg::unit_density(g)) == 0.0);
  CHECK(diag.iterations == 0);
}

TEST_CASE("stationary fokker-planck approaches the gibbs density near s = 1") {
  const PeriodicGrid g{1, 256};
  const VectorField b = gibbs_drift(g);
  FpDiagnostics diag;
  const SpectralField m = fmfg::solve_stationary_fp(b, 0.99, {}, &diag);

  CHECK(unit_mass_bitwise(m));
  CHECK(diag.residual <= 1e-9 * (1.0 + b.max_norm()));
  CHECK(diag.min_m > 0.0);
  CHECK_FALSE(diag.positivity_flagged);
  CHECK(diag.residual_history.front() > diag.residual_history.back());

  CHECK(max_diff(m, gibbs_density(g)) <= 5e-2);

  // independent residual recomputation agrees with the reported one
  CHECK(fmfg::fp_residual(m, b, 0.99) == doctest::Approx(diag.residual).epsilon(1e-12));
}

TEST_CASE("fp residual detects a single-mode perturbation") {
  const PeriodicGrid g{1, 128};
  CHECK(fmfg::fp_residual(fmfg::unit_density(g), VectorField(g, 0.0), 0.75) <= 1e-14);

  // pure perturbation of the zero-drift solution
  for (double s : {0.6, 0.9}) {
    const SpectralField m = field_from(
        g, [](std::array<double, 3> x) { return 1.0 + 0.1 * std::cos(kTau * x[0]); });
    const double r = fmfg::fp_residual(m, VectorField(g, 0.0), s);
    CHECK(r >= 0.1 * std::pow(kTau, 2.0 * s) - 1e-10);
    CHECK(r <= 0.1 * std::pow(kTau, 2.0 * s) + 1e-10);
  }

  // perturbing a converged drift solve lifts the residual by the mode response
  const double s = 0.85;
  const VectorField b = gibbs_drift(g);
  const SpectralField m = fmfg::solve_stationary_fp(b, s);
  const SpectralField pert = fmfg::axpby_fields(
      1.0, m, 0.1, field_from(g, [](std::array<double, 3> x) { return std::cos(kTau * x[0]); }));
  CHECK(fmfg::fp_residual(pert, b, s) >= 0.1 * std::pow(kTau, 2.0 * s) - 1e-6);
}

TEST_CASE("stationary fokker-planck is insensitive to the initial guess") {
  const PeriodicGrid g{1, 128};
  const VectorField b = gibbs_drift(g);
  const double s = 0.8;
  const FpConfig cfg;

  const SpectralField m1 = fmfg::solve_stationary_fp(b, s, cfg);
  const SpectralField seed = field_from(
      g, [](std::array<double, 3> x) { return 1.0 + 0.3 * std::cos(kTau * x[0]); });
  FpDiagnostics diag;
  const SpectralField m2 = fmfg::solve_stationary_fp(b, s, cfg, &diag, &seed);
  CHECK(max_diff(m1, m2) <= 10.0 * cfg.tol);
  CHECK(unit_mass_bitwise(m2));

  // warm start from the answer converges without further iterations
  FpDiagnostics warm;
  (void)fmfg::solve_stationary_fp(b, s, cfg, &warm, &m1);
  CHECK(warm.iterations == 0);
}

TEST_CASE("stationary fokker-planck solves a two-mode drift in 2d") {
  const PeriodicGrid g{2, 64};
  std::vector<SpectralField> comps;
  comps.push_back(field_from(g, [](std::array<double, 3> x) {
    return 0.8 * std::sin(kTau * x[0]) * std::cos(kTau * x[1]);
  }));
  comps.push_back(field_from(g, [](std::array<double, 3> x) {
    return 0.8 * std::cos(kTau * 2.0 * x[0]) * std::sin(kTau * x[1]);
  }));
  const VectorField b(std::move(comps));
  FpDiagnostics diag;
  const SpectralField m = fmfg::solve_stationary_fp(b, 0.75, {}, &diag);
  CHECK(unit_mass_bitwise(m));
  CHECK(diag.residual <= 1e-9 * (1.0 + b.max_norm()));
  CHECK(diag.min_m > 0.0);
  CHECK(diag.max_m >= 1.0);  // unit mass forces the max to reach the mean
}

TEST_CASE("stationary fokker-planck reports stalls with the residual trace") {
  const PeriodicGrid g{1, 64};
  const VectorField b = gibbs_drift(g);
  FpConfig cfg;
  cfg.max_iter = 2;
  bool thrown = false;
  try {
    (void)fmfg::solve_stationary_fp(b, 0.8, cfg);
  } catch (const fmfg::FpError& e) {
    thrown = true;
    CHECK(e.residual_history.size() == 3);
    CHECK(std::string(e.what()).find("stalled") != std::string::npos);
  }
  CHECK(thrown);

  FpConfig badcfg;
  badcfg.damping = 0.0;
  CHECK_THROWS_AS((void)fmfg::solve_stationary_fp(b, 0.8, badcfg), std::invalid_argument);
}
