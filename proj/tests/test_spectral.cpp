#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fmfg/spectral.hpp"
#include "test_util.hpp"

using namespace fmfg;
using testutil::field_from;
using testutil::max_diff;

namespace {

constexpr double pi = 3.14159265358979323846;

// Dense DFT oracle: analysis and synthesis as explicit trigonometric sums,
// sharing nothing with the FFT path. 1D only, O(n^2), used at n = 32.
std::vector<std::complex<double>> dense_analysis(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<std::complex<double>> c(v.size());
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n; ++j)
      acc += v[static_cast<std::size_t>(j)] *
             std::polar(1.0, -2.0 * pi * static_cast<double>(j) * k / n);
    c[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
  }
  return c;
}

std::vector<double> dense_synthesis(const std::vector<std::complex<double>>& c) {
  const int n = static_cast<int>(c.size());
  std::vector<double> v(c.size());
  for (int j = 0; j < n; ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < n; ++k)
      acc += c[static_cast<std::size_t>(k)] *
             std::polar(1.0, 2.0 * pi * static_cast<double>(j) * k / n);
    v[static_cast<std::size_t>(j)] = acc.real();
  }
  return v;
}

std::vector<double> dense_fractional_laplacian(const std::vector<double>& v, double s) {
  const int n = static_cast<int>(v.size());
  auto c = dense_analysis(v);
  for (int j = 0; j < n; ++j) {
    const int k = wavenumber_deriv(j, n);
    const double mult = k == 0 ? 0.0 : std::pow(2.0 * pi * std::abs(k), 2.0 * s);
    c[static_cast<std::size_t>(j)] *= mult;
  }
  return dense_synthesis(c);
}

}  // namespace

TEST_CASE("fft round trip reproduces values") {
  for (int dim : {1, 2}) {
    PeriodicGrid g(dim, dim == 1 ? 64 : 32);
    SpectralField f = band_limited_random(g, g.n / 2 - 1, 7u);
    SpectralField back = SpectralField::from_values(g, f.values());
    const auto& c = back.coeffs();
    std::vector<cdouble> copy(c);
    SpectralField round = SpectralField::from_coeffs(g, std::move(copy));
    CHECK(max_diff(f, round) <= 1e-12 * (1.0 + f.max_abs()));
  }
}

TEST_CASE("coefficients of a real field are conjugate symmetric") {
  PeriodicGrid g(2, 16);
  SpectralField f = band_limited_random(g, 7, 11u);
  SpectralField fv = SpectralField::from_values(g, f.values());
  const auto& c = fv.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto j = g.unflatten(i);
    std::array<int, 3> neg = j;
    for (int d = 0; d < g.dim; ++d)
      neg[static_cast<std::size_t>(d)] = (g.n - j[static_cast<std::size_t>(d)]) % g.n;
    const cdouble a = c[i];
    const cdouble b = std::conj(c[g.flatten(neg)]);
    CHECK(std::abs(a - b) <= 1e-13);
  }
}

TEST_CASE("fractional laplacian kills constants") {
  PeriodicGrid g(1, 64);
  SpectralField one(g, 4.2);
  for (double s : {0.6, 0.75, 1.0}) {
    SpectralField out = fractional_laplacian(one, s);
    CHECK(out.max_abs() <= 1e-13);
  }
}

TEST_CASE("plane waves are eigenfunctions with symbol (2pi|k|)^{2s}") {
  PeriodicGrid g(1, 64);
  for (double s : {0.55, 0.75, 0.9, 1.0}) {
    for (int k : {1, 3, 11}) {
      SpectralField f =
          field_from(g, [k](std::array<double, 3> x) { return std::cos(2.0 * pi * k * x[0]); });
      SpectralField out = fractional_laplacian(f, s);
      const double lam = std::pow(2.0 * pi * k, 2.0 * s);
      SpectralField expect = field_from(g, [k, lam](std::array<double, 3> x) {
        return lam * std::cos(2.0 * pi * k * x[0]);
      });
      CHECK(max_diff(out, expect) <= 1e-12 * lam);
    }
  }
}

TEST_CASE("2d plane wave eigenvalue uses the euclidean wavenumber") {
  PeriodicGrid g(2, 32);
  const double s = 0.8;
  SpectralField f = field_from(
      g, [](std::array<double, 3> x) { return std::sin(2.0 * pi * (3.0 * x[0] - 2.0 * x[1])); });
  const double lam = std::pow(2.0 * pi * std::sqrt(13.0), 2.0 * s);
  SpectralField out = fractional_laplacian(f, s);
  SpectralField expect = field_from(g, [lam](std::array<double, 3> x) {
    return lam * std::sin(2.0 * pi * (3.0 * x[0] - 2.0 * x[1]));
  });
  CHECK(max_diff(out, expect) <= 1e-12 * lam);
}

TEST_CASE("dense transform oracle agrees with the fft path") {
  PeriodicGrid g(1, 32);
  SpectralField f = band_limited_random(g, 15, 23u);
  for (double s : {0.6, 0.85, 1.0}) {
    auto expect = dense_fractional_laplacian(f.values(), s);
    SpectralField out = fractional_laplacian(f, s);
    CHECK(max_diff(out.values(), expect) <= 1e-12 * (1.0 + kernels::max_abs(expect)));
  }
}

TEST_CASE("semigroup property in s") {
  PeriodicGrid g(1, 64);
  SpectralField f = band_limited_random(g, 20, 3u);
  SpectralField two_step = fractional_laplacian(fractional_laplacian(f, 0.35), 0.4);
  SpectralField one_step = fractional_laplacian(f, 0.75);
  CHECK(max_diff(two_step, one_step) <= 1e-10 * (1.0 + one_step.max_abs()));
}

TEST_CASE("s = 1 recovers the classical laplacian") {
  PeriodicGrid g(2, 16);
  // full-spectrum field including Nyquist content
  std::vector<double> v(g.size());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto& x : v) x = unit(rng);
  SpectralField f = SpectralField::from_values(g, std::move(v));
  SpectralField frac = fractional_laplacian(f, 1.0);
  SpectralField classical = divergence(gradient(f));
  SpectralField neg = axpby_fields(-1.0, classical, 0.0, classical);
  CHECK(max_diff(frac, neg) <= 1e-12 * (1.0 + frac.max_abs()));
}

TEST_CASE("fractional laplacian is self adjoint on the grid") {
  PeriodicGrid g(1, 64);
  SpectralField f = band_limited_random(g, 30, 17u);
  SpectralField h = band_limited_random(g, 30, 29u);
  const double a = inner(fractional_laplacian(f, 0.7), h);
  const double b = inner(f, fractional_laplacian(h, 0.7));
  CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
}

TEST_CASE("gradient and divergence basics") {
  PeriodicGrid g(2, 32);
  SpectralField c(g, 2.5);
  CHECK(gradient(c).max_norm() <= 1e-13);

  SpectralField f = field_from(
      g, [](std::array<double, 3> x) { return std::sin(2.0 * pi * x[0]) * std::cos(2.0 * pi * x[1]); });
  SpectralField lap = divergence(gradient(f));
  SpectralField expect = field_from(g, [](std::array<double, 3> x) {
    return -8.0 * pi * pi * std::sin(2.0 * pi * x[0]) * std::cos(2.0 * pi * x[1]);
  });
  CHECK(max_diff(lap, expect) <= 1e-11);

  SpectralField r = band_limited_random(g, 10, 31u);
  VectorField w({r, band_limited_random(g, 10, 37u)});
  CHECK(std::abs(divergence(w).mean()) <= 1e-14);
}

TEST_CASE("poisson solve from a divergence source") {
  PeriodicGrid g(2, 32);
  SpectralField zero(g, 0.0);
  VectorField wz(g, 0.0);
  CHECK(solve_poisson_div(wz).max_abs() <= 1e-14);

  SpectralField wx =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * x[0]); });
  VectorField w({wx, zero});
  SpectralField u = solve_poisson_div(w);
  SpectralField expect = field_from(g, [](std::array<double, 3> x) {
    return -std::sin(2.0 * pi * x[0]) / (2.0 * pi);
  });
  CHECK(max_diff(u, expect) <= 1e-13);
  CHECK(std::abs(u.mean()) <= 1e-14);

  // -Delta u = div w holds in the residual sense
  SpectralField lap_u = divergence(gradient(u));
  SpectralField minus_lap = axpby_fields(-1.0, lap_u, 0.0, lap_u);
  CHECK(max_diff(minus_lap, divergence(w)) <= 1e-11);

  // linearity
  VectorField w2({axpby_fields(2.0, wx, 0.0, wx), zero});
  SpectralField u2 = solve_poisson_div(w2);
  CHECK(max_diff(u2, axpby_fields(2.0, u, 0.0, u)) <= 1e-13);
}

TEST_CASE("mollifier basics and closed form") {
  PeriodicGrid g(1, 128);
  SpectralField f =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * x[0]); });
  CHECK(max_diff(mollify(f, 0.0), f) == 0.0);

  const double eps = 0.05;
  SpectralField mf = mollify(f, eps);
  const double factor = std::exp(-2.0 * pi * pi * eps * eps);
  SpectralField expect = field_from(g, [factor](std::array<double, 3> x) {
    return factor * std::cos(2.0 * pi * x[0]);
  });
  CHECK(max_diff(mf, expect) <= 1e-14);

  // mass is preserved
  SpectralField m = field_from(g, [](std::array<double, 3> x) {
    return 1.0 + 0.4 * std::cos(2.0 * pi * x[0]) + 0.2 * std::sin(4.0 * pi * x[0]);
  });
  CHECK(std::abs(mollify(m, 0.1).coeffs()[0].real() - m.coeffs()[0].real()) <= 1e-15);

  // the periodized heat kernel (mollifier applied to the all-modes comb) stays positive
  std::vector<cdouble> comb(g.size(), cdouble(1.0, 0.0));
  SpectralField kern = mollify(SpectralField::from_coeffs(g, std::move(comb)), 0.08);
  CHECK(kern.min_value() > 0.0);
}

TEST_CASE("bessel norms") {
  PeriodicGrid g(1, 64);
  SpectralField one(g, 1.0);
  CHECK(std::abs(bessel_norm(one, 1.3, 2.0) - 1.0) <= 1e-13);

  SpectralField f = band_limited_random(g, 20, 41u);
  for (double p : {1.0, 2.0, 3.5}) {
    CHECK(std::abs(bessel_norm(f, 0.0, p) - lp_norm(f, p)) <= 1e-12 * (1.0 + lp_norm(f, p)));
  }

  SpectralField c =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * x[0]); });
  const double expect = (1.0 + 4.0 * pi * pi) * std::sqrt(0.5);
  CHECK(std::abs(bessel_norm(c, 2.0, 2.0) - expect) <= 1e-12 * expect);
}

TEST_CASE("pad and truncate round trip exactly") {
  PeriodicGrid g(2, 16);
  // full spectrum, Nyquist included
  std::vector<double> v(g.size());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto& x : v) x = unit(rng);
  SpectralField f = SpectralField::from_values(g, std::move(v));
  SpectralField back = truncate_field(pad_field(f, padded_size(g.n)), g.n);
  const auto& a = f.coeffs();
  const auto& b = back.coeffs();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);
}

TEST_CASE("padding is exact spectral interpolation") {
  PeriodicGrid g(1, 16);
  SpectralField f = band_limited_random(g, 7, 43u);
  SpectralField fine = pad_field(f, 24);
  // padded field values at the coarse points match the coarse values
  const auto& vc = f.values();
  const auto& vf = fine.values();
  for (int j = 0; j < 16; ++j) {
    const int jf = j * 24 / 16;
    if (j * 24 % 16 != 0) continue;
    CHECK(std::abs(vc[static_cast<std::size_t>(j)] - vf[static_cast<std::size_t>(jf)]) <= 1e-13);
  }
}

TEST_CASE("dealiased product removes aliased content") {
  PeriodicGrid g(1, 16);
  SpectralField a =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * 5.0 * x[0]); });
  SpectralField b =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * 6.0 * x[0]); });
  // a*b = cos(2pi 11 x)/2 + cos(2pi x)/2; mode 11 is unresolvable at n = 16
  SpectralField plain = multiply(a, b, false);
  SpectralField clean = multiply(a, b, true);
  const auto& cp = plain.coeffs();
  const auto& cc = clean.coeffs();
  // plain product aliases mode 11 onto bin -5
  CHECK(std::abs(cp[16 - 5]) > 0.2);
  CHECK(std::abs(cc[16 - 5]) <= 1e-14);
  CHECK(std::abs(cc[1] - cdouble(0.25, 0.0)) <= 1e-14);
  // resolvable products are exact
  SpectralField low =
      field_from(g, [](std::array<double, 3> x) { return std::cos(2.0 * pi * 2.0 * x[0]); });
  SpectralField prod = multiply(low, low, true);
  SpectralField expect = field_from(g, [](std::array<double, 3> x) {
    return 0.5 + 0.5 * std::cos(2.0 * pi * 4.0 * x[0]);
  });
  CHECK(max_diff(prod, expect) <= 1e-14);
}

TEST_CASE("band limited random fields are reproducible and in band") {
  PeriodicGrid g(2, 32);
  SpectralField f1 = band_limited_random(g, 5, 77u);
  SpectralField f2 = band_limited_random(g, 5, 77u);
  CHECK(max_diff(f1, f2) == 0.0);
  CHECK(std::abs(f1.mean()) <= 1e-15);
  const auto& c = f1.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto j = g.unflatten(i);
    bool in_band = true;
    for (int d = 0; d < g.dim; ++d)
      if (std::abs(wavenumber(j[static_cast<std::size_t>(d)], g.n)) > 5) in_band = false;
    if (!in_band) CHECK(std::abs(c[i]) == 0.0);
  }
}

TEST_CASE("coefficient-space combinations keep constraint modes exact") {
  PeriodicGrid g(1, 32);
  SpectralField a = add_constant(band_limited_random(g, 5, 51u), 1.0);
  SpectralField b = add_constant(band_limited_random(g, 5, 53u), 1.0);
  CHECK(a.coeffs()[0] == cdouble(1.0, 0.0));
  SpectralField mix = axpby_fields(0.3, a, 0.7, b);
  CHECK(mix.coeffs()[0] == cdouble(0.3 * 1.0 + 0.7 * 1.0, 0.0));
}
