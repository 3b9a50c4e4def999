#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "fmfg/hamiltonian.hpp"

using fmfg::Hamiltonian;

namespace {

double ternary_max(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 240; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2))
      lo = m1;
    else
      hi = m2;
  }
  return f(0.5 * (lo + hi));
}

// independent Legendre oracle: maximize r|q| - H(r) directly, no derivative
double conjugate_by_scan(const Hamiltonian& h, double qnorm) {
  auto obj = [&](double r) { return r * qnorm - h.eval_radial(r); };
  double hi = 1.0;
  while (obj(2.0 * hi) > obj(hi) && hi < 1e12) hi *= 2.0;
  return ternary_max(obj, 0.0, 2.0 * hi);
}

// sup_t (pnorm t - L(t)) should reproduce H(pnorm) for convex H
double biconjugate_by_scan(const Hamiltonian& h, double pnorm) {
  auto obj = [&](double t) { return pnorm * t - h.conjugate_radial(t); };
  double hi = 1.0;
  while (obj(2.0 * hi) > obj(hi) && hi < 1e12) hi *= 2.0;
  return ternary_max(obj, 0.0, 2.0 * hi);
}

std::array<double, 3> fd_gradient(const Hamiltonian& h, std::span<const double> p) {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  std::vector<double> x(p.begin(), p.end());
  const double step = 1e-6;
  for (std::size_t d = 0; d < p.size(); ++d) {
    const double keep = x[d];
    x[d] = keep + step;
    const double up = h(x);
    x[d] = keep - step;
    const double dn = h(x);
    x[d] = keep;
    g[d] = (up - dn) / (2.0 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("power hamiltonian evaluates exactly") {
  const Hamiltonian quad = Hamiltonian::power(2.0, 0.5);
  const std::vector<double> origin{0.0, 0.0};
  CHECK(quad(origin) == 0.0);
  auto g0 = quad.grad(origin);
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);

  const std::vector<double> p{3.0, 4.0};
  CHECK(quad(p) == doctest::Approx(12.5).epsilon(1e-14));
  auto gp = quad.grad(p);
  CHECK(gp[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gp[1] == doctest::Approx(4.0).epsilon(1e-14));

  const Hamiltonian cubic = Hamiltonian::canonical(3.0);
  CHECK(cubic.coeff == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(cubic.eval_radial(2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));

  // gradient at the origin stays zero for gamma < 2 as well
  const Hamiltonian soft = Hamiltonian::power(1.5, 1.0);
  auto gs = soft.grad(origin);
  CHECK(gs[0] == 0.0);
  CHECK(std::isfinite(soft(origin)));

  // smoothed family: H(p) = c((d^2+|p|^2)^{g/2} - d^g)
  const Hamiltonian smoothed = Hamiltonian::power(1.5, 0.7, 0.3);
  const double r = 1.2;
  const double expect = 0.7 * (std::pow(0.09 + r * r, 0.75) - std::pow(0.3, 1.5));
  CHECK(smoothed.eval_radial(r) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(smoothed.eval_radial(0.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS((void)Hamiltonian::power(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)Hamiltonian::power(2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)Hamiltonian::power(2.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(0x5eedu);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  const double gammas[] = {1.5, 2.3, 3.0};
  const double deltas[] = {0.0, 0.2};
  for (double gamma : gammas) {
    for (double delta : deltas) {
      const Hamiltonian h = Hamiltonian::power(gamma, 0.8, delta);
      for (int it = 0; it < 20; ++it) {
        std::vector<double> p(3);
        for (double& v : p) v = unit(rng);
        if (std::hypot(p[0], p[1], p[2]) < 0.2) continue;  // FD near the kink is meaningless
        auto g = h.grad(p);
        auto fd = fd_gradient(h, p);
        for (int d = 0; d < 3; ++d)
          CHECK(std::abs(g[static_cast<std::size_t>(d)] - fd[static_cast<std::size_t>(d)]) <=
                1e-6 * (1.0 + std::abs(g[static_cast<std::size_t>(d)])));
      }
    }
  }
}

TEST_CASE("legendre transform closed form agrees with direct maximization") {
  const Hamiltonian quad = Hamiltonian::power(2.0, 0.5);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(quad.conjugate(zero) == 0.0);
  const std::vector<double> ones{1.0, 1.0};
  CHECK(quad.conjugate(ones) == doctest::Approx(1.0).epsilon(1e-14));

  const Hamiltonian cubic = Hamiltonian::canonical(3.0);
  const double expect = std::pow(2.0, 1.5) * (2.0 / 3.0);
  CHECK(cubic.conjugate_radial(2.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(cubic.conjugate_radial(2.0) ==
        doctest::Approx(conjugate_by_scan(cubic, 2.0)).epsilon(1e-10));

  std::mt19937_64 rng(0xabcdu);
  std::uniform_real_distribution<double> gdist(1.2, 3.5);
  std::uniform_real_distribution<double> cdist(0.3, 2.0);
  std::uniform_real_distribution<double> qdist(0.05, 6.0);
  for (int it = 0; it < 25; ++it) {
    const Hamiltonian h = Hamiltonian::power(gdist(rng), cdist(rng));
    const double qn = qdist(rng);
    const double closed = h.conjugate_radial(qn);
    const double scanned = conjugate_by_scan(h, qn);
    CHECK(std::abs(closed - scanned) <= 1e-9 * (1.0 + std::abs(closed)));
  }

  // smoothed family goes through the radial optimality bisection
  const Hamiltonian smoothed = Hamiltonian::power(2.5, 0.6, 0.3);
  for (double qn : {0.1, 0.7, 2.0, 9.0}) {
    const double numeric = smoothed.conjugate_radial(qn);
    const double scanned = conjugate_by_scan(smoothed, qn);
    CHECK(std::abs(numeric - scanned) <= 1e-8 * (1.0 + std::abs(numeric)));
  }
  CHECK(smoothed.conjugate_radial(0.0) == 0.0);
}

TEST_CASE("legendre coefficient and growth envelope") {
  // canonical coefficient 1/gamma gives the symmetric conjugate 1/gamma' |q|^{gamma'}
  for (double gamma : {1.5, 2.0, 3.0}) {
    const Hamiltonian h = Hamiltonian::canonical(gamma);
    const double gp = h.conjugate_exponent();
    CHECK(h.legendre_coefficient() == doctest::Approx(1.0 / gp).epsilon(1e-13));
    CHECK(h.conjugate_radial(1.7) ==
          doctest::Approx(std::pow(1.7, gp) / gp).epsilon(1e-13));
  }

  std::mt19937_64 rng(0x77aa'0001u);
  std::uniform_real_distribution<double> mdist(1e-2, 10.0);
  std::uniform_real_distribution<double> wdist(-5.0, 5.0);
  const double gammas[] = {1.5, 2.0, 3.0};
  const double coeffs[] = {0.0, 0.7};  // 0 selects the canonical 1/gamma
  for (double gamma : gammas) {
    for (double craw : coeffs) {
      const Hamiltonian h =
          craw == 0.0 ? Hamiltonian::canonical(gamma) : Hamiltonian::power(gamma, craw);
      const double gp = h.conjugate_exponent();
      const double cl = h.envelope_constant();
      const double a = h.legendre_coefficient();
      CHECK(cl == doctest::Approx(std::min(a, 1.0 / a)).epsilon(1e-15));
      for (int it = 0; it < 400; ++it) {
        const double m = mdist(rng);
        std::array<double, 3> w{wdist(rng), wdist(rng), wdist(rng)};
        const double wn = std::hypot(w[0], w[1], w[2]);
        const double kinetic = std::pow(wn, gp) / std::pow(m, gp - 1.0);
        const double mid = m * h.conjugate_radial(wn / m);
        CHECK(mid >= cl * kinetic - m / cl - 1e-10 * (1.0 + kinetic));
        CHECK(mid <= kinetic / cl + m / cl + 1e-10 * (1.0 + kinetic));
      }
    }
  }
}

TEST_CASE("fenchel-young residual is nonnegative and vanishes at the optimal flux") {
  const Hamiltonian quad = Hamiltonian::power(2.0, 0.5);
  const std::vector<double> z2{0.0, 0.0};
  CHECK(fmfg::legendre_residual(quad, 0.0, z2, z2) == 0.0);
  const std::vector<double> w1{0.3, -0.1};
  CHECK(std::isinf(fmfg::legendre_residual(quad, 0.0, z2, w1)));

  std::mt19937_64 rng(0xfeed'beefu);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  std::uniform_real_distribution<double> mdist(0.05, 8.0);

  // quadratic optimality: w = -m p zeroes the residual to machine precision
  for (int it = 0; it < 50; ++it) {
    const double m = mdist(rng);
    std::vector<double> p{unit(rng), unit(rng)};
    std::vector<double> w{-m * p[0], -m * p[1]};
    CHECK(std::abs(fmfg::legendre_residual(quad, m, p, w)) <= 1e-12 * (1.0 + m * quad(p)));
  }

  // general family: w = -m grad_H(p) stays within the conjugation gap
  std::uniform_real_distribution<double> gdist(1.3, 3.2);
  for (int it = 0; it < 50; ++it) {
    const Hamiltonian h = Hamiltonian::power(gdist(rng), 0.9);
    const double m = mdist(rng);
    std::vector<double> p{unit(rng), unit(rng), unit(rng)};
    auto g = h.grad(p);
    std::vector<double> w{-m * g[0], -m * g[1], -m * g[2]};
    const double res = fmfg::legendre_residual(h, m, p, w);
    CHECK(res >= -1e-10);
    CHECK(res <= 1e-8 * (1.0 + m * (1.0 + h(p))));
    // any flux perturbation can only increase the residual
    for (int jt = 0; jt < 4; ++jt) {
      std::vector<double> wp{w[0] + 0.5 * unit(rng), w[1] + 0.5 * unit(rng),
                             w[2] + 0.5 * unit(rng)};
      CHECK(fmfg::legendre_residual(h, m, p, wp) >= res - 1e-10);
    }
  }

  // randomized nonnegativity sweep across the family
  std::uniform_real_distribution<double> ddist(0.0, 0.4);
  int violations = 0;
  for (int it = 0; it < 10000; ++it) {
    const Hamiltonian h = Hamiltonian::power(gdist(rng), 0.4 + ddist(rng), ddist(rng));
    const double m = mdist(rng);
    std::vector<double> p{unit(rng), unit(rng)};
    std::vector<double> w{unit(rng), unit(rng)};
    if (fmfg::legendre_residual(h, m, p, w) < -1e-10) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("biconjugation recovers the hamiltonian") {
  std::vector<Hamiltonian> hs;
  hs.push_back(Hamiltonian::canonical(1.5));
  hs.push_back(Hamiltonian::canonical(2.0));
  hs.push_back(Hamiltonian::canonical(3.0));
  hs.push_back(Hamiltonian::power(2.0, 0.8, 0.25));
  for (const Hamiltonian& h : hs) {
    for (double pn : {0.3, 1.0, 2.7}) {
      const double direct = h.eval_radial(pn);
      const double recon = biconjugate_by_scan(h, pn);
      CHECK(std::abs(direct - recon) <= 1e-6 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("verify_assumptions reports the coercivity pair") {
  const auto rep = fmfg::verify_assumptions(Hamiltonian::power(2.0, 0.5));
  CHECK(rep.passed);
  CHECK(rep.superlinear);
  CHECK(rep.growth_ok);
  CHECK(rep.gradient_growth_ok);
  CHECK(rep.convex);
  CHECK(rep.coercive);
  CHECK(rep.C_H == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.K <= 1e-9);
  CHECK(!rep.counterexample.has_value());

  // grad_H . p - H = (1 - 1/gamma)|p|^gamma for the canonical family
  std::mt19937_64 rng(0x9911u);
  std::uniform_real_distribution<double> unit(-4.0, 4.0);
  for (double gamma : {1.5, 2.0, 3.0}) {
    const Hamiltonian h = Hamiltonian::canonical(gamma);
    for (int it = 0; it < 30; ++it) {
      std::vector<double> p{unit(rng), unit(rng)};
      auto g = h.grad(p);
      const double lhs = g[0] * p[0] + g[1] * p[1] - h(p);
      const double rhs = (1.0 - 1.0 / gamma) * std::pow(std::hypot(p[0], p[1]), gamma);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
    const auto r = fmfg::verify_assumptions(h);
    CHECK(r.passed);
    CHECK(r.C_H == doctest::Approx(1.0 - 1.0 / gamma).epsilon(1e-10));
    CHECK(r.K <= 1e-9);
    CHECK(r.gradient_constant == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("convexity probe flags nonconvex functions") {
  const Hamiltonian h = Hamiltonian::power(1.7, 0.9);
  std::array<double, 3> witness{};
  CHECK(fmfg::midpoint_convexity_probe([&](std::span<const double> p) { return h(p); }, 3, 10.0,
                                       4000, 0x1234u, &witness));

  // concave control
  auto concave = [](std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return -s;
  };
  CHECK_FALSE(fmfg::midpoint_convexity_probe(concave, 2, 5.0, 4000, 0x1234u, &witness));
  CHECK(std::isfinite(witness[0]));

  // double well control
  auto well = [](std::span<const double> p) {
    const double a = (p[0] - 1.0) * (p[0] - 1.0);
    const double b = (p[0] + 1.0) * (p[0] + 1.0);
    return std::min(a, b) + p[1] * p[1];
  };
  CHECK_FALSE(fmfg::midpoint_convexity_probe(well, 2, 3.0, 4000, 0x777u, nullptr));
}
