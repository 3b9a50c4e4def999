#include "fmfg/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace fmfg {

namespace {

double norm_of(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

}  // namespace

Hamiltonian Hamiltonian::power(double gamma, double coeff, double smoothing_delta) {
  if (!(gamma > 1.0)) throw std::invalid_argument("hamiltonian exponent gamma must exceed 1");
  if (!(coeff > 0.0)) throw std::invalid_argument("hamiltonian coefficient must be positive");
  if (smoothing_delta < 0.0) throw std::invalid_argument("smoothing delta must be nonnegative");
  Hamiltonian h;
  h.gamma = gamma;
  h.coeff = coeff;
  h.smoothing_delta = smoothing_delta;
  return h;
}

double Hamiltonian::eval_radial(double r) const {
  if (smoothing_delta == 0.0) return coeff * std::pow(r, gamma);
  const double d2 = smoothing_delta * smoothing_delta;
  return coeff * (std::pow(d2 + r * r, gamma / 2.0) - std::pow(smoothing_delta, gamma));
}

double Hamiltonian::grad_factor(double r) const {
  if (smoothing_delta == 0.0) {
    if (r == 0.0) return 0.0;  // grad H(0) = 0 for gamma > 1
    return coeff * gamma * std::pow(r, gamma - 2.0);
  }
  const double d2 = smoothing_delta * smoothing_delta;
  return coeff * gamma * std::pow(d2 + r * r, gamma / 2.0 - 1.0);
}

double Hamiltonian::operator()(std::span<const double> p) const {
  return eval_radial(norm_of(p));
}

std::array<double, 3> Hamiltonian::grad(std::span<const double> p) const {
  const double g = grad_factor(norm_of(p));
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (std::size_t d = 0; d < p.size(); ++d) out[d] = g * p[d];
  return out;
}

double Hamiltonian::legendre_coefficient() const {
  const double gp = conjugate_exponent();
  return (1.0 / gp) * std::pow(coeff * gamma, 1.0 - gp);
}

double Hamiltonian::envelope_constant() const {
  const double a = legendre_coefficient();
  return std::min(a, 1.0 / a);
}

double Hamiltonian::conjugate_radial(double qnorm) const {
  if (qnorm < 0.0) throw std::invalid_argument("conjugate_radial takes a norm");
  if (smoothing_delta == 0.0)
    return legendre_coefficient() * std::pow(qnorm, conjugate_exponent());
  if (qnorm == 0.0) return 0.0;
  // first-order condition H'(r) = |q| with H' strictly increasing
  double hi = std::pow(qnorm / (coeff * gamma), 1.0 / (gamma - 1.0)) + smoothing_delta + 1.0;
  int guard = 0;
  while (grad_factor(hi) * hi < qnorm && guard++ < 200) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (grad_factor(mid) * mid < qnorm)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * (1.0 + hi)) break;
  }
  const double r = 0.5 * (lo + hi);
  return r * qnorm - eval_radial(r);
}

double Hamiltonian::conjugate(std::span<const double> q) const {
  return conjugate_radial(norm_of(q));
}

double legendre_residual(const Hamiltonian& h, double m, std::span<const double> p,
                         std::span<const double> w) {
  if (m < 0.0) throw std::invalid_argument("legendre_residual needs m >= 0");
  if (p.size() != w.size()) throw std::invalid_argument("p and w must share a dimension");
  const double wnorm = norm_of(w);
  if (m == 0.0) return wnorm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  double pw = 0.0;
  for (std::size_t d = 0; d < p.size(); ++d) pw += p[d] * w[d];
  return m * h(p) + pw + m * h.conjugate_radial(wnorm / m);
}

bool midpoint_convexity_probe(const std::function<double(std::span<const double>)>& h, int dim,
                              double radius, int samples, std::uint64_t seed,
                              std::array<double, 3>* counterexample) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(dim)), q(static_cast<std::size_t>(dim)),
      mid(static_cast<std::size_t>(dim));
  for (int it = 0; it < samples; ++it) {
    for (int d = 0; d < dim; ++d) {
      p[static_cast<std::size_t>(d)] = radius * unit(rng);
      q[static_cast<std::size_t>(d)] = radius * unit(rng);
      mid[static_cast<std::size_t>(d)] =
          0.5 * (p[static_cast<std::size_t>(d)] + q[static_cast<std::size_t>(d)]);
    }
    const double lhs = h(mid);
    const double rhs = 0.5 * (h(p) + h(q));
    const double slack = 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
    if (lhs > rhs + slack) {
      if (counterexample != nullptr) {
        counterexample->fill(0.0);
        for (int d = 0; d < dim; ++d) (*counterexample)[static_cast<std::size_t>(d)] =
            mid[static_cast<std::size_t>(d)];
      }
      return false;
    }
  }
  return true;
}

HamiltonianReport verify_assumptions(const Hamiltonian& h) {
  HamiltonianReport rep;

  // deterministic radial sample set
  std::vector<double> radii;
  for (double r = 1e-2; r <= 1e2 * (1.0 + 1e-12); r *= std::pow(1e4, 1.0 / 40.0))
    radii.push_back(r);

  // superlinearity: H(r)/r still growing across the top decade
  const double tail_lo = h.eval_radial(10.0) / 10.0;
  const double tail_hi = h.eval_radial(100.0) / 100.0;
  rep.superlinear = tail_hi > tail_lo * (1.0 + 1e-9);

  // empirical growth constants against |p|^gamma
  double up = 0.0;        // max H / (|p|^gamma + 1)
  double lo_c = 1e300;    // min over samples of largest C with C|p|^g - 1/C <= H
  double grad_c = 0.0;    // max |H'(r)| / r^{gamma-1}
  double coer = 1e300;    // min over outer samples of (H'(r) r - H) / r^gamma
  for (double r : radii) {
    const double hr = h.eval_radial(r);
    const double rg = std::pow(r, h.gamma);
    up = std::max(up, hr / (rg + 1.0));
    // C r^g - 1/C <= H  <=>  C <= (H + sqrt(H^2 + 4 r^g)) / (2 r^g)
    lo_c = std::min(lo_c, (hr + std::sqrt(hr * hr + 4.0 * rg)) / (2.0 * rg));
    const double dh = h.grad_factor(r) * r;
    grad_c = std::max(grad_c, dh / std::pow(r, h.gamma - 1.0));
    if (r >= 1.0) coer = std::min(coer, (dh * r - hr) / rg);
  }
  rep.growth_upper = up;
  rep.growth_lower = lo_c;
  rep.gradient_constant = grad_c;
  rep.growth_ok = std::isfinite(up) && up > 0.0 && std::isfinite(lo_c) && lo_c > 0.0;
  rep.gradient_growth_ok = std::isfinite(grad_c) && grad_c > 0.0;

  rep.C_H = std::max(coer, 0.0);
  double K = 0.0;
  for (double r : radii) {
    const double slack = rep.C_H * std::pow(r, h.gamma) -
                         (h.grad_factor(r) * r * r - h.eval_radial(r));
    K = std::max(K, slack);
  }
  rep.K = K;
  rep.coercive = rep.C_H > 0.0 && std::isfinite(rep.K);

  std::array<double, 3> witness{};
  rep.convex = midpoint_convexity_probe(
      [&](std::span<const double> p) { return h(p); }, 2, 50.0, 4000, 0x46d9u, &witness);
  if (!rep.convex) rep.counterexample = witness;

  rep.passed = rep.superlinear && rep.growth_ok && rep.gradient_growth_ok && rep.convex &&
               rep.coercive;
  return rep;
}

}  // namespace fmfg
