#pragma once

// Power-family Hamiltonian H(p) = coeff * |p|^gamma, optionally smoothed to
// H(p) = coeff * ((delta^2 + |p|^2)^{gamma/2} - delta^gamma), with its
// Legendre transform and the structural checks the solvers rely on:
// superlinearity, two-sided power growth, gradient growth, convexity and the
// coercivity bound grad_H(p).p - H(p) >= C_H |p|^gamma - K.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace fmfg {

struct Hamiltonian {
  double gamma = 2.0;            // > 1
  double coeff = 0.5;            // > 0, canonical choice 1/gamma
  double smoothing_delta = 0.0;  // >= 0

  static Hamiltonian power(double gamma, double coeff, double smoothing_delta = 0.0);
  static Hamiltonian canonical(double gamma) { return power(gamma, 1.0 / gamma); }

  double conjugate_exponent() const { return gamma / (gamma - 1.0); }

  double eval_radial(double r) const;   // H as a function of |p|
  double grad_factor(double r) const;   // scalar g(r) with grad H(p) = g(|p|) p

  double operator()(std::span<const double> p) const;
  std::array<double, 3> grad(std::span<const double> p) const;

  // Legendre transform L(q) = sup_p (p.q - H(p)); closed form when
  // smoothing_delta == 0, monotone bisection on the radial optimality
  // condition otherwise (duality gap <= 1e-8)
  double conjugate_radial(double qnorm) const;
  double conjugate(std::span<const double> q) const;

  // L(q) = legendre_coefficient * |q|^{gamma'} when smoothing_delta == 0
  double legendre_coefficient() const;
  // C_L with C_L|q|^{gamma'} - 1/C_L <= L(q) <= (|q|^{gamma'} + 1)/C_L
  double envelope_constant() const;
};

// Fenchel-Young residual m H(p) + p.w + m L(-w/m); nonnegative, zero exactly
// at w = -m grad_H(p). Returns +infinity for m = 0 with w != 0.
double legendre_residual(const Hamiltonian& h, double m, std::span<const double> p,
                         std::span<const double> w);

struct HamiltonianReport {
  bool superlinear = false;
  bool growth_ok = false;         // C_lo |p|^gamma - 1/C_lo <= H <= (|p|^gamma + 1)/C_up
  bool gradient_growth_ok = false;
  bool convex = false;
  bool coercive = false;
  double growth_upper = 0.0;      // empirical C_up
  double growth_lower = 0.0;      // empirical C_lo
  double gradient_constant = 0.0; // empirical C with |grad H| <= C |p|^{gamma-1}
  double C_H = 0.0;               // coercivity pair
  double K = 0.0;
  bool passed = false;
  std::optional<std::array<double, 3>> counterexample;
};

// midpoint convexity probe on deterministic pseudo-random pairs; on failure
// reports a violating midpoint
bool midpoint_convexity_probe(const std::function<double(std::span<const double>)>& h, int dim,
                              double radius, int samples, std::uint64_t seed,
                              std::array<double, 3>* counterexample);

HamiltonianReport verify_assumptions(const Hamiltonian& h);

}  // namespace fmfg
