#pragma once

// Coupling terms on the right-hand side of the value equation: the local
// power family f(x, m) = c m^{q-1} + V(x), nonlocal couplings
// f[m] = g(x, K * m) built from a convolution kernel and a Lipschitz outer
// map, the two-scale mollified coupling used by the vanishing-smoothing
// schedule, and the growth-condition / exponent calculators.

#include <optional>
#include <string>

#include "fmfg/field.hpp"

namespace fmfg {

inline constexpr double coupling_clamp = 1e-12;

struct LocalCoupling {
  double c = 1.0;
  double q = 2.0;       // > 1
  double bound_K = 0.0; // >= 0
  std::optional<SpectralField> potential;
  bool monotone_increasing = true;

  static LocalCoupling make(double c, double q, double bound_K = 0.0,
                            std::optional<SpectralField> potential = std::nullopt);
  double profile(double m) const;  // c * max(m, 0)^{q-1}
};

struct OuterMap {
  enum class Kind { identity, affine, saturating };
  Kind kind = Kind::identity;
  double a = 0.0;
  double b = 1.0;

  double operator()(double r) const;
  double lipschitz() const;
  std::string name() const;
};

struct NonlocalCoupling {
  SpectralField kernel;
  OuterMap outer;
  std::optional<SpectralField> potential;
};

SpectralField eval_local(const LocalCoupling& f, const SpectralField& m, bool dealias = true);
SpectralField eval_nonlocal(const NonlocalCoupling& f, const SpectralField& m,
                            bool dealias = true);

// two-scale smoothing: mollify the density, evaluate, mollify the result
SpectralField mollified_coupling(const LocalCoupling& f, const SpectralField& m, double eps,
                                 bool dealias = true);

struct GrowthReport {
  double q_growth_bound = 0.0;    // q must stay below 1 + (2s-1) gamma / (N (gamma-1))
  bool q_growth_ok = false;
  double gamma_bound = 0.0;       // gamma < N/(N-2s+1) for N > 1, gamma <= 2s for N = 1
  bool gamma_ok = false;
  double conjugate_bound = 0.0;   // gamma' must exceed N/(2s-1)
  bool conjugate_ok = false;
  bool passed = false;
};
GrowthReport validate_growth(double s, double gamma, double q, int N);

struct AprioriExponents {
  double r_p = 0.0;
  double theta = 0.0;
  double delta = 0.0;
};
AprioriExponents a_priori_exponents(double s, double gamma, double q, int N, double p);

// computable uniform bounds for a nonlocal coupling over {0 <= m <= m_bound}
struct NonlocalBounds {
  double sup_bound = 0.0;
  double grad_bound = 0.0;
};
NonlocalBounds nonlocal_bounds(const NonlocalCoupling& f, double m_bound);

}  // namespace fmfg
