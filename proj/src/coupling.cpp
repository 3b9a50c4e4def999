#include "fmfg/coupling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fmfg/spectral.hpp"

namespace fmfg {

LocalCoupling LocalCoupling::make(double c, double q, double bound_K,
                                  std::optional<SpectralField> potential) {
  if (!(q > 1.0)) throw std::invalid_argument("coupling exponent q must exceed 1");
  if (bound_K < 0.0) throw std::invalid_argument("coupling bound_K must be nonnegative");
  LocalCoupling f;
  f.c = c;
  f.q = q;
  f.bound_K = bound_K;
  f.potential = std::move(potential);
  f.monotone_increasing = c > 0.0;
  return f;
}

double LocalCoupling::profile(double m) const {
  return c * std::pow(std::max(m, 0.0), q - 1.0);
}

double OuterMap::operator()(double r) const {
  switch (kind) {
    case Kind::identity: return r;
    case Kind::affine: return a + b * r;
    case Kind::saturating: return a * std::tanh(b * r);
  }
  return r;
}

double OuterMap::lipschitz() const {
  switch (kind) {
    case Kind::identity: return 1.0;
    case Kind::affine: return std::abs(b);
    case Kind::saturating: return std::abs(a * b);
  }
  return 1.0;
}

std::string OuterMap::name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::affine: return "affine";
    case Kind::saturating: return "saturating";
  }
  return "identity";
}

namespace {

void reject_negative(const SpectralField& m) {
  const auto& v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < -coupling_clamp) {
      auto x = m.grid().point(i);
      std::ostringstream msg;
      msg << "density is substantially negative (" << v[i] << " at x = (" << x[0];
      for (int d = 1; d < m.grid().dim; ++d) msg << ", " << x[static_cast<std::size_t>(d)];
      msg << ")); values below -1e-12 are rejected";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

SpectralField eval_local(const LocalCoupling& f, const SpectralField& m, bool dealias) {
  reject_negative(m);
  const double c = f.c;
  const double e = f.q - 1.0;
  if (f.potential.has_value()) {
    if (f.potential->grid() != m.grid())
      throw std::invalid_argument("coupling potential lives on a different grid");
    return map_fields({&m, &*f.potential},
                      [c, e](const double* v) {
                        return c * std::pow(std::max(v[0], 0.0), e) + v[1];
                      },
                      dealias);
  }
  return map_fields({&m},
                    [c, e](const double* v) { return c * std::pow(std::max(v[0], 0.0), e); },
                    dealias);
}

SpectralField eval_nonlocal(const NonlocalCoupling& f, const SpectralField& m, bool dealias) {
  if (f.kernel.grid() != m.grid())
    throw std::invalid_argument("nonlocal kernel lives on a different grid");
  const auto& kc = f.kernel.coeffs();
  const auto& mc = m.coeffs();
  std::vector<cdouble> conv(kc.size());
  kernels::parallel_for(kc.size(), [&](std::size_t i) { conv[i] = kc[i] * mc[i]; });
  SpectralField km = SpectralField::from_coeffs(m.grid(), std::move(conv));
  const OuterMap outer = f.outer;
  if (f.potential.has_value()) {
    if (f.potential->grid() != m.grid())
      throw std::invalid_argument("coupling potential lives on a different grid");
    return map_fields({&km, &*f.potential},
                      [outer](const double* v) { return outer(v[0]) + v[1]; }, dealias);
  }
  return map_fields({&km}, [outer](const double* v) { return outer(v[0]); }, dealias);
}

SpectralField mollified_coupling(const LocalCoupling& f, const SpectralField& m, double eps,
                                 bool dealias) {
  if (eps < 0.0) throw std::invalid_argument("mollifier width must be nonnegative");
  if (eps == 0.0) return eval_local(f, m, dealias);
  SpectralField smoothed = mollify(m, eps);
  // mollification of a nonnegative density can ring slightly negative; the
  // eval_local clamp handles that, but substantial violations still reject
  SpectralField fx = eval_local(f, smoothed, dealias);
  return mollify(fx, eps);
}

GrowthReport validate_growth(double s, double gamma, double q, int N) {
  GrowthReport r;
  const bool base_ok = s > 0.5 && s < 1.0 && gamma > 1.0 && N >= 1;
  if (!base_ok) return r;  // everything stays failed outside the admissible regime

  r.q_growth_bound = 1.0 + (2.0 * s - 1.0) * gamma / (static_cast<double>(N) * (gamma - 1.0));
  r.q_growth_ok = q > 1.0 && q < r.q_growth_bound;

  if (N > 1) {
    r.gamma_bound = static_cast<double>(N) / (static_cast<double>(N) - 2.0 * s + 1.0);
    r.gamma_ok = gamma < r.gamma_bound;
  } else {
    r.gamma_bound = 2.0 * s;
    r.gamma_ok = gamma <= r.gamma_bound;
  }

  const double gp = gamma / (gamma - 1.0);
  r.conjugate_bound = static_cast<double>(N) / (2.0 * s - 1.0);
  r.conjugate_ok = gp > r.conjugate_bound;

  r.passed = r.q_growth_ok && r.gamma_ok && r.conjugate_ok;
  return r;
}

AprioriExponents a_priori_exponents(double s, double gamma, double q, int N, double p) {
  if (!(gamma > 1.0)) throw std::invalid_argument("exponent formulas need gamma > 1");
  if (!(q > 1.0)) throw std::invalid_argument("exponent formulas need q > 1");
  if (!(p > 1.0)) throw std::invalid_argument("exponent formulas need p > 1");
  if (!(s > 0.5 && s <= 1.0)) throw std::invalid_argument("exponent formulas need s in (1/2, 1]");
  const double gp = gamma / (gamma - 1.0);
  const double dN = static_cast<double>(N);
  AprioriExponents out;
  out.r_p = 1.0 / (1.0 / gp + (1.0 - 1.0 / gp) / p);
  out.theta = 1.0 / (1.0 - 1.0 / gp + (2.0 * s - 1.0) / dN * q / (q - 1.0));
  out.delta = ((gp * (2.0 * s - 1.0) + dN) / dN - q) / (q - 1.0);
  return out;
}

NonlocalBounds nonlocal_bounds(const NonlocalCoupling& f, double m_bound) {
  if (m_bound < 0.0) throw std::invalid_argument("nonlocal_bounds needs m_bound >= 0");
  NonlocalBounds b;
  const double k_l1 = lp_norm(f.kernel, 1.0);
  const double reach = k_l1 * m_bound;
  // sup over |r| <= reach of |g(r)|
  const double g0 = std::abs(f.outer(0.0));
  b.sup_bound = g0 + f.outer.lipschitz() * reach;
  VectorField gk = gradient(f.kernel);
  double grad_l1 = 0.0;
  for (int d = 0; d < gk.dim(); ++d) grad_l1 += lp_norm(gk[d], 1.0);
  b.grad_bound = f.outer.lipschitz() * grad_l1 * m_bound;
  if (f.potential.has_value()) {
    b.sup_bound += f.potential->max_abs();
    VectorField gv = gradient(*f.potential);
    b.grad_bound += gv.max_norm();
  }
  return b;
}

}  // namespace fmfg
