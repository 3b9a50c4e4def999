#include "fmfg/spectral.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fmfg {

namespace {

void check_s(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("fractional order s must lie in (0, 1]");
}

// squared effective wavenumber |k|^2 with Nyquist components dropped
double k2_deriv(const PeriodicGrid& g, std::size_t flat) {
  auto j = g.unflatten(flat);
  double k2 = 0.0;
  for (int d = 0; d < g.dim; ++d) {
    const double k = wavenumber_deriv(j[static_cast<std::size_t>(d)], g.n);
    k2 += k * k;
  }
  return k2;
}

double k2_true(const PeriodicGrid& g, std::size_t flat) {
  auto j = g.unflatten(flat);
  double k2 = 0.0;
  for (int d = 0; d < g.dim; ++d) {
    const double k = wavenumber(j[static_cast<std::size_t>(d)], g.n);
    k2 += k * k;
  }
  return k2;
}

template <class Mult>
SpectralField apply_multiplier(const SpectralField& f, Mult&& mult) {
  const auto& c = f.coeffs();
  std::vector<cdouble> out(c.size());
  kernels::parallel_for(c.size(), [&](std::size_t i) { out[i] = c[i] * mult(i); });
  return SpectralField::from_coeffs(f.grid(), std::move(out));
}

}  // namespace

SpectralField fractional_laplacian(const SpectralField& f, double s) {
  check_s(s);
  const PeriodicGrid g = f.grid();
  const double w2 = two_pi * two_pi;
  return apply_multiplier(f, [&](std::size_t i) {
    const double k2 = k2_deriv(g, i);
    return k2 == 0.0 ? 0.0 : std::pow(w2 * k2, s);
  });
}

SpectralField inverse_fractional_laplacian(const SpectralField& f, double s) {
  check_s(s);
  const PeriodicGrid g = f.grid();
  const double w2 = two_pi * two_pi;
  return apply_multiplier(f, [&](std::size_t i) {
    const double k2 = k2_deriv(g, i);
    return k2 == 0.0 ? 0.0 : std::pow(w2 * k2, -s);
  });
}

VectorField gradient(const SpectralField& f) {
  const PeriodicGrid g = f.grid();
  const auto& c = f.coeffs();
  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(g.dim));
  for (int d = 0; d < g.dim; ++d) {
    std::vector<cdouble> out(c.size());
    kernels::parallel_for(c.size(), [&](std::size_t i) {
      auto j = g.unflatten(i);
      const double k = wavenumber_deriv(j[static_cast<std::size_t>(d)], g.n);
      out[i] = c[i] * cdouble(0.0, two_pi * k);
    });
    comps.push_back(SpectralField::from_coeffs(g, std::move(out)));
  }
  return VectorField(std::move(comps));
}

SpectralField divergence(const VectorField& w) {
  const PeriodicGrid g = w.grid();
  std::vector<const std::vector<cdouble>*> cs;
  cs.reserve(static_cast<std::size_t>(g.dim));
  for (int d = 0; d < g.dim; ++d) cs.push_back(&w[d].coeffs());
  std::vector<cdouble> out(g.size());
  kernels::parallel_for(g.size(), [&](std::size_t i) {
    auto j = g.unflatten(i);
    cdouble acc(0.0, 0.0);
    for (int d = 0; d < g.dim; ++d) {
      const double k = wavenumber_deriv(j[static_cast<std::size_t>(d)], g.n);
      acc += (*cs[static_cast<std::size_t>(d)])[i] * cdouble(0.0, two_pi * k);
    }
    out[i] = acc;
  });
  return SpectralField::from_coeffs(g, std::move(out));
}

SpectralField solve_poisson_div(const VectorField& w) {
  SpectralField d = divergence(w);
  const PeriodicGrid g = d.grid();
  const double w2 = two_pi * two_pi;
  return apply_multiplier(d, [&](std::size_t i) {
    const double k2 = k2_deriv(g, i);
    return k2 == 0.0 ? 0.0 : 1.0 / (w2 * k2);
  });
}

SpectralField mollify(const SpectralField& f, double eps) {
  if (eps < 0.0) throw std::invalid_argument("mollifier width must be nonnegative");
  if (eps == 0.0) return f;
  const PeriodicGrid g = f.grid();
  const double pi = two_pi / 2.0;
  const double a = 2.0 * pi * pi * eps * eps;
  return apply_multiplier(f, [&](std::size_t i) { return std::exp(-a * k2_true(g, i)); });
}

VectorField mollify(const VectorField& w, double eps) {
  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(w.dim()));
  for (int d = 0; d < w.dim(); ++d) comps.push_back(mollify(w[d], eps));
  return VectorField(std::move(comps));
}

double lp_norm(const SpectralField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
  const auto& v = f.values();
  return std::pow(kernels::pow_sum(v, p) / static_cast<double>(v.size()), 1.0 / p);
}

double bessel_norm(const SpectralField& f, double sigma, double p) {
  const PeriodicGrid g = f.grid();
  const double w2 = two_pi * two_pi;
  SpectralField lifted = apply_multiplier(
      f, [&](std::size_t i) { return std::pow(1.0 + w2 * k2_true(g, i), sigma / 2.0); });
  return lp_norm(lifted, p);
}

double inner(const SpectralField& a, const SpectralField& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("inner product on mixed grids");
  return kernels::dot(a.values(), b.values()) / static_cast<double>(a.size());
}

SpectralField axpby_fields(double a, const SpectralField& x, double b, const SpectralField& y) {
  if (x.grid() != y.grid()) throw std::invalid_argument("axpby on mixed grids");
  std::vector<cdouble> out(x.size());
  kernels::caxpby(cdouble(a, 0.0), x.coeffs(), cdouble(b, 0.0), y.coeffs(), out);
  return SpectralField::from_coeffs(x.grid(), std::move(out));
}

SpectralField add_constant(const SpectralField& x, double c) {
  std::vector<cdouble> out = x.coeffs();
  out[0] += c;
  return SpectralField::from_coeffs(x.grid(), std::move(out));
}

int padded_size(int n) {
  int m = (3 * n) / 2;
  if (m % 2 != 0) ++m;
  return m;
}

namespace detail {

PadTargets pad_targets(int j, int n, int m) {
  PadTargets t{};
  const int k = wavenumber(j, n);
  if (k == -n / 2) {
    t.idx[0] = m - n / 2;
    t.idx[1] = n / 2;
    t.weight[0] = 0.5;
    t.weight[1] = 0.5;
    t.count = 2;
  } else {
    t.idx[0] = k >= 0 ? k : m + k;
    t.weight[0] = 1.0;
    t.count = 1;
  }
  return t;
}

std::vector<const std::vector<double>*> gather_values(std::span<const SpectralField* const> in) {
  std::vector<const std::vector<double>*> vals;
  vals.reserve(in.size());
  for (const SpectralField* f : in) vals.push_back(&f->values());
  return vals;
}

}  // namespace detail

SpectralField pad_field(const SpectralField& f, int m) {
  const PeriodicGrid g = f.grid();
  if (m < g.n) throw std::invalid_argument("pad target must not be smaller than source");
  if (m == g.n) return f;
  const PeriodicGrid fine(g.dim, m);
  const auto& c = f.coeffs();
  std::vector<cdouble> out(fine.size(), cdouble(0.0, 0.0));
  // distinct source modes write to distinct fine bins, so the sweep is parallel
  kernels::parallel_for(c.size(), [&](std::size_t i) {
    auto j = g.unflatten(i);
    detail::PadTargets t[3];
    for (int d = 0; d < g.dim; ++d)
      t[d] = detail::pad_targets(j[static_cast<std::size_t>(d)], g.n, m);
    int pick[3] = {0, 0, 0};
    while (true) {
      std::size_t flat = 0;
      double w = 1.0;
      for (int d = 0; d < g.dim; ++d) {
        flat = flat * static_cast<std::size_t>(m) + static_cast<std::size_t>(t[d].idx[pick[d]]);
        w *= t[d].weight[pick[d]];
      }
      out[flat] += w * c[i];
      int d = g.dim - 1;
      while (d >= 0 && ++pick[d] >= t[d].count) pick[d--] = 0;
      if (d < 0) break;
    }
  });
  return SpectralField::from_coeffs(fine, std::move(out));
}

SpectralField truncate_field(const SpectralField& f, int n) {
  const PeriodicGrid fine = f.grid();
  if (n > fine.n) throw std::invalid_argument("truncate target must not exceed source");
  if (n == fine.n) return f;
  const PeriodicGrid g(fine.dim, n);
  const auto& c = f.coeffs();
  std::vector<cdouble> out(g.size());
  // a coarse Nyquist bin gathers both fine bins that alias onto it
  kernels::parallel_for(g.size(), [&](std::size_t i) {
    auto j = g.unflatten(i);
    detail::PadTargets t[3];
    for (int d = 0; d < g.dim; ++d) {
      t[d] = detail::pad_targets(j[static_cast<std::size_t>(d)], n, fine.n);
      for (int q = 0; q < t[d].count; ++q) t[d].weight[q] = 1.0;
    }
    int pick[3] = {0, 0, 0};
    cdouble acc(0.0, 0.0);
    while (true) {
      std::size_t flat = 0;
      for (int d = 0; d < g.dim; ++d)
        flat = flat * static_cast<std::size_t>(fine.n) + static_cast<std::size_t>(t[d].idx[pick[d]]);
      acc += c[flat];
      int d = g.dim - 1;
      while (d >= 0 && ++pick[d] >= t[d].count) pick[d--] = 0;
      if (d < 0) break;
    }
    out[i] = acc;
  });
  return SpectralField::from_coeffs(g, std::move(out));
}

SpectralField multiply(const SpectralField& a, const SpectralField& b, bool dealias) {
  return map_fields({&a, &b}, [](const double* v) { return v[0] * v[1]; }, dealias);
}

SpectralField band_limited_random(const PeriodicGrid& grid, int kmax, std::uint64_t seed) {
  if (kmax < 1 || kmax > grid.n / 2 - 1)
    throw std::invalid_argument("band limit must lie in [1, n/2 - 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<cdouble> c(grid.size(), cdouble(0.0, 0.0));
  const std::size_t total = grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    auto j = grid.unflatten(i);
    int k[3] = {0, 0, 0};
    bool in_band = true;
    for (int d = 0; d < grid.dim; ++d) {
      k[d] = wavenumber(j[static_cast<std::size_t>(d)], grid.n);
      if (std::abs(k[d]) > kmax) in_band = false;
    }
    if (!in_band) continue;
    // take each conjugate pair once: first nonzero wavenumber positive
    int lead = 0;
    for (int d = 0; d < grid.dim; ++d)
      if (k[d] != 0) {
        lead = k[d];
        break;
      }
    if (lead <= 0) continue;
    double k2 = 0.0;
    for (int d = 0; d < grid.dim; ++d) k2 += static_cast<double>(k[d]) * k[d];
    const double amp = (2.0 * unit(rng) - 1.0) / (1.0 + k2);
    const double phase = two_pi * unit(rng);
    const cdouble z = amp * cdouble(std::cos(phase), std::sin(phase));
    std::array<int, 3> jneg = j;
    for (int d = 0; d < grid.dim; ++d)
      jneg[static_cast<std::size_t>(d)] =
          (grid.n - j[static_cast<std::size_t>(d)]) % grid.n;
    c[i] = z;
    c[grid.flatten(jneg)] = std::conj(z);
  }
  return SpectralField::from_coeffs(grid, std::move(c));
}

}  // namespace fmfg
