#pragma once

// Pseudo-spectral operator layer: Fourier multiplier operators, derivative
// operators with the Nyquist bin annihilated, dealiased pointwise algebra via
// zero padding to a 3n/2 grid, and the norms used by the solver diagnostics.

#include <cstdint>
#include <span>
#include <vector>

#include "fmfg/field.hpp"
#include "fmfg/grid.hpp"
#include "fmfg/kernels.hpp"

namespace fmfg {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// (-Delta)^s f, multiplier (2pi|k|)^{2s}; s in (0, 1]. The mean mode maps to 0.
SpectralField fractional_laplacian(const SpectralField& f, double s);

// pseudo-inverse on mean-zero fields, multiplier (2pi|k|)^{-2s}, mean mode -> 0
SpectralField inverse_fractional_laplacian(const SpectralField& f, double s);

VectorField gradient(const SpectralField& f);
SpectralField divergence(const VectorField& w);

// mean-zero u with -Delta u = div w
SpectralField solve_poisson_div(const VectorField& w);

// convolution with the periodized heat kernel, multiplier exp(-2 pi^2 eps^2 |k|^2)
SpectralField mollify(const SpectralField& f, double eps);
VectorField mollify(const VectorField& w, double eps);

// || (1 - Delta)^{sigma/2} f ||_{L^p}, grid quadrature, finite p >= 1
double bessel_norm(const SpectralField& f, double sigma, double p);
double lp_norm(const SpectralField& f, double p);
double inner(const SpectralField& a, const SpectralField& b);  // grid quadrature of a*b

// linear combinations in coefficient space (keeps constraint modes exact)
SpectralField axpby_fields(double a, const SpectralField& x, double b, const SpectralField& y);
SpectralField add_constant(const SpectralField& x, double c);

// padded-grid size for dealiased products (3n/2 rounded up to even)
int padded_size(int n);
SpectralField pad_field(const SpectralField& f, int m);
SpectralField truncate_field(const SpectralField& f, int n);

SpectralField multiply(const SpectralField& a, const SpectralField& b, bool dealias = true);

// deterministic random field supported on modes with max-norm |k| <= kmax,
// zero mean, coefficients conjugate-symmetric by construction
SpectralField band_limited_random(const PeriodicGrid& grid, int kmax, std::uint64_t seed);

namespace detail {

// destination bins of one source axis bin under zero padding n -> m; the
// unmatched Nyquist coefficient splits evenly between +n/2 and -n/2
struct PadTargets {
  int idx[2];
  double weight[2];
  int count;
};
PadTargets pad_targets(int j, int n, int m);

std::vector<const std::vector<double>*> gather_values(std::span<const SpectralField* const> in);

}  // namespace detail

// Pointwise evaluation fn(point_values...) -> double across one or more input
// fields. With dealias the inputs are synthesized on the padded grid, the map
// is applied there and the result is truncated back.
template <class F>
SpectralField map_fields(std::span<const SpectralField* const> in, F&& fn, bool dealias) {
  if (in.empty()) throw std::invalid_argument("map_fields needs at least one input");
  const PeriodicGrid& g = in[0]->grid();
  for (const SpectralField* f : in)
    if (f->grid() != g) throw std::invalid_argument("map_fields inputs on mixed grids");

  std::vector<SpectralField> padded;
  std::vector<const SpectralField*> work(in.begin(), in.end());
  if (dealias) {
    const int m = padded_size(g.n);
    padded.reserve(in.size());
    for (const SpectralField* f : in) padded.push_back(pad_field(*f, m));
    for (std::size_t i = 0; i < padded.size(); ++i) work[i] = &padded[i];
  }

  const PeriodicGrid wg = work[0]->grid();
  auto vals = detail::gather_values(std::span<const SpectralField* const>(work));
  const std::size_t total = wg.size();
  const std::size_t nin = work.size();
  std::vector<double> out(total);
  kernels::parallel_for(total, [&](std::size_t i) {
    double point[8];
    for (std::size_t c = 0; c < nin; ++c) point[c] = (*vals[c])[i];
    out[i] = fn(static_cast<const double*>(point));
  });
  SpectralField result = SpectralField::from_values(wg, std::move(out));
  if (dealias) result = truncate_field(result, g.n);
  return result;
}

template <class F>
SpectralField map_fields(std::initializer_list<const SpectralField*> in, F&& fn, bool dealias) {
  std::vector<const SpectralField*> v(in);
  return map_fields(std::span<const SpectralField* const>(v), std::forward<F>(fn), dealias);
}

// vector-valued variant: fn(const double* in, double* out) with nout outputs
template <class F>
VectorField map_fields_vector(std::span<const SpectralField* const> in, int nout, F&& fn,
                              bool dealias) {
  if (in.empty()) throw std::invalid_argument("map_fields_vector needs at least one input");
  const PeriodicGrid& g = in[0]->grid();

  std::vector<SpectralField> padded;
  std::vector<const SpectralField*> work(in.begin(), in.end());
  if (dealias) {
    const int m = padded_size(g.n);
    padded.reserve(in.size());
    for (const SpectralField* f : in) padded.push_back(pad_field(*f, m));
    for (std::size_t i = 0; i < padded.size(); ++i) work[i] = &padded[i];
  }

  const PeriodicGrid wg = work[0]->grid();
  auto vals = detail::gather_values(std::span<const SpectralField* const>(work));
  const std::size_t total = wg.size();
  const std::size_t nin = work.size();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(nout),
                                       std::vector<double>(total));
  kernels::parallel_for(total, [&](std::size_t i) {
    double point[8];
    double res[8];
    for (std::size_t c = 0; c < nin; ++c) point[c] = (*vals[c])[i];
    fn(static_cast<const double*>(point), static_cast<double*>(res));
    for (int c = 0; c < nout; ++c) out[static_cast<std::size_t>(c)][i] = res[c];
  });

  std::vector<SpectralField> comps;
  comps.reserve(static_cast<std::size_t>(nout));
  for (int c = 0; c < nout; ++c) {
    SpectralField fc = SpectralField::from_values(wg, std::move(out[static_cast<std::size_t>(c)]));
    if (dealias) fc = truncate_field(fc, g.n);
    comps.push_back(std::move(fc));
  }
  return VectorField(std::move(comps));
}

}  // namespace fmfg
