#include "fmfg/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace fmfg::kernels {

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("FMFG_BACKEND")) {
    if (std::strcmp(env, "serial") == 0) return Backend::serial;
    if (std::strcmp(env, "openmp") == 0) return Backend::openmp;
  }
#ifdef _OPENMP
  return Backend::openmp;
#else
  return Backend::serial;
#endif
}

Backend& backend_state() {
  static Backend b = initial_backend();
  return b;
}

}  // namespace

Backend active_backend() { return backend_state(); }
void set_backend(Backend b) { backend_state() = b; }

bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double sum(std::span<const double> v) {
  return parallel_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return parallel_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

namespace {

template <class Fold>
double fold_reduce(std::span<const double> v, double init, Fold&& fold) {
  // order-independent fold (max/min), safe to chunk arbitrarily
  if (active_backend() == Backend::openmp) {
    const std::size_t nchunks = static_cast<std::size_t>(max_threads());
    std::vector<double> partials(nchunks, init);
    detail::run_parallel_for(nchunks, [&](std::size_t c) {
      const std::size_t lo = v.size() * c / nchunks;
      const std::size_t hi = v.size() * (c + 1) / nchunks;
      double acc = init;
      for (std::size_t i = lo; i < hi; ++i) acc = fold(acc, v[i]);
      partials[c] = acc;
    });
    double total = init;
    for (double p : partials) total = fold(total, p);
    return total;
  }
  double acc = init;
  for (std::size_t i = 0; i < v.size(); ++i) acc = fold(acc, v[i]);
  return acc;
}

}  // namespace

double max_abs(std::span<const double> v) {
  return fold_reduce(v, 0.0, [](double a, double x) { return std::max(a, std::abs(x)); });
}

double min_value(std::span<const double> v) {
  return fold_reduce(v, std::numeric_limits<double>::infinity(),
                     [](double a, double x) { return std::min(a, x); });
}

double max_value(std::span<const double> v) {
  return fold_reduce(v, -std::numeric_limits<double>::infinity(),
                     [](double a, double x) { return std::max(a, x); });
}

double pow_sum(std::span<const double> v, double p) {
  return parallel_sum(v.size(), [&](std::size_t i) { return std::pow(std::abs(v[i]), p); });
}

bool all_finite(std::span<const double> v) {
  const double bad =
      parallel_sum(v.size(), [&](std::size_t i) { return std::isfinite(v[i]) ? 0.0 : 1.0; });
  return bad == 0.0;
}

void scale(std::span<double> v, double a) {
  parallel_for(v.size(), [&](std::size_t i) { v[i] *= a; });
}

void fill(std::span<double> v, double a) {
  parallel_for(v.size(), [&](std::size_t i) { v[i] = a; });
}

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out) {
  parallel_for(out.size(), [&](std::size_t i) { out[i] = a * x[i] + b * y[i]; });
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  parallel_for(out.size(), [&](std::size_t i) { out[i] = a[i] * b[i]; });
}

void apply_real_multiplier(std::span<std::complex<double>> coeffs, std::span<const double> mult) {
  parallel_for(coeffs.size(), [&](std::size_t i) { coeffs[i] *= mult[i]; });
}

void caxpby(std::complex<double> a, std::span<const std::complex<double>> x,
            std::complex<double> b, std::span<const std::complex<double>> y,
            std::span<std::complex<double>> out) {
  parallel_for(out.size(), [&](std::size_t i) { out[i] = a * x[i] + b * y[i]; });
}

}  // namespace fmfg::kernels
