#pragma once

// Data-parallel building blocks. Every grid sweep in the library goes through
// parallel_for / parallel_sum so the whole solver stack can be switched between
// a serial reference backend and the OpenMP backend at runtime (FMFG_BACKEND
// environment variable or set_backend). Reductions are deterministic for a
// fixed backend and thread count: each thread accumulates a contiguous chunk
// and the partials are combined in thread order.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fmfg::kernels {

enum class Backend { serial, openmp };

Backend active_backend();
void set_backend(Backend b);
bool openmp_compiled();
int max_threads();

namespace detail {

template <class F>
void run_parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    body(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

template <class F>
std::vector<double> chunk_partials(std::size_t n, F&& term, std::size_t nchunks) {
  std::vector<double> partials(nchunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel num_threads(static_cast<int>(nchunks))
  {
    const std::size_t c = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = n * c / nchunks;
    const std::size_t hi = n * (c + 1) / nchunks;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partials[c] = acc;
  }
#else
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = n * c / nchunks;
    const std::size_t hi = n * (c + 1) / nchunks;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partials[c] = acc;
  }
#endif
  return partials;
}

}  // namespace detail

template <class F>
void parallel_for(std::size_t n, F&& body) {
  if (active_backend() == Backend::openmp) {
    detail::run_parallel_for(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

// deterministic sum of term(i) for i in [0, n)
template <class F>
double parallel_sum(std::size_t n, F&& term) {
  if (active_backend() == Backend::openmp) {
    const std::size_t nchunks = static_cast<std::size_t>(max_threads());
    auto partials = detail::chunk_partials(n, term, nchunks);
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += term(i);
  return total;
}

// reductions
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> v);
double min_value(std::span<const double> v);
double max_value(std::span<const double> v);
double pow_sum(std::span<const double> v, double p);  // sum of |v_i|^p
bool all_finite(std::span<const double> v);

// pointwise maps
void scale(std::span<double> v, double a);
void fill(std::span<double> v, double a);
void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out);
void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out);
void apply_real_multiplier(std::span<std::complex<double>> coeffs, std::span<const double> mult);
void caxpby(std::complex<double> a, std::span<const std::complex<double>> x,
            std::complex<double> b, std::span<const std::complex<double>> y,
            std::span<std::complex<double>> out);

}  // namespace fmfg::kernels
