// Micro-benchmark for the data-parallel kernel layer and the spectral
// operations built on top of it. Each operation runs under the serial
// backend and the OpenMP backend, reporting the best wall time over a
// few repetitions plus the relative gap between the two backends'
// results (which should sit at rounding level).
//
// usage: fmfg-bench [points] [reps]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fmfg/field.hpp"
#include "fmfg/fokker_planck.hpp"
#include "fmfg/grid.hpp"
#include "fmfg/kernels.hpp"
#include "fmfg/spectral.hpp"

namespace k = fmfg::kernels;

namespace {

template <class Body>
void bench_op(const char* name, std::size_t n, int reps, Body&& body) {
  const k::Backend order[2] = {k::Backend::serial, k::Backend::openmp};
  double ms[2];
  double chk[2];
  for (int bi = 0; bi < 2; ++bi) {
    k::set_backend(order[bi]);
    chk[bi] = body();  // warm-up pass doubles as the checksum
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      body();
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    ms[bi] = best;
  }
  k::set_backend(k::Backend::serial);
  const double denom = std::max(std::abs(chk[0]), 1.0);
  std::printf("%-26s %9zu %10.3f %10.3f %6.2fx %9.1e\n", name, n, ms[0], ms[1],
              ms[0] / std::max(ms[1], 1e-12), std::abs(chk[0] - chk[1]) / denom);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = std::size_t{1} << 20;
  int reps = 5;
  if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) reps = std::atoi(argv[2]);
  if (n < 2 || reps < 1) {
    std::fprintf(stderr, "usage: fmfg-bench [points >= 2] [reps >= 1]\n");
    return 2;
  }

  std::printf("kernel backends: serial%s, %d thread(s)\n",
              k::openmp_compiled() ? " + openmp" : " only (openmp column runs the same loop)",
              k::max_threads());
  std::printf("%-26s %9s %10s %10s %7s %9s\n", "operation", "points", "serial ms", "openmp ms",
              "ratio", "rel diff");

  std::vector<double> x(n), y(n), out(n);
  std::vector<std::complex<double>> cx(n), cy(n), cout_(n);
  std::vector<double> mult(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 1e-3 * static_cast<double>(i);
    x[i] = std::sin(t);
    y[i] = std::cos(t) + 1.5;
    mult[i] = 1.0 / (1.0 + t);
    cx[i] = {x[i], y[i]};
    cy[i] = {y[i], -x[i]};
  }

  bench_op("sum", n, reps, [&] { return k::sum(x); });
  bench_op("dot", n, reps, [&] { return k::dot(x, y); });
  bench_op("max_abs", n, reps, [&] { return k::max_abs(x); });
  bench_op("pow_sum p=3", n, reps, [&] { return k::pow_sum(x, 3.0); });
  bench_op("axpby", n, reps, [&] {
    k::axpby(1.25, x, -0.5, y, out);
    return out[n / 2];
  });
  bench_op("hadamard", n, reps, [&] {
    k::hadamard(x, y, out);
    return out[n / 2];
  });
  bench_op("caxpby", n, reps, [&] {
    k::caxpby({0.5, 0.25}, cx, {1.0, -0.75}, cy, cout_);
    return cout_[n / 2].real();
  });
  bench_op("apply_real_multiplier", n, reps, [&] {
    std::copy(cx.begin(), cx.end(), cout_.begin());
    k::apply_real_multiplier(cout_, mult);
    return cout_[n / 2].imag();
  });

  const fmfg::PeriodicGrid g2{2, 256};
  const auto a = fmfg::band_limited_random(g2, 40, 1);
  const auto b = fmfg::band_limited_random(g2, 40, 2);
  bench_op("fractional_laplacian 2d", g2.size(), reps,
           [&] { return fmfg::fractional_laplacian(a, 0.75).max_abs(); });
  bench_op("gradient+divergence 2d", g2.size(), reps,
           [&] { return fmfg::divergence(fmfg::gradient(a)).max_abs(); });
  bench_op("dealiased product 2d", g2.size(), reps,
           [&] { return fmfg::multiply(a, b).max_abs(); });

  const fmfg::PeriodicGrid g1{1, 256};
  std::vector<double> bv(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i)
    bv[i] = 2.0 * std::sin(fmfg::two_pi * g1.point(i)[0]);
  const fmfg::VectorField drift{
      std::vector<fmfg::SpectralField>{fmfg::SpectralField::from_values(g1, bv)}};
  fmfg::FpConfig fp_cfg;
  fp_cfg.tol = 1e-8;
  fp_cfg.max_iter = 4000;
  bench_op("stationary transport 1d", g1.size(), reps, [&] {
    return fmfg::solve_stationary_fp(drift, 0.8, fp_cfg).min_value();
  });

  std::printf("times are best of %d run(s) after one warm-up\n", reps);
  return 0;
}
