#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fmfg/kernels.hpp"

using namespace fmfg;

namespace {

struct BackendGuard {
  kernels::Backend saved;
  BackendGuard() : saved(kernels::active_backend()) {}
  ~BackendGuard() { kernels::set_backend(saved); }
};

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = unit(rng);
  return v;
}

}  // namespace

TEST_CASE("parallel_for covers every index exactly once on both backends") {
  BackendGuard guard;
  for (auto b : {kernels::Backend::serial, kernels::Backend::openmp}) {
    kernels::set_backend(b);
    std::vector<int> hits(10007, 0);
    kernels::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("pointwise kernels agree bitwise across backends") {
  BackendGuard guard;
  const std::size_t n = 4096;
  auto x = random_vec(n, 1);
  auto y = random_vec(n, 2);

  std::vector<double> out_serial(n), out_omp(n);
  kernels::set_backend(kernels::Backend::serial);
  kernels::axpby(0.3, x, -1.7, y, out_serial);
  kernels::set_backend(kernels::Backend::openmp);
  kernels::axpby(0.3, x, -1.7, y, out_omp);
  for (std::size_t i = 0; i < n; ++i) CHECK(out_serial[i] == out_omp[i]);

  kernels::set_backend(kernels::Backend::serial);
  kernels::hadamard(x, y, out_serial);
  kernels::set_backend(kernels::Backend::openmp);
  kernels::hadamard(x, y, out_omp);
  for (std::size_t i = 0; i < n; ++i) CHECK(out_serial[i] == out_omp[i]);
}

TEST_CASE("reductions agree across backends within roundoff and are deterministic") {
  BackendGuard guard;
  const std::size_t n = 100000;
  auto x = random_vec(n, 3);
  auto y = random_vec(n, 4);

  kernels::set_backend(kernels::Backend::serial);
  const double s_sum = kernels::sum(x);
  const double s_dot = kernels::dot(x, y);
  const double s_max = kernels::max_abs(x);
  const double s_min = kernels::min_value(x);
  const double s_pow = kernels::pow_sum(x, 1.7);

  kernels::set_backend(kernels::Backend::openmp);
  const double o_sum = kernels::sum(x);
  const double o_dot = kernels::dot(x, y);
  const double o_max = kernels::max_abs(x);
  const double o_min = kernels::min_value(x);
  const double o_pow = kernels::pow_sum(x, 1.7);

  CHECK(std::abs(s_sum - o_sum) <= 1e-13 * (1.0 + std::abs(s_sum) + kernels::pow_sum(x, 1.0)));
  CHECK(std::abs(s_dot - o_dot) <= 1e-13 * (1.0 + kernels::pow_sum(x, 1.0)));
  CHECK(s_max == o_max);
  CHECK(s_min == o_min);
  CHECK(std::abs(s_pow - o_pow) <= 1e-12 * (1.0 + s_pow));

  // repeated evaluation on a fixed backend is bitwise stable
  CHECK(kernels::sum(x) == o_sum);
  CHECK(kernels::dot(x, y) == o_dot);
  CHECK(kernels::pow_sum(x, 1.7) == o_pow);
}

TEST_CASE("reduction values are correct against straightforward loops") {
  BackendGuard guard;
  kernels::set_backend(kernels::Backend::openmp);
  auto x = random_vec(5000, 5);
  double ref_sum = 0.0, ref_max = 0.0, ref_min = 1e300;
  for (double v : x) {
    ref_sum += v;
    ref_max = std::max(ref_max, std::abs(v));
    ref_min = std::min(ref_min, v);
  }
  CHECK(std::abs(kernels::sum(x) - ref_sum) <= 1e-12 * (1.0 + std::abs(ref_sum)));
  CHECK(kernels::max_abs(x) == ref_max);
  CHECK(kernels::min_value(x) == ref_min);
  CHECK(kernels::all_finite(x));
  x[1234] = std::nan("");
  CHECK(!kernels::all_finite(x));
}
