#include "fmfg/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fmfg/kernels.hpp"

namespace fmfg {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cdouble* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(const PeriodicGrid& grid) : grid_(grid) {
  const std::size_t total = grid.size();
  // planning scratch; plans are replayed on per-call buffers via new-array execute
  std::vector<cdouble> a(total), b(total);
  int dims[3] = {grid.n, grid.n, grid.n};
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_plan_ = fftw_plan_dft(grid.dim, dims, as_fftw(a.data()), as_fftw(b.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inv_plan_ = fftw_plan_dft(grid.dim, dims, as_fftw(a.data()), as_fftw(b.data()),
                            FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (fwd_plan_ == nullptr || inv_plan_ == nullptr)
    throw std::runtime_error("fftw plan creation failed");
}

const Fft& Fft::plan_for(const PeriodicGrid& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
  static std::mutex cache_mutex;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_pair(grid.dim, grid.n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::unique_ptr<Fft>(new Fft(grid))).first;
  return *it->second;
}

void Fft::forward(std::span<const double> values, std::span<cdouble> coeffs) const {
  const std::size_t total = grid_.size();
  std::vector<cdouble> in(total);
  kernels::parallel_for(total, [&](std::size_t i) { in[i] = cdouble(values[i], 0.0); });
  fftw_execute_dft(static_cast<fftw_plan>(fwd_plan_), as_fftw(in.data()),
                   as_fftw(coeffs.data()));
  const double inv_n = 1.0 / static_cast<double>(total);
  kernels::parallel_for(total, [&](std::size_t i) { coeffs[i] *= inv_n; });
}

void Fft::inverse(std::span<const cdouble> coeffs, std::span<double> values) const {
  const std::size_t total = grid_.size();
  std::vector<cdouble> in(coeffs.begin(), coeffs.end());
  std::vector<cdouble> out(total);
  fftw_execute_dft(static_cast<fftw_plan>(inv_plan_), as_fftw(in.data()),
                   as_fftw(out.data()));
  kernels::parallel_for(total, [&](std::size_t i) { values[i] = out[i].real(); });
}

}  // namespace fmfg
