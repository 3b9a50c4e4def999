#pragma once

// FFTW front end. Complex-to-complex transforms in both directions with the
// forward transform normalized by 1/N, so forward(values)[k] is the Fourier
// coefficient c_k and inverse(coeffs) is the plain synthesis sum. Plans are
// created once per grid with FFTW_ESTIMATE (deterministic plan choice) and
// cached behind a mutex; execution on caller buffers is thread safe.

#include <complex>
#include <span>

#include "fmfg/grid.hpp"

namespace fmfg {

using cdouble = std::complex<double>;

class Fft {
 public:
  static const Fft& plan_for(const PeriodicGrid& grid);

  void forward(std::span<const double> values, std::span<cdouble> coeffs) const;
  void inverse(std::span<const cdouble> coeffs, std::span<double> values) const;

  const PeriodicGrid& grid() const { return grid_; }

 private:
  explicit Fft(const PeriodicGrid& grid);
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  PeriodicGrid grid_;
  void* fwd_plan_ = nullptr;  // fftw_plan, kept opaque here
  void* inv_plan_ = nullptr;
};

}  // namespace fmfg
