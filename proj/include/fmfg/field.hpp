#pragma once

// Scalar field on a periodic grid with a dual representation: point values and
// Fourier coefficients, each computed lazily from the other and kept until a
// mutation invalidates it. Fields built from coefficients keep those
// coefficients verbatim, so constraints imposed in coefficient space (unit
// mass c_0 = 1, zero mean) survive bit for bit while values are read.

#include <complex>
#include <cstddef>
#include <vector>

#include "fmfg/fft.hpp"
#include "fmfg/grid.hpp"

namespace fmfg {

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const PeriodicGrid& grid, double fill = 0.0);

  static SpectralField from_values(const PeriodicGrid& grid, std::vector<double> values);
  static SpectralField from_coeffs(const PeriodicGrid& grid, std::vector<cdouble> coeffs);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  const std::vector<double>& values() const;
  const std::vector<cdouble>& coeffs() const;

  std::vector<double>& mutate_values();   // invalidates coefficients
  std::vector<cdouble>& mutate_coeffs();  // invalidates values

  double mean() const;  // grid quadrature of the values
  double min_value() const;
  double max_value() const;
  double max_abs() const;
  bool finite() const;

 private:
  PeriodicGrid grid_{};
  mutable std::vector<double> values_;
  mutable std::vector<cdouble> coeffs_;
  mutable bool values_ok_ = false;
  mutable bool coeffs_ok_ = false;
};

// component bundle for vector-valued quantities (gradients, fluxes, drifts)
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const PeriodicGrid& grid, double fill = 0.0);
  explicit VectorField(std::vector<SpectralField> comps);

  const PeriodicGrid& grid() const { return comps_.at(0).grid(); }
  int dim() const { return static_cast<int>(comps_.size()); }

  SpectralField& operator[](int c) { return comps_[static_cast<std::size_t>(c)]; }
  const SpectralField& operator[](int c) const { return comps_[static_cast<std::size_t>(c)]; }

  double max_norm() const;  // sup over grid of the euclidean norm
  bool finite() const;

 private:
  std::vector<SpectralField> comps_;
};

}  // namespace fmfg
