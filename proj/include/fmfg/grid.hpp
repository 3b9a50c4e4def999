#pragma once

// Uniform periodic grid on the unit torus [0,1)^dim with n points per axis,
// row-major flattening (last axis fastest). Wavenumbers follow the usual FFT
// layout: index j maps to k = j for j < n/2 and k = j - n otherwise, so the
// unmatched Nyquist frequency sits at k = -n/2.

#include <array>
#include <cstddef>
#include <stdexcept>

namespace fmfg {

struct PeriodicGrid {
  int dim = 1;
  int n = 0;

  PeriodicGrid() = default;
  PeriodicGrid(int dim_, int n_) : dim(dim_), n(n_) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("grid n must be even and >= 4");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(n);
    return s;
  }
  double spacing() const { return 1.0 / n; }

  // integer lattice coordinates of a flat index
  std::array<int, 3> unflatten(std::size_t flat) const {
    std::array<int, 3> j{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
      j[static_cast<std::size_t>(d)] = static_cast<int>(flat % static_cast<std::size_t>(n));
      flat /= static_cast<std::size_t>(n);
    }
    return j;
  }
  std::size_t flatten(const std::array<int, 3>& j) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(j[static_cast<std::size_t>(d)]);
    return flat;
  }
  // physical coordinates of a flat index
  std::array<double, 3> point(std::size_t flat) const {
    auto j = unflatten(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = static_cast<double>(j[static_cast<std::size_t>(d)]) / n;
    return x;
  }

  bool operator==(const PeriodicGrid& o) const { return dim == o.dim && n == o.n; }
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }
};

// signed wavenumber of FFT bin j
inline int wavenumber(int j, int n) { return j < n / 2 ? j : j - n; }

// wavenumber as seen by derivative-type multipliers: the unmatched Nyquist
// bin carries no usable phase information and is annihilated
inline int wavenumber_deriv(int j, int n) { return j == n / 2 ? 0 : wavenumber(j, n); }

}  // namespace fmfg
