#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "fmfg/field.hpp"

namespace testutil {

inline fmfg::SpectralField field_from(const fmfg::PeriodicGrid& g,
                                      const std::function<double(std::array<double, 3>)>& f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i));
  return fmfg::SpectralField::from_values(g, std::move(v));
}

inline double max_diff(const fmfg::SpectralField& a, const fmfg::SpectralField& b) {
  const auto& va = a.values();
  const auto& vb = b.values();
  double m = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
