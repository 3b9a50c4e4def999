#include "fmfg/field.hpp"

#include <cmath>
#include <stdexcept>

#include "fmfg/kernels.hpp"

namespace fmfg {

SpectralField::SpectralField(const PeriodicGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill), values_ok_(true) {}

SpectralField SpectralField::from_values(const PeriodicGrid& grid, std::vector<double> values) {
  if (values.size() != grid.size()) throw std::invalid_argument("value count does not match grid");
  SpectralField f;
  f.grid_ = grid;
  f.values_ = std::move(values);
  f.values_ok_ = true;
  return f;
}

SpectralField SpectralField::from_coeffs(const PeriodicGrid& grid, std::vector<cdouble> coeffs) {
  if (coeffs.size() != grid.size()) throw std::invalid_argument("coeff count does not match grid");
  SpectralField f;
  f.grid_ = grid;
  f.coeffs_ = std::move(coeffs);
  f.coeffs_ok_ = true;
  return f;
}

const std::vector<double>& SpectralField::values() const {
  if (!values_ok_) {
    if (!coeffs_ok_) throw std::logic_error("field has no representation");
    values_.assign(grid_.size(), 0.0);
    Fft::plan_for(grid_).inverse(coeffs_, values_);
    values_ok_ = true;
  }
  return values_;
}

const std::vector<cdouble>& SpectralField::coeffs() const {
  if (!coeffs_ok_) {
    if (!values_ok_) throw std::logic_error("field has no representation");
    coeffs_.assign(grid_.size(), cdouble(0.0, 0.0));
    Fft::plan_for(grid_).forward(values_, coeffs_);
    coeffs_ok_ = true;
  }
  return coeffs_;
}

std::vector<double>& SpectralField::mutate_values() {
  values();  // materialize first
  coeffs_ok_ = false;
  coeffs_.clear();
  return values_;
}

std::vector<cdouble>& SpectralField::mutate_coeffs() {
  coeffs();
  values_ok_ = false;
  values_.clear();
  return coeffs_;
}

double SpectralField::mean() const {
  return kernels::sum(values()) / static_cast<double>(size());
}

double SpectralField::min_value() const { return kernels::min_value(values()); }
double SpectralField::max_value() const { return kernels::max_value(values()); }
double SpectralField::max_abs() const { return kernels::max_abs(values()); }
bool SpectralField::finite() const { return kernels::all_finite(values()); }

VectorField::VectorField(const PeriodicGrid& grid, double fill) {
  comps_.reserve(static_cast<std::size_t>(grid.dim));
  for (int c = 0; c < grid.dim; ++c) comps_.emplace_back(grid, fill);
}

VectorField::VectorField(std::vector<SpectralField> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("vector field needs at least one component");
  const PeriodicGrid& g = comps_.front().grid();
  if (static_cast<int>(comps_.size()) != g.dim)
    throw std::invalid_argument("component count must equal grid dim");
  for (const auto& c : comps_)
    if (c.grid() != g) throw std::invalid_argument("vector field components on mixed grids");
}

double VectorField::max_norm() const {
  const std::size_t total = grid().size();
  const int d = dim();
  std::vector<const std::vector<double>*> vs;
  vs.reserve(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) vs.push_back(&comps_[static_cast<std::size_t>(c)].values());
  // reuse the order-independent max reduction through a norm buffer
  std::vector<double> norms(total);
  kernels::parallel_for(total, [&](std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double v = (*vs[static_cast<std::size_t>(c)])[i];
      s += v * v;
    }
    norms[i] = std::sqrt(s);
  });
  return kernels::max_value(norms);
}

bool VectorField::finite() const {
  for (const auto& c : comps_)
    if (!c.finite()) return false;
  return true;
}

}  // namespace fmfg
