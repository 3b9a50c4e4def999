#include "fmfg/anderson.hpp"

#include <cmath>
#include <stdexcept>

#include "fmfg/kernels.hpp"

namespace fmfg {

namespace {

// solve A theta = b for a small symmetric positive semi-definite system,
// Gaussian elimination with partial pivoting; returns false when singular
bool solve_small(std::vector<double> a, std::vector<double> b, int m,
                 std::vector<double>& theta) {
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[static_cast<std::size_t>(r * m + col)]) >
          std::abs(a[static_cast<std::size_t>(piv * m + col)]))
        piv = r;
    if (std::abs(a[static_cast<std::size_t>(piv * m + col)]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < m; ++c)
        std::swap(a[static_cast<std::size_t>(col * m + c)], a[static_cast<std::size_t>(piv * m + c)]);
      std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(piv)]);
    }
    const double d = a[static_cast<std::size_t>(col * m + col)];
    for (int r = col + 1; r < m; ++r) {
      const double factor = a[static_cast<std::size_t>(r * m + col)] / d;
      if (factor == 0.0) continue;
      for (int c = col; c < m; ++c)
        a[static_cast<std::size_t>(r * m + c)] -= factor * a[static_cast<std::size_t>(col * m + c)];
      b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
    }
  }
  theta.assign(static_cast<std::size_t>(m), 0.0);
  for (int r = m - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < m; ++c)
      acc -= a[static_cast<std::size_t>(r * m + c)] * theta[static_cast<std::size_t>(c)];
    theta[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r * m + r)];
  }
  for (double t : theta)
    if (!std::isfinite(t)) return false;
  return true;
}

}  // namespace

AndersonAccelerator::AndersonAccelerator(std::size_t n, int depth, double mixing,
                                         double regularization)
    : n_(n), depth_(depth), mixing_(mixing), reg_(regularization) {
  if (depth < 0) throw std::invalid_argument("anderson depth must be nonnegative");
  if (!(mixing > 0.0 && mixing <= 1.0)) throw std::invalid_argument("anderson mixing must lie in (0, 1]");
}

void AndersonAccelerator::reset() {
  dx_.clear();
  df_.clear();
  have_prev_ = false;
}

std::vector<double> AndersonAccelerator::next(const std::vector<double>& x,
                                              const std::vector<double>& gx) {
  if (x.size() != n_ || gx.size() != n_) throw std::invalid_argument("anderson state size mismatch");
  std::vector<double> f(n_);
  kernels::axpby(1.0, gx, -1.0, x, f);

  if (have_prev_) {
    std::vector<double> dx(n_), df(n_);
    kernels::axpby(1.0, x, -1.0, prev_x_, dx);
    kernels::axpby(1.0, f, -1.0, prev_f_, df);
    dx_.push_back(std::move(dx));
    df_.push_back(std::move(df));
    while (static_cast<int>(dx_.size()) > depth_) {
      dx_.pop_front();
      df_.pop_front();
    }
  }
  prev_x_ = x;
  prev_f_ = f;
  have_prev_ = true;

  const int m = static_cast<int>(df_.size());
  std::vector<double> out(n_);
  if (m == 0) {
    // plain damped step
    kernels::axpby(1.0, x, mixing_, f, out);
    return out;
  }

  // normal equations (F^T F + reg I) theta = F^T f
  std::vector<double> gram(static_cast<std::size_t>(m * m), 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = r; c < m; ++c) {
      const double v = kernels::dot(df_[static_cast<std::size_t>(r)], df_[static_cast<std::size_t>(c)]);
      gram[static_cast<std::size_t>(r * m + c)] = v;
      gram[static_cast<std::size_t>(c * m + r)] = v;
    }
    rhs[static_cast<std::size_t>(r)] = kernels::dot(df_[static_cast<std::size_t>(r)], f);
  }
  double scale = 0.0;
  for (int r = 0; r < m; ++r) scale = std::max(scale, gram[static_cast<std::size_t>(r * m + r)]);
  for (int r = 0; r < m; ++r) gram[static_cast<std::size_t>(r * m + r)] += reg_ * std::max(scale, 1e-300);

  std::vector<double> theta;
  if (!solve_small(gram, rhs, m, theta)) {
    kernels::axpby(1.0, x, mixing_, f, out);
    return out;
  }

  // x + beta f - sum_j theta_j (dx_j + beta df_j)
  kernels::axpby(1.0, x, mixing_, f, out);
  for (int jcol = 0; jcol < m; ++jcol) {
    const double t = theta[static_cast<std::size_t>(jcol)];
    if (t == 0.0) continue;
    const auto& dxj = dx_[static_cast<std::size_t>(jcol)];
    const auto& dfj = df_[static_cast<std::size_t>(jcol)];
    const double beta = mixing_;
    kernels::parallel_for(n_, [&](std::size_t i) { out[i] -= t * (dxj[i] + beta * dfj[i]); });
  }
  return out;
}

}  // namespace fmfg
