#pragma once

// Windowed Anderson mixing for fixed-point iterations x <- g(x). Keeps the
// last `depth` residual differences, solves the small least-squares problem
// through regularized normal equations and blends with damping `mixing`.
// Degenerate history falls back to the plain damped step.

#include <cstddef>
#include <deque>
#include <vector>

namespace fmfg {

class AndersonAccelerator {
 public:
  AndersonAccelerator(std::size_t n, int depth, double mixing, double regularization = 1e-12);

  std::vector<double> next(const std::vector<double>& x, const std::vector<double>& gx);
  void reset();

 private:
  std::size_t n_;
  int depth_;
  double mixing_;
  double reg_;
  std::deque<std::vector<double>> dx_;  // x_k - x_{k-1}
  std::deque<std::vector<double>> df_;  // f_k - f_{k-1}
  std::vector<double> prev_x_;
  std::vector<double> prev_f_;
  bool have_prev_ = false;
};

}  // namespace fmfg
