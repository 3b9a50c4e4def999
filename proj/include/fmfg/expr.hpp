#pragma once

// Closed expression grammar for scalar data on the torus: sums of constants
// and trigonometric monomials with integer modes,
//
//   expr  := term (('+' | '-') term)*
//   term  := number | [number '*'] trig
//   trig  := ('cos' | 'sin') '(' '2pi' '*' '(' phase ')' ')'
//   phase := [sign] pterm (('+' | '-') pterm)*
//   pterm := [integer '*'] var
//   var   := 'x' | 'x1' | 'x2' | 'x3'
//
// e.g. "1 + 0.01*cos(2pi*(x1))", "0.5*sin(2pi*(2*x1 - x2))". Deterministic,
// locale-free, whitespace-tolerant.

#include <array>
#include <string>
#include <vector>

#include "fmfg/field.hpp"

namespace fmfg {

struct ExprTerm {
  enum class Kind { constant, cosine, sine };
  Kind kind = Kind::constant;
  double amplitude = 0.0;
  std::array<int, 3> mode{0, 0, 0};
};

struct Expression {
  std::vector<ExprTerm> terms;
  int max_axis = 0;  // highest coordinate used (1-based), 0 when constant

  double operator()(const std::array<double, 3>& x) const;
};

// throws std::invalid_argument with the offending position on malformed text
Expression parse_expression(const std::string& text);

// throws when the expression uses a coordinate beyond grid.dim
SpectralField evaluate_expression(const Expression& e, const PeriodicGrid& grid);
SpectralField field_from_expression(const std::string& text, const PeriodicGrid& grid);

}  // namespace fmfg
