#include "fmfg/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fmfg/spectral.hpp"

namespace fmfg {
namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& expected) const {
    std::string seen = pos < text.size() ? "'" + std::string(1, text[pos]) + "'" : "end of input";
    throw std::invalid_argument("expression error at position " + std::to_string(pos) + ": expected " +
                                expected + ", found " + seen);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  bool accept_word(const char* w) {
    skip_ws();
    std::size_t len = std::char_traits<char>::length(w);
    if (text.compare(pos, len, w) != 0) return false;
    pos += len;
    return true;
  }

  double number() {
    skip_ws();
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
    if (ec != std::errc() || end == text.data() + pos) fail("a number");
    pos = static_cast<std::size_t>(end - text.data());
    return v;
  }

  int integer() {
    skip_ws();
    int v = 0;
    auto [end, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
    if (ec != std::errc() || end == text.data() + pos) fail("an integer");
    pos = static_cast<std::size_t>(end - text.data());
    return v;
  }

  bool number_starts_here() {
    char c = peek();
    return (c >= '0' && c <= '9') || c == '.';
  }
};

// var := 'x' ['1'|'2'|'3'], bare x aliases x1; returns the 0-based axis
int parse_var(Cursor& cur) {
  if (!cur.accept('x')) cur.fail("a coordinate (x, x1, x2 or x3)");
  if (cur.pos < cur.text.size()) {
    char d = cur.text[cur.pos];
    if (d == '1' || d == '2' || d == '3') {
      ++cur.pos;
      return d - '1';
    }
    if (std::isalnum(static_cast<unsigned char>(d)))
      throw std::invalid_argument("expression error at position " + std::to_string(cur.pos) +
                                  ": coordinates are x1, x2 and x3");
  }
  return 0;
}

// pterm := [integer '*'] var, with an optional sign already folded into coef
void parse_phase_term(Cursor& cur, int sign, std::array<int, 3>& mode) {
  int coef = sign;
  if (cur.number_starts_here() || cur.peek() == '-' || cur.peek() == '+') {
    coef = sign * cur.integer();
    cur.expect('*');
  }
  int axis = parse_var(cur);
  mode[static_cast<std::size_t>(axis)] += coef;
}

// phase := [sign] pterm (('+'|'-') pterm)*
std::array<int, 3> parse_phase(Cursor& cur) {
  std::array<int, 3> mode{0, 0, 0};
  int sign = cur.accept('-') ? -1 : (cur.accept('+'), 1);
  parse_phase_term(cur, sign, mode);
  for (;;) {
    if (cur.accept('+'))
      parse_phase_term(cur, 1, mode);
    else if (cur.accept('-'))
      parse_phase_term(cur, -1, mode);
    else
      break;
  }
  return mode;
}

// trig := ('cos'|'sin') '(' '2pi' '*' '(' phase ')' ')'
ExprTerm parse_trig(Cursor& cur, double amplitude) {
  ExprTerm t;
  t.amplitude = amplitude;
  if (cur.accept_word("cos"))
    t.kind = ExprTerm::Kind::cosine;
  else if (cur.accept_word("sin"))
    t.kind = ExprTerm::Kind::sine;
  else
    cur.fail("'cos' or 'sin'");
  cur.expect('(');
  if (!cur.accept_word("2pi")) cur.fail("'2pi'");
  cur.expect('*');
  cur.expect('(');
  t.mode = parse_phase(cur);
  cur.expect(')');
  cur.expect(')');
  return t;
}

// term := number | [number '*'] trig, sign supplied by the caller
ExprTerm parse_term(Cursor& cur, int sign) {
  if (cur.number_starts_here()) {
    double v = sign * cur.number();
    if (cur.accept('*')) return parse_trig(cur, v);
    ExprTerm t;
    t.kind = ExprTerm::Kind::constant;
    t.amplitude = v;
    return t;
  }
  return parse_trig(cur, static_cast<double>(sign));
}

}  // namespace

double Expression::operator()(const std::array<double, 3>& x) const {
  double acc = 0.0;
  for (const ExprTerm& t : terms) {
    switch (t.kind) {
      case ExprTerm::Kind::constant:
        acc += t.amplitude;
        break;
      case ExprTerm::Kind::cosine:
      case ExprTerm::Kind::sine: {
        double phase = two_pi * (t.mode[0] * x[0] + t.mode[1] * x[1] + t.mode[2] * x[2]);
        acc += t.amplitude * (t.kind == ExprTerm::Kind::cosine ? std::cos(phase) : std::sin(phase));
        break;
      }
    }
  }
  return acc;
}

Expression parse_expression(const std::string& text) {
  Cursor cur{text};
  if (cur.done()) throw std::invalid_argument("expression error: empty input");
  Expression e;
  int sign = cur.accept('-') ? -1 : (cur.accept('+'), 1);
  e.terms.push_back(parse_term(cur, sign));
  for (;;) {
    if (cur.accept('+'))
      e.terms.push_back(parse_term(cur, 1));
    else if (cur.accept('-'))
      e.terms.push_back(parse_term(cur, -1));
    else
      break;
  }
  if (!cur.done()) cur.fail("'+', '-' or end of input");
  for (const ExprTerm& t : e.terms) {
    if (t.kind == ExprTerm::Kind::constant) continue;
    for (int d = 0; d < 3; ++d)
      if (t.mode[static_cast<std::size_t>(d)] != 0) e.max_axis = std::max(e.max_axis, d + 1);
  }
  return e;
}

SpectralField evaluate_expression(const Expression& e, const PeriodicGrid& grid) {
  if (e.max_axis > grid.dim)
    throw std::invalid_argument("expression uses x" + std::to_string(e.max_axis) + " but the grid is " +
                                std::to_string(grid.dim) + "-dimensional");
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = e(grid.point(i));
  return SpectralField::from_values(grid, std::move(vals));
}

SpectralField field_from_expression(const std::string& text, const PeriodicGrid& grid) {
  return evaluate_expression(parse_expression(text), grid);
}

}  // namespace fmfg
