#pragma once

// Formula grammar (ASCII, whitespace-insensitive):
//
//   formula  := disj
//   disj     := conj ( '|' conj )*
//   conj     := unary ( '&' unary )*
//   unary    := '!' unary
//             | ('F' | 'G') '[' number ',' number ']' unary
//             | '(' formula ')'
//             | atom
//   atom     := linear ('<' | '>') ['-'] number
//   linear   := ['-'] term ( ('+' | '-') term )*
//   term     := ident | number ['*'] ident
//
// `&` binds tighter than `|`; temporal operators and `!` bind tightest, so
// `F[0,2] x > 1 & y > 1` is `(F[0,2] x > 1) & y > 1`. Interval bounds are
// times and must be non-negative integer multiples of the tick duration.

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "stlq/error.hpp"
#include "stlq/stl/formula.hpp"

namespace stlq {

struct ParseOptions {
  SignalSchema schema = SignalSchema::planar();
  /// Duration of one sample tick, in the units interval bounds are written in.
  double tick = 1.0;
};

namespace detail {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, const ParseOptions& options)
      : text_(text), options_(options) {
    if (!(options.tick > 0.0) || !std::isfinite(options.tick))
      throw ValidationError("tick duration must be positive");
    if (options.schema.dimension() == 0)
      throw ValidationError("signal schema has no components");
  }

  Formula parse() {
    skip_space();
    if (at_end()) fail("empty formula");
    Formula f = disjunction();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + peek() + "'");
    return f;
  }

 private:
  Formula disjunction() {
    Formula f = conjunction();
    while (accept('|')) f = Formula::disjunction(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept('&')) f = Formula::conjunction(f, unary());
    return f;
  }

  Formula unary() {
    skip_space();
    if (accept('!')) return Formula::negation(unary());
    if (at_end()) fail("expected a formula");
    const char c = peek();
    if ((c == 'F' || c == 'G') && next_nonspace_after(pos_ + 1) == '[') {
      ++pos_;
      const Interval interval = parse_interval();
      Formula body = unary();
      return c == 'F' ? Formula::eventually(interval, body) : Formula::always(interval, body);
    }
    if (accept('(')) {
      Formula f = disjunction();
      expect(')');
      return f;
    }
    return atom();
  }

  Interval parse_interval() {
    expect('[');
    skip_space();
    const std::size_t lo_pos = pos_;
    const long long lo = to_ticks(number(), lo_pos);
    expect(',');
    skip_space();
    const std::size_t hi_pos = pos_;
    const long long hi = to_ticks(number(), hi_pos);
    expect(']');
    if (lo > hi) fail_at(lo_pos, "interval lower bound exceeds upper bound");
    return Interval::checked(lo, hi);
  }

  long long to_ticks(double time, std::size_t where) {
    if (time < 0.0) fail_at(where, "interval bound must be non-negative");
    const double ticks = time / options_.tick;
    const double rounded = std::round(ticks);
    if (std::abs(ticks - rounded) > 1e-9 * std::max(1.0, rounded))
      fail_at(where, "interval bound " + format_number(time) +
                         " is not a multiple of the tick duration " +
                         format_number(options_.tick));
    if (rounded > 1e6) fail_at(where, "interval bound too large");
    return static_cast<long long>(rounded);
  }

  Formula atom() {
    Predicate p;
    p.coefficients.assign(options_.schema.dimension(), 0.0);
    skip_space();
    double sign = 1.0;
    if (accept('-')) sign = -1.0;
    term(p, sign);
    for (;;) {
      skip_space();
      if (accept('+'))
        term(p, 1.0);
      else if (accept('-'))
        term(p, -1.0);
      else
        break;
    }
    skip_space();
    if (accept('<'))
      p.relation = Relation::LessThan;
    else if (accept('>'))
      p.relation = Relation::GreaterThan;
    else
      fail("expected '<' or '>'");
    skip_space();
    double rhs_sign = 1.0;
    if (accept('-')) rhs_sign = -1.0;
    p.offset = rhs_sign * number();
    return Formula::pred(std::move(p));
  }

  void term(Predicate& p, double sign) {
    skip_space();
    double coefficient = 1.0;
    if (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
      coefficient = number();
      accept('*');
    }
    skip_space();
    const std::size_t name_pos = pos_;
    const std::string name = identifier();
    auto index = options_.schema.index_of(name);
    if (!index) fail_at(name_pos, "unknown signal component '" + name + "'");
    p.coefficients[*index] += sign * coefficient;
  }

  std::string identifier() {
    skip_space();
    if (at_end() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_'))
      fail("expected a signal component name");
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_space();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
      fail("expected an unsigned number");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    if (!std::isfinite(value)) fail("number out of range");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "' but found '" + peek() + "'");
    }
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  char next_nonspace_after(std::size_t i) const {
    while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
    return i < text_.size() ? text_[i] : '\0';
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }

  [[noreturn]] void fail_at(std::size_t where, const std::string& what) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < where && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(what, line, column);
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses and normalizes a formula. Throws ParseError on malformed text,
/// reversed or negative intervals and unknown component names.
inline Formula parse_formula(std::string_view text, const ParseOptions& options = {}) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (static_cast<unsigned char>(text[i]) > 127) {
      std::size_t line = 1, column = 1;
      for (std::size_t j = 0; j < i; ++j) {
        if (text[j] == '\n') {
          ++line;
          column = 1;
        } else {
          ++column;
        }
      }
      throw ParseError("non-ASCII character", line, column);
    }
  }
  return normalize(detail::FormulaParser(text, options).parse());
}

}  // namespace stlq
