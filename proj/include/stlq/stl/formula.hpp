#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlq/error.hpp"

namespace stlq {

/// Names of the components of a signal, bound to vector indices in order.
class SignalSchema {
 public:
  SignalSchema() = default;
  SignalSchema(std::initializer_list<std::string> names) : names_(names) { check(); }
  explicit SignalSchema(std::vector<std::string> names) : names_(std::move(names)) { check(); }

  /// Planar grid signals: x then y.
  static SignalSchema planar() { return {"x", "y"}; }

  std::size_t dimension() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  friend bool operator==(const SignalSchema&, const SignalSchema&) = default;

 private:
  void check() const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) throw ValidationError("signal schema: empty component name");
      for (std::size_t j = 0; j < i; ++j)
        if (names_[i] == names_[j])
          throw ValidationError("signal schema: duplicate component '" + names_[i] + "'");
    }
  }

  std::vector<std::string> names_;
};

enum class Relation { LessThan, GreaterThan };

/// Affine predicate `coefficients . s < offset` or `coefficients . s > offset`.
struct Predicate {
  std::vector<double> coefficients;
  double offset = 0.0;
  Relation relation = Relation::LessThan;

  /// Single-component predicate, e.g. `x > 4` is axis(2, 0, GreaterThan, 4).
  static Predicate axis(std::size_t dimension, std::size_t component, Relation relation,
                        double offset) {
    Predicate p;
    p.coefficients.assign(dimension, 0.0);
    p.coefficients.at(component) = 1.0;
    p.offset = offset;
    p.relation = relation;
    return p;
  }

  double functional(std::span<const double> sample) const {
    if (sample.size() != coefficients.size())
      throw ValidationError("predicate over " + std::to_string(coefficients.size()) +
                            " components applied to a sample of dimension " +
                            std::to_string(sample.size()));
    double f = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) f += coefficients[i] * sample[i];
    return f;
  }

  /// Robustness: d - f(s) for `<`, f(s) - d for `>`.
  double margin(std::span<const double> sample) const {
    const double f = functional(sample);
    return relation == Relation::LessThan ? offset - f : f - offset;
  }

  /// Strict inequality.
  bool holds(std::span<const double> sample) const {
    const double f = functional(sample);
    return relation == Relation::LessThan ? f < offset : f > offset;
  }

  Predicate negated() const {
    Predicate p = *this;
    p.relation = relation == Relation::LessThan ? Relation::GreaterThan : Relation::LessThan;
    return p;
  }

  double coefficient_norm1() const {
    double n = 0.0;
    for (double c : coefficients) n += std::abs(c);
    return n;
  }

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Closed tick range [lower, upper].
struct Interval {
  int lower = 0;
  int upper = 0;

  static Interval checked(long long lower, long long upper) {
    if (lower < 0 || upper < 0)
      throw ValidationError("interval bounds must be non-negative");
    if (lower > upper)
      throw ValidationError("interval lower bound " + std::to_string(lower) +
                            " exceeds upper bound " + std::to_string(upper));
    if (upper > 1'000'000) throw ValidationError("interval bound too large");
    return {static_cast<int>(lower), static_cast<int>(upper)};
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Immutable STL syntax tree. Copies share structure.
class Formula {
 public:
  enum class Kind { Pred, Not, And, Or, Finally, Globally };

  static Formula pred(Predicate p) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pred;
    n->predicate = std::move(p);
    return Formula(std::move(n));
  }
  static Formula negation(Formula f) { return unary(Kind::Not, {}, std::move(f)); }
  static Formula conjunction(Formula a, Formula b) {
    return binary(Kind::And, std::move(a), std::move(b));
  }
  static Formula disjunction(Formula a, Formula b) {
    return binary(Kind::Or, std::move(a), std::move(b));
  }
  static Formula eventually(Interval i, Formula f) {
    return unary(Kind::Finally, Interval::checked(i.lower, i.upper), std::move(f));
  }
  static Formula always(Interval i, Formula f) {
    return unary(Kind::Globally, Interval::checked(i.lower, i.upper), std::move(f));
  }

  Kind kind() const noexcept { return node_->kind; }
  bool is_temporal() const noexcept {
    return kind() == Kind::Finally || kind() == Kind::Globally;
  }

  const Predicate& predicate() const { return node_->predicate; }
  const Interval& interval() const { return node_->interval; }
  /// Operand of Not / Finally / Globally.
  const Formula& child() const { return node_->children.at(0); }
  const Formula& left() const { return node_->children.at(0); }
  const Formula& right() const { return node_->children.at(1); }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Pred:
        return a.predicate() == b.predicate();
      case Kind::Not:
        return a.child() == b.child();
      case Kind::And:
      case Kind::Or:
        return a.left() == b.left() && a.right() == b.right();
      case Kind::Finally:
      case Kind::Globally:
        return a.interval() == b.interval() && a.child() == b.child();
    }
    return false;
  }

 private:
  struct Node {
    Kind kind = Kind::Pred;
    Predicate predicate;
    Interval interval;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula unary(Kind k, Interval i, Formula f) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->interval = i;
    n->children.push_back(std::move(f));
    return Formula(std::move(n));
  }
  static Formula binary(Kind k, Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->children.push_back(std::move(a));
    n->children.push_back(std::move(b));
    return Formula(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

inline Formula push_negation(const Formula& f, bool negate) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return negate ? Formula::pred(f.predicate().negated()) : f;
    case K::Not:
      return push_negation(f.child(), !negate);
    case K::And: {
      auto l = push_negation(f.left(), negate);
      auto r = push_negation(f.right(), negate);
      return negate ? Formula::disjunction(l, r) : Formula::conjunction(l, r);
    }
    case K::Or: {
      auto l = push_negation(f.left(), negate);
      auto r = push_negation(f.right(), negate);
      return negate ? Formula::conjunction(l, r) : Formula::disjunction(l, r);
    }
    case K::Finally: {
      auto c = push_negation(f.child(), negate);
      return negate ? Formula::always(f.interval(), c) : Formula::eventually(f.interval(), c);
    }
    case K::Globally: {
      auto c = push_negation(f.child(), negate);
      return negate ? Formula::eventually(f.interval(), c) : Formula::always(f.interval(), c);
    }
  }
  return f;
}

}  // namespace detail

/// Negation normal form: Not is eliminated by flipping predicate relations,
/// De Morgan over And/Or and F/G duality. Robustness is preserved exactly.
inline Formula normalize(const Formula& f) { return detail::push_negation(f, false); }

inline bool is_normalized(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return true;
    case K::Not:
      return false;
    case K::And:
    case K::Or:
      return is_normalized(f.left()) && is_normalized(f.right());
    case K::Finally:
    case K::Globally:
      return is_normalized(f.child());
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing

/// Shortest decimal that parses back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string component_name(const SignalSchema& schema, std::size_t i) {
  if (i < schema.dimension()) return schema.name(i);
  return "s" + std::to_string(i);
}

inline std::string print_predicate(const Predicate& p, const SignalSchema& schema) {
  std::string lhs;
  for (std::size_t i = 0; i < p.coefficients.size(); ++i) {
    double c = p.coefficients[i];
    if (c == 0.0) continue;
    const std::string name = component_name(schema, i);
    if (lhs.empty()) {
      if (c == 1.0)
        lhs = name;
      else if (c == -1.0)
        lhs = "-" + name;
      else
        lhs = format_number(c) + "*" + name;
    } else {
      lhs += c < 0 ? " - " : " + ";
      const double a = std::abs(c);
      lhs += a == 1.0 ? name : format_number(a) + "*" + name;
    }
  }
  if (lhs.empty()) lhs = "0*" + component_name(schema, 0);
  return lhs + (p.relation == Relation::LessThan ? " < " : " > ") + format_number(p.offset);
}

// Precedence: Or 1, And 2, unary (!, F, G) 3, atom 4.
inline int precedence(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Or:
      return 1;
    case Formula::Kind::And:
      return 2;
    case Formula::Kind::Pred:
      return 4;
    default:
      return 3;
  }
}

inline std::string print(const Formula& f, const SignalSchema& schema);

inline std::string wrap(const Formula& f, const SignalSchema& schema, int min_prec) {
  std::string s = print(f, schema);
  return precedence(f) < min_prec ? "(" + s + ")" : s;
}

inline std::string print(const Formula& f, const SignalSchema& schema) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return print_predicate(f.predicate(), schema);
    case K::Not:
      // Parenthesize so `!` never binds into a predicate's arithmetic.
      return "!(" + print(f.child(), schema) + ")";
    case K::And:
      // Left-associative: the right operand needs strictly higher precedence.
      return wrap(f.left(), schema, 2) + " & " + wrap(f.right(), schema, 3);
    case K::Or:
      return wrap(f.left(), schema, 1) + " | " + wrap(f.right(), schema, 2);
    case K::Finally:
    case K::Globally: {
      const char op = f.kind() == K::Finally ? 'F' : 'G';
      return std::string(1, op) + "[" + std::to_string(f.interval().lower) + "," +
             std::to_string(f.interval().upper) + "] (" + print(f.child(), schema) + ")";
    }
  }
  return {};
}

inline std::string describe(const Formula& f, const SignalSchema& schema) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return "Pred(" + print_predicate(f.predicate(), schema) + ")";
    case K::Not:
      return "Not(" + describe(f.child(), schema) + ")";
    case K::And:
      return "And(" + describe(f.left(), schema) + ", " + describe(f.right(), schema) + ")";
    case K::Or:
      return "Or(" + describe(f.left(), schema) + ", " + describe(f.right(), schema) + ")";
    case K::Finally:
    case K::Globally:
      return std::string(f.kind() == K::Finally ? "Finally" : "Globally") + "([" +
             std::to_string(f.interval().lower) + "," + std::to_string(f.interval().upper) +
             "], " + describe(f.child(), schema) + ")";
  }
  return {};
}

}  // namespace detail

/// Concrete syntax accepted by parse_formula.
inline std::string to_string(const Formula& f, const SignalSchema& schema = SignalSchema::planar()) {
  return detail::print(f, schema);
}

/// Constructor-style dump, e.g. `Finally([0,7], And(Pred(x > 4), Pred(y > 4)))`.
inline std::string describe(const Formula& f, const SignalSchema& schema = SignalSchema::planar()) {
  return detail::describe(f, schema);
}

}  // namespace stlq
