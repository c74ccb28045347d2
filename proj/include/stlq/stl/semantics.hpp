#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/stl/formula.hpp"

namespace stlq {

/// Sampled signal: `size()` samples of `dimension()` reals, one per tick.
class Signal {
 public:
  Signal(std::size_t dimension, std::vector<double> flat, double tick = 1.0)
      : dimension_(dimension), data_(std::move(flat)), tick_(tick) {
    if (dimension_ == 0) throw ValidationError("signal dimension must be positive");
    if (data_.empty()) throw ValidationError("signal must have at least one sample");
    if (data_.size() % dimension_ != 0)
      throw ValidationError("signal data is not a whole number of samples");
    if (!(tick_ > 0.0)) throw ValidationError("signal tick duration must be positive");
  }

  static Signal from_samples(const std::vector<std::vector<double>>& samples,
                             double tick = 1.0) {
    if (samples.empty()) throw ValidationError("signal must have at least one sample");
    const std::size_t dim = samples.front().size();
    std::vector<double> flat;
    flat.reserve(dim * samples.size());
    for (const auto& s : samples) {
      if (s.size() != dim) throw ValidationError("signal samples differ in dimension");
      flat.insert(flat.end(), s.begin(), s.end());
    }
    return Signal(dim, std::move(flat), tick);
  }

  /// One-dimensional signal.
  static Signal scalar(std::vector<double> values, double tick = 1.0) {
    return Signal(1, std::move(values), tick);
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return data_.size() / dimension_; }
  double tick() const noexcept { return tick_; }

  std::span<const double> at(std::size_t t) const {
    if (t >= size()) throw InsufficientSamples("tick " + std::to_string(t) + " out of range");
    return {data_.data() + t * dimension_, dimension_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t dimension_;
  std::vector<double> data_;
  double tick_;
};

/// Number of future ticks a formula needs beyond its evaluation tick.
inline int horizon(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return 0;
    case K::Not:
      return horizon(f.child());
    case K::And:
    case K::Or:
      return std::max(horizon(f.left()), horizon(f.right()));
    case K::Finally:
    case K::Globally:
      return f.interval().upper + horizon(f.child());
  }
  return 0;
}

namespace detail {

inline void require_samples(const Signal& s, const Formula& f, std::size_t t) {
  const auto needed = t + static_cast<std::size_t>(horizon(f));
  if (needed >= s.size())
    throw InsufficientSamples("evaluation at tick " + std::to_string(t) + " needs " +
                              std::to_string(needed + 1) + " samples, signal has " +
                              std::to_string(s.size()));
}

inline bool satisfies(const Signal& s, const Formula& f, std::size_t t) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return f.predicate().holds(s.at(t));
    case K::Not:
      return !satisfies(s, f.child(), t);
    case K::And:
      return satisfies(s, f.left(), t) && satisfies(s, f.right(), t);
    case K::Or:
      return satisfies(s, f.left(), t) || satisfies(s, f.right(), t);
    case K::Finally:
      for (int k = f.interval().lower; k <= f.interval().upper; ++k)
        if (satisfies(s, f.child(), t + k)) return true;
      return false;
    case K::Globally:
      for (int k = f.interval().lower; k <= f.interval().upper; ++k)
        if (!satisfies(s, f.child(), t + k)) return false;
      return true;
  }
  return false;
}

inline double robustness(const Signal& s, const Formula& f, std::size_t t) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred:
      return f.predicate().margin(s.at(t));
    case K::Not:
      return -robustness(s, f.child(), t);
    case K::And:
      return std::min(robustness(s, f.left(), t), robustness(s, f.right(), t));
    case K::Or:
      return std::max(robustness(s, f.left(), t), robustness(s, f.right(), t));
    case K::Finally: {
      double r = -std::numeric_limits<double>::infinity();
      for (int k = f.interval().lower; k <= f.interval().upper; ++k)
        r = std::max(r, robustness(s, f.child(), t + k));
      return r;
    }
    case K::Globally: {
      double r = std::numeric_limits<double>::infinity();
      for (int k = f.interval().lower; k <= f.interval().upper; ++k)
        r = std::min(r, robustness(s, f.child(), t + k));
      return r;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Boolean satisfaction (s, t) |= f. Predicates are strict inequalities.
inline bool eval_boolean(const Signal& s, const Formula& f, std::size_t t = 0) {
  detail::require_samples(s, f, t);
  return detail::satisfies(s, f, t);
}

/// Robustness degree r(s, f, t).
inline double robustness(const Signal& s, const Formula& f, std::size_t t = 0) {
  detail::require_samples(s, f, t);
  return detail::robustness(s, f, t);
}

/// Upper bound on |robustness| of `f` over any signal whose samples are
/// drawn from `points` (robustness is always one of the predicate margins).
inline double max_abs_robustness(const Formula& f, const std::vector<std::vector<double>>& points) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Pred: {
      double m = 0.0;
      for (const auto& p : points) m = std::max(m, std::abs(f.predicate().margin(p)));
      return m;
    }
    case K::Not:
    case K::Finally:
    case K::Globally:
      return max_abs_robustness(f.child(), points);
    case K::And:
    case K::Or:
      return std::max(max_abs_robustness(f.left(), points), max_abs_robustness(f.right(), points));
  }
  return 0.0;
}

/// Outer temporal operator of a formula in synthesis form.
enum class Outer { Finally, Globally };

inline const char* to_string(Outer o) { return o == Outer::Finally ? "Finally" : "Globally"; }

/// `Phi = F[0,b] phi` or `G[0,b] phi` split into the pieces the learner needs.
struct SynthesisForm {
  Formula formula;  ///< the whole specification Phi
  Outer outer;
  Formula inner;    ///< phi
  int horizon;      ///< T = hrz(Phi)
  int tau;          ///< window length hrz(phi) + 1

  /// Number of complete windows in a T+1 sample trajectory.
  int window_count() const { return horizon - tau + 2; }
};

/// Fails with ValidationError unless the top level is F[0,b] or G[0,b].
inline SynthesisForm synthesis_form(const Formula& f) {
  if (!f.is_temporal())
    throw ValidationError(
        "synthesis needs a formula of the form F[0,b] phi or G[0,b] phi; top level is not temporal");
  if (f.interval().lower != 0)
    throw ValidationError("synthesis needs the outer interval to start at 0, found [" +
                          std::to_string(f.interval().lower) + "," +
                          std::to_string(f.interval().upper) + "]");
  const int inner_horizon = horizon(f.child());
  return SynthesisForm{f, f.kind() == Formula::Kind::Finally ? Outer::Finally : Outer::Globally,
                       f.child(), horizon(f), inner_horizon + 1};
}

}  // namespace stlq
