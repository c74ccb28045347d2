#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "stlq/error.hpp"
#include "stlq/stl/semantics.hpp"

namespace stlq {

/// Largest exponent accepted before e^x is considered an overflow risk.
inline constexpr double kExponentLimit = 700.0;

/// Surrogate objective: maximize the probability of satisfaction ("1A") or
/// the expected robustness ("2A").
enum class Problem { SatisfactionProbability, ExpectedRobustness };

inline std::string_view to_string(Problem p) {
  return p == Problem::SatisfactionProbability ? "1A" : "2A";
}

inline std::optional<Problem> problem_from_string(std::string_view s) {
  if (s == "1A") return Problem::SatisfactionProbability;
  if (s == "2A") return Problem::ExpectedRobustness;
  return std::nullopt;
}

/// I(x): 1 for x >= 0, 0 otherwise. Robustness 0 counts as satisfied.
inline int indicator(double x) {
  if (!std::isfinite(x)) throw ValidationError("indicator of a non-finite value");
  return x >= 0.0 ? 1 : 0;
}

struct RewardSpec {
  Problem problem = Problem::ExpectedRobustness;
  Outer outer = Outer::Finally;
  double beta = 50.0;

  /// Exponent argument used for a window robustness `r`.
  double exponent_argument(double r) const {
    return problem == Problem::SatisfactionProbability ? static_cast<double>(indicator(r)) : r;
  }

  /// Checks beta and the overflow guard for robustness magnitudes up to
  /// `max_abs_robustness`.
  void validate(double max_abs_robustness) const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
    const double worst =
        problem == Problem::SatisfactionProbability ? beta : beta * max_abs_robustness;
    if (worst > kExponentLimit)
      throw NumericError("beta * max |robustness| = " + format_number(worst) +
                         " exceeds the exponent limit " + format_number(kExponentLimit));
  }
};

/// Reward collected on arrival in a completed window with robustness `r`:
/// e^{b I(r)}, -e^{-b I(r)}, e^{b r}, -e^{-b r} for 1A/F, 1A/G, 2A/F, 2A/G.
inline double immediate_reward(double r, const RewardSpec& spec) {
  if (!std::isfinite(r)) throw ValidationError("window robustness is not finite");
  const double x = spec.beta * spec.exponent_argument(r);
  if (std::abs(x) > kExponentLimit)
    throw NumericError("reward exponent " + format_number(x) + " exceeds the limit " +
                       format_number(kExponentLimit));
  return spec.outer == Outer::Finally ? std::exp(x) : -std::exp(-x);
}

}  // namespace stlq
