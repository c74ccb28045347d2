#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/learn/reward.hpp"
#include "stlq/stl/semantics.hpp"

namespace stlq {

namespace detail {

inline void check_lse(std::span<const double> values, double beta) {
  if (values.empty()) throw ValidationError("log-sum-exp of an empty sequence");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("log-sum-exp of a non-finite value");
    if (beta * std::abs(v) > kExponentLimit)
      throw NumericError("beta * |value| exceeds the exponent limit");
  }
}

}  // namespace detail

/// (1/beta) log sum_i e^{beta x_i}, evaluated around the maximum so no term
/// overflows. Lies in [max, max + log(n)/beta].
inline double smooth_max(std::span<const double> values, double beta) {
  detail::check_lse(values, beta);
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(beta * (v - m));
  return m + std::log(sum) / beta;
}

/// -(1/beta) log sum_i e^{-beta x_i} = -smooth_max(-x).
inline double smooth_min(std::span<const double> values, double beta) {
  detail::check_lse(values, beta);
  const double m = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-beta * (v - m));
  return m - std::log(sum) / beta;
}

/// sum_i gamma^i R(r_i) over the window robustness sequence r_0..r_{n-1};
/// with gamma = 1 this is one sample of the undiscounted surrogate objective.
inline double surrogate_return(std::span<const double> window_robustness, const RewardSpec& spec,
                               double gamma = 1.0) {
  if (window_robustness.empty()) throw ValidationError("no windows");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in (0,1]");
  double total = 0.0;
  double discount = 1.0;
  for (double r : window_robustness) {
    total += discount * immediate_reward(r, spec);
    discount *= gamma;
  }
  return total;
}

/// How far the surrogate-optimal policy may fall short of the true optimum.
struct GapReport {
  double beta = 0.0;
  int horizon = 0;  ///< T
  int tau = 1;
  double gamma = 1.0;
  long long windows = 0;  ///< n, T - tau + 2 unless overridden
  double gap = 0.0;       ///< log(n) / beta
  double upper_deviation = 0.0;  ///< log(n) / beta
  double lower_deviation = 0.0;  ///< -n log(gamma) / beta, zero when undiscounted
  double discounted_gap = 0.0;   ///< max of the two deviations
};

inline GapReport approximation_gap(double beta, int horizon, int tau,
                                   std::optional<double> gamma = std::nullopt,
                                   std::optional<long long> windows = std::nullopt) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (tau < 1) throw ValidationError("tau must be at least 1");
  if (horizon < tau - 1) throw ValidationError("T must be at least tau - 1");
  const double g = gamma.value_or(1.0);
  if (!(g > 0.0 && g <= 1.0)) throw ValidationError("gamma must be in (0,1]");
  GapReport rep;
  rep.beta = beta;
  rep.horizon = horizon;
  rep.tau = tau;
  rep.gamma = g;
  rep.windows = windows.value_or(static_cast<long long>(horizon) - tau + 2);
  if (rep.windows < 1) throw ValidationError("window count must be positive");
  const double n = static_cast<double>(rep.windows);
  rep.gap = std::log(n) / beta;
  rep.upper_deviation = rep.gap;
  rep.lower_deviation = g < 1.0 ? -n * std::log(g) / beta : 0.0;
  rep.discounted_gap = std::max(rep.upper_deviation, rep.lower_deviation);
  return rep;
}

struct ExactObjective {
  int satisfied;  ///< I(robustness)
  double robustness;
};

/// Ground-truth satisfaction and robustness of a T+1 state trajectory.
inline ExactObjective exact_objective(const std::vector<EnvState>& trajectory,
                                      const SynthesisForm& form, const GridSpec& grid) {
  if (trajectory.size() != static_cast<std::size_t>(form.horizon) + 1)
    throw ValidationError("trajectory has " + std::to_string(trajectory.size()) +
                          " states, expected T + 1 = " + std::to_string(form.horizon + 1));
  const double r = robustness(centroid_signal(trajectory, grid), form.formula, 0);
  return {indicator(r), r};
}

}  // namespace stlq
