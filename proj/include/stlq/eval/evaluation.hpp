#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "stlq/bounds/log_sum_exp.hpp"
#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/learn/q_learning.hpp"
#include "stlq/random.hpp"
#include "stlq/stl/semantics.hpp"
#include "stlq/tau/tau_state.hpp"

namespace stlq {

struct Rollout {
  std::vector<EnvState> trajectory;  ///< T + 1 states, starting with the history
  std::size_t uncovered = 0;         ///< decisions taken in tau-states the policy never saw
};

/// Follows `policy` from `history` until tick T.
inline Rollout rollout(const Policy& policy, const GridWorld& world, const SynthesisForm& form,
                       const std::vector<EnvState>& history, Rng& rng) {
  detail::check_history(history, form, world.grid());
  if (policy.tau() != form.tau)
    throw ValidationError("policy was learned for tau = " + std::to_string(policy.tau()) +
                          ", formula needs tau = " + std::to_string(form.tau));
  if (policy.cell_count() != world.grid().cell_count())
    throw ValidationError("policy was learned on a grid with a different number of cells");
  Rollout out;
  out.trajectory = history;
  out.trajectory.reserve(static_cast<std::size_t>(form.horizon) + 1);
  TauState window = initial_tau_state(history, form.tau);
  for (int t = static_cast<int>(history.size()) - 1; t < form.horizon; ++t) {
    auto a = policy.find(window);
    if (!a) ++out.uncovered;
    const EnvState next = world.step(window.newest(), a.value_or(kMotions.front()), rng);
    out.trajectory.push_back(next);
    window = advance(window, next);
  }
  return out;
}

struct RolloutBatch {
  std::vector<std::vector<EnvState>> trajectories;
  std::vector<int> satisfied;
  std::vector<double> robustness;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  double pr_sat = 0.0;
  double pr_sat_se = 0.0;
  double e_rob = 0.0;
  double e_rob_se = 0.0;
  std::size_t n = 0;
  std::size_t satisfied = 0;
  std::size_t uncovered_states = 0;
};

struct EvaluationResult {
  MetricsReport metrics;
  RolloutBatch batch;
};

namespace detail {

inline double standard_error(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace detail

/// Monte Carlo estimate of the satisfaction probability and expected
/// robustness of `policy`. Rollout i draws from its own stream derived from
/// (seed, i), so the report does not depend on `threads`.
inline EvaluationResult evaluate(const Policy& policy, const GridWorld& world,
                                 const SynthesisForm& form, const std::vector<EnvState>& history,
                                 std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  if (n == 0) throw ValidationError("evaluation needs at least one rollout");
  detail::check_history(history, form, world.grid());
  std::vector<Rollout> rollouts(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, Stream::Evaluation, i));
      rollouts[i] = rollout(policy, world, form, history, rng);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(work, b, std::min(n, b + chunk));
    for (auto& t : pool) t.join();
  }

  EvaluationResult res;
  res.batch.seed = seed;
  std::vector<double> sat(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto obj = exact_objective(rollouts[i].trajectory, form, world.grid());
    res.batch.satisfied.push_back(obj.satisfied);
    res.batch.robustness.push_back(obj.robustness);
    sat[i] = obj.satisfied;
    res.metrics.satisfied += static_cast<std::size_t>(obj.satisfied);
    res.metrics.uncovered_states += rollouts[i].uncovered;
    res.batch.trajectories.push_back(std::move(rollouts[i].trajectory));
  }
  auto& m = res.metrics;
  m.n = n;
  m.pr_sat = static_cast<double>(m.satisfied) / static_cast<double>(n);
  m.pr_sat_se = detail::standard_error(sat, m.pr_sat);
  double total = 0.0;
  for (double r : res.batch.robustness) total += r;
  m.e_rob = total / static_cast<double>(n);
  m.e_rob_se = detail::standard_error(res.batch.robustness, m.e_rob);
  return res;
}

}  // namespace stlq
