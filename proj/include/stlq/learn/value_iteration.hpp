#pragma once

// Exact solvers over an explicitly known model. The learner never sees these;
// they exist to check what Q-learning converges to.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/learn/q_learning.hpp"
#include "stlq/learn/reward.hpp"
#include "stlq/tau/tau_state.hpp"

namespace stlq {

struct ModelTransition {
  std::size_t target;
  double probability;
};

/// Finite MDP whose reward is collected on arrival in a state.
struct ExplicitMdp {
  std::size_t action_count = kMotionCount;
  /// transitions[s][a]: successor distribution.
  std::vector<std::vector<std::vector<ModelTransition>>> transitions;
  std::vector<double> arrival_reward;

  std::size_t state_count() const noexcept { return transitions.size(); }

  void validate() const {
    if (arrival_reward.size() != transitions.size())
      throw ValidationError("arrival rewards do not match the state count");
    for (const auto& row : transitions) {
      if (row.size() != action_count) throw ValidationError("wrong number of actions");
      for (const auto& dist : row) {
        double total = 0.0;
        for (const auto& t : dist) {
          if (t.target >= transitions.size()) throw ValidationError("transition target out of range");
          total += t.probability;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("transition row does not sum to 1");
      }
    }
  }
};

using QValues = std::vector<std::vector<double>>;

struct OracleLimits {
  std::size_t max_states = 5000;
};

/// `horizon` Bellman backups from Q = 0:
/// Q(s,a) <- sum_s' P(s'|s,a) (R(s') + gamma max_a' Q(s',a')).
/// With gamma^horizon negligible this is the discounted fixed point.
inline QValues value_iteration_oracle(const ExplicitMdp& mdp, double gamma, int horizon,
                                      OracleLimits limits = {}) {
  if (mdp.state_count() > limits.max_states)
    throw ValidationError("model has " + std::to_string(mdp.state_count()) +
                          " states, oracle cap is " + std::to_string(limits.max_states));
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in (0,1]");
  if (horizon < 0) throw ValidationError("horizon must be non-negative");
  mdp.validate();
  const std::size_t n = mdp.state_count();
  QValues q(n, std::vector<double>(mdp.action_count, 0.0));
  std::vector<double> v(n, 0.0);
  for (int h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < mdp.action_count; ++a) {
        double acc = 0.0;
        for (const auto& t : mdp.transitions[s][a])
          acc += t.probability * (mdp.arrival_reward[t.target] + gamma * v[t.target]);
        q[s][a] = acc;
      }
    for (std::size_t s = 0; s < n; ++s) v[s] = *std::max_element(q[s].begin(), q[s].end());
  }
  return q;
}

/// Q-values of a fixed stochastic policy, `policy[s][a]` = probability of a.
inline QValues policy_evaluation(const ExplicitMdp& mdp,
                                 const std::vector<std::vector<double>>& policy, double gamma,
                                 int horizon) {
  mdp.validate();
  if (policy.size() != mdp.state_count()) throw ValidationError("policy size mismatch");
  const std::size_t n = mdp.state_count();
  QValues q(n, std::vector<double>(mdp.action_count, 0.0));
  std::vector<double> v(n, 0.0);
  for (int h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < mdp.action_count; ++a) {
        double acc = 0.0;
        for (const auto& t : mdp.transitions[s][a])
          acc += t.probability * (mdp.arrival_reward[t.target] + gamma * v[t.target]);
        q[s][a] = acc;
      }
    for (std::size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (std::size_t a = 0; a < mdp.action_count; ++a) acc += policy[s][a] * q[s][a];
      v[s] = acc;
    }
  }
  return q;
}

struct ExplicitTauMdp {
  ExplicitMdp mdp;
  TauStateIndexer index;
};

/// The tau-MDP reachable from `history`, with the arrival reward of each
/// complete window given by `spec` (padded windows pay nothing).
inline ExplicitTauMdp build_tau_mdp(const GridWorld& world, const SynthesisForm& form,
                                    const RewardSpec& spec, const std::vector<EnvState>& history,
                                    OracleLimits limits = {}) {
  const GridSpec& grid = world.grid();
  ExplicitTauMdp out{{}, TauStateIndexer(form.tau, grid.cell_count())};
  std::deque<std::size_t> frontier;
  auto intern = [&](const TauState& s) {
    const std::size_t before = out.index.size();
    const std::size_t id = out.index.intern(s);
    if (out.index.size() > before) {
      if (out.index.size() > limits.max_states)
        throw ValidationError("tau-MDP exceeds the oracle cap of " +
                              std::to_string(limits.max_states) + " states");
      out.mdp.transitions.emplace_back(kMotionCount);
      out.mdp.arrival_reward.push_back(
          s.complete() ? immediate_reward(window_robustness(s, form.inner, grid), spec) : 0.0);
      frontier.push_back(id);
    }
    return id;
  };
  intern(initial_tau_state(history, form.tau));
  while (!frontier.empty()) {
    const std::size_t id = frontier.front();
    frontier.pop_front();
    const TauState s = out.index.state(id);
    for (std::size_t a = 0; a < kMotionCount; ++a) {
      std::vector<ModelTransition> dist;
      for (const auto& o : world.transition_distribution(s.newest(), kMotions[a]))
        dist.push_back({intern(advance(s, o.state)), o.probability});
      out.mdp.transitions[id][a] = std::move(dist);
    }
  }
  return out;
}

}  // namespace stlq
