#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/learn/reward.hpp"
#include "stlq/random.hpp"
#include "stlq/stl/semantics.hpp"
#include "stlq/tau/tau_state.hpp"

namespace stlq {

/// Learning rate alpha_k. `k` starts at 1 and counts episodes, updates, or
/// visits of the updated (state, action) pair depending on `mode`.
struct LearningRateSchedule {
  enum class Kind { Geometric, Harmonic, Constant };
  enum class Mode { PerEpisode, PerUpdate, PerVisit };

  Kind kind = Kind::Geometric;
  Mode mode = Mode::PerEpisode;
  double base = 0.95;   // Geometric: base^k
  double value = 0.1;   // Constant

  double at(std::uint64_t k) const {
    switch (kind) {
      case Kind::Geometric:
        return std::pow(base, static_cast<double>(k));
      case Kind::Harmonic:
        return 1.0 / static_cast<double>(k);
      case Kind::Constant:
        return value;
    }
    return value;
  }

  void validate() const {
    if (kind == Kind::Geometric && !(base > 0.0 && base <= 1.0))
      throw ValidationError("learning rate base must be in (0,1]");
    if (kind == Kind::Constant && !(value > 0.0 && value <= 1.0))
      throw ValidationError("constant learning rate must be in (0,1]");
  }
};

/// Exploration rate epsilon_k for episode k (k starts at 1).
struct ExplorationSchedule {
  enum class Kind { GeometricFloor, Constant };

  Kind kind = Kind::GeometricFloor;
  double base = 0.998;
  double floor = 0.05;
  double value = 0.1;

  double at(std::uint64_t k) const {
    if (kind == Kind::Constant) return value;
    return std::max(floor, std::pow(base, static_cast<double>(k)));
  }

  void validate() const {
    if (kind == Kind::Constant && !(value >= 0.0 && value <= 1.0))
      throw ValidationError("constant exploration rate must be in [0,1]");
    if (kind == Kind::GeometricFloor &&
        !(base > 0.0 && base <= 1.0 && floor >= 0.0 && floor <= 1.0))
      throw ValidationError("exploration base must be in (0,1] and floor in [0,1]");
  }
};

struct Hyperparameters {
  int episodes = 1700;
  double gamma = 0.9999;
  LearningRateSchedule alpha;
  ExplorationSchedule epsilon;
  std::uint64_t seed = 1;

  void validate() const {
    if (episodes < 0) throw ValidationError("episodes must be non-negative");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must be in (0,1)");
    alpha.validate();
    epsilon.validate();
  }
};

using QRow = std::array<double, kMotionCount>;

/// Q-values over tau-states indexed lazily in order of first visit.
class QTable {
 public:
  QTable(int tau, int cell_count, double default_value = 0.0)
      : index_(tau, cell_count), default_value_(default_value) {
    if (!std::isfinite(default_value)) throw ValidationError("Q default must be finite");
  }

  std::size_t intern(const TauState& s) {
    const std::size_t id = index_.intern(s);
    if (id == rows_.size()) {
      QRow row;
      row.fill(default_value_);
      rows_.push_back(row);
    }
    return id;
  }
  std::optional<std::size_t> find(const TauState& s) const { return index_.find(s); }

  std::size_t size() const noexcept { return rows_.size(); }
  const TauStateIndexer& index() const noexcept { return index_; }
  double default_value() const noexcept { return default_value_; }

  const QRow& row(std::size_t id) const { return rows_.at(id); }
  double value(std::size_t id, Motion a) const { return rows_.at(id)[static_cast<std::size_t>(a)]; }
  void set(std::size_t id, Motion a, double v) {
    if (!std::isfinite(v)) throw NumericError("non-finite Q-value");
    rows_.at(id)[static_cast<std::size_t>(a)] = v;
  }
  double max_value(std::size_t id) const {
    const auto& r = rows_.at(id);
    return *std::max_element(r.begin(), r.end());
  }

 private:
  TauStateIndexer index_;
  double default_value_;
  std::vector<QRow> rows_;
};

/// First maximizer in enumeration order.
inline Motion argmax(const QRow& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return kMotions[best];
}

/// Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
inline void q_update(QTable& q, std::size_t s, Motion a, double r, std::size_t next, double alpha,
                     double gamma) {
  if (!std::isfinite(r)) throw NumericError("non-finite reward in Q-update");
  if (!std::isfinite(alpha) || !std::isfinite(gamma))
    throw ValidationError("non-finite Q-update argument");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("learning rate must be in [0,1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must be in (0,1)");
  const double target = r + gamma * q.max_value(next);
  q.set(s, a, (1.0 - alpha) * q.value(s, a) + alpha * target);
}

/// Epsilon-greedy: uniform primitive with probability epsilon, otherwise the
/// greedy one.
inline Motion select_action(const QTable& q, std::size_t s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must be in [0,1]");
  if (rng.uniform() < epsilon) return kMotions[rng.below(kMotionCount)];
  return argmax(q.row(s));
}

/// Deterministic map from tau-states to primitives. Unknown tau-states get
/// the tie-break default (the first primitive).
class Policy {
 public:
  Policy(int tau, int cell_count) : index_(tau, cell_count) {}

  void assign(const TauState& s, Motion a) {
    const std::size_t id = index_.intern(s);
    if (id == actions_.size())
      actions_.push_back(a);
    else
      actions_[id] = a;
  }

  std::optional<Motion> find(const TauState& s) const {
    auto id = index_.find(s);
    if (!id) return std::nullopt;
    return actions_[*id];
  }

  Motion action(const TauState& s) const { return find(s).value_or(kMotions.front()); }

  int tau() const noexcept { return index_.tau(); }
  int cell_count() const noexcept { return index_.cell_count(); }
  std::size_t size() const noexcept { return actions_.size(); }
  TauState state(std::size_t id) const { return index_.state(id); }
  Motion action_at(std::size_t id) const { return actions_.at(id); }

 private:
  TauStateIndexer index_;
  std::vector<Motion> actions_;
};

inline Policy greedy_policy(const QTable& q) {
  Policy p(q.index().tau(), q.index().cell_count());
  for (std::size_t id = 0; id < q.size(); ++id) p.assign(q.index().state(id), argmax(q.row(id)));
  return p;
}

struct EpisodeRecord {
  int episode = 0;
  double episode_return = 0.0;
  /// Robustness of the last window; NaN if no window was completed.
  double final_window_robustness = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  double alpha = 0.0;
};

/// One learning step, reported to TrainOptions::observer.
struct Transition {
  int episode;
  int tick;  ///< time of the successor state
  const TauState& from;
  Motion action;
  const TauState& to;
  std::optional<double> window_robustness;  ///< set when `to` is complete
  double reward;
};

struct TrainOptions {
  /// Multiplies every reward. Powers of two keep the run bit-comparable.
  double reward_scale = 1.0;
  std::function<void(const Transition&)> observer;
};

struct TrainResult {
  QTable q;
  Policy policy;
  std::vector<EpisodeRecord> log;
};

/// Grid centroids, for overflow checks.
inline std::vector<std::vector<double>> centroid_points(const GridSpec& grid) {
  std::vector<std::vector<double>> pts;
  for (int c = 0; c < grid.cell_count(); ++c) {
    auto p = grid.centroid({c});
    pts.push_back({p[0], p[1]});
  }
  return pts;
}

namespace detail {

inline void check_history(const std::vector<EnvState>& history, const SynthesisForm& form,
                          const GridSpec& grid) {
  if (history.empty()) throw ValidationError("initial history is empty");
  if (history.size() > static_cast<std::size_t>(form.tau))
    throw ValidationError("initial history of length " + std::to_string(history.size()) +
                          " exceeds tau = " + std::to_string(form.tau));
  if (form.horizon < form.tau - 1) throw ValidationError("horizon T is shorter than tau - 1");
  for (EnvState s : history)
    if (!grid.valid(s)) throw ValidationError("initial history cell outside the grid");
}

}  // namespace detail

/// Tabular Q-learning over the tau-MDP. Each episode restarts from
/// `history` (oldest first) and runs until tick T; the reward of a transition
/// is the one obtained at the successor window, zero while it is padded.
/// Episode returns are sum_t gamma^(t - tau + 1) R_t over complete windows,
/// the initial one included.
inline TrainResult train(const GridWorld& world, const SynthesisForm& form, const RewardSpec& spec,
                         const Hyperparameters& hp, const std::vector<EnvState>& history,
                         const TrainOptions& options = {}) {
  hp.validate();
  const GridSpec& grid = world.grid();
  detail::check_history(history, form, grid);
  if (spec.outer != form.outer)
    throw ValidationError("reward outer operator does not match the formula");
  spec.validate(max_abs_robustness(form.inner, centroid_points(grid)));
  if (!(options.reward_scale > 0.0)) throw ValidationError("reward scale must be positive");

  QTable q(form.tau, grid.cell_count());
  std::vector<std::array<std::uint64_t, kMotionCount>> visits;
  Rng agent(derive_seed(hp.seed, Stream::TrainAgent));
  Rng env(derive_seed(hp.seed, Stream::TrainEnvironment));
  std::vector<EpisodeRecord> log;
  log.reserve(static_cast<std::size_t>(hp.episodes));
  std::uint64_t updates = 0;

  const int first_tick = static_cast<int>(history.size()) - 1;
  const int first_window_tick = form.tau - 1;

  for (int k = 1; k <= hp.episodes; ++k) {
    EpisodeRecord rec;
    rec.episode = k;
    rec.epsilon = hp.epsilon.at(static_cast<std::uint64_t>(k));
    const double episode_alpha = hp.alpha.at(static_cast<std::uint64_t>(k));
    rec.alpha = episode_alpha;

    TauState current = initial_tau_state(history, form.tau);
    std::size_t current_id = q.intern(current);
    double discount = 1.0;
    if (current.complete()) {
      const double r = window_robustness(current, form.inner, grid);
      rec.episode_return += immediate_reward(r, spec) * options.reward_scale;
      rec.final_window_robustness = r;
    }

    for (int t = first_tick; t < form.horizon; ++t) {
      const Motion a = select_action(q, current_id, rec.epsilon, agent);
      const EnvState next_state = world.step(current.newest(), a, env);
      TauState next = advance(current, next_state);
      const std::size_t next_id = q.intern(next);
      if (visits.size() < q.size()) visits.resize(q.size(), {});

      std::optional<double> rob;
      double reward = 0.0;
      if (next.complete()) {
        rob = window_robustness(next, form.inner, grid);
        reward = immediate_reward(*rob, spec) * options.reward_scale;
        if (t + 1 > first_window_tick) discount *= hp.gamma;
        rec.episode_return += discount * reward;
        rec.final_window_robustness = *rob;
      }

      ++updates;
      auto& n = visits[current_id][static_cast<std::size_t>(a)];
      ++n;
      double alpha = episode_alpha;
      if (hp.alpha.mode == LearningRateSchedule::Mode::PerUpdate) alpha = hp.alpha.at(updates);
      if (hp.alpha.mode == LearningRateSchedule::Mode::PerVisit) alpha = hp.alpha.at(n);
      q_update(q, current_id, a, reward, next_id, alpha, hp.gamma);

      if (options.observer) options.observer({k, t + 1, current, a, next, rob, reward});
      current = std::move(next);
      current_id = next_id;
    }
    log.push_back(rec);
  }

  Policy policy = greedy_policy(q);
  return {std::move(q), std::move(policy), std::move(log)};
}

}  // namespace stlq
