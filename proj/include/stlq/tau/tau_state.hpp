#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/stl/semantics.hpp"

namespace stlq {

/// The last tau environment states, oldest first. Histories shorter than tau
/// are left-padded with kEmpty.
class TauState {
 public:
  static constexpr int kEmpty = -1;

  explicit TauState(std::vector<int> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw ValidationError("tau-state length must be at least 1");
    bool seen_cell = false;
    for (int c : cells_) {
      if (c == kEmpty) {
        if (seen_cell) throw ValidationError("tau-state padding must form a prefix");
      } else if (c < 0) {
        throw ValidationError("negative cell index in tau-state");
      } else {
        seen_cell = true;
      }
    }
    if (!seen_cell) throw ValidationError("tau-state must hold at least one state");
  }

  int tau() const noexcept { return static_cast<int>(cells_.size()); }
  const std::vector<int>& cells() const noexcept { return cells_; }

  std::size_t padding() const noexcept {
    std::size_t n = 0;
    while (n < cells_.size() && cells_[n] == kEmpty) ++n;
    return n;
  }
  bool complete() const noexcept { return cells_.front() != kEmpty; }
  EnvState newest() const noexcept { return {cells_.back()}; }

  std::optional<EnvState> at(std::size_t i) const {
    const int c = cells_.at(i);
    if (c == kEmpty) return std::nullopt;
    return EnvState{c};
  }

  /// Non-padding entries, oldest first.
  std::vector<EnvState> states() const {
    std::vector<EnvState> out;
    for (std::size_t i = padding(); i < cells_.size(); ++i) out.push_back({cells_[i]});
    return out;
  }

  friend bool operator==(const TauState&, const TauState&) = default;

 private:
  std::vector<int> cells_;
};

inline TauState initial_tau_state(const std::vector<EnvState>& history, int tau) {
  if (tau < 1) throw ValidationError("tau must be at least 1");
  if (history.empty()) throw ValidationError("initial history is empty");
  if (history.size() > static_cast<std::size_t>(tau))
    throw ValidationError("initial history of length " + std::to_string(history.size()) +
                          " exceeds tau = " + std::to_string(tau));
  std::vector<int> cells(static_cast<std::size_t>(tau) - history.size(), TauState::kEmpty);
  for (EnvState s : history) {
    if (s.cell < 0) throw ValidationError("negative cell index in history");
    cells.push_back(s.cell);
  }
  return TauState(std::move(cells));
}

/// Drops the oldest entry and appends `next`.
inline TauState advance(const TauState& current, EnvState next) {
  if (next.cell < 0) throw ValidationError("negative cell index");
  std::vector<int> cells(current.cells().begin() + 1, current.cells().end());
  cells.push_back(next.cell);
  return TauState(std::move(cells));
}

/// Robustness of `inner` evaluated at the first tick of the window. Needs a
/// complete window whose length is hrz(inner) + 1.
inline double window_robustness(const TauState& window, const Formula& inner, const GridSpec& grid) {
  if (!window.complete())
    throw ValidationError("window robustness is undefined for a padded tau-state");
  if (horizon(inner) != window.tau() - 1)
    throw ValidationError("formula horizon " + std::to_string(horizon(inner)) +
                          " does not match tau-state length " + std::to_string(window.tau()));
  return robustness(centroid_signal(window.states(), grid), inner, 0);
}

/// Bijective code of a tau-state: base (cells + 1) digits, padding is digit 0.
inline std::uint64_t encode(const TauState& s, int cell_count) {
  std::uint64_t code = 0;
  const auto base = static_cast<std::uint64_t>(cell_count) + 1;
  for (int c : s.cells()) {
    if (c >= cell_count) throw ValidationError("cell index outside the grid");
    code = code * base + static_cast<std::uint64_t>(c + 1);
  }
  return code;
}

inline TauState decode(std::uint64_t code, int tau, int cell_count) {
  const auto base = static_cast<std::uint64_t>(cell_count) + 1;
  std::vector<int> cells(static_cast<std::size_t>(tau));
  for (int i = tau - 1; i >= 0; --i) {
    cells[static_cast<std::size_t>(i)] = static_cast<int>(code % base) - 1;
    code /= base;
  }
  if (code != 0) throw ValidationError("tau-state code out of range");
  return TauState(std::move(cells));
}

/// Dense ids for tau-states, assigned in order of first appearance.
class TauStateIndexer {
 public:
  TauStateIndexer(int tau, int cell_count) : tau_(tau), cell_count_(cell_count) {
    if (tau < 1) throw ValidationError("tau must be at least 1");
    if (cell_count < 1) throw ValidationError("cell count must be positive");
    // (cells + 1)^tau must fit the code.
    long double range = 1.0L;
    for (int i = 0; i < tau; ++i) range *= static_cast<long double>(cell_count) + 1.0L;
    if (range > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
      throw ValidationError("tau-state space too large to index");
  }

  int tau() const noexcept { return tau_; }
  int cell_count() const noexcept { return cell_count_; }
  std::size_t size() const noexcept { return codes_.size(); }

  std::size_t intern(const TauState& s) {
    check(s);
    const auto code = encode(s, cell_count_);
    auto [it, inserted] = ids_.try_emplace(code, codes_.size());
    if (inserted) codes_.push_back(code);
    return it->second;
  }

  std::optional<std::size_t> find(const TauState& s) const {
    check(s);
    auto it = ids_.find(encode(s, cell_count_));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  TauState state(std::size_t id) const { return decode(codes_.at(id), tau_, cell_count_); }

 private:
  void check(const TauState& s) const {
    if (s.tau() != tau_)
      throw ValidationError("tau-state of length " + std::to_string(s.tau()) +
                            " given to an index for tau = " + std::to_string(tau_));
  }

  int tau_;
  int cell_count_;
  std::unordered_map<std::uint64_t, std::size_t> ids_;
  std::vector<std::uint64_t> codes_;
};

struct ReachableTauStates {
  std::vector<TauState> states;  ///< every reachable tau-state, padded ones included
  std::size_t complete = 0;      ///< how many of them hold no padding
};

/// Breadth-first closure of `advance` over all positive-probability
/// successors of admissible primitives, starting from every single-cell
/// history.
inline ReachableTauStates enumerate_reachable(const GridWorld& world, int tau) {
  const int cells = world.grid().cell_count();
  TauStateIndexer index(tau, cells);
  std::deque<TauState> frontier;
  for (int c = 0; c < cells; ++c) {
    TauState s = initial_tau_state({EnvState{c}}, tau);
    const auto before = index.size();
    index.intern(s);
    if (index.size() > before) frontier.push_back(std::move(s));
  }
  while (!frontier.empty()) {
    const TauState s = std::move(frontier.front());
    frontier.pop_front();
    std::vector<int> successors;
    for (Motion m : kMotions) {
      for (const auto& o : world.transition_distribution(s.newest(), m))
        successors.push_back(o.state.cell);
    }
    std::sort(successors.begin(), successors.end());
    successors.erase(std::unique(successors.begin(), successors.end()), successors.end());
    for (int c : successors) {
      TauState next = advance(s, EnvState{c});
      const auto before = index.size();
      index.intern(next);
      if (index.size() > before) frontier.push_back(std::move(next));
    }
  }
  ReachableTauStates out;
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.states.push_back(index.state(i));
    if (out.states.back().complete()) ++out.complete;
  }
  return out;
}

}  // namespace stlq
