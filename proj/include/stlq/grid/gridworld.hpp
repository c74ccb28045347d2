#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlq/error.hpp"
#include "stlq/random.hpp"
#include "stlq/stl/semantics.hpp"

namespace stlq {

/// Compass motion primitives. The first eight are ordered counter-clockwise
/// starting at north, so a 45 degree rotation is +-1 modulo 8. The
/// enumeration order is also the greedy tie-break order.
enum class Motion : std::uint8_t { N, NW, W, SW, S, SE, E, NE, Stay };

inline constexpr std::size_t kMotionCount = 9;

inline constexpr std::array<Motion, kMotionCount> kMotions = {
    Motion::N, Motion::NW, Motion::W, Motion::SW, Motion::S,
    Motion::SE, Motion::E, Motion::NE, Motion::Stay};

inline constexpr std::array<std::string_view, kMotionCount> kMotionNames = {
    "N", "NW", "W", "SW", "S", "SE", "E", "NE", "Stay"};

inline std::string_view to_string(Motion m) { return kMotionNames[static_cast<std::size_t>(m)]; }

inline std::optional<Motion> motion_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kMotionCount; ++i)
    if (kMotionNames[i] == name) return kMotions[i];
  return std::nullopt;
}

struct GridOffset {
  int dcol;
  int drow;
};

inline constexpr GridOffset offset(Motion m) {
  constexpr std::array<GridOffset, kMotionCount> table = {{
      {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 0}}};
  return table[static_cast<std::size_t>(m)];
}

/// Rotates a compass primitive by `steps` x 45 degrees counter-clockwise.
inline Motion rotate(Motion m, int steps) {
  if (m == Motion::Stay) return m;
  const int d = ((static_cast<int>(m) + steps) % 8 + 8) % 8;
  return static_cast<Motion>(d);
}

/// One cell of the partition; row-major from the bottom-left corner.
struct EnvState {
  int cell = 0;
  friend auto operator<=>(const EnvState&, const EnvState&) = default;
};

struct GridSpec {
  int columns = 1;
  int rows = 1;
  double cell_width = 1.0;
  double cell_height = 1.0;

  void validate() const {
    if (columns <= 0 || rows <= 0) throw ValidationError("grid dimensions must be positive");
    if (!(cell_width > 0.0) || !(cell_height > 0.0) || !std::isfinite(cell_width) ||
        !std::isfinite(cell_height))
      throw ValidationError("grid cell size must be positive and finite");
  }

  int cell_count() const noexcept { return columns * rows; }
  int column_of(EnvState s) const noexcept { return s.cell % columns; }
  int row_of(EnvState s) const noexcept { return s.cell / columns; }
  bool contains(int column, int row) const noexcept {
    return column >= 0 && column < columns && row >= 0 && row < rows;
  }
  bool valid(EnvState s) const noexcept { return s.cell >= 0 && s.cell < cell_count(); }

  EnvState at(int column, int row) const {
    if (!contains(column, row))
      throw ValidationError("cell (" + std::to_string(column) + "," + std::to_string(row) +
                            ") outside a " + std::to_string(columns) + "x" +
                            std::to_string(rows) + " grid");
    return {row * columns + column};
  }

  std::array<double, 2> centroid(EnvState s) const {
    return {(column_of(s) + 0.5) * cell_width, (row_of(s) + 0.5) * cell_height};
  }

  /// Target cell of `m`, if it stays on the grid.
  std::optional<EnvState> neighbor(EnvState s, Motion m) const {
    const auto o = offset(m);
    const int c = column_of(s) + o.dcol;
    const int r = row_of(s) + o.drow;
    if (!contains(c, r)) return std::nullopt;
    return EnvState{r * columns + c};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A perturbed outcome: the intended direction rotated by `rotation` x 45
/// degrees, or no motion at all when `stay` is set.
struct Perturbation {
  int rotation = 0;
  bool stay = false;
  double probability = 0.0;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

/// Motion noise: the intended move happens with `p_intended`, otherwise one
/// of the perturbations. Stay is exempt unless `perturb_stay` is set, in which
/// case rotations are taken relative to north.
struct UncertaintyModel {
  double p_intended = 0.93;
  std::vector<Perturbation> perturbations = {
      {1, false, 0.07 / 3}, {-1, false, 0.07 / 3}, {0, true, 0.07 / 3}};
  bool perturb_stay = false;

  static UncertaintyModel deterministic() { return {1.0, {}, false}; }

  void validate() const {
    double total = p_intended;
    if (!(p_intended >= 0.0 && p_intended <= 1.0))
      throw ValidationError("p_intended must be a probability");
    for (const auto& p : perturbations) {
      if (!(p.probability >= 0.0 && p.probability <= 1.0))
        throw ValidationError("perturbation probabilities must be in [0,1]");
      total += p.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("motion probabilities sum to " + format_number(total) +
                            ", expected 1");
  }

  friend bool operator==(const UncertaintyModel&, const UncertaintyModel&) = default;
};

/// Admissible primitives per cell; a missing mask admits everything.
using AdmissibleMask = std::vector<std::array<bool, kMotionCount>>;

struct Outcome {
  EnvState state;
  double probability;
};

/// Stochastic planar environment. Immutable once built; every call that
/// samples takes the caller's random source.
class GridWorld {
 public:
  GridWorld(GridSpec grid, UncertaintyModel model = {}, std::optional<AdmissibleMask> mask = {})
      : grid_(grid), model_(std::move(model)), mask_(std::move(mask)) {
    grid_.validate();
    model_.validate();
    if (mask_ && mask_->size() != static_cast<std::size_t>(grid_.cell_count()))
      throw ValidationError("admissible mask has " + std::to_string(mask_->size()) +
                            " entries for " + std::to_string(grid_.cell_count()) + " cells");
  }

  const GridSpec& grid() const noexcept { return grid_; }
  const UncertaintyModel& model() const noexcept { return model_; }
  const std::optional<AdmissibleMask>& mask() const noexcept { return mask_; }

  bool admissible(EnvState s, Motion m) const {
    return !mask_ || (*mask_)[static_cast<std::size_t>(s.cell)][static_cast<std::size_t>(m)];
  }

  /// Primitives whose intended cell is on the grid (and admitted by the mask).
  std::vector<Motion> feasible_actions(EnvState s) const {
    check(s);
    std::vector<Motion> out;
    for (Motion m : kMotions)
      if (admissible(s, m) && grid_.neighbor(s, m)) out.push_back(m);
    return out;
  }

  /// Exact successor distribution, outcomes merged by cell, ordered by cell.
  std::vector<Outcome> transition_distribution(EnvState s, Motion m) const {
    check(s);
    std::vector<Outcome> out;
    auto add = [&](EnvState t, double p) {
      if (p <= 0.0) return;
      for (auto& o : out)
        if (o.state == t) {
          o.probability += p;
          return;
        }
      out.push_back({t, p});
    };
    for_each_outcome(s, m, add);
    std::sort(out.begin(), out.end(),
              [](const Outcome& a, const Outcome& b) { return a.state < b.state; });
    return out;
  }

  /// Samples the successor of `s` under `m`. Moves leaving the grid and
  /// primitives the mask rejects resolve to `s`.
  EnvState step(EnvState s, Motion m, Rng& rng) const {
    check(s);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::optional<EnvState> chosen;
    EnvState last = s;
    for_each_outcome(s, m, [&](EnvState t, double p) {
      if (chosen || p <= 0.0) return;
      last = t;
      cumulative += p;
      if (u < cumulative) chosen = t;
    });
    // u can exceed a total that is one ulp short of 1.
    return chosen ? *chosen : last;
  }

 private:
  void check(EnvState s) const {
    if (!grid_.valid(s))
      throw ValidationError("cell index " + std::to_string(s.cell) + " outside the grid");
  }

  EnvState resolve(EnvState s, Motion m) const { return grid_.neighbor(s, m).value_or(s); }

  template <typename Fn>
  void for_each_outcome(EnvState s, Motion m, Fn&& fn) const {
    if (!admissible(s, m)) {
      fn(s, 1.0);
      return;
    }
    if (m == Motion::Stay && !model_.perturb_stay) {
      fn(s, 1.0);
      return;
    }
    fn(resolve(s, m), model_.p_intended);
    const Motion base = m == Motion::Stay ? Motion::N : m;
    for (const auto& p : model_.perturbations)
      fn(p.stay ? s : resolve(s, rotate(base, p.rotation)), p.probability);
  }

  GridSpec grid_;
  UncertaintyModel model_;
  std::optional<AdmissibleMask> mask_;
};

/// Centroids of `states` as a planar signal with one sample per tick.
inline Signal centroid_signal(const std::vector<EnvState>& states, const GridSpec& grid) {
  if (states.empty()) throw ValidationError("centroid signal needs at least one state");
  std::vector<double> flat;
  flat.reserve(2 * states.size());
  for (EnvState s : states) {
    if (!grid.valid(s)) throw ValidationError("state outside the grid");
    const auto c = grid.centroid(s);
    flat.push_back(c[0]);
    flat.push_back(c[1]);
  }
  return Signal(2, std::move(flat), 1.0);
}

}  // namespace stlq
