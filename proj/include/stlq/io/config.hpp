#pragma once

// JSON run configuration. Every field has a default; unknown keys are
// rejected so typos surface as errors instead of silently using a default.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlq/error.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/learn/q_learning.hpp"
#include "stlq/learn/reward.hpp"
#include "stlq/stl/parser.hpp"
#include "stlq/stl/semantics.hpp"

namespace stlq {

using json = nlohmann::json;

struct EnvironmentConfig {
  GridSpec grid{6, 6, 1.0, 1.0};
  UncertaintyModel uncertainty;
  std::optional<AdmissibleMask> admissible;
  /// (column, row) pairs, oldest first.
  std::vector<std::pair<int, int>> initial_history{{1, 1}};
};

struct RunConfig {
  std::string formula;
  EnvironmentConfig environment;
  std::vector<Problem> problems{Problem::SatisfactionProbability, Problem::ExpectedRobustness};
  double beta = 50.0;
  Hyperparameters hyperparameters;
  std::size_t rollouts = 1000;
  unsigned threads = 1;
  std::uint64_t seed = 1;

  GridWorld world() const {
    return GridWorld(environment.grid, environment.uncertainty, environment.admissible);
  }
  SynthesisForm form() const { return synthesis_form(parse_formula(formula)); }
  std::vector<EnvState> history() const {
    std::vector<EnvState> out;
    for (auto [c, r] : environment.initial_history) out.push_back(environment.grid.at(c, r));
    return out;
  }
  RewardSpec reward(Problem p) const { return {p, form().outer, beta}; }
};

namespace detail {

class JsonReader {
 public:
  JsonReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ValidationError("expected a string");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ValidationError("expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ValidationError("expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v->get<long long>() < 0 && !v->is_number_unsigned())
            throw ValidationError("expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ValidationError("expected a number");
      }
      out = v->get<T>();
    } catch (const ValidationError& e) {
      throw ValidationError(at(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(at(it.key()) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const NumericError&) {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line(), e.column());
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ValidationError(path + ": " + msg);
  }
}

inline LearningRateSchedule::Kind lr_kind(const std::string& s, const std::string& path) {
  if (s == "geometric") return LearningRateSchedule::Kind::Geometric;
  if (s == "harmonic") return LearningRateSchedule::Kind::Harmonic;
  if (s == "constant") return LearningRateSchedule::Kind::Constant;
  throw ValidationError(path + ": unknown schedule '" + s + "' (geometric, harmonic, constant)");
}

inline LearningRateSchedule::Mode lr_mode(const std::string& s, const std::string& path) {
  if (s == "per_episode") return LearningRateSchedule::Mode::PerEpisode;
  if (s == "per_update") return LearningRateSchedule::Mode::PerUpdate;
  if (s == "per_visit") return LearningRateSchedule::Mode::PerVisit;
  throw ValidationError(path + ": unknown mode '" + s + "' (per_episode, per_update, per_visit)");
}

inline std::string to_string(LearningRateSchedule::Kind k) {
  switch (k) {
    case LearningRateSchedule::Kind::Geometric: return "geometric";
    case LearningRateSchedule::Kind::Harmonic: return "harmonic";
    case LearningRateSchedule::Kind::Constant: return "constant";
  }
  return "constant";
}

inline std::string to_string(LearningRateSchedule::Mode m) {
  switch (m) {
    case LearningRateSchedule::Mode::PerEpisode: return "per_episode";
    case LearningRateSchedule::Mode::PerUpdate: return "per_update";
    case LearningRateSchedule::Mode::PerVisit: return "per_visit";
  }
  return "per_episode";
}

inline UncertaintyModel read_uncertainty(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "default") return {};
    if (s == "deterministic") return UncertaintyModel::deterministic();
    throw ValidationError(path + ": expected \"default\", \"deterministic\" or an object");
  }
  JsonReader r(j, path);
  UncertaintyModel m;
  r.read("p_intended", m.p_intended);
  r.read("perturb_stay", m.perturb_stay);
  if (const json* ps = r.get("perturbations")) {
    if (!ps->is_array()) r.fail("perturbations: expected an array");
    m.perturbations.clear();
    for (std::size_t i = 0; i < ps->size(); ++i) {
      JsonReader pr((*ps)[i], path + ".perturbations[" + std::to_string(i) + "]");
      Perturbation p;
      pr.read("rotation", p.rotation);
      pr.read("stay", p.stay);
      pr.read("probability", p.probability);
      pr.finish();
      m.perturbations.push_back(p);
    }
  } else {
    // Default shape, remaining mass split evenly.
    for (auto& p : m.perturbations) p.probability = (1.0 - m.p_intended) / 3.0;
  }
  r.finish();
  with_path(path, [&] { m.validate(); });
  return m;
}

inline AdmissibleMask read_mask(const json& j, const std::string& path, int cells) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array of per-cell lists");
  if (j.size() != static_cast<std::size_t>(cells))
    throw ValidationError(path + ": " + std::to_string(j.size()) + " entries for " +
                          std::to_string(cells) + " cells");
  AdmissibleMask mask(j.size());
  for (std::size_t c = 0; c < j.size(); ++c) {
    const std::string p = path + "[" + std::to_string(c) + "]";
    if (!j[c].is_array()) throw ValidationError(p + ": expected a list of primitive names");
    mask[c].fill(false);
    for (const auto& name : j[c]) {
      if (!name.is_string()) throw ValidationError(p + ": expected primitive names");
      auto m = motion_from_string(name.get<std::string>());
      if (!m) throw ValidationError(p + ": unknown primitive '" + name.get<std::string>() + "'");
      mask[c][static_cast<std::size_t>(*m)] = true;
    }
  }
  return mask;
}

}  // namespace detail

/// Cross-field checks. Throws with the offending field path.
inline void validate(const RunConfig& c) {
  using detail::with_path;
  if (c.formula.empty()) throw ValidationError("formula: missing");
  std::optional<SynthesisForm> parsed;
  with_path("formula", [&] { parsed = c.form(); });
  const SynthesisForm& form = *parsed;
  with_path("environment", [&] { c.environment.grid.validate(); });
  with_path("environment.uncertainty", [&] { c.environment.uncertainty.validate(); });
  const GridSpec& g = c.environment.grid;
  if (c.environment.initial_history.empty())
    throw ValidationError("environment.initial_history: must hold at least one cell");
  if (c.environment.initial_history.size() > static_cast<std::size_t>(form.tau))
    throw ValidationError("environment.initial_history: length " +
                          std::to_string(c.environment.initial_history.size()) +
                          " exceeds tau = " + std::to_string(form.tau));
  for (std::size_t i = 0; i < c.environment.initial_history.size(); ++i) {
    auto [col, row] = c.environment.initial_history[i];
    if (!g.contains(col, row))
      throw ValidationError("environment.initial_history[" + std::to_string(i) +
                            "]: cell outside the grid");
  }
  if (c.environment.admissible &&
      c.environment.admissible->size() != static_cast<std::size_t>(g.cell_count()))
    throw ValidationError("environment.admissible: wrong number of cells");
  if (c.problems.empty()) throw ValidationError("objective.problems: at least one problem");
  with_path("objective.beta", [&] {
    for (Problem p : c.problems)
      RewardSpec{p, form.outer, c.beta}.validate(
          max_abs_robustness(form.inner, centroid_points(g)));
  });
  with_path("hyperparameters", [&] { c.hyperparameters.validate(); });
  if (c.rollouts == 0) throw ValidationError("evaluation.rollouts: must be positive");
}

inline RunConfig config_from_json(const json& j) {
  using detail::JsonReader;
  RunConfig c;
  JsonReader root(j, "");
  root.read("formula", c.formula);
  root.read("seed", c.seed);

  if (const json* e = root.get("environment")) {
    JsonReader r(*e, "environment");
    r.read("columns", c.environment.grid.columns);
    r.read("rows", c.environment.grid.rows);
    r.read("cell_width", c.environment.grid.cell_width);
    r.read("cell_height", c.environment.grid.cell_height);
    if (const json* u = r.get("uncertainty"))
      c.environment.uncertainty = detail::read_uncertainty(*u, "environment.uncertainty");
    if (const json* h = r.get("initial_history")) {
      if (!h->is_array()) r.fail("initial_history: expected [[column, row], ...]");
      c.environment.initial_history.clear();
      for (std::size_t i = 0; i < h->size(); ++i) {
        const auto& cell = (*h)[i];
        if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number_integer() ||
            !cell[1].is_number_integer())
          throw ValidationError("environment.initial_history[" + std::to_string(i) +
                                "]: expected [column, row]");
        c.environment.initial_history.emplace_back(cell[0].get<int>(), cell[1].get<int>());
      }
    }
    detail::with_path("environment", [&] { c.environment.grid.validate(); });
    if (const json* m = r.get("admissible"))
      c.environment.admissible =
          detail::read_mask(*m, "environment.admissible", c.environment.grid.cell_count());
    r.finish();
  }

  if (const json* o = root.get("objective")) {
    JsonReader r(*o, "objective");
    r.read("beta", c.beta);
    if (const json* ps = r.get("problems")) {
      if (!ps->is_array()) r.fail("problems: expected a list such as [\"1A\", \"2A\"]");
      c.problems.clear();
      for (const auto& p : *ps) {
        auto v = p.is_string() ? problem_from_string(p.get<std::string>()) : std::nullopt;
        if (!v) throw ValidationError("objective.problems: expected \"1A\" or \"2A\"");
        c.problems.push_back(*v);
      }
    }
    r.finish();
  }

  if (const json* h = root.get("hyperparameters")) {
    JsonReader r(*h, "hyperparameters");
    auto& hp = c.hyperparameters;
    r.read("episodes", hp.episodes);
    r.read("gamma", hp.gamma);
    if (const json* lr = r.get("learning_rate")) {
      JsonReader s(*lr, "hyperparameters.learning_rate");
      std::string kind = detail::to_string(hp.alpha.kind), mode = detail::to_string(hp.alpha.mode);
      s.read("schedule", kind);
      s.read("mode", mode);
      s.read("base", hp.alpha.base);
      s.read("value", hp.alpha.value);
      s.finish();
      hp.alpha.kind = detail::lr_kind(kind, "hyperparameters.learning_rate.schedule");
      hp.alpha.mode = detail::lr_mode(mode, "hyperparameters.learning_rate.mode");
    }
    if (const json* ex = r.get("exploration")) {
      JsonReader s(*ex, "hyperparameters.exploration");
      std::string kind = hp.epsilon.kind == ExplorationSchedule::Kind::Constant ? "constant"
                                                                                : "geometric_floor";
      s.read("schedule", kind);
      s.read("base", hp.epsilon.base);
      s.read("floor", hp.epsilon.floor);
      s.read("value", hp.epsilon.value);
      s.finish();
      if (kind == "constant")
        hp.epsilon.kind = ExplorationSchedule::Kind::Constant;
      else if (kind == "geometric_floor")
        hp.epsilon.kind = ExplorationSchedule::Kind::GeometricFloor;
      else
        throw ValidationError("hyperparameters.exploration.schedule: unknown schedule '" + kind +
                              "' (geometric_floor, constant)");
    }
    r.finish();
  }

  if (const json* e = root.get("evaluation")) {
    JsonReader r(*e, "evaluation");
    r.read("rollouts", c.rollouts);
    r.read("threads", c.threads);
    r.finish();
  }
  root.finish();
  c.hyperparameters.seed = c.seed;
  validate(c);
  return c;
}

inline json to_json(const RunConfig& c) {
  const auto& env = c.environment;
  json u;
  u["p_intended"] = env.uncertainty.p_intended;
  u["perturb_stay"] = env.uncertainty.perturb_stay;
  u["perturbations"] = json::array();
  for (const auto& p : env.uncertainty.perturbations)
    u["perturbations"].push_back(
        {{"rotation", p.rotation}, {"stay", p.stay}, {"probability", p.probability}});
  json history = json::array();
  for (auto [col, row] : env.initial_history) history.push_back({col, row});
  json e = {{"columns", env.grid.columns},       {"rows", env.grid.rows},
            {"cell_width", env.grid.cell_width}, {"cell_height", env.grid.cell_height},
            {"uncertainty", u},                  {"initial_history", history}};
  if (env.admissible) {
    json mask = json::array();
    for (const auto& cell : *env.admissible) {
      json names = json::array();
      for (Motion m : kMotions)
        if (cell[static_cast<std::size_t>(m)]) names.push_back(std::string(to_string(m)));
      mask.push_back(names);
    }
    e["admissible"] = mask;
  }
  json problems = json::array();
  for (Problem p : c.problems) problems.push_back(std::string(to_string(p)));
  const auto& hp = c.hyperparameters;
  json lr = {{"schedule", detail::to_string(hp.alpha.kind)},
             {"mode", detail::to_string(hp.alpha.mode)}};
  if (hp.alpha.kind == LearningRateSchedule::Kind::Geometric) lr["base"] = hp.alpha.base;
  if (hp.alpha.kind == LearningRateSchedule::Kind::Constant) lr["value"] = hp.alpha.value;
  json ex;
  if (hp.epsilon.kind == ExplorationSchedule::Kind::Constant)
    ex = {{"schedule", "constant"}, {"value", hp.epsilon.value}};
  else
    ex = {{"schedule", "geometric_floor"}, {"base", hp.epsilon.base}, {"floor", hp.epsilon.floor}};
  return {{"formula", c.formula},
          {"seed", c.seed},
          {"environment", e},
          {"objective", {{"problems", problems}, {"beta", c.beta}}},
          {"hyperparameters",
           {{"episodes", hp.episodes},
            {"gamma", hp.gamma},
            {"learning_rate", lr},
            {"exploration", ex}}},
          {"evaluation", {{"rollouts", c.rollouts}, {"threads", c.threads}}}};
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 1, e.byte);
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

}  // namespace stlq
