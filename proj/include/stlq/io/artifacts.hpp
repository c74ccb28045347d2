#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlq/bounds/log_sum_exp.hpp"
#include "stlq/error.hpp"
#include "stlq/eval/evaluation.hpp"
#include "stlq/io/config.hpp"
#include "stlq/learn/q_learning.hpp"

namespace stlq {

inline json cells_json(const TauState& s) {
  json out = json::array();
  for (int c : s.cells()) out.push_back(c);
  return out;
}

inline TauState tau_state_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("tau-state must be a non-empty list");
  std::vector<int> cells;
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw ValidationError("tau-state cells must be integers");
    cells.push_back(c.get<int>());
  }
  return TauState(std::move(cells));
}

/// Q-table as {"tau", "cells", "states": {id: [cells]}, "values": {"id:action": q}}.
inline json to_json(const QTable& q) {
  json states = json::object(), values = json::object();
  for (std::size_t id = 0; id < q.size(); ++id) {
    states[std::to_string(id)] = cells_json(q.index().state(id));
    for (Motion m : kMotions)
      values[std::to_string(id) + ":" + std::string(to_string(m))] = q.value(id, m);
  }
  return {{"tau", q.index().tau()},
          {"cells", q.index().cell_count()},
          {"states", states},
          {"values", values}};
}

inline json policy_to_json(const Policy& p, Problem problem, const SynthesisForm& form,
                           const std::string& formula_text) {
  json entries = json::array();
  for (std::size_t id = 0; id < p.size(); ++id)
    entries.push_back(
        {{"state", cells_json(p.state(id))}, {"action", std::string(to_string(p.action_at(id)))}});
  return {{"problem", std::string(to_string(problem))},
          {"formula", formula_text},
          {"outer", to_string(form.outer)},
          {"horizon", form.horizon},
          {"tau", form.tau},
          {"cells", p.cell_count()},
          {"entries", entries}};
}

struct LoadedPolicy {
  Policy policy;
  Problem problem;
  std::string formula;
};

inline LoadedPolicy policy_from_json(const json& j) {
  try {
    const auto problem = problem_from_string(j.at("problem").get<std::string>());
    if (!problem) throw ValidationError("policy.problem: expected \"1A\" or \"2A\"");
    LoadedPolicy out{Policy(j.at("tau").get<int>(), j.at("cells").get<int>()), *problem,
                     j.at("formula").get<std::string>()};
    for (const auto& e : j.at("entries")) {
      auto m = motion_from_string(e.at("action").get<std::string>());
      if (!m) throw ValidationError("policy.entries: unknown primitive");
      out.policy.assign(tau_state_from_json(e.at("state")), *m);
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("policy file: ") + e.what());
  }
}

inline void write_training_log(std::ostream& os, const std::vector<EpisodeRecord>& log) {
  os << "episode,return,final_window_robustness,epsilon,alpha\n";
  os << std::setprecision(17);
  for (const auto& r : log) {
    os << r.episode << ',' << r.episode_return << ',';
    if (!std::isnan(r.final_window_robustness)) os << r.final_window_robustness;
    os << ',' << r.epsilon << ',' << r.alpha << '\n';
  }
}

/// Long format: one row per (rollout, tick).
inline void write_trajectories(std::ostream& os, const RolloutBatch& batch, const GridSpec& grid) {
  os << "rollout,tick,cell,x,y\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const auto& tr = batch.trajectories[i];
    for (std::size_t t = 0; t < tr.size(); ++t) {
      const auto c = grid.centroid(tr[t]);
      os << i << ',' << t << ',' << tr[t].cell << ',' << c[0] << ',' << c[1] << '\n';
    }
  }
}

inline json to_json(const GapReport& g) {
  return {{"beta", g.beta},
          {"T", g.horizon},
          {"tau", g.tau},
          {"gamma", g.gamma},
          {"windows", g.windows},
          {"gap", g.gap},
          {"upper_deviation", g.upper_deviation},
          {"lower_deviation", g.lower_deviation},
          {"discounted_gap", g.discounted_gap}};
}

inline json to_json(const MetricsReport& m, const GapReport& gap) {
  return {{"pr_sat", m.pr_sat},
          {"pr_sat_se", m.pr_sat_se},
          {"e_rob", m.e_rob},
          {"e_rob_se", m.e_rob_se},
          {"n", m.n},
          {"satisfied", m.satisfied},
          {"uncovered_states", m.uncovered_states},
          {"gap_report", to_json(gap)}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct ProblemRun {
  Problem problem;
  TrainResult training;
  EvaluationResult evaluation;
  GapReport gap;
};

/// Train and evaluate one problem of `config`.
inline ProblemRun run_problem(const RunConfig& config, Problem problem) {
  validate(config);
  const GridWorld world = config.world();
  const SynthesisForm form = config.form();
  const auto history = config.history();
  Hyperparameters hp = config.hyperparameters;
  hp.seed = config.seed;
  auto training = train(world, form, config.reward(problem), hp, history);
  auto evaluation =
      evaluate(training.policy, world, form, history, config.rollouts, config.seed, config.threads);
  auto gap = approximation_gap(config.beta, form.horizon, form.tau, hp.gamma);
  return {problem, std::move(training), std::move(evaluation), gap};
}

/// Writes the artifacts of one problem into `dir`.
inline void write_problem_artifacts(const std::filesystem::path& dir, const RunConfig& config,
                                    const ProblemRun& run) {
  std::filesystem::create_directories(dir);
  const SynthesisForm form = config.form();
  write_json(dir / "policy.json", policy_to_json(run.training.policy, run.problem, form,
                                                 config.formula));
  write_json(dir / "qtable.json", to_json(run.training.q));
  write_json(dir / "metrics.json", to_json(run.evaluation.metrics, run.gap));
  std::ostringstream log, traj;
  write_training_log(log, run.training.log);
  write_trajectories(traj, run.evaluation.batch, config.environment.grid);
  write_text(dir / "training_log.csv", log.str());
  write_text(dir / "trajectories.csv", traj.str());
}

/// `<root>/<UTC timestamp>-seed<seed>`.
inline std::filesystem::path timestamped_directory(const std::filesystem::path& root,
                                                   std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << "-seed" << seed;
  return root / name.str();
}

struct CaseStudyResult {
  std::filesystem::path directory;
  std::vector<ProblemRun> runs;
};

/// Train, evaluate and bound every configured problem; artifacts go to
/// `dir/<problem>/` plus `dir/config.json` and `dir/gap_report.json`.
inline CaseStudyResult run_case_study(const RunConfig& config, const std::filesystem::path& dir) {
  validate(config);
  CaseStudyResult out{dir, {}};
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", to_json(config));
  const SynthesisForm form = config.form();
  write_json(dir / "gap_report.json",
             to_json(approximation_gap(config.beta, form.horizon, form.tau,
                                       config.hyperparameters.gamma)));
  for (Problem p : config.problems) {
    out.runs.push_back(run_problem(config, p));
    write_problem_artifacts(dir / std::string(to_string(p)), config, out.runs.back());
  }
  return out;
}

}  // namespace stlq
