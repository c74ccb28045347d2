// stlq: command-line front end.
//
// Exit codes: 0 success, 2 bad input or validation failure, 3 numeric failure.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlq/stlq.hpp"

namespace fs = std::filesystem;
using namespace stlq;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool print_config = false;
};

RunConfig load(const Globals& g) {
  if (g.config.empty()) throw ValidationError("--config is required");
  RunConfig c = load_config(g.config);
  if (g.seed) {
    c.seed = *g.seed;
    c.hyperparameters.seed = *g.seed;
  }
  return c;
}

std::vector<Problem> select_problems(const RunConfig& c, const std::string& only) {
  if (only.empty()) return c.problems;
  auto p = problem_from_string(only);
  if (!p) throw ValidationError("--problem: expected 1A or 2A");
  return {*p};
}

void emit(const Globals& g, const std::string& file, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(g.out);
  write_text(fs::path(g.out) / file, text);
}

int cmd_parse(const std::string& text, double tick) {
  const Formula f = parse_formula(text, {SignalSchema::planar(), tick});
  std::cout << "ast: " << describe(f) << "\n";
  std::cout << "formula: " << to_string(f) << "\n";
  std::cout << "horizon: " << horizon(f) << "\n";
  try {
    const SynthesisForm s = synthesis_form(f);
    std::cout << "synthesis: " << to_string(s.outer) << ", T=" << s.horizon
              << ", tau=" << s.tau << "\n";
  } catch (const ValidationError& e) {
    std::cout << "synthesis: none (" << e.what() << ")\n";
  }
  return 0;
}

int cmd_train(const Globals& g, const std::string& only) {
  const RunConfig c = load(g);
  const GridWorld world = c.world();
  const SynthesisForm form = c.form();
  json summary = json::object();
  for (Problem p : select_problems(c, only)) {
    auto res = train(world, form, c.reward(p), c.hyperparameters, c.history());
    const std::string name(to_string(p));
    if (g.out.empty()) {
      summary[name] = policy_to_json(res.policy, p, form, c.formula);
      continue;
    }
    const fs::path dir = fs::path(g.out) / name;
    fs::create_directories(dir);
    write_json(dir / "policy.json", policy_to_json(res.policy, p, form, c.formula));
    write_json(dir / "qtable.json", to_json(res.q));
    std::ostringstream log;
    write_training_log(log, res.log);
    write_text(dir / "training_log.csv", log.str());
    summary[name] = {{"episodes", res.log.size()},
                     {"tau_states", res.q.size()},
                     {"policy", (dir / "policy.json").string()}};
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& policy_path) {
  const RunConfig c = load(g);
  const SynthesisForm form = c.form();
  const LoadedPolicy lp = policy_from_json(read_json_file(policy_path));
  if (lp.policy.tau() != form.tau)
    throw ValidationError("policy was learned for tau = " + std::to_string(lp.policy.tau()) +
                          " but the configured formula has tau = " + std::to_string(form.tau));
  if (lp.policy.cell_count() != c.environment.grid.cell_count())
    throw ValidationError("policy was learned on " + std::to_string(lp.policy.cell_count()) +
                          " cells, the configured grid has " +
                          std::to_string(c.environment.grid.cell_count()));
  const auto res =
      evaluate(lp.policy, c.world(), form, c.history(), c.rollouts, c.seed, c.threads);
  const auto gap = approximation_gap(c.beta, form.horizon, form.tau, c.hyperparameters.gamma);
  const std::string metrics = to_json(res.metrics, gap).dump(2) + "\n";
  if (!g.out.empty()) {
    std::ostringstream traj;
    write_trajectories(traj, res.batch, c.environment.grid);
    emit(g, "trajectories.csv", traj.str());
    emit(g, "metrics.json", metrics);
  }
  std::cout << metrics;
  return 0;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_monitor(const std::string& text, const std::string& csv_path, double tick) {
  std::ifstream in(csv_path);
  if (!in) throw ValidationError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(csv_path + ": empty file");
  const SignalSchema schema(split_csv(line));
  const Formula f = parse_formula(text, {schema, tick});
  std::vector<double> flat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (fields.size() != schema.dimension())
      throw ValidationError(csv_path + ":" + std::to_string(row) + ": expected " +
                            std::to_string(schema.dimension()) + " fields");
    for (const auto& s : fields) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError(csv_path + ":" + std::to_string(row) + ": not a number: '" + s +
                              "'");
      flat.push_back(v);
    }
  }
  if (flat.empty()) throw ValidationError(csv_path + ": no samples");
  const Signal signal(schema.dimension(), std::move(flat), tick);
  const double r = robustness(signal, f, 0);
  json out = {{"robustness", r},
              {"satisfied", indicator(r) == 1},
              {"horizon", horizon(f)},
              {"samples", signal.size()}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_bound(const Globals& g, double beta, int T, int tau, std::optional<double> gamma,
              std::optional<long long> windows) {
  emit(g, "gap_report.json", to_json(approximation_gap(beta, T, tau, gamma, windows)).dump(2) + "\n");
  return 0;
}

int cmd_case_study(const Globals& g, const std::string& exact_dir) {
  const RunConfig c = load(g);
  const fs::path dir = !exact_dir.empty() ? fs::path(exact_dir)
                                          : timestamped_directory(g.out.empty() ? "runs" : g.out,
                                                                  c.seed);
  const auto res = run_case_study(c, dir);
  json summary = {{"directory", dir.string()}, {"seed", c.seed}};
  for (const auto& r : res.runs) {
    const auto& m = r.evaluation.metrics;
    summary["problems"][std::string(to_string(r.problem))] = {
        {"pr_sat", m.pr_sat}, {"e_rob", m.e_rob}, {"n", m.n},
        {"uncovered_states", m.uncovered_states}};
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-learning control synthesis for signal temporal logic tasks"};
  app.require_subcommand(0, 1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--print-config", g.print_config,
               "Print the validated configuration with all defaults and exit");

  std::string formula, csv, policy_path, problem, exact_dir;
  double tick = 1.0;

  auto* parse = app.add_subcommand("parse", "Parse a formula and print its structure");
  parse->add_option("formula", formula)->required();
  parse->add_option("--tick", tick, "Sample period for interval bounds");

  auto* trn = app.add_subcommand("train", "Learn policies for the configured problems");
  trn->add_option("--problem", problem, "Only this problem (1A or 2A)");

  auto* ev = app.add_subcommand("evaluate", "Monte Carlo evaluation of a stored policy");
  ev->add_option("--policy", policy_path, "policy.json written by train")->required();

  auto* mon = app.add_subcommand("monitor", "Robustness of a recorded trajectory");
  mon->add_option("formula", formula)->required();
  mon->add_option("trajectory", csv, "CSV with a header row naming the components")->required();
  mon->add_option("--tick", tick, "Sample period for interval bounds");

  double beta = 0.0;
  int T = 0, tau = 1;
  std::optional<double> gamma;
  std::optional<long long> windows;
  auto* bnd = app.add_subcommand("bound", "Approximation gap of the log-sum-exp surrogate");
  bnd->add_option("--beta", beta)->required();
  bnd->add_option("--T", T, "Horizon of the full formula")->required();
  bnd->add_option("--tau", tau)->required();
  bnd->add_option("--gamma", gamma, "Discount factor");
  bnd->add_option("--windows", windows, "Window count, default T - tau + 2");

  auto* cs = app.add_subcommand("run-case-study", "Train, evaluate and bound; write artifacts");
  cs->add_option("--exact-dir", exact_dir, "Write here instead of a timestamped directory");

  for (auto* sub : {parse, trn, ev, mon, bnd, cs}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (g.print_config) {
      std::cout << to_json(load(g)).dump(2) << "\n";
      return 0;
    }
    if (*parse) return cmd_parse(formula, tick);
    if (*trn) return cmd_train(g, problem);
    if (*ev) return cmd_evaluate(g, policy_path);
    if (*mon) return cmd_monitor(formula, csv, tick);
    if (*bnd) return cmd_bound(g, beta, T, tau, gamma, windows);
    if (*cs) return cmd_case_study(g, exact_dir);
    std::cout << app.help();
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.message() << " (line " << e.line() << ", column " << e.column()
              << ")\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
