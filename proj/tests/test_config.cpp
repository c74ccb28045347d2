#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stlq/stlq.hpp"

using namespace stlq;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(STLQ_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json minimal() {
  return json::parse(R"j({"formula": "F[0,3](x > 2)",
                         "environment": {"columns": 3, "rows": 3, "initial_history": [[0, 0]]}})j");
}

std::string error_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, BundledCaseOne) {
  const RunConfig c = load_config(kConfigs / "case1.json");
  EXPECT_EQ(c.environment.grid, (GridSpec{6, 6, 1.0, 1.0}));
  EXPECT_EQ(c.history(), (std::vector<EnvState>{c.environment.grid.at(1, 1)}));
  EXPECT_EQ(c.beta, 50.0);
  EXPECT_EQ(c.hyperparameters.gamma, 0.9999);
  EXPECT_EQ(c.hyperparameters.episodes, 1700);
  EXPECT_EQ(c.hyperparameters.alpha.base, 0.95);
  EXPECT_EQ(c.hyperparameters.alpha.mode, LearningRateSchedule::Mode::PerEpisode);
  EXPECT_EQ(c.rollouts, 1000u);
  const auto form = c.form();
  EXPECT_EQ(form.horizon, 7);
  EXPECT_EQ(form.tau, 1);
  EXPECT_EQ(c.environment.uncertainty, UncertaintyModel{});
}

TEST(Config, BundledCaseTwo) {
  const RunConfig c = load_config(kConfigs / "case2.json");
  EXPECT_EQ(c.environment.grid.cell_count(), 16);
  EXPECT_EQ(c.history().size(), 3u);
  EXPECT_EQ(c.hyperparameters.episodes, 2000);
  EXPECT_EQ(c.rollouts, 500u);
  EXPECT_EQ(c.form().tau, 3);
  EXPECT_EQ(c.form().horizon, 14);
  EXPECT_EQ(c.form().outer, Outer::Globally);
}

TEST(Config, PrintedConfigRoundTrips) {
  for (const char* name : {"case1.json", "case2.json"}) {
    const RunConfig c = load_config(kConfigs / name);
    const json printed = to_json(c);
    const RunConfig again = config_from_json(printed);
    EXPECT_EQ(to_json(again).dump(), printed.dump());
  }
  json j = minimal();
  j["environment"]["admissible"] = json::array();
  for (int i = 0; i < 9; ++i) j["environment"]["admissible"].push_back({"N", "E", "Stay"});
  j["environment"]["uncertainty"] = {{"p_intended", 0.8}};
  j["hyperparameters"] = {{"exploration", {{"schedule", "constant"}, {"value", 0.3}}},
                          {"learning_rate", {{"schedule", "harmonic"}, {"mode", "per_visit"}}}};
  const RunConfig c = config_from_json(j);
  EXPECT_TRUE(c.environment.admissible);
  EXPECT_EQ(to_json(config_from_json(to_json(c))).dump(), to_json(c).dump());
}

TEST(Config, ErrorsNameTheField) {
  json j = minimal();
  j["environment"]["colums"] = 3;
  EXPECT_NE(error_of(j).find("environment.colums: unknown field"), std::string::npos);

  j = minimal();
  j["environment"]["rows"] = "three";
  EXPECT_NE(error_of(j).find("environment.rows: expected an integer"), std::string::npos);

  j = minimal();
  j["environment"]["initial_history"] = {{0, 0}, {1, 1}};
  EXPECT_NE(error_of(j).find("environment.initial_history"), std::string::npos);

  j = minimal();
  j["environment"]["initial_history"] = {{5, 0}};
  EXPECT_NE(error_of(j).find("environment.initial_history[0]"), std::string::npos);

  j = minimal();
  j["hyperparameters"] = {{"learning_rate", {{"mode", "sometimes"}}}};
  EXPECT_NE(error_of(j).find("hyperparameters.learning_rate.mode"), std::string::npos);

  j = minimal();
  j["hyperparameters"] = {{"gamma", 1.0}};
  EXPECT_NE(error_of(j).find("hyperparameters"), std::string::npos);

  j = minimal();
  j["environment"]["uncertainty"] = {{"p_intended", 0.9}, {"perturbations", json::array()}};
  EXPECT_NE(error_of(j).find("environment.uncertainty"), std::string::npos);

  j = minimal();
  j["objective"] = {{"problems", {"3B"}}};
  EXPECT_NE(error_of(j).find("objective.problems"), std::string::npos);

  j = minimal();
  j["formula"] = "F[0,3](x >";
  try {
    config_from_json(j);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(std::string(e.message()).rfind("formula: ", 0), 0u);
  }

  j = minimal();
  j["formula"] = "x > 2";
  EXPECT_NE(error_of(j).find("formula: synthesis needs"), std::string::npos);
}

TEST(Config, OverflowIsRejectedBeforeTraining) {
  json j = minimal();
  j["objective"] = {{"beta", 500}, {"problems", {"2A"}}};
  EXPECT_THROW(config_from_json(j), NumericError);
  j["objective"]["problems"] = {"1A"};
  EXPECT_NO_THROW(config_from_json(j));
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ValidationError);
}

TEST(Artifacts, PolicyRoundTrip) {
  RunConfig c = config_from_json(minimal());
  c.hyperparameters.episodes = 50;
  const auto run = train(c.world(), c.form(), c.reward(Problem::ExpectedRobustness),
                         c.hyperparameters, c.history());
  const json pj = policy_to_json(run.policy, Problem::ExpectedRobustness, c.form(), c.formula);
  const LoadedPolicy back = policy_from_json(json::parse(pj.dump()));
  ASSERT_EQ(back.policy.size(), run.policy.size());
  for (std::size_t i = 0; i < back.policy.size(); ++i) {
    EXPECT_EQ(back.policy.state(i), run.policy.state(i));
    EXPECT_EQ(back.policy.action_at(i), run.policy.action_at(i));
  }
  EXPECT_EQ(back.problem, Problem::ExpectedRobustness);
  EXPECT_EQ(pj["tau"], 1);
  EXPECT_EQ(pj["horizon"], 3);

  const json qj = to_json(run.q);
  EXPECT_EQ(qj["states"]["0"], json::array({0}));
  EXPECT_EQ(qj["values"].size(), run.q.size() * 9);
  EXPECT_EQ(qj["values"]["0:E"].get<double>(), run.q.value(0, Motion::E));
  EXPECT_THROW(policy_from_json(json::parse(R"({"problem": "2A"})")), ValidationError);
}

TEST(Artifacts, CsvWriters) {
  std::ostringstream log;
  write_training_log(log, {{1, 2.5, 0.5, 0.998, 0.95}, {2, 1.0, NAN, 0.9, 0.9}});
  EXPECT_EQ(log.str(),
            "episode,return,final_window_robustness,epsilon,alpha\n"
            "1,2.5,0.5,0.998,0.94999999999999996\n"
            "2,1,,0.90000000000000002,0.90000000000000002\n");
  RolloutBatch b;
  b.trajectories = {{{0}, {4}}};
  std::ostringstream traj;
  write_trajectories(traj, b, GridSpec{3, 3, 1, 1});
  EXPECT_EQ(traj.str(), "rollout,tick,cell,x,y\n0,0,0,0.5,0.5\n0,1,4,1.5,1.5\n");
}

TEST(Artifacts, CaseStudyIsReproducible) {
  json j = minimal();
  j["hyperparameters"] = {{"episodes", 200}};
  j["evaluation"] = {{"rollouts", 100}, {"threads", 3}};
  const RunConfig c = config_from_json(j);
  const fs::path root = fs::temp_directory_path() / "stlq_case_study_test";
  fs::remove_all(root);
  const auto a = run_case_study(c, root / "a");
  const auto b = run_case_study(c, root / "b");
  for (const char* p : {"1A", "2A"}) {
    for (const char* f : {"metrics.json", "policy.json", "qtable.json", "training_log.csv",
                          "trajectories.csv"}) {
      ASSERT_TRUE(fs::exists(root / "a" / p / f)) << f;
      EXPECT_EQ(slurp(root / "a" / p / f), slurp(root / "b" / p / f)) << f;
    }
  }
  EXPECT_TRUE(fs::exists(root / "a" / "gap_report.json"));
  const json m = json::parse(slurp(root / "a" / "2A" / "metrics.json"));
  for (const char* k : {"pr_sat", "pr_sat_se", "e_rob", "e_rob_se", "n", "uncovered_states",
                        "gap_report"})
    EXPECT_TRUE(m.contains(k)) << k;
  EXPECT_EQ(config_from_json(json::parse(slurp(root / "a" / "config.json"))).seed, c.seed);
  fs::remove_all(root);
}

TEST(Artifacts, TimestampedDirectoryName) {
  const auto p = timestamped_directory("runs", 42);
  EXPECT_EQ(p.parent_path(), fs::path("runs"));
  EXPECT_NE(p.filename().string().find("-seed42"), std::string::npos);
}
