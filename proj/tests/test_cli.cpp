// Copyright 2026 The wordbot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "wordbot/cli.hpp"

using namespace wordbot;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("wordbot_") + info->test_suite_name() + "_" + info->name() + "_" +
            std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

cli::Overrides tiny(Seed seed) {
  return {{"seed", std::to_string(seed)}, {"population", "4"}, {"generations", "2"},
          {"steps", "40"},                {"embedding_dim", "16"}};
}

TrialConfig tiny_config(Seed seed) { return cli::load_config(std::nullopt, tiny(seed)); }

std::string read(const fs::path& p) { return io::read_file(p); }

}  // namespace

using RunCmd = TempDir;
using BatchCmd = TempDir;
using AnalyzeCmd = TempDir;
using ReplayCmd = TempDir;
using EmbedCmd = TempDir;

TEST_F(RunCmd, WritesThreeFilesAndIsByteReproducible) {
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_run({std::nullopt, tiny(3), dir_ / "a"}, log), cli::kOk) << log.str();
  for (const char* f : {cli::kChampionFile, cli::kLedgerFile, cli::kSummaryFile})
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  ASSERT_EQ(cli::cmd_run({std::nullopt, tiny(3), dir_ / "b"}, log), cli::kOk);
  for (const char* f : {cli::kChampionFile, cli::kLedgerFile, cli::kSummaryFile})
    EXPECT_EQ(read(dir_ / "a" / f), read(dir_ / "b" / f)) << f;
  const auto summary = nlohmann::json::parse(read(dir_ / "a" / cli::kSummaryFile));
  EXPECT_EQ(summary["seed"], 3);
  std::istringstream ledger(read(dir_ / "a" / cli::kLedgerFile));
  std::string line;
  int lines = 0;
  while (std::getline(ledger, line)) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST_F(RunCmd, InvalidConfigExitsTwo) {
  std::ostringstream log;
  auto o = tiny(1);
  o["generations"] = "0";
  EXPECT_EQ(cli::cmd_run({std::nullopt, o, dir_ / "x"}, log), cli::kInvalidInput);
  o = tiny(1);
  o["morphology"] = "hexapod";
  EXPECT_EQ(cli::cmd_run({std::nullopt, o, dir_ / "x"}, log), cli::kInvalidInput);
  EXPECT_EQ(cli::cmd_run({dir_ / "missing.cfg", tiny(1), dir_ / "x"}, log), cli::kInvalidInput);
  EXPECT_FALSE(fs::exists(dir_ / "x" / cli::kSummaryFile));
}

TEST_F(RunCmd, ConfigFileAndOverrides) {
  io::write_file_atomic(dir_ / "t.cfg", format_config(tiny_config(5)));
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_run({dir_ / "t.cfg", {{"seed", "6"}}, dir_ / "o"}, log), cli::kOk) << log.str();
  const auto s = nlohmann::json::parse(read(dir_ / "o" / cli::kSummaryFile));
  EXPECT_EQ(s["seed"], 6);
  EXPECT_EQ(s["population"], 4);
}

TEST(Manifest, RoundTripAndDuplicateSeeds) {
  auto m = cli::make_grid(tiny_config(1), {MorphologyId::kMinimal, MorphologyId::kQuadruped},
                          {Treatment::kExperimental, Treatment::kControl}, 3, 100);
  ASSERT_EQ(m.trials.size(), 12u);
  std::set<Seed> seeds;
  for (const auto& t : m.trials) seeds.insert(t.config.seed);
  EXPECT_EQ(seeds.size(), 12u);
  m.trials[2].status = cli::TrialStatus::kFailed;
  m.trials[2].error = "boom";
  const auto back = cli::parse_manifest(cli::manifest_json(m));
  ASSERT_EQ(back.trials.size(), m.trials.size());
  for (std::size_t i = 0; i < m.trials.size(); ++i) {
    EXPECT_EQ(back.trials[i].config, m.trials[i].config);
    EXPECT_EQ(back.trials[i].status, m.trials[i].status);
    EXPECT_EQ(back.trials[i].error, m.trials[i].error);
  }
  m.trials[1].config.seed = m.trials[0].config.seed;
  EXPECT_THROW(cli::parse_manifest(cli::manifest_json(m)), ConfigError);
}

TEST_F(BatchCmd, RunsInParallelAndIsIdempotent) {
  const auto m = cli::make_grid(tiny_config(1), {MorphologyId::kSphere1dSensors},
                                {Treatment::kExperimental, Treatment::kControl}, 2, 10);
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(m));
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_batch({dir_ / "m.json", 2, std::nullopt}, log), cli::kOk) << log.str();
  const fs::path root = dir_ / "results";
  std::map<Seed, std::string> first;
  for (Seed s = 10; s < 14; ++s) first[s] = read(root / cli::trial_dir_name(s) / cli::kSummaryFile);
  const auto index = nlohmann::json::parse(read(root / "index.json"));
  EXPECT_EQ(index.size(), 4u);
  for (const auto& e : index) EXPECT_EQ(e["status"], "done");

  // Parallel output matches a sequential single run.
  ASSERT_EQ(cli::cmd_run({std::nullopt, tiny(12), dir_ / "solo"}, log), cli::kOk);
  auto o = tiny(12);
  o["treatment"] = "control";
  ASSERT_EQ(cli::cmd_run({std::nullopt, o, dir_ / "solo"}, log), cli::kOk);
  EXPECT_EQ(read(dir_ / "solo" / cli::kSummaryFile), first[12]);

  const auto before = fs::last_write_time(root / cli::trial_dir_name(10) / cli::kSummaryFile);
  std::ostringstream log2;
  ASSERT_EQ(cli::cmd_batch({dir_ / "m.json", 2, std::nullopt}, log2), cli::kOk);
  EXPECT_EQ(log2.str().find("done trial_"), std::string::npos) << log2.str();
  EXPECT_EQ(fs::last_write_time(root / cli::trial_dir_name(10) / cli::kSummaryFile), before);
}

TEST_F(BatchCmd, ResumesAfterInterruption) {
  const auto m = cli::make_grid(tiny_config(1), {MorphologyId::kMinimal},
                                {Treatment::kExperimental, Treatment::kControl}, 2, 20);
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(m));
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_batch({dir_ / "m.json", 1, 1}, log), cli::kFailure);
  auto state = cli::parse_manifest(read(dir_ / "m.json"));
  std::size_t done = 0;
  for (const auto& t : state.trials) done += t.status == cli::TrialStatus::kDone;
  EXPECT_EQ(done, 1u);

  // A trial left "running" by a killed process is rerun.
  state.trials[0].status = cli::TrialStatus::kRunning;
  fs::remove(dir_ / "results" / cli::trial_dir_name(state.trials[0].config.seed) / cli::kSummaryFile);
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(state));
  ASSERT_EQ(cli::cmd_batch({dir_ / "m.json", 1, std::nullopt}, log), cli::kOk) << log.str();
  for (const auto& t : cli::parse_manifest(read(dir_ / "m.json")).trials) {
    EXPECT_EQ(t.status, cli::TrialStatus::kDone);
    EXPECT_TRUE(fs::exists(dir_ / "results" / cli::trial_dir_name(t.config.seed) / cli::kSummaryFile));
  }
}

TEST_F(BatchCmd, FailedTrialIsReported) {
  auto m = cli::make_grid(tiny_config(1), {MorphologyId::kMinimal}, {Treatment::kExperimental}, 2, 30);
  m.trials[1].config.embedding = (dir_ / "no_such.bin").string();
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(m));
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_batch({dir_ / "m.json", 1, std::nullopt}, log), cli::kFailure);
  EXPECT_NE(log.str().find("failed trials: trial_31"), std::string::npos) << log.str();
  const auto state = cli::parse_manifest(read(dir_ / "m.json"));
  EXPECT_EQ(state.trials[0].status, cli::TrialStatus::kDone);
  EXPECT_EQ(state.trials[1].status, cli::TrialStatus::kFailed);
  EXPECT_FALSE(state.trials[1].error.empty());
}

TEST_F(AnalyzeCmd, WritesParseableTables) {
  const auto m = cli::make_grid(tiny_config(1), {MorphologyId::kSphere1dSensors},
                                {Treatment::kExperimental, Treatment::kControl}, 2, 40);
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(m));
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_batch({dir_ / "m.json", 1, std::nullopt}, log), cli::kOk);
  cli::AnalyzeOptions opt;
  opt.results = dir_ / "results";
  opt.analysis.bootstrap_iterations = 100;
  ASSERT_EQ(cli::cmd_analyze(opt, log), cli::kOk) << log.str();
  const fs::path out = dir_ / "results" / "analysis";
  const auto groups = io::parse_csv(read(out / "groups.csv"));
  EXPECT_EQ(groups.rows.size(), 2u * analysis::kMeasures.size());
  const auto comps = io::parse_csv(read(out / "comparisons.csv"));
  EXPECT_EQ(comps.rows.size(), analysis::kComparisonsPerPanel);
  const auto& col = comps.column("p_adjusted");
  for (const auto& r : comps.rows) {
    const double p = std::stod(r[col]);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  const auto longt = io::parse_csv(read(out / "long.csv"));
  EXPECT_EQ(longt.rows.size(), 4u * analysis::kMeasures.size());
}

TEST_F(AnalyzeCmd, SingleTrialGroupsWarnAndPinInterval) {
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_run({std::nullopt, tiny(1), dir_ / "r" / "trial_1"}, log), cli::kOk);
  cli::AnalyzeOptions opt;
  opt.results = dir_ / "r";
  ASSERT_EQ(cli::cmd_analyze(opt, log), cli::kOk) << log.str();
  EXPECT_NE(log.str().find("warning:"), std::string::npos);
  const auto groups = io::parse_csv(read(dir_ / "r" / "analysis" / "groups.csv"));
  for (const auto& r : groups.rows) {
    EXPECT_EQ(r[groups.column("n")], "1");
    EXPECT_EQ(r[groups.column("ci_lo")], r[groups.column("median")]);
    EXPECT_EQ(r[groups.column("ci_hi")], r[groups.column("median")]);
  }
}

TEST_F(AnalyzeCmd, MissingOrEmptyInputs) {
  std::ostringstream log;
  cli::AnalyzeOptions opt;
  opt.results = dir_ / "nope";
  EXPECT_EQ(cli::cmd_analyze(opt, log), cli::kInvalidInput);
  fs::create_directories(dir_ / "empty");
  opt.results = dir_ / "empty";
  EXPECT_EQ(cli::cmd_analyze(opt, log), cli::kFailure);
}

TEST_F(AnalyzeCmd, GroupWithoutCompletedTrialsFails) {
  auto m = cli::make_grid(tiny_config(1), {MorphologyId::kMinimal},
                          {Treatment::kExperimental, Treatment::kControl}, 1, 50);
  m.trials[1].config.embedding = (dir_ / "no_such.bin").string();
  io::write_file_atomic(dir_ / "m.json", cli::manifest_json(m));
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_batch({dir_ / "m.json", 1, std::nullopt}, log), cli::kFailure);
  cli::AnalyzeOptions opt;
  opt.results = dir_ / "results";
  std::ostringstream alog;
  EXPECT_EQ(cli::cmd_analyze(opt, alog), cli::kFailure);
  EXPECT_NE(alog.str().find("minimal:C"), std::string::npos) << alog.str();
}

TEST_F(AnalyzeCmd, BudgetMismatchFails) {
  std::ostringstream log;
  for (Seed s : {1, 2}) {
    auto o = tiny(s);
    ASSERT_EQ(cli::cmd_run({std::nullopt, o, dir_ / "r" / cli::trial_dir_name(s)}, log), cli::kOk);
  }
  cli::AnalyzeOptions opt;
  opt.results = dir_ / "r";
  opt.analysis.declared_budget = 1;
  EXPECT_EQ(cli::cmd_analyze(opt, log), cli::kFailure);
}

TEST_F(ReplayCmd, ReproducesStoredScores) {
  std::ostringstream log;
  auto o = tiny(7);
  o["generations"] = "3";
  ASSERT_EQ(cli::cmd_run({std::nullopt, o, dir_ / "t"}, log), cli::kOk);
  const auto summary = nlohmann::json::parse(read(dir_ / "t" / cli::kSummaryFile));
  for (const auto& stored : summary["training"]) {
    const std::string word = stored["word"];
    ASSERT_EQ(cli::cmd_replay({dir_ / "t" / cli::kChampionFile, word, std::nullopt}, log), cli::kOk);
    const auto r = nlohmann::json::parse(read(dir_ / "t" / ("replay_" + word) / "replay.json"));
    EXPECT_EQ(r["score"].get<double>(), stored["score"].get<double>()) << word;
    EXPECT_FALSE(r["heldout"].get<bool>());
  }
  const std::string held = summary["heldout"];
  ASSERT_EQ(cli::cmd_replay({dir_ / "t" / cli::kChampionFile, held, dir_ / "h"}, log), cli::kOk);
  const auto r = nlohmann::json::parse(read(dir_ / "h" / "replay.json"));
  EXPECT_TRUE(r["heldout"].get<bool>());
  EXPECT_EQ(r["dist_bl"].get<double>(), summary["test_error"].get<double>());
  const auto hidden = io::parse_csv(read(dir_ / "h" / "hidden.csv"));
  EXPECT_EQ(hidden.rows.size(), 16u);
  EXPECT_EQ(hidden.header[0], "element");
  const auto traj = io::parse_csv(read(dir_ / "h" / "trajectory.csv"));
  EXPECT_EQ(traj.rows.size(), 40u);
}

TEST_F(ReplayCmd, UnknownWordExitsTwo) {
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_run({std::nullopt, tiny(7), dir_ / "t"}, log), cli::kOk);
  EXPECT_EQ(cli::cmd_replay({dir_ / "t" / cli::kChampionFile, "jump", std::nullopt}, log),
            cli::kInvalidInput);
  EXPECT_EQ(cli::cmd_replay({dir_ / "none.genome", "stop", std::nullopt}, log), cli::kInvalidInput);
}

TEST_F(EmbedCmd, SynthThenCosine) {
  io::write_file_atomic(dir_ / "g.txt", "a b\n1 0.3\n0.3 1\n");
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_embed_synth(dir_ / "g.txt", 1, 1, dir_ / "v.bin", log), cli::kInvalidInput);
  ASSERT_EQ(cli::cmd_embed_synth(dir_ / "g.txt", 8, 1, dir_ / "v.bin", log), cli::kOk) << log.str();
  std::ostringstream out;
  ASSERT_EQ(cli::cmd_embed_cos(dir_ / "v.bin", "a", "b", out, log), cli::kOk);
  EXPECT_EQ(out.str(), "0.300000\n");
  EXPECT_EQ(cli::cmd_embed_cos(dir_ / "v.bin", "a", "zzz", out, log), cli::kInvalidInput);
}
