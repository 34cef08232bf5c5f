// Copyright 2026 The hazboost Authors.
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

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hazboost/evaluate.h"
#include "hazboost/predict.h"
#include "hazboost/preprocess.h"
#include "hazboost/simulate.h"
#include "support/test_util.h"

namespace hazboost {
namespace {

namespace fs = std::filesystem;
using testing::ReadText;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult RunCli(const testing::TempDir& dir, const std::string& args) {
  const fs::path err = dir / "stderr.txt";
  const std::string command = fmt::format("'{}' {} 2>'{}'", HAZBOOST_CLI_PATH, args, err.string());
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.out.append(buffer, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.err = ReadText(err);
  return result;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string P(const fs::path& path) { return "'" + path.string() + "'"; }

class CliTest : public ::testing::Test {
 protected:
  // Simulated data, its preprocessed form and a small model.
  void Pipeline(const std::string& extra_train = "") {
    ASSERT_EQ(RunCli(dir_, fmt::format("simulate --hazard 1 --subjects 150 --seed 3 -o {}",
                                    P(dir_ / "train.csv"))).exit_code, 0);
    ASSERT_EQ(RunCli(dir_, fmt::format("preprocess -i {} -o {} --max-bins 32", P(dir_ / "train.csv"),
                                    P(dir_ / "train.bin"))).exit_code, 0);
    ASSERT_EQ(RunCli(dir_, fmt::format("train -i {} -o {} --depth 2 --rounds 30 {}",
                                    P(dir_ / "train.bin"), P(dir_ / "model.json"), extra_train))
                  .exit_code,
              0);
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, UsageErrorsExitWithOne) {
  EXPECT_EQ(RunCli(dir_, "").exit_code, 1);
  EXPECT_EQ(RunCli(dir_, "frobnicate").exit_code, 1);
  EXPECT_EQ(RunCli(dir_, "train --rounds 5").exit_code, 1);
  EXPECT_EQ(RunCli(dir_, "simulate --hazard 1 --subjects 5 --horizon 3 -o " + P(dir_ / "s.csv")).exit_code, 1);
  EXPECT_EQ(RunCli(dir_, "--help").exit_code, 0);
}

TEST_F(CliTest, DataErrorsExitWithTwo) {
  WriteText(dir_ / "bad.csv", "id,t_start,t_end,x,delta\na,0,1,0.5,1\n");
  const RunResult r = RunCli(dir_, fmt::format("preprocess -i {} -o {}", P(dir_ / "bad.csv"), P(dir_ / "o.bin")));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("subject"), std::string::npos) << r.err;

  WriteText(dir_ / "rows.csv", "subject,t_start,t_end,x,delta\na,0.5,0.2,0.5,1\n");
  const RunResult rows = RunCli(dir_, fmt::format("preprocess -i {} -o {}", P(dir_ / "rows.csv"), P(dir_ / "o.bin")));
  EXPECT_EQ(rows.exit_code, 2);
  EXPECT_NE(rows.err.find(":2:"), std::string::npos) << rows.err;

  WriteText(dir_ / "model.json", "hazboost-model v9\n{}\ncrc32 00000000\n");
  WriteText(dir_ / "q.csv", "t,x1\n0.5,0.5\n");
  EXPECT_EQ(RunCli(dir_, fmt::format("predict -m {} -i {} -o {}", P(dir_ / "model.json"),
                                  P(dir_ / "q.csv"), P(dir_ / "p.csv"))).exit_code,
            2);
}

TEST_F(CliTest, SimulateIsReproducible) {
  for (const char* name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(RunCli(dir_, fmt::format("simulate --hazard 1 --subjects 10 --seed 7 -o {}", P(dir_ / name)))
                  .exit_code,
              0);
  }
  EXPECT_EQ(ReadText(dir_ / "a.csv"), ReadText(dir_ / "b.csv"));
  SimConfig c;
  c.num_subjects = 10;
  c.seed = 7;
  std::ostringstream expected;
  WriteCsv(SimulateDataset(c).dataset, expected);
  EXPECT_EQ(ReadText(dir_ / "a.csv"), expected.str());
  EXPECT_TRUE(fs::exists(dir_ / "a.csv.truth.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a.csv.manifest.json"));
}

TEST_F(CliTest, PreprocessFigureWithExplicitGrid) {
  const fs::path input = testing::DataDir() / "figure_s1.csv";
  WriteText(dir_ / "grid.json", R"({"time": [0.01, 0.10, 0.15], "covariates": {"x": [0.51, 0.81]}})");
  const std::string args = fmt::format("preprocess -i {} --grid {} -o {} --emit-csv {}", P(input),
                                       P(dir_ / "grid.json"), P(dir_ / "f.bin"), P(dir_ / "f.csv"));
  ASSERT_EQ(RunCli(dir_, args).exit_code, 0);
  const Dataset fig = testing::FigureDataset();
  std::ostringstream expected;
  WritePreprocessedCsv(Preprocess(fig, testing::FigureGrid(fig)), expected);
  EXPECT_EQ(ReadText(dir_ / "f.csv"), expected.str());
  EXPECT_EQ(LoadPreprocessed(dir_ / "f.bin"), Preprocess(fig, testing::FigureGrid(fig)));

  const std::string first = ReadText(dir_ / "f.bin");
  ASSERT_EQ(RunCli(dir_, args).exit_code, 0);
  EXPECT_EQ(ReadText(dir_ / "f.bin"), first);
}

TEST_F(CliTest, TrainWritesRiskTraceAndIsReproducible) {
  Pipeline();
  const std::string first = ReadText(dir_ / "model.json");
  const auto manifest = nlohmann::json::parse(ReadText(dir_ / "model.json.manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  const auto trace = manifest["results"]["risk_trace"].get<std::vector<double>>();
  ASSERT_EQ(trace.size(), 31u);
  for (std::size_t m = 1; m < trace.size(); ++m) EXPECT_LE(trace[m], trace[m - 1]);

  ASSERT_EQ(RunCli(dir_, fmt::format("train -i {} -o {} --depth 2 --rounds 30 --threads 3",
                                  P(dir_ / "train.bin"), P(dir_ / "model.json"))).exit_code,
            0);
  EXPECT_EQ(ReadText(dir_ / "model.json"), first);

  // The CLI model equals the library fit.
  BoostConfig config;
  config.max_depth = 2;
  config.num_rounds = 30;
  config.max_bins = 32;
  const BoostedModel lib = Fit(LoadPreprocessed(dir_ / "train.bin"), config);
  EXPECT_EQ(LoadModel(dir_ / "model.json").trees, lib.trees);
}

TEST_F(CliTest, ZeroRoundsGivesConstantModel) {
  Pipeline();
  ASSERT_EQ(RunCli(dir_, fmt::format("train -i {} -o {} --rounds 0", P(dir_ / "train.bin"),
                                  P(dir_ / "zero.json"))).exit_code,
            0);
  const BoostedModel model = LoadModel(dir_ / "zero.json");
  EXPECT_TRUE(model.trees.empty());
  EXPECT_EQ(model.f0, ComputeF0(LoadPreprocessed(dir_ / "train.bin")));
}

TEST_F(CliTest, ConfigFileAndFlagOverride) {
  Pipeline();
  WriteText(dir_ / "cfg.json", R"({"max_depth": 1, "num_rounds": 7, "learning_rate": 0.5})");
  ASSERT_EQ(RunCli(dir_, fmt::format("train -i {} -o {} --config {} --rounds 4", P(dir_ / "train.bin"),
                                  P(dir_ / "c.json"), P(dir_ / "cfg.json"))).exit_code,
            0);
  const BoostedModel model = LoadModel(dir_ / "c.json");
  EXPECT_EQ(model.trees.size(), 4u);
  EXPECT_EQ(model.learning_rate, 0.5);
  EXPECT_EQ(model.meta.config.max_depth, 1);
}

TEST_F(CliTest, PredictMatchesLibrary) {
  Pipeline();
  WriteText(dir_ / "q.csv", "x1,t\n0.2,0.1\n0.5,0.5\n,0.7\n0.9,1.5\n");
  const RunResult r = RunCli(dir_, fmt::format("predict -m {} -i {} -o {}", P(dir_ / "model.json"),
                                            P(dir_ / "q.csv"), P(dir_ / "p.csv")));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("outside"), std::string::npos) << r.err;
  const BoostedModel model = LoadModel(dir_ / "model.json");
  std::ifstream q(dir_ / "q.csv");
  const QueryBatch batch = ReadQueryCsv(q, model.covariate_names);
  std::ostringstream expected;
  WritePredictionCsv(batch, model.covariate_names, PredictHazard(model, batch), expected);
  EXPECT_EQ(ReadText(dir_ / "p.csv"), expected.str());
}

TEST_F(CliTest, ImportanceOfTimeOnlyModel) {
  // The covariate never varies, so only time can be split.
  std::string csv = "subject,t_start,t_end,x,delta\n";
  for (int i = 0; i < 40; ++i) {
    csv += fmt::format("s{},0,{},0.5,{}\n", i, 0.1 + 0.02 * i, int{i % 3 != 0});
  }
  WriteText(dir_ / "time.csv", csv);
  ASSERT_EQ(RunCli(dir_, fmt::format("preprocess -i {} -o {}", P(dir_ / "time.csv"), P(dir_ / "time.bin"))).exit_code, 0);
  ASSERT_EQ(RunCli(dir_, fmt::format("train -i {} -o {} --rounds 10 --depth 2", P(dir_ / "time.bin"),
                                  P(dir_ / "time.json"))).exit_code,
            0);
  const RunResult r = RunCli(dir_, fmt::format("importance -m {} -o {}", P(dir_ / "time.json"), P(dir_ / "imp.csv")));
  ASSERT_EQ(r.exit_code, 0);
  const std::string text = ReadText(dir_ / "imp.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "axis,name,importance,relative");
  const auto time_at = text.find("\n0,time,");
  ASSERT_NE(time_at, std::string::npos) << text;
  const std::string time_line = text.substr(time_at + 1, text.find('\n', time_at + 1) - time_at - 1);
  EXPECT_EQ(time_line.substr(time_line.rfind(',') + 1), "1");
  EXPECT_NE(text.find("\n1,x,0,0\n"), std::string::npos) << text;
}

TEST_F(CliTest, EvaluateMatchesLibraryRmse) {
  Pipeline();
  ASSERT_EQ(RunCli(dir_, fmt::format("simulate --hazard 1 --subjects 60 --seed 4 -o {}", P(dir_ / "test.csv"))).exit_code, 0);
  const RunResult r = RunCli(dir_, fmt::format("evaluate -m {} -i {} --truth {} -o {}", P(dir_ / "model.json"),
                                            P(dir_ / "test.csv"), P(dir_ / "test.csv.truth.json"),
                                            P(dir_ / "eval.json")));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  ASSERT_EQ(r.out.rfind("rmse ", 0), 0u) << r.out;
  const double printed = std::stod(r.out.substr(5));
  const BoostedModel model = LoadModel(dir_ / "model.json");
  const SimulatedData sim = SimulateDataset(SimConfig{.hazard_id = 1, .num_subjects = 60, .seed = 4});
  const double expected = Rmse(model, LoadCsv(dir_ / "test.csv"), sim.oracle);
  EXPECT_EQ(printed, expected);
  EXPECT_EQ(nlohmann::json::parse(ReadText(dir_ / "eval.json"))["rmse"].get<double>(), expected);
}

TEST_F(CliTest, TuneWritesTableAndTrainableConfig) {
  ASSERT_EQ(RunCli(dir_, fmt::format("simulate --hazard 2 --subjects 120 --seed 5 -o {}", P(dir_ / "d.csv"))).exit_code, 0);
  const RunResult r = RunCli(dir_, fmt::format("tune -i {} -o {} --table {} --depths 1,2 --rounds 10,20 --folds 3",
                                            P(dir_ / "d.csv"), P(dir_ / "best.json"), P(dir_ / "cv.csv")));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const BoostConfig best = BoostConfigFromJson(ReadText(dir_ / "best.json"));
  EXPECT_TRUE(best.max_depth == 1 || best.max_depth == 2);
  const std::string table = ReadText(dir_ / "cv.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "depth,rounds,learning_rate,fold_1,fold_2,fold_3,mean");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);

  // Tuning from the preprocessed file gives the same table.
  ASSERT_EQ(RunCli(dir_, fmt::format("preprocess -i {} -o {}", P(dir_ / "d.csv"), P(dir_ / "d.bin"))).exit_code, 0);
  ASSERT_EQ(RunCli(dir_, fmt::format("tune -i {} -o {} --table {} --depths 1,2 --rounds 10,20 --folds 3",
                                  P(dir_ / "d.bin"), P(dir_ / "best2.json"), P(dir_ / "cv2.csv"))).exit_code,
            0);
  EXPECT_EQ(ReadText(dir_ / "cv2.csv"), table);
}

}  // namespace
}  // namespace hazboost
