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

// hazboost command-line front end.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hazboost/boosting.h"
#include "hazboost/dataset.h"
#include "hazboost/evaluate.h"
#include "hazboost/predict.h"
#include "hazboost/preprocess.h"
#include "hazboost/quantiles.h"
#include "hazboost/simulate.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hazboost {
namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out.flush()) throw Error(fmt::format("failed writing '{}'", path.string()));
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

// Run record written next to the primary output as <output>.manifest.json.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  json& config() { return config_; }
  json& results() { return results_; }
  void Input(const fs::path& p) { inputs_.push_back(p.string()); }
  void Output(const fs::path& p) { outputs_.push_back(p.string()); }

  template <typename F>
  auto Time(const std::string& phase, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Stop {
      Manifest* self;
      std::string phase;
      std::chrono::steady_clock::time_point start;
      ~Stop() {
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
        self->timings_[phase] = d.count();
      }
    } stop{this, phase, start};
    return f();
  }

  void Write(const fs::path& primary_output) const {
    json j{{"command", command_},
           {"tool_version", kVersion},
           {"config", config_},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"timings_seconds", timings_}};
    if (!results_.is_null()) j["results"] = results_;
    WriteFile(fs::path(primary_output.string() + ".manifest.json"), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_ = json::object();
  json results_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timings_;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void ApplyThreads(const Common& c) { omp_set_num_threads(c.threads); }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  SimConfig sim;
  fs::path output;
};

int RunSimulate(const SimulateArgs& a) {
  ApplyThreads(a.common);
  SimConfig config = a.sim;
  config.seed = a.common.seed;
  Manifest manifest("simulate");
  const auto data =
      manifest.Time("simulate", [&] { return SimulateDataset(config, a.common.threads); });
  manifest.Time("write", [&] {
    auto out = OpenOutput(a.output);
    WriteCsv(data.dataset, out);
    if (!out.flush()) throw Error(fmt::format("failed writing '{}'", a.output.string()));
    return 0;
  });
  const fs::path truth = a.output.string() + ".truth.json";
  WriteFile(truth, SimConfigToJson(config) + "\n");
  manifest.config() = json::parse(SimConfigToJson(config));
  manifest.config()["threads"] = a.common.threads;
  manifest.Output(a.output);
  manifest.Output(truth);
  manifest.results() = {{"rows", data.dataset.num_rows()},
                        {"subjects", data.dataset.num_subjects()},
                        {"events", data.stats.events},
                        {"epochs_considered", data.stats.epochs_considered},
                        {"epochs_dropped", data.stats.epochs_dropped}};
  manifest.Write(a.output);
  return kOk;
}

// -------------------------------------------------------------- preprocess

struct PreprocessArgs {
  Common common;
  fs::path input;
  fs::path output;
  std::size_t max_bins = kMaxBins;
  std::string mode = "raw";
  fs::path grid;
  fs::path emit_csv;
};

// {"time": [...], "covariates": {"name": [...], ...}}; unlisted covariates get
// no candidates.
CandidateGrid GridFromJson(const std::string& text, const Dataset& dataset) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed grid file: {}", e.what()));
  }
  std::vector<double> time = j.value("time", std::vector<double>{});
  std::vector<std::vector<double>> cov(dataset.num_covariates());
  if (j.contains("covariates")) {
    for (const auto& [name, values] : j["covariates"].items()) {
      const auto& names = dataset.covariate_names();
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError(fmt::format("grid names unknown covariate '{}'", name));
      cov[static_cast<std::size_t>(it - names.begin())] = values.get<std::vector<double>>();
    }
  }
  return MakeGrid(std::move(time), std::move(cov), &dataset);
}

int RunPreprocess(const PreprocessArgs& a) {
  ApplyThreads(a.common);
  Manifest manifest("preprocess");
  const Dataset dataset = manifest.Time("read", [&] { return LoadCsv(a.input); });
  const QuantileMode mode = ParseQuantileMode(a.mode);
  if (a.max_bins < 1 || a.max_bins > kMaxBins) {
    throw ConfigError(fmt::format("--max-bins must be in [1, {}]", kMaxBins));
  }
  const CandidateGrid grid = manifest.Time("grid", [&] {
    return a.grid.empty() ? BuildGrid(dataset, a.max_bins, mode)
                          : GridFromJson(ReadFile(a.grid), dataset);
  });
  const PreprocessedData data = manifest.Time("preprocess", [&] { return Preprocess(dataset, grid); });
  manifest.Time("write", [&] {
    SavePreprocessed(data, a.output);
    return 0;
  });
  manifest.Input(a.input);
  manifest.Output(a.output);
  if (!a.grid.empty()) manifest.Input(a.grid);
  if (!a.emit_csv.empty()) {
    auto out = OpenOutput(a.emit_csv);
    WritePreprocessedCsv(data, out);
    manifest.Output(a.emit_csv);
  }
  manifest.config() = {{"max_bins", a.max_bins},
                       {"quantile_mode", a.mode},
                       {"explicit_grid", !a.grid.empty()},
                       {"seed", a.common.seed},
                       {"threads", a.common.threads}};
  manifest.results() = {{"input_rows", dataset.num_rows()},
                        {"rows", data.num_rows()},
                        {"subjects", data.num_subjects()},
                        {"events", data.total_events},
                        {"total_weight", data.total_weight}};
  manifest.Write(a.output);
  return kOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  fs::path input;
  fs::path output;
  fs::path config;
  int depth = 3;
  int rounds = 100;
  double learning_rate = 0.1;
  double min_child_events = 1.0;
  double min_child_weight = 0.0;
};

int RunTrain(const TrainArgs& a, const CLI::App& cmd) {
  ApplyThreads(a.common);
  Manifest manifest("train");
  BoostConfig config;
  if (!a.config.empty()) {
    config = BoostConfigFromJson(ReadFile(a.config));
    manifest.Input(a.config);
  }
  auto given = [&](const char* flag) { return a.config.empty() || cmd.count(flag) > 0; };
  if (given("--depth")) config.max_depth = a.depth;
  if (given("--rounds")) config.num_rounds = a.rounds;
  if (given("--learning-rate")) config.learning_rate = a.learning_rate;
  if (given("--min-child-events")) config.min_child_events = a.min_child_events;
  if (given("--min-child-weight")) config.min_child_weight = a.min_child_weight;
  config.seed = a.common.seed;
  config.threads = a.common.threads;

  const PreprocessedData data = manifest.Time("read", [&] { return LoadPreprocessed(a.input); });
  config.quantile_mode = data.grid.mode;
  config.max_bins = data.grid.max_bins;
  config.Validate();
  const BoostedModel model = manifest.Time("fit", [&] { return Fit(data, config); });
  manifest.Time("write", [&] {
    SaveModel(model, a.output);
    return 0;
  });
  manifest.Input(a.input);
  manifest.Output(a.output);
  manifest.config() = json::parse(BoostConfigToJson(config));
  manifest.config()["threads"] = a.common.threads;
  manifest.results() = {{"f0", model.f0},
                        {"rounds_completed", model.meta.rounds_completed},
                        {"stopped_early", model.meta.stopped_early},
                        {"risk_trace", model.meta.risk_trace}};
  manifest.Write(a.output);
  return kOk;
}

// -------------------------------------------------------------------- tune

struct TuneArgs {
  Common common;
  fs::path input;
  fs::path output;
  fs::path table;
  std::size_t max_bins = kMaxBins;
  std::string mode = "raw";
  std::vector<int> depths{1, 2, 3, 4, 5};
  std::vector<int> rounds{50, 100, 150, 200, 250, 300};
  std::vector<double> learning_rates{0.1};
  std::size_t folds = 5;
  double min_child_events = 1.0;
  double min_child_weight = 0.0;
};

bool IsPreprocessedFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[6] = {};
  in.read(magic, sizeof magic);
  return in && std::string_view(magic, sizeof magic) == "HZBPRE";
}

int RunTune(const TuneArgs& a) {
  ApplyThreads(a.common);
  Manifest manifest("tune");
  BoostConfig base;
  base.max_bins = a.max_bins;
  base.quantile_mode = ParseQuantileMode(a.mode);
  base.min_child_events = a.min_child_events;
  base.min_child_weight = a.min_child_weight;
  base.seed = a.common.seed;
  base.threads = a.common.threads;
  base.Validate();
  TuneGrid grid;
  grid.depths = a.depths;
  grid.rounds = a.rounds;
  grid.learning_rates = a.learning_rates;
  grid.folds = a.folds;
  grid.seed = a.common.seed;

  const PreprocessedData data = manifest.Time("read", [&] {
    if (IsPreprocessedFile(a.input)) return LoadPreprocessed(a.input);
    const Dataset dataset = LoadCsv(a.input);
    return Preprocess(dataset, BuildGrid(dataset, base.max_bins, base.quantile_mode));
  });
  base.max_bins = data.grid.max_bins;
  base.quantile_mode = data.grid.mode;
  const TuneResult result = manifest.Time("tune", [&] { return KFoldTune(data, grid, base); });
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  WriteFile(a.output, BoostConfigToJson(result.best) + "\n");
  manifest.Input(a.input);
  manifest.Output(a.output);
  if (!a.table.empty()) {
    auto out = OpenOutput(a.table);
    WriteCvTable(result, out);
    manifest.Output(a.table);
  }
  manifest.config() = {{"depths", a.depths},
                       {"rounds", a.rounds},
                       {"learning_rates", a.learning_rates},
                       {"folds", a.folds},
                       {"max_bins", base.max_bins},
                       {"quantile_mode", std::string(ToString(base.quantile_mode))},
                       {"min_child_events", a.min_child_events},
                       {"min_child_weight", a.min_child_weight},
                       {"seed", a.common.seed},
                       {"threads", a.common.threads}};
  manifest.results() = {{"best", json::parse(BoostConfigToJson(result.best))},
                        {"best_risk", result.best_risk},
                        {"warnings", result.warnings}};
  manifest.Write(a.output);
  std::cout << fmt::format("best: depth={} rounds={} learning_rate={} risk={}\n",
                           result.best.max_depth, result.best.num_rounds,
                           result.best.learning_rate, result.best_risk);
  return kOk;
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  Common common;
  fs::path model;
  fs::path input;
  fs::path output;
  std::string time_column = "t";
};

int RunPredict(const PredictArgs& a) {
  ApplyThreads(a.common);
  Manifest manifest("predict");
  const BoostedModel model = manifest.Time("load", [&] { return LoadModel(a.model); });
  const QueryBatch batch = manifest.Time("read", [&] {
    std::ifstream in(a.input);
    if (!in) throw DataError(fmt::format("cannot open '{}'", a.input.string()));
    return ReadQueryCsv(in, model.covariate_names, a.time_column);
  });
  const Predictions predictions =
      manifest.Time("predict", [&] { return PredictHazard(model, batch, a.common.threads); });
  if (predictions.num_out_of_range > 0) {
    std::cerr << fmt::format("warning: {} of {} queries outside the training range were clamped\n",
                             predictions.num_out_of_range, batch.size());
  }
  {
    auto out = OpenOutput(a.output);
    WritePredictionCsv(batch, model.covariate_names, predictions, out, a.time_column);
  }
  manifest.Input(a.model);
  manifest.Input(a.input);
  manifest.Output(a.output);
  manifest.config() = {{"time_column", a.time_column},
                       {"seed", a.common.seed},
                       {"threads", a.common.threads}};
  manifest.results() = {{"queries", batch.size()},
                        {"out_of_range", predictions.num_out_of_range}};
  manifest.Write(a.output);
  return kOk;
}

// -------------------------------------------------------------- importance

struct ImportanceArgs {
  Common common;
  fs::path model;
  fs::path output;
};

int RunImportance(const ImportanceArgs& a) {
  ApplyThreads(a.common);
  Manifest manifest("importance");
  const BoostedModel model = LoadModel(a.model);
  const auto relative = VariableImportance(model);
  std::ostringstream text;
  text << "axis,name,importance,relative\n";
  for (std::size_t axis = 0; axis < relative.size(); ++axis) {
    const std::string name = axis == kTimeAxis ? "time" : model.covariate_names[axis - 1];
    text << axis << ',' << name << ',' << FormatNumber(model.importance_raw[axis]) << ','
         << FormatNumber(relative[axis]) << '\n';
  }
  std::cout << text.str();
  WriteFile(a.output, text.str());
  manifest.Input(a.model);
  manifest.Output(a.output);
  manifest.config() = {{"seed", a.common.seed}, {"threads", a.common.threads}};
  manifest.Write(a.output);
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  Common common;
  fs::path model;
  fs::path input;
  fs::path truth;
  fs::path output;
};

int RunEvaluate(const EvaluateArgs& a) {
  ApplyThreads(a.common);
  Manifest manifest("evaluate");
  const BoostedModel model = LoadModel(a.model);
  const SimConfig sim = SimConfigFromJson(ReadFile(a.truth));
  const HazardOracle oracle{sim.hazard_id, sim.constant_rate, 0};
  const Dataset test = manifest.Time("read", [&] { return LoadCsv(a.input); });
  const double rmse =
      manifest.Time("rmse", [&] { return Rmse(model, test, oracle, a.common.threads); });
  std::cout << fmt::format("rmse {}\n", rmse);
  const json result{{"rmse", rmse}, {"points", test.num_rows()}};
  WriteFile(a.output, result.dump(2) + "\n");
  manifest.Input(a.model);
  manifest.Input(a.input);
  manifest.Input(a.truth);
  manifest.Output(a.output);
  manifest.config() = {{"query_points", "epoch midpoints"},
                       {"seed", a.common.seed},
                       {"threads", a.common.threads}};
  manifest.results() = result;
  manifest.Write(a.output);
  return kOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"hazboost: boosted nonparametric hazard estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate survival data with a known hazard");
  c_sim->add_option("--hazard", sim.sim.hazard_id, "Hazard id: 1-4, or 0 for a constant rate")
      ->capture_default_str();
  c_sim->add_option("--subjects", sim.sim.num_subjects, "Number of subjects")->capture_default_str();
  c_sim->add_option("--irrelevant", sim.sim.num_irrelevant, "Extra noise covariates")
      ->capture_default_str();
  c_sim->add_option("--p-drop", sim.sim.p_drop, "Per-epoch probability of not being at risk")
      ->capture_default_str();
  c_sim->add_flag("--recurring", sim.sim.recurring, "Subjects stay at risk after an event");
  c_sim->add_option("--max-events", sim.sim.max_events, "Event cap per subject (0 = none)")
      ->capture_default_str();
  c_sim->add_option("--epochs", sim.sim.num_epochs, "Covariate-update intervals per horizon")
      ->capture_default_str();
  c_sim->add_option("--rate", sim.sim.constant_rate, "Rate of the constant hazard")
      ->capture_default_str();
  c_sim->add_option("--horizon", sim.sim.horizon, "Horizon (constant hazard only; 0 = default)")
      ->capture_default_str();
  c_sim->add_option("-o,--output", sim.output, "Output CSV")->required();
  AddCommon(c_sim, sim.common);

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Bin a dataset into boosting rows");
  c_pre->add_option("-i,--input", pre.input, "Input dataset CSV")->required()->check(CLI::ExistingFile);
  c_pre->add_option("-o,--output", pre.output, "Output binary file")->required();
  c_pre->add_option("--max-bins", pre.max_bins, "Candidate splits per axis")->capture_default_str();
  c_pre->add_option("--quantile-mode", pre.mode, "raw or weighted")
      ->capture_default_str()
      ->check(CLI::IsMember({"raw", "weighted"}));
  c_pre->add_option("--grid", pre.grid, "JSON file with explicit candidate splits")
      ->check(CLI::ExistingFile);
  c_pre->add_option("--emit-csv", pre.emit_csv, "Also write a readable CSV dump");
  AddCommon(c_pre, pre.common);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit a boosted hazard model");
  c_train->add_option("-i,--input", train.input, "Preprocessed file")->required()->check(CLI::ExistingFile);
  c_train->add_option("-o,--output", train.output, "Output model file")->required();
  c_train->add_option("--config", train.config, "JSON config, e.g. from tune; flags override it")
      ->check(CLI::ExistingFile);
  c_train->add_option("--depth", train.depth, "Tree depth")->capture_default_str();
  c_train->add_option("--rounds", train.rounds, "Boosting rounds")->capture_default_str();
  c_train->add_option("--learning-rate", train.learning_rate, "Learning rate in (0, 1]")
      ->capture_default_str();
  c_train->add_option("--min-child-events", train.min_child_events, "Minimum events per child")
      ->capture_default_str();
  c_train->add_option("--min-child-weight", train.min_child_weight, "Minimum at-risk time per child")
      ->capture_default_str();
  AddCommon(c_train, train.common);

  TuneArgs tune;
  auto* c_tune = app.add_subcommand("tune", "Cross-validate depth, rounds and learning rate");
  c_tune->add_option("-i,--input", tune.input, "Dataset CSV or preprocessed file")
      ->required()
      ->check(CLI::ExistingFile);
  c_tune->add_option("-o,--output", tune.output, "Best config (JSON)")->required();
  c_tune->add_option("--table", tune.table, "CV table CSV");
  c_tune->add_option("--max-bins", tune.max_bins, "Candidate splits per axis (CSV input)")
      ->capture_default_str();
  c_tune->add_option("--quantile-mode", tune.mode, "raw or weighted (CSV input)")
      ->capture_default_str()
      ->check(CLI::IsMember({"raw", "weighted"}));
  c_tune->add_option("--depths", tune.depths, "Depth grid")->delimiter(',')->capture_default_str();
  c_tune->add_option("--rounds", tune.rounds, "Rounds grid")->delimiter(',')->capture_default_str();
  c_tune->add_option("--learning-rates", tune.learning_rates, "Learning-rate grid")
      ->delimiter(',')
      ->capture_default_str();
  c_tune->add_option("--folds", tune.folds, "Number of folds")->capture_default_str();
  c_tune->add_option("--min-child-events", tune.min_child_events, "Minimum events per child")
      ->capture_default_str();
  c_tune->add_option("--min-child-weight", tune.min_child_weight, "Minimum at-risk time per child")
      ->capture_default_str();
  AddCommon(c_tune, tune.common);

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Evaluate the hazard at query points");
  c_pred->add_option("-m,--model", pred.model, "Model file")->required()->check(CLI::ExistingFile);
  c_pred->add_option("-i,--input", pred.input, "Query CSV: time column plus covariates")
      ->required()
      ->check(CLI::ExistingFile);
  c_pred->add_option("-o,--output", pred.output, "Output CSV with a hazard column")->required();
  c_pred->add_option("--time-column", pred.time_column, "Name of the time column")
      ->capture_default_str();
  AddCommon(c_pred, pred.common);

  ImportanceArgs imp;
  auto* c_imp = app.add_subcommand("importance", "Relative variable importance of a model");
  c_imp->add_option("-m,--model", imp.model, "Model file")->required()->check(CLI::ExistingFile);
  c_imp->add_option("-o,--output", imp.output, "Output CSV")->required();
  AddCommon(c_imp, imp.common);

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "RMSE against a simulated ground truth");
  c_eval->add_option("-m,--model", eval.model, "Model file")->required()->check(CLI::ExistingFile);
  c_eval->add_option("-i,--input", eval.input, "Test dataset CSV")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--truth", eval.truth, "Ground-truth JSON written by simulate")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("-o,--output", eval.output, "Output JSON")->required();
  AddCommon(c_eval, eval.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_sim) return RunSimulate(sim);
    if (*c_pre) return RunPreprocess(pre);
    if (*c_train) return RunTrain(train, *c_train);
    if (*c_tune) return RunTune(tune);
    if (*c_pred) return RunPredict(pred);
    if (*c_imp) return RunImportance(imp);
    if (*c_eval) return RunEvaluate(eval);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace
}  // namespace hazboost

int main(int argc, char** argv) { return hazboost::Main(argc, argv); }
