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

#include "hazboost/evaluate.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hazboost/predict.h"

namespace hazboost {
namespace {

// Held-out log-hazard kept in step with a fit through the round callback.
class HeldOutTracker {
 public:
  HeldOutTracker(const PreprocessedData& data, double f0, double learning_rate)
      : matrix_(TrainingMatrix::Coalesced(data)),
        num_subjects_(static_cast<double>(data.num_subjects())),
        learning_rate_(learning_rate),
        log_hazard_(matrix_.num_rows(), f0) {}

  void Apply(const Tree& tree) {
    for (std::size_t r = 0; r < log_hazard_.size(); ++r) {
      const std::size_t leaf = tree.Route([&](std::size_t axis) { return matrix_.codes(axis)[r]; });
      log_hazard_[r] = log_hazard_[r] - learning_rate_ * tree.nodes[leaf].value;
    }
  }
  double Risk() const { return LikelihoodRisk(matrix_, log_hazard_, num_subjects_); }

 private:
  TrainingMatrix matrix_;
  double num_subjects_;
  double learning_rate_;
  std::vector<double> log_hazard_;
};

}  // namespace

double Rmse(const BoostedModel& model, const Dataset& test, const HazardFunction& truth,
            int threads) {
  if (test.empty()) throw DataError("RMSE needs a nonempty test set");
  const std::size_t rows = test.num_rows();
  std::vector<double> sq(rows);
  const auto count = static_cast<std::int64_t>(rows);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const double mid = 0.5 * (test.t_start(r) + test.t_end(r));
    const double diff = PredictHazard(model, mid, test.covariates(r)) - truth(mid, test.covariates(r));
    sq[r] = diff * diff;
  }
  double sum = 0.0;
  for (double v : sq) sum += v;
  return std::sqrt(sum / static_cast<double>(rows));
}

double HeldOutRisk(const BoostedModel& model, const PreprocessedData& data) {
  if (data.num_subjects() == 0) throw DataError("held-out data has no subjects");
  return LikelihoodRisk(data, RowLogHazard(model, data), static_cast<double>(data.num_subjects()));
}

void TuneGrid::Validate() const {
  if (depths.empty() || rounds.empty() || learning_rates.empty()) {
    throw ConfigError("tuning grid lists must be nonempty");
  }
  for (int d : depths) {
    if (d < 0) throw ConfigError(fmt::format("tuning depth must be >= 0, got {}", d));
  }
  for (int m : rounds) {
    if (m < 0) throw ConfigError(fmt::format("tuning rounds must be >= 0, got {}", m));
  }
  for (double v : learning_rates) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw ConfigError(fmt::format("tuning learning rate must be in (0, 1], got {}", v));
    }
  }
  if (folds < 2) throw ConfigError(fmt::format("folds must be >= 2, got {}", folds));
}

std::vector<std::uint32_t> AssignFolds(std::size_t num_subjects, std::size_t folds,
                                       std::uint64_t seed) {
  std::vector<std::uint32_t> order(num_subjects);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed);
  for (std::size_t i = num_subjects; i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  std::vector<std::uint32_t> fold(num_subjects);
  for (std::size_t i = 0; i < num_subjects; ++i) {
    fold[order[i]] = static_cast<std::uint32_t>(i % folds);
  }
  return fold;
}

TuneResult KFoldTune(const PreprocessedData& data, const TuneGrid& grid, const BoostConfig& base) {
  grid.Validate();
  base.Validate();
  const std::size_t n = data.num_subjects();
  const std::size_t k_folds = grid.folds;
  if (k_folds > n) {
    throw ConfigError(fmt::format("{} folds requested for {} subjects", k_folds, n));
  }

  TuneResult result;
  const auto fold_of = AssignFolds(n, k_folds, grid.seed);
  std::vector<PreprocessedData> train(k_folds), held(k_folds);
  result.fold_valid.assign(k_folds, true);
  for (std::size_t f = 0; f < k_folds; ++f) {
    std::vector<std::uint32_t> in, out;
    for (std::uint32_t s = 0; s < n; ++s) (fold_of[s] == f ? out : in).push_back(s);
    train[f] = data.SelectSubjects(in);
    held[f] = data.SelectSubjects(out);
    if (train[f].total_events == 0 || held[f].total_events == 0) {
      result.fold_valid[f] = false;
      result.warnings.push_back(
          fmt::format("fold {} excluded: its {} part has no events", f + 1,
                      train[f].total_events == 0 ? "training" : "held-out"));
    }
  }
  if (std::none_of(result.fold_valid.begin(), result.fold_valid.end(), [](bool v) { return v; })) {
    throw DataError("no valid cross-validation fold: every fold lacks events");
  }

  std::vector<int> checkpoints = grid.rounds;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const int max_rounds = checkpoints.back();

  // risk[(depth, rate)][fold][checkpoint]
  std::map<std::pair<int, double>, std::vector<std::vector<double>>> risk;
  for (int depth : grid.depths) {
    for (double rate : grid.learning_rates) {
      auto& cell = risk[{depth, rate}];
      if (!cell.empty()) continue;
      cell.assign(k_folds, std::vector<double>(checkpoints.size(), kMissing));
      for (std::size_t f = 0; f < k_folds; ++f) {
        if (!result.fold_valid[f]) continue;
        BoostConfig config = base;
        config.max_depth = depth;
        config.learning_rate = rate;
        config.num_rounds = max_rounds;
        const double f0 = ComputeF0(train[f]);
        HeldOutTracker tracker(held[f], f0, rate);
        std::size_t next = 0;
        auto& out = cell[f];
        while (next < checkpoints.size() && checkpoints[next] == 0) out[next++] = tracker.Risk();
        Fit(train[f], config, [&](std::size_t round, const Tree& tree) {
          tracker.Apply(tree);
          while (next < checkpoints.size() && checkpoints[next] == static_cast<int>(round) + 1) {
            out[next++] = tracker.Risk();
          }
        });
        // A fit that stopped early keeps its final risk for larger M.
        const double last = tracker.Risk();
        while (next < checkpoints.size()) out[next++] = last;
      }
    }
  }

  bool have_best = false;
  std::tuple<double, int, int, double> best_key;
  for (int depth : grid.depths) {
    for (int rounds : grid.rounds) {
      for (double rate : grid.learning_rates) {
        const auto& cell = risk.at({depth, rate});
        const std::size_t c = static_cast<std::size_t>(
            std::lower_bound(checkpoints.begin(), checkpoints.end(), rounds) - checkpoints.begin());
        CvRow row{depth, rounds, rate, {}, 0.0};
        double sum = 0.0;
        std::size_t valid = 0;
        for (std::size_t f = 0; f < k_folds; ++f) {
          row.fold_risk.push_back(cell[f][c]);
          if (result.fold_valid[f]) {
            sum += cell[f][c];
            ++valid;
          }
        }
        row.mean_risk = sum / static_cast<double>(valid);
        const auto key = std::make_tuple(row.mean_risk, depth, rounds, rate);
        if (!have_best || key < best_key) {
          best_key = key;
          have_best = true;
        }
        result.table.push_back(std::move(row));
      }
    }
  }
  result.best = base;
  result.best.max_depth = std::get<1>(best_key);
  result.best.num_rounds = std::get<2>(best_key);
  result.best.learning_rate = std::get<3>(best_key);
  result.best_risk = std::get<0>(best_key);
  return result;
}

TuneResult KFoldTune(const Dataset& dataset, const TuneGrid& grid, const BoostConfig& base) {
  const CandidateGrid candidates = BuildGrid(dataset, base.max_bins, base.quantile_mode);
  return KFoldTune(Preprocess(dataset, candidates), grid, base);
}

void WriteCvTable(const TuneResult& result, std::ostream& out) {
  const std::size_t folds = result.fold_valid.size();
  out << "depth,rounds,learning_rate";
  for (std::size_t f = 0; f < folds; ++f) out << ",fold_" << f + 1;
  out << ",mean\n";
  for (const auto& row : result.table) {
    out << row.depth << ',' << row.rounds << ',' << FormatNumber(row.learning_rate);
    for (double v : row.fold_risk) out << ',' << FormatNumber(v);
    out << ',' << FormatNumber(row.mean_risk) << '\n';
  }
}

std::string BoostConfigToJson(const BoostConfig& c) {
  const nlohmann::json j{{"max_depth", c.max_depth},
                         {"num_rounds", c.num_rounds},
                         {"learning_rate", c.learning_rate},
                         {"min_child_events", c.min_child_events},
                         {"min_child_weight", c.min_child_weight},
                         {"quantile_mode", std::string(ToString(c.quantile_mode))},
                         {"max_bins", c.max_bins},
                         {"seed", c.seed}};
  return j.dump(2);
}

BoostConfig BoostConfigFromJson(std::string_view text) {
  BoostConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.num_rounds = j.value("num_rounds", c.num_rounds);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_child_events = j.value("min_child_events", c.min_child_events);
    c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
    if (j.contains("quantile_mode")) {
      c.quantile_mode = ParseQuantileMode(j["quantile_mode"].get<std::string>());
    }
    c.max_bins = j.value("max_bins", c.max_bins);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  c.Validate();
  return c;
}

}  // namespace hazboost
