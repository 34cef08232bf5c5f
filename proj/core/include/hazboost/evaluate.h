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

#ifndef HAZBOOST_EVALUATE_H_
#define HAZBOOST_EVALUATE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazboost/boosting.h"
#include "hazboost/dataset.h"

namespace hazboost {

using HazardFunction = std::function<double(double t, std::span<const double> x)>;

// Root mean squared difference between the model and `truth` at the time
// midpoint of every epoch of `test`, with that epoch's covariates.
double Rmse(const BoostedModel& model, const Dataset& test, const HazardFunction& truth,
            int threads = 1);

// Likelihood risk of `model` on data binned with the model's grid, averaged
// over that data's subjects.
double HeldOutRisk(const BoostedModel& model, const PreprocessedData& data);

struct TuneGrid {
  std::vector<int> depths{1, 2, 3, 4, 5};
  std::vector<int> rounds{50, 100, 150, 200, 250, 300};
  std::vector<double> learning_rates{0.1};
  std::size_t folds = 5;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct CvRow {
  int depth = 0;
  int rounds = 0;
  double learning_rate = 0.0;
  // NaN for an invalid fold.
  std::vector<double> fold_risk;
  double mean_risk = 0.0;
};

struct TuneResult {
  BoostConfig best;
  double best_risk = 0.0;
  std::vector<CvRow> table;
  std::vector<bool> fold_valid;
  std::vector<std::string> warnings;
};

// Fold index of every subject: a seeded shuffle dealt round-robin.
std::vector<std::uint32_t> AssignFolds(std::size_t num_subjects, std::size_t folds,
                                       std::uint64_t seed);

// Subject-grouped K-fold cross-validation of the held-out likelihood risk.
// `base` supplies every setting the grid does not vary. A fold whose training
// or held-out part has no events is excluded with a warning. Ties go to the
// smaller depth, then fewer rounds, then the smaller learning rate.
TuneResult KFoldTune(const PreprocessedData& data, const TuneGrid& grid, const BoostConfig& base);
// Builds the grid from `base.max_bins` and `base.quantile_mode` on the whole
// dataset and bins it once.
TuneResult KFoldTune(const Dataset& dataset, const TuneGrid& grid, const BoostConfig& base);

void WriteCvTable(const TuneResult& result, std::ostream& out);

std::string BoostConfigToJson(const BoostConfig& config);
// Missing keys keep their defaults.
BoostConfig BoostConfigFromJson(std::string_view text);

}  // namespace hazboost

#endif  // HAZBOOST_EVALUATE_H_
