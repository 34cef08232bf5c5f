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

#ifndef HAZBOOST_PREDICT_H_
#define HAZBOOST_PREDICT_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hazboost/boosting.h"

namespace hazboost {

// Query points (t, x); covariates are stored row-major, NaN for missing.
struct QueryBatch {
  std::size_t num_covariates = 0;
  std::vector<double> t;
  std::vector<double> x;

  std::size_t size() const { return t.size(); }
  std::span<const double> covariates(std::size_t i) const {
    return {x.data() + i * num_covariates, num_covariates};
  }
  void Add(double time, std::span<const double> covariates);
};

struct Predictions {
  std::vector<double> hazard;
  // Queries with a coordinate outside the training range; they were
  // evaluated in the nearest boundary cell.
  std::size_t num_out_of_range = 0;
};

double PredictLogHazard(const BoostedModel& model, const BinnedQuery& query);
double PredictHazard(const BoostedModel& model, double t, std::span<const double> x);
// Throws DataError on a dimension mismatch or a non-finite time.
Predictions PredictHazard(const BoostedModel& model, const QueryBatch& batch, int threads = 1);

// Query CSV: a time column plus one column per model covariate, matched by
// name; other columns are ignored.
QueryBatch ReadQueryCsv(std::istream& in, const std::vector<std::string>& covariate_names,
                        const std::string& time_column = "t");
// Writes the query columns followed by a hazard column.
void WritePredictionCsv(const QueryBatch& batch, const std::vector<std::string>& covariate_names,
                        const Predictions& predictions, std::ostream& out,
                        const std::string& time_column = "t");

inline constexpr int kModelFormatVersion = 1;

// Text model file: a version line, a JSON body with floats in hexadecimal
// notation, and a CRC-32 line over the body.
std::string SerializeModel(const BoostedModel& model);
// Throws VersionError, ChecksumError or FormatError.
BoostedModel ParseModel(const std::string& text);
void SaveModel(const BoostedModel& model, const std::filesystem::path& path);
BoostedModel LoadModel(const std::filesystem::path& path);

}  // namespace hazboost

#endif  // HAZBOOST_PREDICT_H_
