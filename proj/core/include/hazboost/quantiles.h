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

#ifndef HAZBOOST_QUANTILES_H_
#define HAZBOOST_QUANTILES_H_

#include <cstddef>
#include <string_view>
#include <vector>

#include "hazboost/dataset.h"

namespace hazboost {

inline constexpr std::size_t kMaxBins = 256;

enum class QuantileMode { kRaw, kWeighted };

std::string_view ToString(QuantileMode mode);
QuantileMode ParseQuantileMode(std::string_view text);

// Per-axis sorted candidate split points. Axis 0 is time, axis k >= 1 is
// covariate k - 1. A covariate with no observed values has an empty list and
// is never split on.
struct CandidateGrid {
  QuantileMode mode = QuantileMode::kRaw;
  std::size_t max_bins = kMaxBins;
  std::vector<double> time_splits;
  std::vector<std::vector<double>> cov_splits;
  // Observed [lower, upper] per axis; queries outside are counted as
  // out-of-range at prediction time. NaN for an empty axis.
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_axes() const { return 1 + cov_splits.size(); }
  std::size_t num_covariates() const { return cov_splits.size(); }
  const std::vector<double>& splits(std::size_t axis) const {
    return axis == kTimeAxis ? time_splits : cov_splits[axis - 1];
  }
  // Codes on an axis run 0..splits.size(); see preprocess.h.
  std::size_t num_codes(std::size_t axis) const { return splits(axis).size() + 1; }

  bool operator==(const CandidateGrid& other) const;
};

// Candidate grid from data quantiles, at most max_bins points per axis.
//
// kRaw: unique observed values (time uses the union of starts and ends),
// sorted, then the values at ranks ceil(j * U / max_bins) - 1, j = 1..max_bins.
// kWeighted: for j = 1..max_bins the smallest observed value whose
// duration-weighted cumulative share reaches j / max_bins. Covariate values
// are weighted by their epoch's duration; time uses epoch ends, each weighted
// by its epoch's duration. Missing values are excluded in both modes.
CandidateGrid BuildGrid(const Dataset& dataset, std::size_t max_bins, QuantileMode mode);

// Builds a grid from explicit split lists (validated: finite, strictly
// increasing, at most kMaxBins each). Observed ranges are taken from the
// dataset when one is given, otherwise from the split lists.
CandidateGrid MakeGrid(std::vector<double> time_splits,
                       std::vector<std::vector<double>> cov_splits,
                       const Dataset* dataset = nullptr);

// Share of total at-risk time with covariate value <= x (covariate axes) or
// with epoch end <= x (time axis). Nondecreasing in x, 1 at the axis maximum.
double WeightedQuantile(const Dataset& dataset, std::size_t axis, double x);

}  // namespace hazboost

#endif  // HAZBOOST_QUANTILES_H_
