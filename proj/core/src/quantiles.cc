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

#include "hazboost/quantiles.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace hazboost {
namespace {

std::vector<double> RawCandidates(std::vector<double> values, std::size_t max_bins) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t uniques = values.size();
  std::vector<double> out;
  if (uniques == 0) return out;
  for (std::size_t j = 1; j <= max_bins; ++j) {
    const std::size_t rank = (j * uniques + max_bins - 1) / max_bins - 1;
    if (out.empty() || out.back() != values[rank]) out.push_back(values[rank]);
  }
  return out;
}

// values: (value, weight) pairs with positive weights.
std::vector<double> WeightedCandidates(std::vector<std::pair<double, double>> values,
                                       std::size_t max_bins) {
  std::vector<double> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  // Collapse duplicates, accumulating weight.
  std::size_t top = 0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i + 1;
    double weight = values[i].second;
    for (; j < values.size() && values[j].first == values[i].first; ++j) {
      weight += values[j].second;
    }
    values[top++] = {values[i].first, weight};
    i = j;
  }
  values.resize(top);

  std::vector<double> cumulative(values.size());
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i].second;
    cumulative[i] = running;
  }
  const double total = running;
  const double bins = static_cast<double>(max_bins);
  std::size_t cursor = 0;
  for (std::size_t j = 1; j <= max_bins; ++j) {
    const double level = static_cast<double>(j) * total;
    while (cursor + 1 < values.size() && cumulative[cursor] * bins < level) ++cursor;
    if (out.empty() || out.back() != values[cursor].first) out.push_back(values[cursor].first);
  }
  return out;
}

void CheckSplits(const std::vector<double>& splits, std::string_view what) {
  if (splits.size() > kMaxBins) {
    throw ConfigError(fmt::format("{}: {} candidates exceed the limit of {}", what,
                                  splits.size(), kMaxBins));
  }
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (!std::isfinite(splits[i])) {
      throw ConfigError(fmt::format("{}: candidate {} is not finite", what, i));
    }
    if (i > 0 && !(splits[i - 1] < splits[i])) {
      throw ConfigError(fmt::format("{}: candidates must be strictly increasing", what));
    }
  }
}

void FillRanges(CandidateGrid& grid, const Dataset* dataset) {
  const std::size_t axes = grid.num_axes();
  grid.lower.assign(axes, kMissing);
  grid.upper.assign(axes, kMissing);
  auto extend = [&](std::size_t axis, double v) {
    if (IsMissing(v)) return;
    if (IsMissing(grid.lower[axis]) || v < grid.lower[axis]) grid.lower[axis] = v;
    if (IsMissing(grid.upper[axis]) || v > grid.upper[axis]) grid.upper[axis] = v;
  };
  if (dataset != nullptr && !dataset->empty()) {
    for (std::size_t i = 0; i < dataset->num_rows(); ++i) {
      extend(kTimeAxis, dataset->t_start(i));
      extend(kTimeAxis, dataset->t_end(i));
      for (std::size_t k = 0; k < dataset->num_covariates(); ++k) {
        extend(k + 1, dataset->covariate(i, k));
      }
    }
  } else {
    for (std::size_t axis = 0; axis < axes; ++axis) {
      for (double v : grid.splits(axis)) extend(axis, v);
    }
  }
}

}  // namespace

std::string_view ToString(QuantileMode mode) {
  return mode == QuantileMode::kRaw ? "raw" : "weighted";
}

QuantileMode ParseQuantileMode(std::string_view text) {
  if (text == "raw") return QuantileMode::kRaw;
  if (text == "weighted") return QuantileMode::kWeighted;
  throw ConfigError(fmt::format("unknown quantile mode '{}' (expected raw|weighted)", text));
}

bool CandidateGrid::operator==(const CandidateGrid& other) const {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (IsMissing(a[i]) != IsMissing(b[i])) return false;
      if (!IsMissing(a[i]) && a[i] != b[i]) return false;
    }
    return true;
  };
  return mode == other.mode && max_bins == other.max_bins &&
         time_splits == other.time_splits && cov_splits == other.cov_splits &&
         same(lower, other.lower) && same(upper, other.upper);
}

CandidateGrid BuildGrid(const Dataset& dataset, std::size_t max_bins, QuantileMode mode) {
  if (max_bins < 1 || max_bins > kMaxBins) {
    throw ConfigError(fmt::format("max_bins must be in [1, {}], got {}", kMaxBins, max_bins));
  }
  if (dataset.empty()) throw DataError("cannot build a candidate grid from an empty dataset");

  CandidateGrid grid;
  grid.mode = mode;
  grid.max_bins = max_bins;
  const std::size_t rows = dataset.num_rows();
  const std::size_t p = dataset.num_covariates();
  grid.cov_splits.resize(p);

  if (mode == QuantileMode::kRaw) {
    std::vector<double> times;
    times.reserve(2 * rows);
    for (std::size_t i = 0; i < rows; ++i) {
      times.push_back(dataset.t_start(i));
      times.push_back(dataset.t_end(i));
    }
    grid.time_splits = RawCandidates(std::move(times), max_bins);
  } else {
    std::vector<std::pair<double, double>> times;
    times.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) times.emplace_back(dataset.t_end(i), dataset.duration(i));
    grid.time_splits = WeightedCandidates(std::move(times), max_bins);
  }

#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < p; ++k) {
    if (mode == QuantileMode::kRaw) {
      std::vector<double> values;
      values.reserve(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const double x = dataset.covariate(i, k);
        if (!IsMissing(x)) values.push_back(x);
      }
      grid.cov_splits[k] = RawCandidates(std::move(values), max_bins);
    } else {
      std::vector<std::pair<double, double>> values;
      values.reserve(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const double x = dataset.covariate(i, k);
        if (!IsMissing(x)) values.emplace_back(x, dataset.duration(i));
      }
      grid.cov_splits[k] = WeightedCandidates(std::move(values), max_bins);
    }
  }
  FillRanges(grid, &dataset);
  return grid;
}

CandidateGrid MakeGrid(std::vector<double> time_splits,
                       std::vector<std::vector<double>> cov_splits, const Dataset* dataset) {
  CheckSplits(time_splits, "time axis");
  if (time_splits.empty()) throw ConfigError("time axis needs at least one candidate");
  for (std::size_t k = 0; k < cov_splits.size(); ++k) {
    CheckSplits(cov_splits[k], fmt::format("covariate {}", k + 1));
  }
  if (dataset != nullptr && dataset->num_covariates() != cov_splits.size()) {
    throw ConfigError(fmt::format("grid has {} covariate axes, dataset has {}",
                                  cov_splits.size(), dataset->num_covariates()));
  }
  CandidateGrid grid;
  grid.mode = QuantileMode::kRaw;
  grid.max_bins = time_splits.size();
  for (const auto& s : cov_splits) grid.max_bins = std::max(grid.max_bins, s.size());
  grid.time_splits = std::move(time_splits);
  grid.cov_splits = std::move(cov_splits);
  FillRanges(grid, dataset);
  return grid;
}

double WeightedQuantile(const Dataset& dataset, std::size_t axis, double x) {
  double below = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < dataset.num_rows(); ++i) {
    const double w = dataset.duration(i);
    const double value = axis == kTimeAxis ? dataset.t_end(i) : dataset.covariate(i, axis - 1);
    if (IsMissing(value)) continue;
    total += w;
    if (value <= x) below += w;
  }
  if (!(total > 0.0)) return 0.0;
  return below / total;
}

}  // namespace hazboost
