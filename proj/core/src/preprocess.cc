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

#include "hazboost/preprocess.h"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace hazboost {

BinCode ValueCode(std::span<const double> splits, double value) {
  if (IsMissing(value)) return kMissingCode;
  return static_cast<BinCode>(std::lower_bound(splits.begin(), splits.end(), value) -
                              splits.begin());
}

BinCode StartTimeCode(std::span<const double> splits, double t_start) {
  return static_cast<BinCode>(std::upper_bound(splits.begin(), splits.end(), t_start) -
                              splits.begin());
}

Dataset SplitEpochs(const Dataset& dataset, const CandidateGrid& grid) {
  const auto& cuts = grid.time_splits;
  DatasetBuilder builder(dataset.covariate_names());
  builder.Reserve(dataset.num_rows());
  for (std::size_t i = 0; i < dataset.num_rows(); ++i) {
    const auto& id = dataset.subject_id(dataset.subject(i));
    const auto cov = dataset.covariates(i);
    const double end = dataset.t_end(i);
    double start = dataset.t_start(i);
    for (auto it = std::upper_bound(cuts.begin(), cuts.end(), start);
         it != cuts.end() && *it < end; ++it) {
      builder.AddRow(id, start, *it, cov, 0);
      start = *it;
    }
    builder.AddRow(id, start, end, cov, dataset.delta(i));
  }
  return std::move(builder).Build();
}

WeightedRows ToWeightedRows(const Dataset& split) {
  WeightedRows out;
  out.covariate_names = split.covariate_names();
  out.subject_ids = split.subject_ids();
  const std::size_t rows = split.num_rows();
  out.subject.resize(rows);
  out.t_start.resize(rows);
  out.weight.resize(rows);
  out.delta.resize(rows);
  out.covariates.reserve(rows * split.num_covariates());
  for (std::size_t i = 0; i < rows; ++i) {
    out.subject[i] = split.subject(i);
    out.t_start[i] = split.t_start(i);
    out.weight[i] = split.t_end(i) - split.t_start(i);
    out.delta[i] = static_cast<std::uint8_t>(split.delta(i));
    const auto cov = split.covariates(i);
    out.covariates.insert(out.covariates.end(), cov.begin(), cov.end());
  }
  return out;
}

namespace {

void Finalize(PreprocessedData& out) {
  out.total_weight = 0.0;
  out.total_events = 0;
  for (std::size_t i = 0; i < out.num_rows(); ++i) {
    out.total_weight += out.weight[i];
    out.total_events += out.delta[i];
  }
}

void CheckAxes(const CandidateGrid& grid, std::size_t p) {
  if (grid.num_covariates() != p) {
    throw ConfigError(fmt::format("grid has {} covariate axes, data has {} covariates",
                                  grid.num_covariates(), p));
  }
}

}  // namespace

PreprocessedData BinValues(const WeightedRows& rows, const CandidateGrid& grid) {
  const std::size_t p = rows.num_covariates();
  CheckAxes(grid, p);
  const std::size_t n = rows.num_rows();

  PreprocessedData out;
  out.grid = grid;
  out.covariate_names = rows.covariate_names;
  out.subject_ids = rows.subject_ids;
  out.subject = rows.subject;
  out.weight = rows.weight;
  out.delta = rows.delta;
  out.time_code.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.time_code[i] = StartTimeCode(grid.time_splits, rows.t_start[i]);

  out.cov_codes.assign(p, std::vector<BinCode>(n));
  std::size_t above = 0;
  for (std::size_t k = 0; k < p; ++k) {
    const auto& splits = grid.cov_splits[k];
    for (std::size_t i = 0; i < n; ++i) {
      const BinCode code = ValueCode(splits, rows.covariates[i * p + k]);
      if (code != kMissingCode && code == splits.size() && !splits.empty()) ++above;
      out.cov_codes[k][i] = code;
    }
  }
  out.num_above_range = above;
  Finalize(out);
  return out;
}

PreprocessedData Preprocess(const Dataset& dataset, const CandidateGrid& grid) {
  const std::size_t p = dataset.num_covariates();
  CheckAxes(grid, p);
  const auto& cuts = grid.time_splits;
  const std::size_t input_rows = dataset.num_rows();

  // Output offset of each input row: one piece plus one per interior cut.
  std::vector<std::size_t> offset(input_rows + 1, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < input_rows; ++i) {
    const auto first = std::upper_bound(cuts.begin(), cuts.end(), dataset.t_start(i));
    const auto last = std::lower_bound(first, cuts.end(), dataset.t_end(i));
    offset[i + 1] = 1 + static_cast<std::size_t>(last - first);
  }
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  const std::size_t n = offset.back();

  PreprocessedData out;
  out.grid = grid;
  out.covariate_names = dataset.covariate_names();
  out.subject_ids = dataset.subject_ids();
  out.subject.resize(n);
  out.time_code.resize(n);
  out.weight.resize(n);
  out.delta.resize(n);
  out.cov_codes.assign(p, std::vector<BinCode>(n));

  std::size_t above = 0;
#pragma omp parallel for schedule(static) reduction(+ : above)
  for (std::size_t i = 0; i < input_rows; ++i) {
    std::size_t o = offset[i];
    const std::size_t pieces = offset[i + 1] - o;
    const std::uint32_t subject = dataset.subject(i);
    const double end = dataset.t_end(i);
    double start = dataset.t_start(i);
    BinCode code = StartTimeCode(cuts, start);
    for (std::size_t piece = 0; piece < pieces; ++piece, ++o) {
      const double stop = piece + 1 == pieces ? end : cuts[code];
      out.subject[o] = subject;
      out.time_code[o] = code;
      out.weight[o] = stop - start;
      out.delta[o] = piece + 1 == pieces ? static_cast<std::uint8_t>(dataset.delta(i)) : 0;
      start = stop;
      ++code;
    }
    for (std::size_t k = 0; k < p; ++k) {
      const auto& splits = grid.cov_splits[k];
      const BinCode c = ValueCode(splits, dataset.covariate(i, k));
      if (c != kMissingCode && c == splits.size() && !splits.empty()) above += pieces;
      std::fill_n(out.cov_codes[k].begin() + static_cast<std::ptrdiff_t>(offset[i]), pieces, c);
    }
  }
  out.num_above_range = above;
  Finalize(out);
  return out;
}

PreprocessedData PreprocessedData::SelectSubjects(std::span<const std::uint32_t> subjects) const {
  // Rows are grouped by subject in ascending order.
  std::vector<std::size_t> first(num_subjects() + 1, 0);
  for (auto s : subject) ++first[s + 1];
  std::partial_sum(first.begin(), first.end(), first.begin());

  PreprocessedData out;
  out.grid = grid;
  out.covariate_names = covariate_names;
  out.cov_codes.resize(num_covariates());
  std::size_t total = 0;
  for (auto s : subjects) total += first[s + 1] - first[s];
  out.subject.reserve(total);
  out.time_code.reserve(total);
  out.weight.reserve(total);
  out.delta.reserve(total);
  for (auto& c : out.cov_codes) c.reserve(total);

  for (std::uint32_t dense = 0; dense < subjects.size(); ++dense) {
    const std::uint32_t s = subjects[dense];
    out.subject_ids.push_back(subject_ids[s]);
    for (std::size_t i = first[s]; i < first[s + 1]; ++i) {
      out.subject.push_back(dense);
      out.time_code.push_back(time_code[i]);
      out.weight.push_back(weight[i]);
      out.delta.push_back(delta[i]);
      for (std::size_t k = 0; k < cov_codes.size(); ++k) out.cov_codes[k].push_back(cov_codes[k][i]);
    }
  }
  Finalize(out);
  return out;
}

BinnedQuery RemapQuery(const CandidateGrid& grid, double t, std::span<const double> x) {
  if (x.size() != grid.num_covariates()) {
    throw DataError(fmt::format("query has {} covariates, model expects {}", x.size(),
                                grid.num_covariates()));
  }
  BinnedQuery out;
  auto outside = [&](std::size_t axis, double v) {
    if (IsMissing(v) || IsMissing(grid.lower[axis])) return false;
    return v < grid.lower[axis] || v > grid.upper[axis];
  };
  out.time_code = ValueCode(grid.time_splits, t);
  out.out_of_range = outside(kTimeAxis, t);
  out.cov_codes.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.cov_codes[k] = ValueCode(grid.cov_splits[k], x[k]);
    out.out_of_range = out.out_of_range || outside(k + 1, x[k]);
  }
  return out;
}

void WritePreprocessedCsv(const PreprocessedData& data, std::ostream& out) {
  auto label = [](const std::vector<double>& splits, BinCode code) -> std::string {
    if (code == kMissingCode) return {};
    if (code == kBelowMinimumCode) return "-inf";
    return FormatNumber(splits[code - 1]);
  };
  out << "subject,t_start,w";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << ",delta\n";
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    out << data.subject_ids[data.subject[i]] << ',' << label(data.grid.time_splits, data.time_code[i])
        << ',' << FormatNumber(data.weight[i]);
    for (std::size_t k = 0; k < data.num_covariates(); ++k) {
      out << ',' << label(data.grid.cov_splits[k], data.cov_codes[k][i]);
    }
    out << ',' << static_cast<int>(data.delta[i]) << '\n';
  }
}

}  // namespace hazboost
