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

#ifndef HAZBOOST_PREPROCESS_H_
#define HAZBOOST_PREPROCESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hazboost/dataset.h"
#include "hazboost/quantiles.h"

namespace hazboost {

// Bin codes. On an axis with candidates c_0 < ... < c_{K-1}, code b stands
// for the cell (c_{b-1}, c_b] with c_{-1} = -inf and c_K = +inf. Code 0 is
// the below-minimum sentinel; code b >= 1 is labelled by its lower candidate
// c_{b-1}. A tree split at threshold index j sends codes <= j left.
using BinCode = std::uint16_t;
inline constexpr BinCode kBelowMinimumCode = 0;
inline constexpr BinCode kMissingCode = 0xFFFF;

// Code of a covariate value or query time: the cell containing the value
// under the (.,.] convention. A value equal to c_j maps to c_{j-1}'s code.
BinCode ValueCode(std::span<const double> splits, double value);

// Code of an epoch start: the cell holding (t_start, t_start + dt]. A start
// that equals a candidate keeps that candidate's code.
BinCode StartTimeCode(std::span<const double> splits, double t_start);

// Epochs after candidate-time splitting and duration weighting. Covariates
// are stored row-major, p per row.
struct WeightedRows {
  std::vector<std::string> covariate_names;
  std::vector<std::string> subject_ids;
  std::vector<std::uint32_t> subject;
  std::vector<double> t_start;
  std::vector<double> weight;
  std::vector<double> covariates;
  std::vector<std::uint8_t> delta;

  std::size_t num_rows() const { return t_start.size(); }
  std::size_t num_covariates() const { return covariate_names.size(); }
};

// Boosting-ready rows: every original epoch lies inside one time cell, and
// each row carries (subject, start-time code, duration weight, covariate
// codes, delta).
struct PreprocessedData {
  CandidateGrid grid;
  std::vector<std::string> covariate_names;
  std::vector<std::string> subject_ids;
  std::vector<std::uint32_t> subject;
  std::vector<BinCode> time_code;
  std::vector<double> weight;
  std::vector<std::vector<BinCode>> cov_codes;  // [covariate][row]
  std::vector<std::uint8_t> delta;
  double total_weight = 0.0;
  std::size_t total_events = 0;
  // Covariate values above the top candidate (only possible for data the
  // grid was not built from). They land in the top cell.
  std::size_t num_above_range = 0;

  std::size_t num_rows() const { return weight.size(); }
  std::size_t num_covariates() const { return cov_codes.size(); }
  std::size_t num_subjects() const { return subject_ids.size(); }
  std::size_t num_axes() const { return 1 + cov_codes.size(); }
  std::span<const BinCode> codes(std::size_t axis) const {
    return axis == kTimeAxis ? std::span<const BinCode>(time_code)
                             : std::span<const BinCode>(cov_codes[axis - 1]);
  }

  // Rows of the listed subjects (indices into subject_ids), renumbered
  // densely in the given order. The grid is shared.
  PreprocessedData SelectSubjects(std::span<const std::uint32_t> subjects) const;

  bool operator==(const PreprocessedData&) const = default;
};

// Splits every epoch at the candidate time points strictly inside it. The
// event flag stays with the last piece.
Dataset SplitEpochs(const Dataset& dataset, const CandidateGrid& grid);

// Replaces t_end with the duration weight; order is preserved.
WeightedRows ToWeightedRows(const Dataset& split);

// Maps start times and covariates to bin codes.
PreprocessedData BinValues(const WeightedRows& rows, const CandidateGrid& grid);

// BinValues(ToWeightedRows(SplitEpochs(dataset, grid)), grid).
PreprocessedData Preprocess(const Dataset& dataset, const CandidateGrid& grid);

struct BinnedQuery {
  BinCode time_code = 0;
  std::vector<BinCode> cov_codes;
  // True if any coordinate lies outside the range observed in training.
  bool out_of_range = false;

  BinCode code(std::size_t axis) const {
    return axis == kTimeAxis ? time_code : cov_codes[axis - 1];
  }
};

// Bins a prediction query point with the same cell convention as training:
// values equal to a candidate fall in the cell below it.
BinnedQuery RemapQuery(const CandidateGrid& grid, double t, std::span<const double> x);

// Columnar binary file: magic, version, grid, subject table, then one block
// per column and a CRC-32 trailer.
void SavePreprocessed(const PreprocessedData& data, const std::filesystem::path& path);
PreprocessedData LoadPreprocessed(const std::filesystem::path& path);
std::string SerializePreprocessed(const PreprocessedData& data);
PreprocessedData ParsePreprocessed(const std::string& bytes);

// Human-readable dump: subject,t_start,w,<covariates>,delta where time and
// covariate columns show the cell's lower candidate label, "-inf" for the
// below-minimum sentinel and an empty cell for missing.
void WritePreprocessedCsv(const PreprocessedData& data, std::ostream& out);

}  // namespace hazboost

#endif  // HAZBOOST_PREPROCESS_H_
