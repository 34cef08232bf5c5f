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

#ifndef HAZBOOST_DATASET_H_
#define HAZBOOST_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hazboost/common.h"

namespace hazboost {

// One at-risk interval (t_start, t_end] of one subject. The covariate vector
// is constant over the interval; delta is 1 iff an event occurred at t_end.
struct EpochRow {
  std::string subject_id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> covariates;
  int delta = 0;

  bool operator==(const EpochRow& other) const;
};

// Counting-process survival data: a list of epochs grouped by subject.
//
// Rows are stored in normalized order: subjects sorted by id (byte-wise),
// then rows by (t_start, t_end). Gaps between a subject's epochs mean the
// subject was not at risk. A Dataset is immutable once built.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> covariate_names, std::span<const EpochRow> rows);

  std::size_t num_rows() const { return records_.size(); }
  std::size_t num_covariates() const { return covariate_names_.size(); }
  std::size_t num_subjects() const { return subject_ids_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const std::string& subject_id(std::size_t subject) const { return subject_ids_[subject]; }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }

  std::uint32_t subject(std::size_t row) const { return records_[row].subject; }
  double t_start(std::size_t row) const { return records_[row].t_start; }
  double t_end(std::size_t row) const { return records_[row].t_end; }
  double duration(std::size_t row) const { return records_[row].t_end - records_[row].t_start; }
  int delta(std::size_t row) const { return records_[row].delta; }
  std::span<const double> covariates(std::size_t row) const {
    return {covariates_.data() + row * num_covariates(), num_covariates()};
  }
  double covariate(std::size_t row, std::size_t k) const {
    return covariates_[row * num_covariates() + k];
  }
  // Number of covariate entries the row was supplied with (before padding).
  std::size_t supplied_width(std::size_t row) const { return records_[row].width; }

  // Half-open row range [first, second) holding the given subject's epochs.
  std::pair<std::size_t, std::size_t> subject_rows(std::size_t subject) const {
    return {subject_offsets_[subject], subject_offsets_[subject + 1]};
  }
  std::optional<std::size_t> FindSubject(std::string_view id) const;

  EpochRow row(std::size_t i) const;
  std::vector<EpochRow> rows() const;

  double TotalAtRiskTime() const;
  std::size_t TotalEvents() const;

  bool operator==(const Dataset& other) const;

 private:
  friend class DatasetBuilder;

  struct Record {
    std::uint32_t subject = 0;
    std::uint32_t width = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    int delta = 0;

    bool operator==(const Record&) const = default;
  };

  std::vector<std::string> covariate_names_;
  std::vector<std::string> subject_ids_;
  std::vector<std::size_t> subject_offsets_{0};
  std::vector<Record> records_;
  std::vector<double> covariates_;
};

// Accumulates rows without per-row allocations, then sorts them into a
// Dataset. Rows whose covariate count differs from the schema are padded
// with missing values and reported by Validate.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::vector<std::string> covariate_names);

  void Reserve(std::size_t rows);
  void AddRow(std::string_view subject_id, double t_start, double t_end,
              std::span<const double> covariates, int delta);
  void AddRow(const EpochRow& row) {
    AddRow(row.subject_id, row.t_start, row.t_end, row.covariates, row.delta);
  }
  std::size_t num_rows() const { return records_.size(); }

  // source_row, when given, receives the insertion index of every row of
  // the built Dataset.
  Dataset Build(std::vector<std::size_t>* source_row = nullptr) &&;

 private:
  std::vector<std::string> covariate_names_;
  std::vector<std::string> subject_ids_;
  std::unordered_map<std::string, std::uint32_t> subject_index_;
  std::vector<Dataset::Record> records_;
  std::vector<double> covariates_;
};

struct Violation {
  std::size_t row = 0;
  std::string rule;
  std::string message;
};

// Checks every row and per-subject invariant. Rules: "time_order",
// "finite_time", "delta_range", "covariate_count", "covariate_value",
// "overlap". Returns an empty list for valid data.
std::vector<Violation> Validate(const Dataset& dataset);

struct CsvSchema {
  std::string subject = "subject";
  std::string t_start = "t_start";
  std::string t_end = "t_end";
  std::string delta = "delta";
};

// Reads `subject,t_start,t_end,<x1>,...,<xp>,delta` (any column order; every
// column other than the four named ones is a covariate). Empty covariate
// cells are missing. Throws DataError on parse, schema or validation failure.
Dataset LoadCsv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset ReadCsv(std::istream& in, const CsvSchema& schema = {},
                std::string_view source_name = "<stream>");

// Writes the canonical layout with shortest round-trip decimal numbers.
void WriteCsv(const Dataset& dataset, std::ostream& out, const CsvSchema& schema = {});
void SaveCsv(const Dataset& dataset, const std::filesystem::path& path,
             const CsvSchema& schema = {});

// Formats a double with the shortest representation that parses back to the
// same value; missing values format as an empty string.
std::string FormatNumber(double value);

// Splits one CSV line on commas, trimming spaces and a trailing '\r'.
std::vector<std::string_view> SplitCsvLine(std::string_view line);
std::optional<double> ParseNumber(std::string_view field);

}  // namespace hazboost

#endif  // HAZBOOST_DATASET_H_
