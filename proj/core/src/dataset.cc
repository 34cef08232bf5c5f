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

#include "hazboost/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace hazboost {

bool EpochRow::operator==(const EpochRow& other) const {
  if (subject_id != other.subject_id || t_start != other.t_start ||
      t_end != other.t_end || delta != other.delta ||
      covariates.size() != other.covariates.size()) {
    return false;
  }
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    const double a = covariates[k];
    const double b = other.covariates[k];
    if (IsMissing(a) != IsMissing(b)) return false;
    if (!IsMissing(a) && a != b) return false;
  }
  return true;
}

Dataset::Dataset(std::vector<std::string> covariate_names, std::span<const EpochRow> rows) {
  DatasetBuilder builder(std::move(covariate_names));
  builder.Reserve(rows.size());
  for (const auto& row : rows) builder.AddRow(row);
  *this = std::move(builder).Build();
}

std::optional<std::size_t> Dataset::FindSubject(std::string_view id) const {
  auto it = std::lower_bound(subject_ids_.begin(), subject_ids_.end(), id,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == subject_ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - subject_ids_.begin());
}

EpochRow Dataset::row(std::size_t i) const {
  EpochRow out;
  out.subject_id = subject_ids_[records_[i].subject];
  out.t_start = records_[i].t_start;
  out.t_end = records_[i].t_end;
  out.delta = records_[i].delta;
  const auto cov = covariates(i);
  out.covariates.assign(cov.begin(), cov.end());
  return out;
}

std::vector<EpochRow> Dataset::rows() const {
  std::vector<EpochRow> out;
  out.reserve(num_rows());
  for (std::size_t i = 0; i < num_rows(); ++i) out.push_back(row(i));
  return out;
}

double Dataset::TotalAtRiskTime() const {
  double total = 0.0;
  for (const auto& r : records_) total += r.t_end - r.t_start;
  return total;
}

std::size_t Dataset::TotalEvents() const {
  std::size_t total = 0;
  for (const auto& r : records_) total += r.delta == 1 ? 1 : 0;
  return total;
}

bool Dataset::operator==(const Dataset& other) const {
  if (covariate_names_ != other.covariate_names_ || subject_ids_ != other.subject_ids_ ||
      subject_offsets_ != other.subject_offsets_ || records_ != other.records_ ||
      covariates_.size() != other.covariates_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < covariates_.size(); ++i) {
    const double a = covariates_[i];
    const double b = other.covariates_[i];
    if (IsMissing(a) != IsMissing(b) || (!IsMissing(a) && a != b)) return false;
  }
  return true;
}

DatasetBuilder::DatasetBuilder(std::vector<std::string> covariate_names)
    : covariate_names_(std::move(covariate_names)) {}

void DatasetBuilder::Reserve(std::size_t rows) {
  records_.reserve(rows);
  covariates_.reserve(rows * covariate_names_.size());
}

void DatasetBuilder::AddRow(std::string_view subject_id, double t_start, double t_end,
                            std::span<const double> covariates, int delta) {
  auto [it, inserted] = subject_index_.try_emplace(
      std::string(subject_id), static_cast<std::uint32_t>(subject_ids_.size()));
  if (inserted) subject_ids_.emplace_back(subject_id);

  Dataset::Record record;
  record.subject = it->second;
  record.width = static_cast<std::uint32_t>(covariates.size());
  record.t_start = t_start;
  record.t_end = t_end;
  record.delta = delta;
  records_.push_back(record);

  const std::size_t p = covariate_names_.size();
  for (std::size_t k = 0; k < p; ++k) {
    covariates_.push_back(k < covariates.size() ? covariates[k] : kMissing);
  }
}

Dataset DatasetBuilder::Build(std::vector<std::size_t>* source_row) && {
  const std::size_t p = covariate_names_.size();

  std::vector<std::uint32_t> by_name(subject_ids_.size());
  std::iota(by_name.begin(), by_name.end(), 0u);
  std::sort(by_name.begin(), by_name.end(),
            [&](std::uint32_t a, std::uint32_t b) { return subject_ids_[a] < subject_ids_[b]; });
  std::vector<std::uint32_t> rank(subject_ids_.size());
  for (std::uint32_t r = 0; r < by_name.size(); ++r) rank[by_name[r]] = r;

  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = records_[a];
    const auto& rb = records_[b];
    if (rank[ra.subject] != rank[rb.subject]) return rank[ra.subject] < rank[rb.subject];
    if (ra.t_start != rb.t_start) return ra.t_start < rb.t_start;
    return ra.t_end < rb.t_end;
  });

  Dataset out;
  out.covariate_names_ = std::move(covariate_names_);
  out.subject_ids_.reserve(by_name.size());
  for (auto old : by_name) out.subject_ids_.push_back(std::move(subject_ids_[old]));
  out.records_.reserve(records_.size());
  out.covariates_.reserve(covariates_.size());
  out.subject_offsets_.assign(out.subject_ids_.size() + 1, 0);
  for (auto idx : order) {
    auto record = records_[idx];
    record.subject = rank[record.subject];
    ++out.subject_offsets_[record.subject + 1];
    out.records_.push_back(record);
    out.covariates_.insert(out.covariates_.end(), covariates_.begin() + idx * p,
                           covariates_.begin() + (idx + 1) * p);
  }
  std::partial_sum(out.subject_offsets_.begin(), out.subject_offsets_.end(),
                   out.subject_offsets_.begin());
  if (source_row != nullptr) *source_row = std::move(order);
  return out;
}

std::vector<Violation> Validate(const Dataset& dataset) {
  std::vector<Violation> out;
  const std::size_t p = dataset.num_covariates();
  for (std::size_t i = 0; i < dataset.num_rows(); ++i) {
    const double a = dataset.t_start(i);
    const double b = dataset.t_end(i);
    if (!std::isfinite(a) || !std::isfinite(b)) {
      out.push_back({i, "finite_time", fmt::format("row {}: non-finite time", i)});
    } else if (!(a < b)) {
      out.push_back({i, "time_order",
                     fmt::format("row {}: t_start {} must be < t_end {}", i, a, b)});
    }
    if (dataset.delta(i) != 0 && dataset.delta(i) != 1) {
      out.push_back({i, "delta_range",
                     fmt::format("row {}: delta {} not in {{0,1}}", i, dataset.delta(i))});
    }
    if (dataset.supplied_width(i) != p) {
      out.push_back({i, "covariate_count",
                     fmt::format("row {}: {} covariates, expected {}", i,
                                 dataset.supplied_width(i), p)});
    }
    for (std::size_t k = 0; k < p; ++k) {
      const double x = dataset.covariate(i, k);
      if (!IsMissing(x) && !std::isfinite(x)) {
        out.push_back({i, "covariate_value",
                       fmt::format("row {}: covariate {} is not finite", i, k)});
      }
    }
  }
  for (std::size_t s = 0; s < dataset.num_subjects(); ++s) {
    const auto [first, last] = dataset.subject_rows(s);
    for (std::size_t i = first + 1; i < last; ++i) {
      if (dataset.t_end(i - 1) > dataset.t_start(i)) {
        out.push_back({i, "overlap",
                       fmt::format("row {}: subject '{}' epoch ({}, {}] overlaps previous "
                                   "epoch ending at {}",
                                   i, dataset.subject_id(s), dataset.t_start(i),
                                   dataset.t_end(i), dataset.t_end(i - 1))});
      }
    }
  }
  return out;
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> ParseNumber(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    return std::nullopt;
  }
  return value;
}

std::string FormatNumber(double value) {
  if (IsMissing(value)) return {};
  return fmt::format("{}", value);
}

namespace {

std::size_t RequireColumn(const std::vector<std::string_view>& header, const std::string& name,
                          std::string_view source) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError(fmt::format("{}: schema mismatch: missing column '{}'", source, name));
  }
  if (std::find(it + 1, header.end(), name) != header.end()) {
    throw DataError(fmt::format("{}: schema mismatch: duplicate column '{}'", source, name));
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset ReadCsv(std::istream& in, const CsvSchema& schema, std::string_view source_name) {
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw DataError(fmt::format("{}: missing header row", source_name));
  }
  const std::string header_copy = header_line;
  const auto header = SplitCsvLine(header_copy);
  const std::size_t subject_col = RequireColumn(header, schema.subject, source_name);
  const std::size_t start_col = RequireColumn(header, schema.t_start, source_name);
  const std::size_t end_col = RequireColumn(header, schema.t_end, source_name);
  const std::size_t delta_col = RequireColumn(header, schema.delta, source_name);

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == subject_col || c == start_col || c == end_col || c == delta_col) continue;
    if (header[c].empty()) {
      throw DataError(fmt::format("{}: schema mismatch: empty column name at position {}",
                                  source_name, c + 1));
    }
    cov_cols.push_back(c);
    cov_names.emplace_back(header[c]);
  }

  DatasetBuilder builder(cov_names);
  std::vector<double> cov(cov_cols.size());
  std::string line;
  std::size_t line_no = 1;
  std::vector<std::size_t> line_of_row;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}", source_name, line_no,
                                  header.size(), fields.size()));
    }
    auto number = [&](std::size_t col) {
      auto v = ParseNumber(fields[col]);
      if (!v) {
        throw DataError(fmt::format("{}:{}: malformed number '{}' in column '{}'", source_name,
                                    line_no, fields[col], header[col]));
      }
      return *v;
    };
    const double t_start = number(start_col);
    const double t_end = number(end_col);
    const double delta = number(delta_col);
    if (delta != std::floor(delta) || std::abs(delta) > 1e9) {
      throw DataError(fmt::format("{}:{}: delta '{}' is not an integer", source_name, line_no,
                                  fields[delta_col]));
    }
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      cov[k] = fields[cov_cols[k]].empty() ? kMissing : number(cov_cols[k]);
    }
    if (fields[subject_col].empty()) {
      throw DataError(fmt::format("{}:{}: empty subject id", source_name, line_no));
    }
    builder.AddRow(fields[subject_col], t_start, t_end, cov, static_cast<int>(delta));
    line_of_row.push_back(line_no);
  }

  std::vector<std::size_t> source_row;
  Dataset dataset = std::move(builder).Build(&source_row);
  const auto violations = Validate(dataset);
  if (!violations.empty()) {
    std::string message = fmt::format("{}: {} validation failure(s)", source_name,
                                      violations.size());
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i) {
      const std::size_t at = line_of_row[source_row[violations[i].row]];
      message += fmt::format("\n  {}:{}: [{}] {}", source_name, at, violations[i].rule,
                             violations[i].message);
    }
    throw DataError(message);
  }
  return dataset;
}

Dataset LoadCsv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return ReadCsv(in, schema, path.string());
}

void WriteCsv(const Dataset& dataset, std::ostream& out, const CsvSchema& schema) {
  out << schema.subject << ',' << schema.t_start << ',' << schema.t_end;
  for (const auto& name : dataset.covariate_names()) out << ',' << name;
  out << ',' << schema.delta << '\n';
  std::string line;
  for (std::size_t i = 0; i < dataset.num_rows(); ++i) {
    line.clear();
    line += dataset.subject_id(dataset.subject(i));
    line += ',';
    line += FormatNumber(dataset.t_start(i));
    line += ',';
    line += FormatNumber(dataset.t_end(i));
    for (double x : dataset.covariates(i)) {
      line += ',';
      line += FormatNumber(x);
    }
    line += ',';
    line += std::to_string(dataset.delta(i));
    line += '\n';
    out << line;
  }
}

void SaveCsv(const Dataset& dataset, const std::filesystem::path& path, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  WriteCsv(dataset, out, schema);
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace hazboost
