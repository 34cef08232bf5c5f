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

#include "hazboost/predict.h"

#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace hazboost {

void QueryBatch::Add(double time, std::span<const double> covariates) {
  if (covariates.size() != num_covariates) {
    throw DataError(fmt::format("query has {} covariates, batch expects {}", covariates.size(),
                                num_covariates));
  }
  t.push_back(time);
  x.insert(x.end(), covariates.begin(), covariates.end());
}

double PredictLogHazard(const BoostedModel& model, const BinnedQuery& query) {
  double f = model.f0;
  for (const auto& tree : model.trees) {
    const std::size_t leaf = tree.Route([&](std::size_t axis) { return query.code(axis); });
    f = f - model.learning_rate * tree.nodes[leaf].value;
  }
  return f;
}

double PredictHazard(const BoostedModel& model, double t, std::span<const double> x) {
  if (!std::isfinite(t)) throw DataError("query time must be finite");
  return std::exp(PredictLogHazard(model, RemapQuery(model.grid, t, x)));
}

Predictions PredictHazard(const BoostedModel& model, const QueryBatch& batch, int threads) {
  if (batch.num_covariates != model.num_covariates()) {
    throw DataError(fmt::format("query has {} covariates, model expects {}",
                                batch.num_covariates, model.num_covariates()));
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!std::isfinite(batch.t[i])) throw DataError(fmt::format("query {}: time must be finite", i));
  }
  Predictions out;
  out.hazard.resize(batch.size());
  std::size_t outside = 0;
  const auto count = static_cast<std::int64_t>(batch.size());
#pragma omp parallel for num_threads(threads) schedule(static) reduction(+ : outside)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto q = RemapQuery(model.grid, batch.t[i], batch.covariates(static_cast<std::size_t>(i)));
    if (q.out_of_range) ++outside;
    out.hazard[i] = std::exp(PredictLogHazard(model, q));
  }
  out.num_out_of_range = outside;
  return out;
}

QueryBatch ReadQueryCsv(std::istream& in, const std::vector<std::string>& covariate_names,
                        const std::string& time_column) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("query CSV is empty");
  const std::string header_line = line;
  const auto header = SplitCsvLine(header_line);
  auto find = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw DataError(fmt::format("query CSV: schema mismatch: missing column '{}'", name));
  };
  const std::size_t time_col = find(time_column);
  std::vector<std::size_t> cols;
  for (const auto& name : covariate_names) cols.push_back(find(name));

  QueryBatch batch;
  batch.num_covariates = covariate_names.size();
  std::vector<double> x(cols.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("query CSV:{}: expected {} fields, found {}", line_no,
                                  header.size(), fields.size()));
    }
    const auto t = ParseNumber(fields[time_col]);
    if (!t || !std::isfinite(*t)) {
      throw DataError(fmt::format("query CSV:{}: malformed time '{}'", line_no, fields[time_col]));
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto field = fields[cols[k]];
      if (field.empty()) {
        x[k] = kMissing;
        continue;
      }
      const auto v = ParseNumber(field);
      if (!v) {
        throw DataError(fmt::format("query CSV:{}: malformed number '{}' in column '{}'", line_no,
                                    field, covariate_names[k]));
      }
      x[k] = *v;
    }
    batch.Add(*t, x);
  }
  return batch;
}

void WritePredictionCsv(const QueryBatch& batch, const std::vector<std::string>& covariate_names,
                        const Predictions& predictions, std::ostream& out,
                        const std::string& time_column) {
  out << time_column;
  for (const auto& name : covariate_names) out << ',' << name;
  out << ",hazard\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << FormatNumber(batch.t[i]);
    for (double v : batch.covariates(i)) out << ',' << FormatNumber(v);
    out << ',' << FormatNumber(predictions.hazard[i]) << '\n';
  }
}

}  // namespace hazboost
