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

#ifndef HAZBOOST_BOOSTING_H_
#define HAZBOOST_BOOSTING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hazboost/preprocess.h"
#include "hazboost/quantiles.h"
#include "hazboost/tree.h"

namespace hazboost {

// Sufficient statistics of a time-covariate region at the current model:
// intensity U = sum of w * exp(F), events V = sum of delta, and the raw
// at-risk duration sum of w.
struct RegionStats {
  double intensity = 0.0;
  double events = 0.0;
  double duration = 0.0;

  RegionStats& operator+=(const RegionStats& o) {
    intensity += o.intensity;
    events += o.events;
    duration += o.duration;
    return *this;
  }
  friend RegionStats operator+(RegionStats a, const RegionStats& b) { return a += b; }
  bool operator==(const RegionStats&) const = default;
};

struct BoostConfig {
  int max_depth = 3;
  int num_rounds = 100;
  double learning_rate = 0.1;
  // Children must hold at least this many events and this much at-risk time.
  double min_child_events = 1.0;
  double min_child_weight = 0.0;
  QuantileMode quantile_mode = QuantileMode::kRaw;
  std::size_t max_bins = kMaxBins;
  std::uint64_t seed = 0;
  // Worker threads; results do not depend on this value.
  int threads = 1;
  // Merge rows with identical bin codes before training when the code space
  // is small. Exact up to floating-point summation order.
  bool coalesce_rows = true;

  // Throws ConfigError when a field is out of range.
  void Validate() const;
  bool operator==(const BoostConfig&) const = default;
};

struct SplitCandidate {
  std::size_t leaf = 0;
  std::size_t axis = 0;
  std::size_t threshold = 0;
  MissingDirection missing = MissingDirection::kLeft;
  RegionStats left;
  RegionStats right;
  double score = 0.0;
};

struct ModelMeta {
  BoostConfig config;
  std::size_t num_subjects = 0;
  std::size_t num_rows = 0;
  double total_weight = 0.0;
  std::size_t total_events = 0;
  // Training likelihood risk before round 0 and after every round.
  std::vector<double> risk_trace;
  std::size_t rounds_completed = 0;
  // Set when a round's root could not split and fitting stopped.
  bool stopped_early = false;

  bool operator==(const ModelMeta&) const = default;
};

// log-hazard F(t, x) = f0 - learning_rate * sum of tree leaf values.
struct BoostedModel {
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  CandidateGrid grid;
  std::vector<std::string> covariate_names;
  // Per axis (0 = time) sum of -score over internal nodes.
  std::vector<double> importance_raw;
  ModelMeta meta;

  std::size_t num_covariates() const { return grid.num_covariates(); }
  bool operator==(const BoostedModel&) const = default;
};

// Binned training rows in column layout. View() borrows the columns of the
// PreprocessedData, which must outlive it; Coalesced() owns its columns.
class TrainingMatrix {
 public:
  static TrainingMatrix View(const PreprocessedData& data);
  // Rows with identical codes on every axis are indistinguishable to every
  // tree, so they can be merged (weights and events summed). Falls back to
  // View() when the joint code space is too large for a dense lookup table.
  static TrainingMatrix Coalesced(const PreprocessedData& data);

  TrainingMatrix(TrainingMatrix&&) = default;
  TrainingMatrix& operator=(TrainingMatrix&&) = default;
  TrainingMatrix(const TrainingMatrix&) = delete;
  TrainingMatrix& operator=(const TrainingMatrix&) = delete;

  std::size_t num_rows() const { return weight_.size(); }
  std::size_t num_axes() const { return codes_.size(); }
  std::size_t num_subjects() const { return num_subjects_; }
  std::size_t num_codes(std::size_t axis) const { return num_codes_[axis]; }
  std::span<const BinCode> codes(std::size_t axis) const { return codes_[axis]; }
  std::span<const double> weight() const { return weight_; }
  std::span<const double> events() const { return events_; }
  double total_weight() const { return total_weight_; }
  double total_events() const { return total_events_; }

 private:
  TrainingMatrix() = default;

  std::size_t num_subjects_ = 0;
  std::vector<std::size_t> num_codes_;
  std::vector<std::span<const BinCode>> codes_;
  std::span<const double> weight_;
  std::span<const double> events_;
  double total_weight_ = 0.0;
  double total_events_ = 0.0;

  std::vector<std::vector<BinCode>> owned_codes_;
  std::vector<double> owned_weight_;
  std::vector<double> owned_events_;
};

// Per-leaf, per-axis histograms of RegionStats over bin codes, plus one
// bucket per axis for rows whose code is missing.
class Histograms {
 public:
  Histograms(const TrainingMatrix& matrix, std::size_t num_leaves);

  std::size_t num_leaves() const { return num_leaves_; }
  std::size_t num_axes() const { return offsets_.size() - 1; }
  std::span<RegionStats> bins(std::size_t leaf, std::size_t axis) {
    return {data_.data() + leaf * stride_ + offsets_[axis], num_codes(axis)};
  }
  std::span<const RegionStats> bins(std::size_t leaf, std::size_t axis) const {
    return {data_.data() + leaf * stride_ + offsets_[axis], num_codes(axis)};
  }
  RegionStats& missing(std::size_t leaf, std::size_t axis) {
    return data_[leaf * stride_ + offsets_[axis + 1] - 1];
  }
  const RegionStats& missing(std::size_t leaf, std::size_t axis) const {
    return data_[leaf * stride_ + offsets_[axis + 1] - 1];
  }
  std::size_t num_codes(std::size_t axis) const { return offsets_[axis + 1] - offsets_[axis] - 1; }
  // Leaf totals from the time axis, which never has missing codes.
  RegionStats Total(std::size_t leaf) const;

  // Raw storage for one (leaf, axis) block including its missing bucket.
  std::span<RegionStats> block(std::size_t leaf, std::size_t axis) {
    return {data_.data() + leaf * stride_ + offsets_[axis], num_codes(axis) + 1};
  }

 private:
  std::size_t num_leaves_;
  std::size_t stride_;
  std::vector<std::size_t> offsets_;
  std::vector<RegionStats> data_;
};

// log(total events / total at-risk time). Throws DataError when either is 0.
double ComputeF0(const PreprocessedData& data);
double ComputeF0(double total_events, double total_weight);

// log(U / V): the minimizer of exp(-g) * U + g * V. Throws
// std::invalid_argument unless U > 0 and V > 0.
double LeafValue(double intensity, double events);

// Exact change in likelihood risk when a region with statistics
// (U_L + U_R, V_L + V_R) is split into the two children. Always <= 0.
double SplitScore(double u_left, double v_left, double u_right, double v_right,
                  double num_subjects);
// Same, with the parent's statistics given explicitly.
double SplitScore(const RegionStats& left, const RegionStats& right,
                  const RegionStats& parent, double num_subjects);

// leaf_of_row[i] < 0 excludes row i. log_hazard holds F at every row.
Histograms AccumulateHistograms(const TrainingMatrix& matrix,
                                std::span<const std::int32_t> leaf_of_row,
                                std::span<const double> log_hazard, std::size_t num_leaves,
                                int threads = 1);

// Lowest-score admissible split of one leaf, scanning each axis left to right
// and trying missing values on both sides. Ties go to the lower axis, then
// the lower threshold, then missing-left. Candidates with
// score * num_subjects >= -1e-12 * (parent events) are not improvements.
// Returns nullopt when no admissible candidate improves the risk.
std::optional<SplitCandidate> BestSplit(const Histograms& histograms, std::size_t leaf,
                                        const RegionStats& parent, double num_subjects,
                                        const BoostConfig& config);
std::optional<SplitCandidate> BestSplit(const Histograms& histograms, std::size_t leaf,
                                        double num_subjects, const BoostConfig& config);

// Level-wise growth to config.max_depth against the current log-hazard.
// Leaves receive log(U / V) of their rows.
Tree GrowTree(const TrainingMatrix& matrix, std::span<const double> log_hazard,
              const BoostConfig& config);

using RoundCallback = std::function<void(std::size_t round, const Tree& tree)>;

// Boosts config.num_rounds trees from F0. The optional callback sees every
// tree right after it is appended.
BoostedModel Fit(const PreprocessedData& data, const BoostConfig& config,
                 const RoundCallback& on_round = {});

// (1/n) * sum over rows of (w * exp(F) - delta * F).
double LikelihoodRisk(const TrainingMatrix& matrix, std::span<const double> log_hazard,
                      double num_subjects);
double LikelihoodRisk(const PreprocessedData& data, std::span<const double> log_hazard,
                      double num_subjects);

// Log-hazard of every row of `data` under `model`.
std::vector<double> RowLogHazard(const BoostedModel& model, const PreprocessedData& data);

// I_k / max_k I_k per axis (0 = time); all zeros for a model without splits.
std::vector<double> VariableImportance(const BoostedModel& model);

}  // namespace hazboost

#endif  // HAZBOOST_BOOSTING_H_
