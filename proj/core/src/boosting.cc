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

#include "hazboost/boosting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace hazboost {
namespace {

// Dense lookup tables for row coalescing stay below 16 MiB.
constexpr std::size_t kMaxDenseCodeSpace = std::size_t{1} << 22;

inline std::size_t Slot(BinCode code, std::size_t num_codes) {
  return code == kMissingCode ? num_codes : code;
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void ComputeIntensity(const TrainingMatrix& matrix, std::span<const double> log_hazard,
                      std::span<double> intensity, int threads) {
  const auto weight = matrix.weight();
  const auto rows = static_cast<std::int64_t>(matrix.num_rows());
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) intensity[r] = weight[r] * std::exp(log_hazard[r]);
}

double RiskFromIntensity(const TrainingMatrix& matrix, std::span<const double> log_hazard,
                         std::span<const double> intensity, double num_subjects) {
  const auto events = matrix.events();
  CompensatedSum sum;
  for (std::size_t r = 0; r < matrix.num_rows(); ++r) {
    sum.Add(intensity[r]);
    if (events[r] != 0.0) sum.Add(-events[r] * log_hazard[r]);
  }
  return sum.value() / num_subjects;
}

void AccumulateInto(Histograms& histograms, const TrainingMatrix& matrix,
                    std::span<const std::int32_t> leaf_of_row, std::span<const double> intensity,
                    int threads) {
  const auto axes = static_cast<std::int64_t>(matrix.num_axes());
  const auto weight = matrix.weight();
  const auto events = matrix.events();
  const std::size_t rows = matrix.num_rows();
  const std::size_t leaves = histograms.num_leaves();
  // Each axis is filled by one thread in row order, so sums are identical
  // for any thread count.
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::int64_t a = 0; a < axes; ++a) {
    const auto axis = static_cast<std::size_t>(a);
    const auto codes = matrix.codes(axis);
    const std::size_t num_codes = matrix.num_codes(axis);
    std::vector<RegionStats*> base(leaves);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) base[leaf] = histograms.block(leaf, axis).data();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::int32_t leaf = leaf_of_row[r];
      if (leaf < 0) continue;
      RegionStats& cell = base[static_cast<std::size_t>(leaf)][Slot(codes[r], num_codes)];
      cell.intensity += intensity[r];
      cell.events += events[r];
      cell.duration += weight[r];
    }
  }
}

long double RateTerm(const RegionStats& s) {
  const long double v = s.events;
  return v * std::log(static_cast<long double>(s.intensity) / v);
}

// Scores this close to zero are rounding noise in the histogram sums and do
// not count as improvements. A relative error e in U moves V * log(U / V)
// by about V * e, so the noise floor scales with the parent's events.
constexpr long double kScoreNoise = 1e-12L;

bool Improves(const RegionStats& parent, double score, double num_subjects) {
  return score * static_cast<long double>(num_subjects) <
         -kScoreNoise * static_cast<long double>(parent.events);
}

Tree GrowTreeImpl(const TrainingMatrix& matrix, std::span<const double> intensity,
                  const BoostConfig& config, std::vector<std::int32_t>& node_of_row) {
  const std::size_t rows = matrix.num_rows();
  const double n = static_cast<double>(matrix.num_subjects());

  RegionStats root;
  {
    const auto weight = matrix.weight();
    const auto events = matrix.events();
    for (std::size_t r = 0; r < rows; ++r) {
      root.intensity += intensity[r];
      root.events += events[r];
      root.duration += weight[r];
    }
  }

  Tree tree;
  tree.nodes.emplace_back();
  std::vector<RegionStats> stats{root};
  node_of_row.assign(rows, 0);

  std::vector<std::size_t> open{0};
  std::vector<std::int32_t> leaf_of_row(rows);
  for (int depth = 0; depth < config.max_depth && !open.empty(); ++depth) {
    std::vector<std::int32_t> slot_of_node(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < open.size(); ++i) slot_of_node[open[i]] = static_cast<std::int32_t>(i);
    for (std::size_t r = 0; r < rows; ++r) {
      leaf_of_row[r] = slot_of_node[static_cast<std::size_t>(node_of_row[r])];
    }

    Histograms histograms(matrix, open.size());
    AccumulateInto(histograms, matrix, leaf_of_row, intensity, config.threads);

    std::vector<std::size_t> next;
    std::vector<bool> was_split(open.size(), false);
    for (std::size_t i = 0; i < open.size(); ++i) {
      const std::size_t node = open[i];
      auto split = BestSplit(histograms, i, stats[node], n, config);
      if (!split) continue;
      was_split[i] = true;
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.push_back(split->left);
      stats.push_back(split->right);
      TreeNode& n_ref = tree.nodes[node];
      n_ref.left = left;
      n_ref.right = left + 1;
      n_ref.axis = static_cast<std::uint32_t>(split->axis);
      n_ref.threshold = static_cast<std::uint16_t>(split->threshold);
      n_ref.missing = split->missing;
      n_ref.score = split->score;
      next.push_back(static_cast<std::size_t>(left));
      next.push_back(static_cast<std::size_t>(left + 1));
    }
    if (next.empty()) break;

    for (std::size_t r = 0; r < rows; ++r) {
      const std::int32_t slot = leaf_of_row[r];
      if (slot < 0 || !was_split[static_cast<std::size_t>(slot)]) continue;
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_of_row[r])];
      const BinCode code = matrix.codes(node.axis)[r];
      const bool go_left = code == kMissingCode ? node.missing == MissingDirection::kLeft
                                                : code <= node.threshold;
      node_of_row[r] = go_left ? node.left : node.right;
    }
    open = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].is_leaf()) tree.nodes[i].value = LeafValue(stats[i].intensity, stats[i].events);
  }
  return tree;
}

}  // namespace

void BoostConfig::Validate() const {
  if (max_depth < 0 || max_depth > 16) {
    throw ConfigError(fmt::format("max_depth must be in [0, 16], got {}", max_depth));
  }
  if (num_rounds < 0) throw ConfigError(fmt::format("num_rounds must be >= 0, got {}", num_rounds));
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError(fmt::format("learning_rate must be in (0, 1], got {}", learning_rate));
  }
  if (!(min_child_events >= 1.0)) {
    throw ConfigError(fmt::format("min_child_events must be >= 1, got {}", min_child_events));
  }
  if (!(min_child_weight >= 0.0)) {
    throw ConfigError(fmt::format("min_child_weight must be >= 0, got {}", min_child_weight));
  }
  if (max_bins < 1 || max_bins > kMaxBins) {
    throw ConfigError(fmt::format("max_bins must be in [1, {}], got {}", kMaxBins, max_bins));
  }
  if (threads < 1) throw ConfigError(fmt::format("threads must be >= 1, got {}", threads));
}

TrainingMatrix TrainingMatrix::View(const PreprocessedData& data) {
  TrainingMatrix m;
  m.num_subjects_ = data.num_subjects();
  for (std::size_t axis = 0; axis < data.num_axes(); ++axis) {
    m.num_codes_.push_back(data.grid.num_codes(axis));
    m.codes_.push_back(data.codes(axis));
  }
  m.weight_ = data.weight;
  m.owned_events_.assign(data.delta.begin(), data.delta.end());
  m.events_ = m.owned_events_;
  m.total_weight_ = data.total_weight;
  m.total_events_ = static_cast<double>(data.total_events);
  return m;
}

TrainingMatrix TrainingMatrix::Coalesced(const PreprocessedData& data) {
  const std::size_t axes = data.num_axes();
  std::vector<std::size_t> stride(axes);
  std::size_t space = 1;
  for (std::size_t axis = 0; axis < axes; ++axis) {
    stride[axis] = space;
    const std::size_t slots = data.grid.num_codes(axis) + 1;
    if (space > kMaxDenseCodeSpace / slots) return View(data);
    space *= slots;
  }

  TrainingMatrix m;
  m.num_subjects_ = data.num_subjects();
  m.owned_codes_.resize(axes);
  for (std::size_t axis = 0; axis < axes; ++axis) m.num_codes_.push_back(data.grid.num_codes(axis));

  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> id_of_key(space, kUnset);
  std::vector<std::span<const BinCode>> columns(axes);
  for (std::size_t axis = 0; axis < axes; ++axis) columns[axis] = data.codes(axis);

  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    std::size_t key = 0;
    for (std::size_t axis = 0; axis < axes; ++axis) {
      key += Slot(columns[axis][r], m.num_codes_[axis]) * stride[axis];
    }
    std::uint32_t id = id_of_key[key];
    if (id == kUnset) {
      id = static_cast<std::uint32_t>(m.owned_weight_.size());
      id_of_key[key] = id;
      for (std::size_t axis = 0; axis < axes; ++axis) m.owned_codes_[axis].push_back(columns[axis][r]);
      m.owned_weight_.push_back(0.0);
      m.owned_events_.push_back(0.0);
    }
    m.owned_weight_[id] += data.weight[r];
    m.owned_events_[id] += data.delta[r];
  }
  for (std::size_t axis = 0; axis < axes; ++axis) m.codes_.emplace_back(m.owned_codes_[axis]);
  m.weight_ = m.owned_weight_;
  m.events_ = m.owned_events_;
  m.total_weight_ = data.total_weight;
  m.total_events_ = static_cast<double>(data.total_events);
  return m;
}

Histograms::Histograms(const TrainingMatrix& matrix, std::size_t num_leaves)
    : num_leaves_(num_leaves) {
  offsets_.push_back(0);
  for (std::size_t axis = 0; axis < matrix.num_axes(); ++axis) {
    offsets_.push_back(offsets_.back() + matrix.num_codes(axis) + 1);
  }
  stride_ = offsets_.back();
  data_.assign(num_leaves_ * stride_, RegionStats{});
}

RegionStats Histograms::Total(std::size_t leaf) const {
  RegionStats total;
  for (const auto& b : bins(leaf, kTimeAxis)) total += b;
  return total;
}

double ComputeF0(double total_events, double total_weight) {
  if (!(total_events > 0.0)) {
    throw DataError("no events: hazard MLE is identically zero, F0 undefined");
  }
  if (!(total_weight > 0.0)) throw DataError("zero total at-risk time: F0 undefined");
  return std::log(total_events / total_weight);
}

double ComputeF0(const PreprocessedData& data) {
  return ComputeF0(static_cast<double>(data.total_events), data.total_weight);
}

double LeafValue(double intensity, double events) {
  if (!(intensity > 0.0) || !(events > 0.0)) {
    throw std::invalid_argument(
        fmt::format("leaf value needs U > 0 and V > 0 (U = {}, V = {})", intensity, events));
  }
  return std::log(intensity / events);
}

double SplitScore(const RegionStats& left, const RegionStats& right, const RegionStats& parent,
                  double num_subjects) {
  return static_cast<double>((RateTerm(left) + RateTerm(right) - RateTerm(parent)) /
                             static_cast<long double>(num_subjects));
}

double SplitScore(double u_left, double v_left, double u_right, double v_right,
                  double num_subjects) {
  if (!(u_left > 0.0 && v_left > 0.0 && u_right > 0.0 && v_right > 0.0 && num_subjects > 0.0)) {
    throw std::invalid_argument("split score needs positive U and V on both sides");
  }
  const RegionStats left{u_left, v_left, 0.0};
  const RegionStats right{u_right, v_right, 0.0};
  const RegionStats parent{u_left + u_right, v_left + v_right, 0.0};
  return SplitScore(left, right, parent, num_subjects);
}

Histograms AccumulateHistograms(const TrainingMatrix& matrix,
                                std::span<const std::int32_t> leaf_of_row,
                                std::span<const double> log_hazard, std::size_t num_leaves,
                                int threads) {
  std::vector<double> intensity(matrix.num_rows());
  ComputeIntensity(matrix, log_hazard, intensity, threads);
  Histograms histograms(matrix, num_leaves);
  AccumulateInto(histograms, matrix, leaf_of_row, intensity, threads);
  return histograms;
}

std::optional<SplitCandidate> BestSplit(const Histograms& histograms, std::size_t leaf,
                                        const RegionStats& parent, double num_subjects,
                                        const BoostConfig& config) {
  std::optional<SplitCandidate> best;
  std::vector<RegionStats> suffix;
  for (std::size_t axis = 0; axis < histograms.num_axes(); ++axis) {
    const auto bins = histograms.bins(leaf, axis);
    const std::size_t codes = bins.size();
    if (codes < 2) continue;
    const RegionStats missing = axis == kTimeAxis ? RegionStats{} : histograms.missing(leaf, axis);
    const bool has_missing = missing.events != 0.0 || missing.duration != 0.0;

    suffix.assign(codes + 1, RegionStats{});
    for (std::size_t b = codes; b-- > 0;) suffix[b] = bins[b] + suffix[b + 1];

    RegionStats prefix;
    for (std::size_t j = 0; j + 1 < codes; ++j) {
      prefix += bins[j];
      for (auto dir : {MissingDirection::kLeft, MissingDirection::kRight}) {
        if (dir == MissingDirection::kRight && !has_missing) break;
        const RegionStats left = dir == MissingDirection::kLeft ? prefix + missing : prefix;
        const RegionStats right =
            dir == MissingDirection::kRight ? suffix[j + 1] + missing : suffix[j + 1];
        if (left.events < config.min_child_events || right.events < config.min_child_events) continue;
        if (!(left.intensity > 0.0) || !(right.intensity > 0.0)) continue;
        if (left.duration < config.min_child_weight || right.duration < config.min_child_weight) {
          continue;
        }
        const double score = SplitScore(left, right, parent, num_subjects);
        if (!Improves(parent, score, num_subjects)) continue;
        if (!best || score < best->score) {
          best = SplitCandidate{leaf, axis, j, dir, left, right, score};
        }
      }
    }
  }
  return best;
}

std::optional<SplitCandidate> BestSplit(const Histograms& histograms, std::size_t leaf,
                                        double num_subjects, const BoostConfig& config) {
  return BestSplit(histograms, leaf, histograms.Total(leaf), num_subjects, config);
}

Tree GrowTree(const TrainingMatrix& matrix, std::span<const double> log_hazard,
              const BoostConfig& config) {
  config.Validate();
  std::vector<double> intensity(matrix.num_rows());
  ComputeIntensity(matrix, log_hazard, intensity, config.threads);
  std::vector<std::int32_t> node_of_row;
  return GrowTreeImpl(matrix, intensity, config, node_of_row);
}

BoostedModel Fit(const PreprocessedData& data, const BoostConfig& config,
                 const RoundCallback& on_round) {
  config.Validate();
  if (data.num_subjects() == 0) throw DataError("cannot fit on data without subjects");

  BoostedModel model;
  model.f0 = ComputeF0(data);
  model.learning_rate = config.learning_rate;
  model.grid = data.grid;
  model.covariate_names = data.covariate_names;
  model.importance_raw.assign(data.num_axes(), 0.0);
  model.meta.config = config;
  model.meta.config.threads = 1;  // not part of the model's identity
  model.meta.num_subjects = data.num_subjects();
  model.meta.num_rows = data.num_rows();
  model.meta.total_weight = data.total_weight;
  model.meta.total_events = data.total_events;

  const TrainingMatrix matrix =
      config.coalesce_rows ? TrainingMatrix::Coalesced(data) : TrainingMatrix::View(data);
  const std::size_t rows = matrix.num_rows();
  const double n = static_cast<double>(data.num_subjects());

  std::vector<double> log_hazard(rows, model.f0);
  std::vector<double> intensity(rows);
  ComputeIntensity(matrix, log_hazard, intensity, config.threads);
  model.meta.risk_trace.push_back(RiskFromIntensity(matrix, log_hazard, intensity, n));

  std::vector<std::int32_t> node_of_row;
  const double rate = config.learning_rate;
  for (int round = 0; round < config.num_rounds; ++round) {
    Tree tree = GrowTreeImpl(matrix, intensity, config, node_of_row);
    const bool root_only = tree.nodes.size() == 1;
    // No split is admissible now or in any later round (a constant shift of F
    // leaves every split score unchanged), so the round adds nothing.
    if (root_only) tree.nodes[0].value = 0.0;

    const auto count = static_cast<std::int64_t>(rows);
#pragma omp parallel for num_threads(config.threads) schedule(static)
    for (std::int64_t r = 0; r < count; ++r) {
      log_hazard[r] = log_hazard[r] - rate * tree.nodes[static_cast<std::size_t>(node_of_row[r])].value;
    }
    ComputeIntensity(matrix, log_hazard, intensity, config.threads);
    model.meta.risk_trace.push_back(RiskFromIntensity(matrix, log_hazard, intensity, n));

    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) model.importance_raw[node.axis] += -node.score;
    }
    model.trees.push_back(std::move(tree));
    model.meta.rounds_completed = model.trees.size();
    if (on_round) on_round(static_cast<std::size_t>(round), model.trees.back());
    if (root_only) {
      model.meta.stopped_early = round + 1 < config.num_rounds;
      break;
    }
  }
  return model;
}

double LikelihoodRisk(const TrainingMatrix& matrix, std::span<const double> log_hazard,
                      double num_subjects) {
  if (log_hazard.size() != matrix.num_rows()) {
    throw std::invalid_argument("log_hazard must have one value per row");
  }
  std::vector<double> intensity(matrix.num_rows());
  ComputeIntensity(matrix, log_hazard, intensity, 1);
  return RiskFromIntensity(matrix, log_hazard, intensity, num_subjects);
}

double LikelihoodRisk(const PreprocessedData& data, std::span<const double> log_hazard,
                      double num_subjects) {
  return LikelihoodRisk(TrainingMatrix::View(data), log_hazard, num_subjects);
}

std::vector<double> RowLogHazard(const BoostedModel& model, const PreprocessedData& data) {
  std::vector<double> out(data.num_rows(), model.f0);
  const auto rows = static_cast<std::int64_t>(data.num_rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double f = model.f0;
    for (const auto& tree : model.trees) {
      const std::size_t leaf = tree.Route([&](std::size_t axis) { return data.codes(axis)[r]; });
      f = f - model.learning_rate * tree.nodes[leaf].value;
    }
    out[r] = f;
  }
  return out;
}

std::vector<double> VariableImportance(const BoostedModel& model) {
  std::vector<double> out(model.importance_raw.size(), 0.0);
  double top = 0.0;
  for (double v : model.importance_raw) top = std::max(top, v);
  if (!(top > 0.0)) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = model.importance_raw[k] / top;
  return out;
}

}  // namespace hazboost
