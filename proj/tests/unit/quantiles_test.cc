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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hazboost/preprocess.h"
#include "hazboost/quantiles.h"
#include "support/test_util.h"

namespace hazboost {
namespace {

using testing::DerivedValues;

Dataset OneCovariate(const std::vector<std::tuple<std::string, double, double, double>>& rows) {
  DatasetBuilder b({"x"});
  for (const auto& [id, s, e, x] : rows) b.AddRow(id, s, e, {&x, 1}, 0);
  return std::move(b).Build();
}

TEST(WeightedQuantile, DurationWeightsFromTheText) {
  const Dataset d = OneCovariate({{"a", 0.0, 2.0, 1.3}, {"a", 2.0, 3.0, 2.0}});
  EXPECT_NEAR(WeightedQuantile(d, 1, 1.3), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(WeightedQuantile(d, 1, 2.0), 1.0);
  EXPECT_EQ(WeightedQuantile(d, 1, 1.0), 0.0);
}

TEST(WeightedQuantile, TimeAxisOnSplitFigureTable) {
  const Dataset fig = testing::FigureDataset();
  const Dataset split = SplitEpochs(fig, testing::FigureGrid(fig));
  EXPECT_NEAR(WeightedQuantile(split, kTimeAxis, 0.10), DerivedValues()["q0_at_0_10"].get<double>(),
              1e-14);
  EXPECT_DOUBLE_EQ(WeightedQuantile(split, kTimeAxis, 0.25), 1.0);
  EXPECT_EQ(WeightedQuantile(split, kTimeAxis, 0.0), 0.0);
}

TEST(WeightedQuantile, MonotoneStepFunctionInUnitInterval) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    testing::RandomDatasetOptions opt;
    opt.missing_rate = 0.1;
    const Dataset d = testing::RandomDataset(rng, opt);
    for (std::size_t axis = 0; axis <= d.num_covariates(); ++axis) {
      double prev = 0.0;
      for (int k = -5; k <= 25; ++k) {
        const double q = WeightedQuantile(d, axis, k / 20.0);
        EXPECT_GE(q, 0.0);
        EXPECT_LE(q, 1.0 + 1e-15);
        EXPECT_GE(q, prev);
        prev = q;
      }
    }
  }
}

TEST(BuildGrid, FewUniquesAreAllCandidates) {
  const Dataset d = OneCovariate({{"a", 0, 1, 5.0}, {"b", 0, 1, 1.0}, {"c", 0, 1, 3.0},
                                  {"d", 0, 1, 3.0}, {"e", 0, 1, 2.0}, {"f", 0, 1, 4.0}});
  const CandidateGrid g = BuildGrid(d, 256, QuantileMode::kRaw);
  EXPECT_EQ(g.cov_splits[0], (std::vector<double>{1, 2, 3, 4, 5}));
  // Time uses starts and ends together.
  EXPECT_EQ(g.time_splits, (std::vector<double>{0, 1}));
}

TEST(BuildGrid, RawRankRule) {
  std::vector<std::tuple<std::string, double, double, double>> rows;
  for (int i = 0; i < 10; ++i) rows.emplace_back("s" + std::to_string(i), 0, 1, 10.0 * i);
  const CandidateGrid g = BuildGrid(OneCovariate(rows), 4, QuantileMode::kRaw);
  // ranks ceil(j * 10 / 4) - 1 = 2, 4, 7, 9
  EXPECT_EQ(g.cov_splits[0], (std::vector<double>{20, 40, 70, 90}));
}

TEST(BuildGrid, WeightedEqualDurations) {
  const Dataset d = OneCovariate({{"a", 0, 1, 1.0}, {"a", 1, 2, 2.0}, {"a", 2, 3, 3.0}});
  const CandidateGrid g = BuildGrid(d, 2, QuantileMode::kWeighted);
  const auto expected = DerivedValues()["weighted_example_candidates"].get<std::vector<double>>();
  EXPECT_EQ(g.cov_splits[0], expected);
}

TEST(BuildGrid, EntirelyMissingCovariateHasNoCandidates) {
  DatasetBuilder b({"x", "y"});
  const double x[] = {1.0, kMissing};
  b.AddRow("a", 0, 1, x, 1);
  b.AddRow("b", 0, 2, x, 0);
  const Dataset d = std::move(b).Build();
  for (auto mode : {QuantileMode::kRaw, QuantileMode::kWeighted}) {
    const CandidateGrid g = BuildGrid(d, 256, mode);
    EXPECT_TRUE(g.cov_splits[1].empty());
    EXPECT_EQ(g.num_codes(2), 1u);
  }
}

TEST(BuildGrid, CandidatesAreObservedIncreasingAndBounded) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    testing::RandomDatasetOptions opt;
    opt.lattice = trial % 2 == 0;
    opt.missing_rate = 0.15;
    const Dataset d = testing::RandomDataset(rng, opt);
    const std::size_t bins = 1 + rng() % 12;
    for (auto mode : {QuantileMode::kRaw, QuantileMode::kWeighted}) {
      const CandidateGrid g = BuildGrid(d, bins, mode);
      std::set<double> times, ends;
      for (std::size_t r = 0; r < d.num_rows(); ++r) {
        times.insert(d.t_start(r));
        times.insert(d.t_end(r));
        ends.insert(d.t_end(r));
      }
      for (std::size_t axis = 0; axis < g.num_axes(); ++axis) {
        const auto& s = g.splits(axis);
        EXPECT_LE(s.size(), bins);
        EXPECT_TRUE(std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end());
        for (double c : s) {
          if (axis == kTimeAxis) {
            EXPECT_TRUE(mode == QuantileMode::kRaw ? times.count(c) : ends.count(c)) << c;
          } else {
            bool seen = false;
            for (std::size_t r = 0; r < d.num_rows(); ++r) seen = seen || d.covariate(r, axis - 1) == c;
            EXPECT_TRUE(seen) << c;
          }
        }
      }
    }
  }
}

TEST(BuildGrid, RawGridIsEquivariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(29);
  auto phi = [](double v) { return IsMissing(v) ? v : std::exp(3.0 * v) + v * v * v; };
  for (int trial = 0; trial < 30; ++trial) {
    testing::RandomDatasetOptions opt;
    opt.lattice = false;
    opt.missing_rate = 0.1;
    const Dataset d = testing::RandomDataset(rng, opt);
    auto rows = d.rows();
    for (auto& row : rows) row.covariates[0] = phi(row.covariates[0]);
    const Dataset t(d.covariate_names(), rows);
    const std::size_t bins = 1 + rng() % 10;
    const CandidateGrid g = BuildGrid(d, bins, QuantileMode::kRaw);
    const CandidateGrid gt = BuildGrid(t, bins, QuantileMode::kRaw);
    ASSERT_EQ(g.cov_splits[0].size(), gt.cov_splits[0].size());
    for (std::size_t j = 0; j < g.cov_splits[0].size(); ++j) {
      EXPECT_EQ(phi(g.cov_splits[0][j]), gt.cov_splits[0][j]);
    }
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
      EXPECT_EQ(ValueCode(g.cov_splits[0], d.covariate(r, 0)),
                ValueCode(gt.cov_splits[0], t.covariate(r, 0)));
    }
  }
}

TEST(BuildGrid, WeightedCovariateGridIgnoresEpochSubdivision) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = testing::RandomDataset(rng);
    auto rows = d.rows();
    std::vector<EpochRow> split;
    for (const auto& row : rows) {
      if (rng() % 2) {
        const double mid = 0.5 * (row.t_start + row.t_end);
        EpochRow a = row, b = row;
        a.t_end = mid;
        a.delta = 0;
        b.t_start = mid;
        split.push_back(a);
        split.push_back(b);
      } else {
        split.push_back(row);
      }
    }
    const Dataset ds(d.covariate_names(), split);
    const std::size_t bins = 1 + rng() % 8;
    const CandidateGrid g = BuildGrid(d, bins, QuantileMode::kWeighted);
    const CandidateGrid gs = BuildGrid(ds, bins, QuantileMode::kWeighted);
    EXPECT_EQ(g.cov_splits, gs.cov_splits);
  }
}

TEST(BuildGrid, RejectsBadBinCount) {
  const Dataset d = testing::FigureDataset();
  EXPECT_THROW(BuildGrid(d, 0, QuantileMode::kRaw), ConfigError);
  EXPECT_THROW(BuildGrid(d, 257, QuantileMode::kRaw), ConfigError);
}

TEST(MakeGrid, ValidatesLists) {
  EXPECT_THROW(MakeGrid({0.2, 0.1}, {}), ConfigError);
  EXPECT_THROW(MakeGrid({0.1}, {{1.0, 1.0}}), ConfigError);
  EXPECT_THROW(MakeGrid({std::nan("")}, {}), ConfigError);
  const CandidateGrid g = MakeGrid({0.1, 0.2}, {{1.0}});
  EXPECT_EQ(g.num_axes(), 2u);
  EXPECT_EQ(g.num_codes(0), 3u);
}

TEST(QuantileMode, ParseAndPrint) {
  EXPECT_EQ(ParseQuantileMode("raw"), QuantileMode::kRaw);
  EXPECT_EQ(ParseQuantileMode(ToString(QuantileMode::kWeighted)), QuantileMode::kWeighted);
  EXPECT_THROW(ParseQuantileMode("median"), ConfigError);
}

}  // namespace
}  // namespace hazboost
