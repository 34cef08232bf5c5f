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

#include <random>
#include <sstream>

#include "hazboost/dataset.h"
#include "support/test_util.h"

namespace hazboost {
namespace {

using testing::FigureDataset;

bool HasRule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v) {
    if (x.rule == rule) return true;
  }
  return false;
}

TEST(LoadCsv, FigureTable) {
  const Dataset d = FigureDataset();
  ASSERT_EQ(d.num_rows(), 4u);
  EXPECT_EQ(d.num_covariates(), 1u);
  EXPECT_EQ(d.num_subjects(), 2u);
  EXPECT_EQ(d.covariate_names(), std::vector<std::string>{"x"});
  EXPECT_EQ(d.subject_id(d.subject(0)), "1");
  EXPECT_EQ(d.t_start(0), 0.01);
  EXPECT_EQ(d.t_end(0), 0.13);
  EXPECT_EQ(d.covariate(0, 0), 0.27);
  EXPECT_EQ(d.delta(0), 1);
  EXPECT_EQ(d.subject_id(d.subject(3)), "2");
  EXPECT_EQ(d.t_start(3), 0.13);
  EXPECT_EQ(d.TotalEvents(), 2u);
  EXPECT_TRUE(Validate(d).empty());
}

TEST(LoadCsv, HeaderOnlyGivesEmptyDataset) {
  std::istringstream in("subject,t_start,t_end,x1,x2,delta\n");
  const Dataset d = ReadCsv(in);
  EXPECT_EQ(d.num_rows(), 0u);
  EXPECT_EQ(d.num_covariates(), 2u);
}

TEST(LoadCsv, ZeroLengthEpochRejected) {
  std::istringstream in("subject,t_start,t_end,x,delta\na,0.5,0.5,1,0\n");
  try {
    ReadCsv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("time_order"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, MalformedNumberNamesLineAndColumn) {
  std::istringstream in("subject,t_start,t_end,x,delta\na,0,1,1,0\na,1,2,abc,0\n");
  try {
    ReadCsv(in, {}, "f.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("f.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'x'"), std::string::npos) << msg;
  }
}

TEST(LoadCsv, MissingColumnIsSchemaError) {
  std::istringstream in("subject,start,t_end,x,delta\na,0,1,1,0\n");
  try {
    ReadCsv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("t_start"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, EmptyCellIsMissingAndRowsAreSortedPerSubject) {
  std::istringstream in(
      "subject,t_start,t_end,x,delta\nb,0.5,0.7,,1\nb,0.1,0.3,2,0\na,0,1,3,0\n");
  const Dataset d = ReadCsv(in);
  ASSERT_EQ(d.num_rows(), 3u);
  EXPECT_EQ(d.subject_id(d.subject(0)), "a");
  EXPECT_EQ(d.t_start(1), 0.1);
  EXPECT_TRUE(IsMissing(d.covariate(2, 0)));
  EXPECT_EQ(d.delta(2), 1);
}

TEST(LoadCsv, CustomSchema) {
  std::istringstream in("id,from,to,x,event\na,0,1,3,1\n");
  const CsvSchema schema{"id", "from", "to", "event"};
  const Dataset d = ReadCsv(in, schema);
  ASSERT_EQ(d.num_rows(), 1u);
  EXPECT_EQ(d.delta(0), 1);
}

TEST(Validate, OverlapAndDeltaRange) {
  DatasetBuilder b({"x"});
  const double x = 1.0;
  b.AddRow("a", 0.0, 0.5, {&x, 1}, 0);
  b.AddRow("a", 0.4, 0.9, {&x, 1}, 0);
  b.AddRow("b", 0.0, 0.5, {&x, 1}, 2);
  const Dataset d = std::move(b).Build();
  const auto v = Validate(d);
  EXPECT_TRUE(HasRule(v, "overlap"));
  EXPECT_TRUE(HasRule(v, "delta_range"));
  EXPECT_EQ(v.size(), 2u);
  for (const auto& item : v) EXPECT_FALSE(item.message.empty());
}

TEST(Validate, AdjacentAndGappedEpochsAreFine) {
  DatasetBuilder b({"x"});
  const double x = 1.0;
  b.AddRow("a", 0.0, 0.5, {&x, 1}, 1);
  b.AddRow("a", 0.5, 0.6, {&x, 1}, 0);
  b.AddRow("a", 0.8, 0.9, {&x, 1}, 1);
  EXPECT_TRUE(Validate(std::move(b).Build()).empty());
}

TEST(Validate, NonFiniteValues) {
  DatasetBuilder b({"x"});
  const double inf = std::numeric_limits<double>::infinity();
  b.AddRow("a", 0.0, inf, {&inf, 1}, 0);
  const auto v = Validate(std::move(b).Build());
  EXPECT_TRUE(HasRule(v, "finite_time"));
  EXPECT_TRUE(HasRule(v, "covariate_value"));
}

TEST(Validate, ShortCovariateRowIsFlagged) {
  DatasetBuilder b({"x", "y"});
  const double x = 1.0;
  b.AddRow("a", 0.0, 1.0, {&x, 1}, 0);
  EXPECT_TRUE(HasRule(Validate(std::move(b).Build()), "covariate_count"));
}

TEST(Dataset, CsvRoundTripIsExact) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    testing::RandomDatasetOptions opt;
    opt.lattice = trial % 2 == 0;
    opt.missing_rate = 0.2;
    const Dataset d = testing::RandomDataset(rng, opt);
    std::stringstream buffer;
    WriteCsv(d, buffer);
    const Dataset back = ReadCsv(buffer);
    EXPECT_EQ(back, d);
  }
}

TEST(Dataset, AtRiskTimeEqualsIntervalIntegral) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::RandomDataset(rng);
    double total = 0.0;
    for (std::size_t s = 0; s < d.num_subjects(); ++s) {
      // Integrate Y_i over a fine grid of (0, 1] via interval membership.
      const auto [lo, hi] = d.subject_rows(s);
      constexpr int kSteps = 2000;
      double integral = 0.0;
      for (int k = 0; k < kSteps; ++k) {
        const double t = (k + 0.5) / kSteps;
        for (std::size_t r = lo; r < hi; ++r) {
          if (d.t_start(r) < t && t <= d.t_end(r)) integral += 1.0 / kSteps;
        }
      }
      double sum = 0.0;
      for (std::size_t r = lo; r < hi; ++r) sum += d.duration(r);
      // Lattice times are multiples of 1/20, so the midpoint rule is exact.
      EXPECT_NEAR(sum, integral, 1e-9);
      total += sum;
    }
    EXPECT_NEAR(d.TotalAtRiskTime(), total, 1e-12);
  }
}

TEST(Dataset, SubjectOrderDoesNotMatter) {
  std::mt19937_64 rng(3);
  const Dataset d = testing::RandomDataset(rng);
  auto rows = d.rows();
  std::shuffle(rows.begin(), rows.end(), rng);
  const Dataset shuffled(d.covariate_names(), rows);
  EXPECT_EQ(shuffled, d);
}

TEST(Dataset, FindSubject) {
  const Dataset d = FigureDataset();
  ASSERT_TRUE(d.FindSubject("2").has_value());
  EXPECT_EQ(*d.FindSubject("2"), 1u);
  EXPECT_FALSE(d.FindSubject("3").has_value());
}

}  // namespace
}  // namespace hazboost
