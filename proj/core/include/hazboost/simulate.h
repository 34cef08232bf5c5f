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

#ifndef HAZBOOST_SIMULATE_H_
#define HAZBOOST_SIMULATE_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazboost/dataset.h"

namespace hazboost {

// Hazard ids 1..4 are the benchmark hazards; 0 is a constant rate.
inline constexpr int kConstantHazard = 0;

// Default (and for ids 1..4, the only valid) horizon of a hazard.
double DefaultHorizon(int hazard_id);

// lambda(t, x) for a scalar covariate x in [0, 1]. `rate` is used by the
// constant hazard only. Throws ConfigError outside the hazard's domain.
double TrueHazard(int hazard_id, double t, double x, double rate = 1.0);

struct SimConfig {
  int hazard_id = 1;
  // 0 selects DefaultHorizon(hazard_id).
  double horizon = 0.0;
  std::size_t num_subjects = 1000;
  // Extra U(0,1] covariates that do not enter the hazard.
  std::size_t num_irrelevant = 0;
  // Per-epoch probability of not being at risk.
  double p_drop = 0.0;
  bool recurring = false;
  // Maximum events per subject in recurring mode; 0 means unlimited.
  std::size_t max_events = 0;
  // The horizon is cut into this many equal covariate-update intervals.
  std::size_t num_epochs = 20;
  double constant_rate = 1.0;
  std::uint64_t seed = 0;

  double EffectiveHorizon() const;
  void Validate() const;
  bool operator==(const SimConfig&) const = default;
};

std::string SimConfigToJson(const SimConfig& config);
SimConfig SimConfigFromJson(std::string_view text);

// Ground-truth hazard of simulated data; the relevant covariate is column 0.
struct HazardOracle {
  int hazard_id = 1;
  double rate = 1.0;
  std::size_t covariate = 0;

  double operator()(double t, std::span<const double> x) const {
    return TrueHazard(hazard_id, t, x[covariate], rate);
  }
};

// Dominating rate for thinning: the maximum of the hazard over a dense
// (t, x) grid times 1.2, checked on a second, offset grid.
double HazardBound(int hazard_id, double horizon, double rate = 1.0);

struct SubjectStats {
  std::size_t epochs_considered = 0;
  std::size_t epochs_dropped = 0;
  std::size_t events = 0;
};

// One subject's at-risk epochs. Covariates are redrawn at every epoch
// boundary; an epoch is skipped with probability p_drop; events come from
// thinning a rate-`bound` Poisson process. Non-recurring subjects stop at
// their first event.
std::vector<EpochRow> SimulateSubject(const SimConfig& config, double bound,
                                      std::mt19937_64& rng, std::string_view subject_id,
                                      SubjectStats* stats = nullptr);

// Independent engine for subject `index`, derived from (seed, index).
std::mt19937_64 SubjectEngine(std::uint64_t seed, std::uint64_t index);

// Uniform on [0, 1) with 53 random bits.
double Uniform01(std::mt19937_64& rng);

struct SimulatedData {
  Dataset dataset;
  HazardOracle oracle;
  SubjectStats stats;
};

// Covariates are named x1, x2, ...; x1 drives the hazard.
SimulatedData SimulateDataset(const SimConfig& config, int threads = 1);

}  // namespace hazboost

#endif  // HAZBOOST_SIMULATE_H_
