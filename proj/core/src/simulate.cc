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

#include "hazboost/simulate.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hazboost {
namespace {

std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Beta22(double u) { return 6.0 * u * (1.0 - u); }

double Beta44(double u) {
  const double v = u * (1.0 - u);
  return 140.0 * v * v * v;
}

double NormalPdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void CheckHazardId(int hazard_id) {
  if (hazard_id < 0 || hazard_id > 4) {
    throw ConfigError(fmt::format("hazard id must be in 0..4, got {}", hazard_id));
  }
}

}  // namespace

double DefaultHorizon(int hazard_id) {
  CheckHazardId(hazard_id);
  return hazard_id == 3 || hazard_id == 4 ? 5.0 : 1.0;
}

double TrueHazard(int hazard_id, double t, double x, double rate) {
  CheckHazardId(hazard_id);
  if (!std::isfinite(t) || t < 0.0) {
    throw ConfigError(fmt::format("hazard {}: time {} outside the domain", hazard_id, t));
  }
  if (hazard_id == kConstantHazard) return rate;
  const double horizon = DefaultHorizon(hazard_id);
  if (t > horizon * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format("hazard {}: time {} beyond horizon {}", hazard_id, t, horizon));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ConfigError(fmt::format("hazard {}: covariate {} outside [0, 1]", hazard_id, x));
  }
  switch (hazard_id) {
    case 1:
      return Beta22(t) * Beta22(x);
    case 2:
      return Beta44(t) * Beta44(x);
    case 3: {
      if (t == 0.0) return 0.0;
      const double lt = std::log(t);
      return NormalPdf(lt - x) / (t * NormalCdf(x - lt));
    }
    default:
      return 1.5 * std::sqrt(t) * std::exp(-0.5 * std::cos(2.0 * std::numbers::pi * x) - 1.5);
  }
}

double SimConfig::EffectiveHorizon() const {
  return horizon > 0.0 ? horizon : DefaultHorizon(hazard_id);
}

void SimConfig::Validate() const {
  CheckHazardId(hazard_id);
  if (!std::isfinite(horizon) || horizon < 0.0) {
    throw ConfigError(fmt::format("horizon must be positive, got {}", horizon));
  }
  if (hazard_id != kConstantHazard && horizon != 0.0 && horizon != DefaultHorizon(hazard_id)) {
    throw ConfigError(fmt::format("hazard {} is defined on (0, {}], got horizon {}", hazard_id,
                                  DefaultHorizon(hazard_id), horizon));
  }
  if (num_subjects == 0) throw ConfigError("num_subjects must be positive");
  if (!(p_drop >= 0.0 && p_drop < 1.0)) {
    throw ConfigError(fmt::format("p_drop must be in [0, 1), got {}", p_drop));
  }
  if (num_epochs == 0) throw ConfigError("num_epochs must be positive");
  if (!std::isfinite(constant_rate) || constant_rate < 0.0) {
    throw ConfigError(fmt::format("constant_rate must be >= 0, got {}", constant_rate));
  }
}

std::string SimConfigToJson(const SimConfig& c) {
  const nlohmann::json j{{"hazard_id", c.hazard_id},
                         {"horizon", c.EffectiveHorizon()},
                         {"num_subjects", c.num_subjects},
                         {"num_irrelevant", c.num_irrelevant},
                         {"p_drop", c.p_drop},
                         {"recurring", c.recurring},
                         {"max_events", c.max_events},
                         {"num_epochs", c.num_epochs},
                         {"constant_rate", c.constant_rate},
                         {"seed", c.seed}};
  return j.dump(2);
}

SimConfig SimConfigFromJson(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SimConfig c;
    c.hazard_id = j.at("hazard_id").get<int>();
    c.horizon = j.value("horizon", 0.0);
    c.num_subjects = j.value("num_subjects", c.num_subjects);
    c.num_irrelevant = j.value("num_irrelevant", c.num_irrelevant);
    c.p_drop = j.value("p_drop", c.p_drop);
    c.recurring = j.value("recurring", c.recurring);
    c.max_events = j.value("max_events", c.max_events);
    c.num_epochs = j.value("num_epochs", c.num_epochs);
    c.constant_rate = j.value("constant_rate", c.constant_rate);
    c.seed = j.value("seed", c.seed);
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed simulation config: {}", e.what()));
  }
}

double HazardBound(int hazard_id, double horizon, double rate) {
  constexpr int kSteps = 1000;
  double top = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = horizon * i / kSteps;
    for (int j = 0; j <= kSteps; ++j) top = std::max(top, TrueHazard(hazard_id, t, double(j) / kSteps, rate));
  }
  const double bound = 1.2 * top;
  for (int i = 0; i < kSteps; ++i) {
    const double t = horizon * (i + 0.5) / kSteps;
    for (int j = 0; j < kSteps; ++j) {
      const double v = TrueHazard(hazard_id, t, (j + 0.5) / kSteps, rate);
      if (v > bound) {
        throw Error(fmt::format("hazard {} exceeds its thinning bound {} at t={}", hazard_id,
                                bound, t));
      }
    }
  }
  return bound;
}

std::mt19937_64 SubjectEngine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(Mix64(Mix64(seed) ^ Mix64(~index)));
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<EpochRow> SimulateSubject(const SimConfig& config, double bound,
                                      std::mt19937_64& rng, std::string_view subject_id,
                                      SubjectStats* stats) {
  const double horizon = config.EffectiveHorizon();
  const std::size_t epochs = config.num_epochs;
  std::vector<double> x(1 + config.num_irrelevant);
  std::vector<EpochRow> rows;
  SubjectStats local;
  bool stopped = false;

  auto emit = [&](double start, double end, int delta) {
    rows.push_back(EpochRow{std::string(subject_id), start, end, x, delta});
  };

  for (std::size_t e = 0; e < epochs && !stopped; ++e) {
    const double a = horizon * static_cast<double>(e) / static_cast<double>(epochs);
    const double b =
        e + 1 == epochs ? horizon : horizon * static_cast<double>(e + 1) / static_cast<double>(epochs);
    ++local.epochs_considered;
    // At-risk status and covariates are fixed before any event in the epoch.
    const bool dropped = Uniform01(rng) < config.p_drop;
    for (double& v : x) v = 1.0 - Uniform01(rng);
    if (dropped) {
      ++local.epochs_dropped;
      continue;
    }

    double start = a;
    double t = a;
    while (bound > 0.0) {
      t += -std::log(1.0 - Uniform01(rng)) / bound;
      if (t > b) break;
      if (Uniform01(rng) * bound >= TrueHazard(config.hazard_id, t, x[0], config.constant_rate)) {
        continue;
      }
      if (!(t > start)) continue;
      emit(start, t, 1);
      ++local.events;
      start = t;
      if (!config.recurring || (config.max_events != 0 && local.events >= config.max_events)) {
        stopped = true;
        break;
      }
    }
    if (!stopped && start < b) emit(start, b, 0);
  }
  if (stats) *stats = local;
  return rows;
}

SimulatedData SimulateDataset(const SimConfig& config, int threads) {
  config.Validate();
  const double horizon = config.EffectiveHorizon();
  const double bound = HazardBound(config.hazard_id, horizon, config.constant_rate);

  const std::size_t n = config.num_subjects;
  const std::size_t width = fmt::formatted_size("{}", n - 1);
  std::vector<std::vector<EpochRow>> histories(n);
  std::vector<SubjectStats> stats(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 64)
  for (std::int64_t i = 0; i < count; ++i) {
    auto rng = SubjectEngine(config.seed, static_cast<std::uint64_t>(i));
    const std::string id = fmt::format("{:0{}}", i, width);
    histories[i] = SimulateSubject(config, bound, rng, id, &stats[i]);
  }

  std::vector<std::string> names;
  for (std::size_t k = 0; k <= config.num_irrelevant; ++k) names.push_back(fmt::format("x{}", k + 1));
  DatasetBuilder builder(names);
  std::size_t total = 0;
  for (const auto& h : histories) total += h.size();
  builder.Reserve(total);

  SimulatedData out;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& row : histories[i]) builder.AddRow(row);
    out.stats.epochs_considered += stats[i].epochs_considered;
    out.stats.epochs_dropped += stats[i].epochs_dropped;
    out.stats.events += stats[i].events;
    std::vector<EpochRow>().swap(histories[i]);
  }
  out.dataset = std::move(builder).Build();
  out.oracle = HazardOracle{config.hazard_id, config.constant_rate, 0};
  return out;
}

}  // namespace hazboost
