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

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

#include <boost/crc.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hazboost/predict.h"

namespace hazboost {
namespace {

using nlohmann::json;

constexpr std::string_view kHeaderPrefix = "hazboost-model v";
constexpr std::string_view kChecksumPrefix = "crc32 ";

std::string Hex(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:a}", v);
}

double FromHex(const json& j) {
  const std::string& s = j.get_ref<const std::string&>();
  if (s == "nan") return kMissing;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw FormatError(fmt::format("malformed float '{}' in model file", s));
  }
  return v;
}

json HexArray(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(Hex(v));
  return out;
}

std::vector<double> FromHexArray(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(FromHex(v));
  return out;
}

std::uint32_t Crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

json ConfigToJson(const BoostConfig& c) {
  return json{{"max_depth", c.max_depth},
              {"num_rounds", c.num_rounds},
              {"learning_rate", Hex(c.learning_rate)},
              {"min_child_events", Hex(c.min_child_events)},
              {"min_child_weight", Hex(c.min_child_weight)},
              {"quantile_mode", std::string(ToString(c.quantile_mode))},
              {"max_bins", c.max_bins},
              {"seed", c.seed},
              {"coalesce_rows", c.coalesce_rows}};
}

BoostConfig ConfigFromJson(const json& j) {
  BoostConfig c;
  c.max_depth = j.at("max_depth").get<int>();
  c.num_rounds = j.at("num_rounds").get<int>();
  c.learning_rate = FromHex(j.at("learning_rate"));
  c.min_child_events = FromHex(j.at("min_child_events"));
  c.min_child_weight = FromHex(j.at("min_child_weight"));
  c.quantile_mode = ParseQuantileMode(j.at("quantile_mode").get<std::string>());
  c.max_bins = j.at("max_bins").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.coalesce_rows = j.at("coalesce_rows").get<bool>();
  return c;
}

json TreeToJson(const Tree& tree) {
  json left = json::array(), right = json::array(), axis = json::array(),
       threshold = json::array(), missing = json::array(), score = json::array(),
       value = json::array();
  for (const auto& n : tree.nodes) {
    left.push_back(n.left);
    right.push_back(n.right);
    axis.push_back(n.axis);
    threshold.push_back(n.threshold);
    missing.push_back(n.missing == MissingDirection::kLeft ? "L" : "R");
    score.push_back(Hex(n.score));
    value.push_back(Hex(n.value));
  }
  return json{{"left", left},          {"right", right}, {"axis", axis},
              {"threshold", threshold}, {"missing", missing}, {"score", score},
              {"value", value}};
}

Tree TreeFromJson(const json& j, const CandidateGrid& grid, std::size_t index) {
  const auto& left = j.at("left");
  const std::size_t size = left.size();
  for (const char* key : {"right", "axis", "threshold", "missing", "score", "value"}) {
    if (j.at(key).size() != size) {
      throw FormatError(fmt::format("tree {}: array '{}' has the wrong length", index, key));
    }
  }
  if (size == 0) throw FormatError(fmt::format("tree {} has no nodes", index));
  Tree tree;
  tree.nodes.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    TreeNode& n = tree.nodes[i];
    n.left = left[i].get<std::int32_t>();
    n.right = j["right"][i].get<std::int32_t>();
    n.axis = j["axis"][i].get<std::uint32_t>();
    n.threshold = j["threshold"][i].get<std::uint16_t>();
    const std::string dir = j["missing"][i].get<std::string>();
    if (dir != "L" && dir != "R") {
      throw FormatError(fmt::format("tree {} node {}: bad missing direction", index, i));
    }
    n.missing = dir == "L" ? MissingDirection::kLeft : MissingDirection::kRight;
    n.score = FromHex(j["score"][i]);
    n.value = FromHex(j["value"][i]);

    const bool leaf = n.left < 0 && n.right < 0;
    const auto in_range = [&](std::int32_t c) {
      return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(size);
    };
    if (!leaf) {
      if (!in_range(n.left) || !in_range(n.right)) {
        throw FormatError(fmt::format("tree {} node {}: child index out of range", index, i));
      }
      if (n.axis >= grid.num_axes() || n.threshold + 1u >= grid.num_codes(n.axis)) {
        throw FormatError(fmt::format("tree {} node {}: split outside the grid", index, i));
      }
    } else if (n.left != -1 || n.right != -1 || !std::isfinite(n.value)) {
      throw FormatError(fmt::format("tree {} node {}: malformed leaf", index, i));
    }
  }
  return tree;
}

json Body(const BoostedModel& model) {
  const auto& g = model.grid;
  json cov = json::array();
  for (const auto& s : g.cov_splits) cov.push_back(HexArray(s));
  json grid{{"mode", std::string(ToString(g.mode))},
            {"max_bins", g.max_bins},
            {"time", HexArray(g.time_splits)},
            {"covariates", cov},
            {"lower", HexArray(g.lower)},
            {"upper", HexArray(g.upper)}};

  const auto& m = model.meta;
  json meta{{"config", ConfigToJson(m.config)},
            {"num_subjects", m.num_subjects},
            {"num_rows", m.num_rows},
            {"total_weight", Hex(m.total_weight)},
            {"total_events", m.total_events},
            {"risk_trace", HexArray(m.risk_trace)},
            {"rounds_completed", m.rounds_completed},
            {"stopped_early", m.stopped_early}};

  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(TreeToJson(t));

  return json{{"library_version", kVersion},
              {"f0", Hex(model.f0)},
              {"learning_rate", Hex(model.learning_rate)},
              {"covariate_names", model.covariate_names},
              {"grid", grid},
              {"importance_raw", HexArray(model.importance_raw)},
              {"meta", meta},
              {"trees", trees}};
}

BoostedModel FromBody(const json& j) {
  BoostedModel model;
  const auto& g = j.at("grid");
  model.grid.mode = ParseQuantileMode(g.at("mode").get<std::string>());
  model.grid.max_bins = g.at("max_bins").get<std::size_t>();
  model.grid.time_splits = FromHexArray(g.at("time"));
  for (const auto& s : g.at("covariates")) model.grid.cov_splits.push_back(FromHexArray(s));
  model.grid.lower = FromHexArray(g.at("lower"));
  model.grid.upper = FromHexArray(g.at("upper"));
  const std::size_t axes = model.grid.num_axes();
  if (model.grid.lower.size() != axes || model.grid.upper.size() != axes) {
    throw FormatError("grid range arrays do not match the number of axes");
  }
  for (std::size_t a = 0; a < axes; ++a) {
    if (model.grid.splits(a).size() > kMaxBins) throw FormatError("grid axis exceeds max bins");
  }

  model.f0 = FromHex(j.at("f0"));
  model.learning_rate = FromHex(j.at("learning_rate"));
  if (!std::isfinite(model.f0) || !(model.learning_rate > 0.0)) {
    throw FormatError("model intercept or learning rate is invalid");
  }
  model.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
  if (model.covariate_names.size() != model.grid.num_covariates()) {
    throw FormatError("covariate names do not match the grid");
  }
  model.importance_raw = FromHexArray(j.at("importance_raw"));

  const auto& m = j.at("meta");
  model.meta.config = ConfigFromJson(m.at("config"));
  model.meta.num_subjects = m.at("num_subjects").get<std::size_t>();
  model.meta.num_rows = m.at("num_rows").get<std::size_t>();
  model.meta.total_weight = FromHex(m.at("total_weight"));
  model.meta.total_events = m.at("total_events").get<std::size_t>();
  model.meta.risk_trace = FromHexArray(m.at("risk_trace"));
  model.meta.rounds_completed = m.at("rounds_completed").get<std::size_t>();
  model.meta.stopped_early = m.at("stopped_early").get<bool>();

  std::size_t index = 0;
  for (const auto& t : j.at("trees")) model.trees.push_back(TreeFromJson(t, model.grid, index++));
  return model;
}

}  // namespace

std::string SerializeModel(const BoostedModel& model) {
  const std::string body = Body(model).dump(1) + "\n";
  return fmt::format("{}{}\n{}{}{:08x}\n", kHeaderPrefix, kModelFormatVersion, body,
                     kChecksumPrefix, Crc32(body));
}

BoostedModel ParseModel(const std::string& text) {
  const std::size_t first_newline = text.find('\n');
  const std::string_view header = std::string_view(text).substr(0, first_newline);
  if (!header.starts_with(kHeaderPrefix)) throw FormatError("not a hazboost model file");
  const std::string_view version = header.substr(kHeaderPrefix.size());
  if (version != std::to_string(kModelFormatVersion)) {
    throw VersionError(fmt::format("unsupported model format version '{}' (expected {})", version,
                                   kModelFormatVersion));
  }
  if (first_newline == std::string::npos) throw ChecksumError("model file is truncated");

  // The checksum line is the last line of the file.
  const std::string_view rest = std::string_view(text).substr(first_newline + 1);
  if (rest.size() < 2 || rest.back() != '\n') throw ChecksumError("model file is truncated");
  const std::size_t last_line = rest.rfind('\n', rest.size() - 2);
  const std::size_t body_size = last_line == std::string_view::npos ? 0 : last_line + 1;
  const std::string_view checksum_line = rest.substr(body_size, rest.size() - body_size - 1);
  if (!checksum_line.starts_with(kChecksumPrefix)) {
    throw ChecksumError("model file is truncated: checksum line missing");
  }
  const std::string_view body = rest.substr(0, body_size);
  const std::string expected = fmt::format("{:08x}", Crc32(body));
  if (checksum_line.substr(kChecksumPrefix.size()) != expected) {
    throw ChecksumError("model file checksum mismatch");
  }

  try {
    return FromBody(json::parse(body));
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed model file: {}", e.what()));
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("malformed model file: {}", e.what()));
  }
}

void SaveModel(const BoostedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << SerializeModel(model);
  if (!out.flush()) throw Error(fmt::format("failed writing '{}'", path.string()));
}

BoostedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseModel(buffer.str());
}

}  // namespace hazboost
