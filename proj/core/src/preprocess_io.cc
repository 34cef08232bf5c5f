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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include <boost/crc.hpp>
#include <fmt/format.h>

#include "hazboost/preprocess.h"

namespace hazboost {
namespace {

static_assert(std::endian::native == std::endian::little,
              "the columnar format is written in host order and assumes little-endian");

constexpr std::string_view kMagic("HZBPRE\x01\x00", 8);
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  template <typename T>
  void Put(const T& value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.append(p, sizeof(T));
  }
  template <typename T>
  void PutArray(const std::vector<T>& values) {
    bytes_.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(T));
  }
  void PutString(const std::string& s) {
    Put(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  void PutDoubles(const std::vector<double>& values) {
    Put(static_cast<std::uint32_t>(values.size()));
    PutArray(values);
  }
  void Append(std::string_view raw) { bytes_.append(raw); }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    T value;
    std::memcpy(&value, Take(sizeof(T)), sizeof(T));
    return value;
  }
  template <typename T>
  std::vector<T> GetArray(std::size_t count) {
    if (count > (bytes_.size() - pos_) / sizeof(T)) {
      throw FormatError("preprocessed file: unexpected end of data");
    }
    const char* src = Take(count * sizeof(T));
    std::vector<T> values(count);
    std::memcpy(values.data(), src, count * sizeof(T));
    return values;
  }
  std::string GetString() {
    const auto size = Get<std::uint32_t>();
    return std::string(Take(size), size);
  }
  std::vector<double> GetDoubles() { return GetArray<double>(Get<std::uint32_t>()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const char* Take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw FormatError("preprocessed file: unexpected end of data");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

}  // namespace

std::string SerializePreprocessed(const PreprocessedData& data) {
  Writer w;
  w.Append(kMagic);
  w.Put(kFormatVersion);
  const auto p = static_cast<std::uint32_t>(data.num_covariates());
  w.Put(p);
  w.Put(static_cast<std::uint32_t>(data.grid.max_bins));
  w.Put(static_cast<std::uint8_t>(data.grid.mode == QuantileMode::kRaw ? 0 : 1));
  w.PutDoubles(data.grid.time_splits);
  for (const auto& s : data.grid.cov_splits) w.PutDoubles(s);
  w.PutDoubles(data.grid.lower);
  w.PutDoubles(data.grid.upper);
  for (const auto& name : data.covariate_names) w.PutString(name);
  w.Put(static_cast<std::uint32_t>(data.num_subjects()));
  for (const auto& id : data.subject_ids) w.PutString(id);

  const std::uint64_t rows = data.num_rows();
  w.Put(rows);
  w.PutArray(data.subject);
  w.PutArray(data.time_code);
  w.PutArray(data.weight);
  for (const auto& c : data.cov_codes) w.PutArray(c);
  std::vector<std::uint8_t> bits((rows + 7) / 8, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (data.delta[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  w.PutArray(bits);
  w.Put(data.total_weight);
  w.Put(static_cast<std::uint64_t>(data.total_events));
  w.Put(static_cast<std::uint64_t>(data.num_above_range));
  w.Put(Crc32(w.bytes()));
  return std::move(w.bytes());
}

PreprocessedData ParsePreprocessed(const std::string& bytes) {
  if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) ||
      std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a hazboost preprocessed file (bad magic)");
  }
  Reader head(std::string_view(bytes).substr(kMagic.size()));
  const auto version = head.Get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw VersionError(fmt::format("preprocessed file version {} is not supported (expected {})",
                                   version, kFormatVersion));
  }
  if (bytes.size() < kMagic.size() + 2 * sizeof(std::uint32_t)) {
    throw ChecksumError("preprocessed file truncated");
  }
  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint32_t));
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  if (Crc32(body) != stored) throw ChecksumError("preprocessed file checksum mismatch");

  Reader r(body.substr(kMagic.size() + sizeof(std::uint32_t)));
  PreprocessedData data;
  const auto p = r.Get<std::uint32_t>();
  data.grid.max_bins = r.Get<std::uint32_t>();
  data.grid.mode = r.Get<std::uint8_t>() == 0 ? QuantileMode::kRaw : QuantileMode::kWeighted;
  data.grid.time_splits = r.GetDoubles();
  data.grid.cov_splits.resize(p);
  for (auto& s : data.grid.cov_splits) s = r.GetDoubles();
  data.grid.lower = r.GetDoubles();
  data.grid.upper = r.GetDoubles();
  data.covariate_names.resize(p);
  for (auto& name : data.covariate_names) name = r.GetString();
  data.subject_ids.resize(r.Get<std::uint32_t>());
  for (auto& id : data.subject_ids) id = r.GetString();

  const auto rows = r.Get<std::uint64_t>();
  data.subject = r.GetArray<std::uint32_t>(rows);
  data.time_code = r.GetArray<BinCode>(rows);
  data.weight = r.GetArray<double>(rows);
  data.cov_codes.resize(p);
  for (auto& c : data.cov_codes) c = r.GetArray<BinCode>(rows);
  const auto bits = r.GetArray<std::uint8_t>((rows + 7) / 8);
  data.delta.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) data.delta[i] = (bits[i / 8] >> (i % 8)) & 1u;
  data.total_weight = r.Get<double>();
  data.total_events = r.Get<std::uint64_t>();
  data.num_above_range = r.Get<std::uint64_t>();
  if (!r.done()) throw FormatError("preprocessed file: trailing bytes");
  return data;
}

void SavePreprocessed(const PreprocessedData& data, const std::filesystem::path& path) {
  const std::string bytes = SerializePreprocessed(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

PreprocessedData LoadPreprocessed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParsePreprocessed(bytes);
}

}  // namespace hazboost
