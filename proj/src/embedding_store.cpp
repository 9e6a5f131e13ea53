// Copyright 2026 The leakscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "leakscope/embedding_store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

#include "leakscope/error.hpp"

namespace leakscope {
namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x4D, 0x42, 0x31};  // "EMB1"

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  template <typename T>
  T read_le() {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string read_string(std::size_t n) {
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void AppendLe(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void AppendId(std::vector<std::uint8_t>& out, const std::string& id,
              std::size_t index) {
  if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError(
        fmt::format("record {}: identifier longer than 65535 bytes", index));
  }
  AppendLe<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
  out.insert(out.end(), id.begin(), id.end());
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void CheckCsvId(const std::string& id, std::size_t index) {
  if (id.find_first_of(",\"\r\n") != std::string::npos) {
    throw ValidationError(fmt::format(
        "record {}: identifier '{}' cannot be written to CSV", index, id));
  }
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path, const void* data,
                    std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot create '{}'", path.string()));
  out.write(static_cast<const char*>(data),
            static_cast<std::streamsize>(size));
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

}  // namespace

EmbeddingSet EmbeddingSet::Create(std::string label, std::uint32_t dimension,
                                  std::vector<EmbeddingRecord> records,
                                  std::string source_note) {
  if (dimension == 0) throw ValidationError("dimension must be positive");
  EmbeddingSet set;
  set.label_ = std::move(label);
  set.dimension_ = dimension;
  set.source_note_ = std::move(source_note);
  set.index_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EmbeddingRecord& r = records[i];
    if (r.sample_id.empty()) {
      throw ValidationError(fmt::format("record {}: empty sample_id", i));
    }
    if (!set.index_.emplace(r.sample_id, i).second) {
      throw ValidationError(
          fmt::format("record {}: duplicate sample_id '{}'", i, r.sample_id));
    }
    if (r.enrolled) {
      if (r.vector.size() != dimension) {
        throw ValidationError(fmt::format(
            "record {}: vector length {} does not match dimension {}", i,
            r.vector.size(), dimension));
      }
      for (std::size_t k = 0; k < r.vector.size(); ++k) {
        if (!std::isfinite(r.vector[k])) {
          throw ValidationError(fmt::format(
              "record {}: non-finite component at position {}", i, k));
        }
      }
    } else if (!r.vector.empty()) {
      throw ValidationError(
          fmt::format("record {}: unenrolled record carries a vector", i));
    }
  }
  set.records_ = std::move(records);
  return set;
}

std::size_t EmbeddingSet::enrolled_count() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [](const EmbeddingRecord& r) { return r.enrolled; }));
}

std::size_t EmbeddingSet::find(std::string_view sample_id) const {
  const auto it = index_.find(std::string(sample_id));
  return it == index_.end() ? npos : it->second;
}

EmbeddingSet EmbeddingSet::relabeled(std::string label) const {
  EmbeddingSet copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

FileFormat FormatFromPath(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? FileFormat::kCsv : FileFormat::kBinary;
}

FileFormat ParseFileFormat(std::string_view name) {
  if (name == "binary" || name == "emb1") return FileFormat::kBinary;
  if (name == "csv") return FileFormat::kCsv;
  throw ValidationError(fmt::format("unknown format '{}'", name));
}

EmbeddingSet DecodeBinary(std::span<const std::uint8_t> bytes,
                          std::string label, std::string source_note) {
  ByteReader in(bytes);
  if (!in.has(16) || !std::equal(std::begin(kMagic), std::end(kMagic),
                                 bytes.begin())) {
    throw ValidationError("malformed header: missing EMB1 magic");
  }
  in.read_le<std::uint32_t>();  // magic
  const auto dimension = in.read_le<std::uint32_t>();
  const auto count = in.read_le<std::uint64_t>();
  if (dimension == 0) throw ValidationError("malformed header: dimension 0");
  // Every record needs at least 5 bytes, which bounds the reservation.
  if (count > in.remaining() / 5) {
    throw ValidationError(fmt::format(
        "malformed header: record count {} exceeds file size", count));
  }
  std::vector<EmbeddingRecord> records;
  records.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    auto truncated = [i] {
      return ValidationError(fmt::format("record {}: truncated", i));
    };
    for (std::string* id : {&r.sample_id, &r.subject_id}) {
      if (!in.has(2)) throw truncated();
      const auto len = in.read_le<std::uint16_t>();
      if (!in.has(len)) throw truncated();
      *id = in.read_string(len);
    }
    if (!in.has(1)) throw truncated();
    const auto flag = in.read_le<std::uint8_t>();
    if (flag > 1) {
      throw ValidationError(
          fmt::format("record {}: enrolled flag {} is not 0/1", i, flag));
    }
    r.enrolled = flag == 1;
    if (r.enrolled) {
      if (!in.has(std::size_t{4} * dimension)) throw truncated();
      r.vector.resize(dimension);
      for (auto& v : r.vector) {
        const auto bits = in.read_le<std::uint32_t>();
        std::memcpy(&v, &bits, sizeof v);
      }
    }
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) {
    throw ValidationError(
        fmt::format("{} trailing bytes after last record", in.remaining()));
  }
  return EmbeddingSet::Create(std::move(label), dimension, std::move(records),
                              std::move(source_note));
}

std::vector<std::uint8_t> EncodeBinary(const EmbeddingSet& set) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  AppendLe<std::uint32_t>(out, set.dimension());
  AppendLe<std::uint64_t>(out, set.size());
  const auto& records = set.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EmbeddingRecord& r = records[i];
    AppendId(out, r.sample_id, i);
    AppendId(out, r.subject_id, i);
    out.push_back(r.enrolled ? 1 : 0);
    if (r.enrolled) {
      for (float v : r.vector) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        AppendLe<std::uint32_t>(out, bits);
      }
    }
  }
  return out;
}

EmbeddingSet DecodeCsv(std::string_view text, std::string label,
                       std::string source_note) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError("malformed header: empty file");

  const auto header = SplitCsvLine(lines[0]);
  if (header.size() < 4 || header[0] != "sample_id" ||
      header[1] != "subject_id" || header[2] != "enrolled") {
    throw ValidationError(
        "malformed header: expected sample_id,subject_id,enrolled,v0,...");
  }
  const std::size_t dimension = header.size() - 3;
  for (std::size_t k = 0; k < dimension; ++k) {
    if (header[3 + k] != fmt::format("v{}", k)) {
      throw ValidationError(fmt::format(
          "malformed header: column {} should be v{}", 3 + k, k));
    }
  }

  std::vector<EmbeddingRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::size_t i = row - 1;
    const auto fields = SplitCsvLine(lines[row]);
    if (fields.size() != 3 && fields.size() != 3 + dimension) {
      throw ValidationError(fmt::format(
          "record {}: {} columns, expected 3 or {}", i, fields.size(),
          3 + dimension));
    }
    EmbeddingRecord r;
    r.sample_id = std::string(fields[0]);
    r.subject_id = std::string(fields[1]);
    if (fields[2] == "1") {
      r.enrolled = true;
    } else if (fields[2] != "0") {
      throw ValidationError(fmt::format(
          "record {}: enrolled field '{}' is not 0/1", i, fields[2]));
    }
    if (r.enrolled) {
      if (fields.size() != 3 + dimension) {
        throw ValidationError(fmt::format(
            "record {}: dimension mismatch, enrolled record has no vector",
            i));
      }
      r.vector.resize(dimension);
      for (std::size_t k = 0; k < dimension; ++k) {
        const std::string_view f = fields[3 + k];
        float v = 0.0f;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
          throw ValidationError(fmt::format(
              "record {}: cannot parse component {} ('{}')", i, k, f));
        }
        r.vector[k] = v;
      }
    } else if (fields.size() == 3 + dimension) {
      for (std::size_t k = 0; k < dimension; ++k) {
        if (!fields[3 + k].empty()) {
          throw ValidationError(fmt::format(
              "record {}: unenrolled record carries a vector", i));
        }
      }
    }
    records.push_back(std::move(r));
  }
  return EmbeddingSet::Create(std::move(label),
                              static_cast<std::uint32_t>(dimension),
                              std::move(records), std::move(source_note));
}

std::string EncodeCsv(const EmbeddingSet& set) {
  std::string out = "sample_id,subject_id,enrolled";
  for (std::uint32_t k = 0; k < set.dimension(); ++k) {
    out += fmt::format(",v{}", k);
  }
  out += '\n';
  char buf[64];
  const auto& records = set.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EmbeddingRecord& r = records[i];
    CheckCsvId(r.sample_id, i);
    CheckCsvId(r.subject_id, i);
    out += r.sample_id;
    out += ',';
    out += r.subject_id;
    out += r.enrolled ? ",1" : ",0";
    for (std::uint32_t k = 0; k < set.dimension(); ++k) {
      out += ',';
      if (r.enrolled) {
        const auto res = std::to_chars(buf, buf + sizeof buf, r.vector[k]);
        out.append(buf, res.ptr);
      }
    }
    out += '\n';
  }
  return out;
}

EmbeddingSet LoadEmbeddingSet(const std::filesystem::path& path,
                              FileFormat format, std::string label) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  try {
    if (format == FileFormat::kCsv) {
      return DecodeCsv(
          std::string_view(reinterpret_cast<const char*>(bytes.data()),
                           bytes.size()),
          std::move(label), path.string());
    }
    return DecodeBinary(bytes, std::move(label), path.string());
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void WriteEmbeddingSet(const EmbeddingSet& set,
                       const std::filesystem::path& path, FileFormat format) {
  if (format == FileFormat::kCsv) {
    const std::string text = EncodeCsv(set);
    WriteFileBytes(path, text.data(), text.size());
  } else {
    const std::vector<std::uint8_t> bytes = EncodeBinary(set);
    WriteFileBytes(path, bytes.data(), bytes.size());
  }
}

double FteRate(const EmbeddingSet& set) {
  if (set.size() == 0) throw ValidationError("FTE of an empty set");
  const std::size_t failed = set.size() - set.enrolled_count();
  return static_cast<double>(failed) / static_cast<double>(set.size());
}

std::vector<FilteredSet> IntersectEnrolled(
    std::span<const EmbeddingSet> sets) {
  if (sets.empty()) throw ValidationError("intersect_enrolled: no input sets");

  // Survivors: enrolled in the first set and in every other set.
  std::unordered_set<std::string> survivors;
  for (const EmbeddingRecord& r : sets[0].records()) {
    if (r.enrolled) survivors.insert(r.sample_id);
  }
  for (std::size_t s = 1; s < sets.size(); ++s) {
    for (auto it = survivors.begin(); it != survivors.end();) {
      const std::size_t idx = sets[s].find(*it);
      if (idx == EmbeddingSet::npos || !sets[s].records()[idx].enrolled) {
        it = survivors.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::vector<FilteredSet> out;
  out.reserve(sets.size());
  for (const EmbeddingSet& set : sets) {
    std::vector<EmbeddingRecord> kept;
    kept.reserve(survivors.size());
    for (const EmbeddingRecord& r : set.records()) {
      if (survivors.contains(r.sample_id)) kept.push_back(r);
    }
    const std::size_t removed = set.size() - kept.size();
    out.push_back({EmbeddingSet::Create(set.label(), set.dimension(),
                                        std::move(kept), set.source_note()),
                   removed});
  }
  return out;
}

}  // namespace leakscope
