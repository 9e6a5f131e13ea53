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

#ifndef LEAKSCOPE_EMBEDDING_STORE_HPP_
#define LEAKSCOPE_EMBEDDING_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace leakscope {

// Population tags. Any other string is a custom label.
inline constexpr std::string_view kRealTrain = "REAL_TRAIN";
inline constexpr std::string_view kRealDisjoint = "REAL_DISJOINT";
inline constexpr std::string_view kGenerated = "GENERATED";

struct EmbeddingRecord {
  std::string sample_id;
  // Empty means "same as sample_id" (one image per identity).
  std::string subject_id;
  bool enrolled = false;
  // Empty unless enrolled.
  std::vector<float> vector;

  const std::string& subject() const {
    return subject_id.empty() ? sample_id : subject_id;
  }
  std::span<const float> values() const { return vector; }
};

// A labeled population of embeddings with one dimension. Construct through
// the loaders or EmbeddingSet::Create, which validate the record invariants.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  // Throws ValidationError naming the offending record index.
  static EmbeddingSet Create(std::string label, std::uint32_t dimension,
                             std::vector<EmbeddingRecord> records,
                             std::string source_note = {});

  const std::string& label() const { return label_; }
  std::uint32_t dimension() const { return dimension_; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const std::string& source_note() const { return source_note_; }
  std::size_t size() const { return records_.size(); }
  std::size_t enrolled_count() const;

  // Index of the record with this sample_id, or npos.
  std::size_t find(std::string_view sample_id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Same records under a different population tag.
  EmbeddingSet relabeled(std::string label) const;

 private:
  std::string label_;
  std::uint32_t dimension_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::string source_note_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class FileFormat { kBinary, kCsv };

// ".csv" selects CSV, anything else the EMB1 binary format.
FileFormat FormatFromPath(const std::filesystem::path& path);
FileFormat ParseFileFormat(std::string_view name);

EmbeddingSet LoadEmbeddingSet(const std::filesystem::path& path,
                              FileFormat format, std::string label);
void WriteEmbeddingSet(const EmbeddingSet& set,
                       const std::filesystem::path& path, FileFormat format);

// In-memory codecs behind the file functions.
EmbeddingSet DecodeBinary(std::span<const std::uint8_t> bytes,
                          std::string label, std::string source_note = {});
std::vector<std::uint8_t> EncodeBinary(const EmbeddingSet& set);
EmbeddingSet DecodeCsv(std::string_view text, std::string label,
                       std::string source_note = {});
std::string EncodeCsv(const EmbeddingSet& set);

// Failed-to-enroll fraction. Throws on an empty set.
double FteRate(const EmbeddingSet& set);

struct FilteredSet {
  EmbeddingSet set;
  std::size_t removed = 0;
};

// Keeps a record only when its sample_id is enrolled in every input set,
// so all matchers are compared on the same samples.
std::vector<FilteredSet> IntersectEnrolled(std::span<const EmbeddingSet> sets);

}  // namespace leakscope

#endif  // LEAKSCOPE_EMBEDDING_STORE_HPP_
