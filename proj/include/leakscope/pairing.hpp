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

#ifndef LEAKSCOPE_PAIRING_HPP_
#define LEAKSCOPE_PAIRING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakscope/embedding_store.hpp"
#include "leakscope/metrics.hpp"

namespace leakscope {

enum class PairLabel { kGenuine, kImpostorRR, kImpostorRG, kImpostorUni };

std::string_view PairLabelName(PairLabel label);

struct SamplePair {
  std::string left_id;
  std::string right_id;
  std::string left_set;
  std::string right_set;

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct PairManifest {
  PairLabel label = PairLabel::kImpostorRR;
  std::vector<SamplePair> pairs;
  std::string protocol_note;
  // Set for randomized protocols.
  std::optional<std::uint64_t> seed;
};

struct ScoreSet {
  PairLabel label = PairLabel::kImpostorRR;
  Metric metric;
  std::vector<double> scores;
  std::shared_ptr<const PairManifest> manifest;

  std::size_t size() const { return scores.size(); }
};

// All unordered same-subject pairs among enrolled records, sorted by
// (subject, left sample_id, right sample_id) with left < right.
PairManifest GenuinePairs(const EmbeddingSet& set);

// Each subject's first two samples (ascending sample_id) against the third
// and fourth samples of every other subject: S * 2 * (S - 1) * 2 pairs.
PairManifest ImpostorPairsFirstVsLatter(const EmbeddingSet& set);

// Enrolled records sorted by sample_id; record i of the first half against
// record i of the second half. An odd last record is dropped.
PairManifest ImpostorPairsSplitHalf(const EmbeddingSet& set);

// Every enrolled real record (ascending sample_id) against one enrolled
// generated record. Generated records are shuffled with `seed` and reused
// cyclically when there are fewer of them.
PairManifest ImpostorPairsRealVsGenerated(const EmbeddingSet& real,
                                          const EmbeddingSet& generated,
                                          std::uint64_t seed);

// Scores every pair of the manifest. Sets are resolved by label. Output order
// equals manifest order for any thread count.
ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  std::span<const EmbeddingSet* const> sets, const Metric& m,
                  unsigned threads = 1);
ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  const EmbeddingSet& set, const Metric& m,
                  unsigned threads = 1);
ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  const EmbeddingSet& left, const EmbeddingSet& right,
                  const Metric& m, unsigned threads = 1);

// CSV exports: "left_id,right_id,left_set,right_set" and "index,score".
std::string ManifestToCsv(const PairManifest& manifest);
std::string ScoresToCsv(const ScoreSet& scores);

}  // namespace leakscope

#endif  // LEAKSCOPE_PAIRING_HPP_
