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

#include "leakscope/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>

#include "format_util.hpp"
#include "leakscope/error.hpp"
#include "leakscope/parallel.hpp"
#include "leakscope/random.hpp"

namespace leakscope {
namespace {

using RecordRefs = std::vector<const EmbeddingRecord*>;

void SortBySampleId(RecordRefs& refs) {
  std::sort(refs.begin(), refs.end(),
            [](const EmbeddingRecord* a, const EmbeddingRecord* b) {
              return a->sample_id < b->sample_id;
            });
}

RecordRefs EnrolledSorted(const EmbeddingSet& set) {
  RecordRefs refs;
  refs.reserve(set.size());
  for (const EmbeddingRecord& r : set.records()) {
    if (r.enrolled) refs.push_back(&r);
  }
  SortBySampleId(refs);
  return refs;
}

// Enrolled samples per subject, subjects and samples in ascending order.
// Subjects whose records all failed to enroll appear with an empty list.
std::map<std::string, RecordRefs> EnrolledBySubject(const EmbeddingSet& set) {
  std::map<std::string, RecordRefs> groups;
  for (const EmbeddingRecord& r : set.records()) {
    RecordRefs& g = groups[r.subject()];
    if (r.enrolled) g.push_back(&r);
  }
  for (auto& [subject, refs] : groups) SortBySampleId(refs);
  return groups;
}

}  // namespace

std::string_view PairLabelName(PairLabel label) {
  switch (label) {
    case PairLabel::kGenuine:
      return "GENUINE";
    case PairLabel::kImpostorRR:
      return "IMPOSTOR_RR";
    case PairLabel::kImpostorRG:
      return "IMPOSTOR_RG";
    case PairLabel::kImpostorUni:
      return "IMPOSTOR_UNI";
  }
  return "UNKNOWN";
}

PairManifest GenuinePairs(const EmbeddingSet& set) {
  PairManifest manifest;
  manifest.label = PairLabel::kGenuine;
  manifest.protocol_note = "all intra-subject pairs of enrolled samples";
  for (const auto& [subject, refs] : EnrolledBySubject(set)) {
    for (std::size_t i = 0; i < refs.size(); ++i) {
      for (std::size_t j = i + 1; j < refs.size(); ++j) {
        manifest.pairs.push_back({refs[i]->sample_id, refs[j]->sample_id,
                                  set.label(), set.label()});
      }
    }
  }
  if (manifest.pairs.empty()) {
    throw ProtocolError("genuine pairs: no subject has two enrolled samples");
  }
  return manifest;
}

PairManifest ImpostorPairsFirstVsLatter(const EmbeddingSet& set) {
  const auto groups = EnrolledBySubject(set);
  if (groups.size() < 2) {
    throw ProtocolError(
        "first-vs-latter impostors need at least two subjects");
  }
  std::vector<const RecordRefs*> subjects;
  subjects.reserve(groups.size());
  for (const auto& [subject, refs] : groups) {
    if (refs.size() < 4) {
      throw ProtocolError(fmt::format(
          "first-vs-latter impostors: subject '{}' has {} enrolled samples, "
          "need 4",
          subject, refs.size()));
    }
    subjects.push_back(&refs);
  }
  PairManifest manifest;
  manifest.label = PairLabel::kImpostorUni;
  manifest.protocol_note =
      "samples 0,1 of each subject vs samples 2,3 of every other subject";
  const std::size_t s = subjects.size();
  manifest.pairs.reserve(s * 2 * (s - 1) * 2);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t first = 0; first < 2; ++first) {
      for (std::size_t b = 0; b < s; ++b) {
        if (a == b) continue;
        for (std::size_t latter = 2; latter < 4; ++latter) {
          manifest.pairs.push_back({(*subjects[a])[first]->sample_id,
                                    (*subjects[b])[latter]->sample_id,
                                    set.label(), set.label()});
        }
      }
    }
  }
  return manifest;
}

PairManifest ImpostorPairsSplitHalf(const EmbeddingSet& set) {
  const RecordRefs refs = EnrolledSorted(set);
  if (refs.size() < 2) {
    throw ProtocolError(fmt::format(
        "split-half impostors need 2 enrolled records, have {}", refs.size()));
  }
  const std::size_t half = refs.size() / 2;
  PairManifest manifest;
  manifest.label = PairLabel::kImpostorRR;
  manifest.protocol_note = fmt::format(
      "sorted enrolled records split in half, i-th with i-th; {} dropped",
      refs.size() % 2);
  manifest.pairs.reserve(half);
  for (std::size_t i = 0; i < half; ++i) {
    const EmbeddingRecord* left = refs[i];
    const EmbeddingRecord* right = refs[half + i];
    if (left->subject() == right->subject()) {
      throw ProtocolError(fmt::format(
          "split-half impostors: '{}' and '{}' share subject '{}'",
          left->sample_id, right->sample_id, left->subject()));
    }
    manifest.pairs.push_back(
        {left->sample_id, right->sample_id, set.label(), set.label()});
  }
  return manifest;
}

PairManifest ImpostorPairsRealVsGenerated(const EmbeddingSet& real,
                                          const EmbeddingSet& generated,
                                          std::uint64_t seed) {
  const RecordRefs reals = EnrolledSorted(real);
  RecordRefs gens = EnrolledSorted(generated);
  if (reals.empty() || gens.empty()) {
    throw ProtocolError(fmt::format(
        "real-vs-generated impostors: {} has no enrolled records",
        reals.empty() ? real.label() : generated.label()));
  }
  DeterministicShuffle(std::span<const EmbeddingRecord*>(gens), seed);
  PairManifest manifest;
  manifest.label = PairLabel::kImpostorRG;
  manifest.seed = seed;
  manifest.protocol_note = fmt::format(
      "each real record vs one shuffled generated record (seed {}, {} "
      "generated, cyclic reuse)",
      seed, gens.size());
  manifest.pairs.reserve(reals.size());
  for (std::size_t i = 0; i < reals.size(); ++i) {
    manifest.pairs.push_back({reals[i]->sample_id,
                              gens[i % gens.size()]->sample_id, real.label(),
                              generated.label()});
  }
  return manifest;
}

ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  std::span<const EmbeddingSet* const> sets, const Metric& m,
                  unsigned threads) {
  if (!manifest) throw ValidationError("evaluate: null manifest");
  std::unordered_map<std::string_view, const EmbeddingSet*> by_label;
  for (const EmbeddingSet* s : sets) by_label.emplace(s->label(), s);

  auto resolve = [&](const std::string& set_label, const std::string& id,
                     std::size_t pair_index) -> const EmbeddingRecord* {
    const auto it = by_label.find(set_label);
    if (it == by_label.end()) {
      throw ValidationError(fmt::format(
          "pair {}: no embedding set labeled '{}'", pair_index, set_label));
    }
    const std::size_t idx = it->second->find(id);
    if (idx == EmbeddingSet::npos) {
      throw ValidationError(fmt::format(
          "pair {}: sample '{}' not found in {}", pair_index, id, set_label));
    }
    const EmbeddingRecord& r = it->second->records()[idx];
    if (!r.enrolled) {
      throw ValidationError(fmt::format(
          "pair {}: sample '{}' in {} is not enrolled", pair_index, id,
          set_label));
    }
    return &r;
  };

  const auto& pairs = manifest->pairs;
  std::vector<std::pair<const EmbeddingRecord*, const EmbeddingRecord*>>
      resolved(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    resolved[i] = {resolve(pairs[i].left_set, pairs[i].left_id, i),
                   resolve(pairs[i].right_set, pairs[i].right_id, i)};
  }

  ScoreSet out;
  out.label = manifest->label;
  out.metric = m;
  out.scores.resize(pairs.size());
  ParallelForChunks(pairs.size(), threads,
                    [&](std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        out.scores[i] = Compare(resolved[i].first->values(),
                                                resolved[i].second->values(),
                                                m);
                      }
                    });
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    if (!std::isfinite(out.scores[i])) {
      throw ValidationError(fmt::format("pair {}: non-finite score", i));
    }
  }
  out.manifest = std::move(manifest);
  return out;
}

ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  const EmbeddingSet& set, const Metric& m, unsigned threads) {
  const EmbeddingSet* sets[] = {&set};
  return Evaluate(std::move(manifest), sets, m, threads);
}

ScoreSet Evaluate(std::shared_ptr<const PairManifest> manifest,
                  const EmbeddingSet& left, const EmbeddingSet& right,
                  const Metric& m, unsigned threads) {
  const EmbeddingSet* sets[] = {&left, &right};
  return Evaluate(std::move(manifest), sets, m, threads);
}

std::string ManifestToCsv(const PairManifest& manifest) {
  std::string out = "left_id,right_id,left_set,right_set\n";
  for (const SamplePair& p : manifest.pairs) {
    out += fmt::format("{},{},{},{}\n", p.left_id, p.right_id, p.left_set,
                       p.right_set);
  }
  return out;
}

std::string ScoresToCsv(const ScoreSet& scores) {
  std::string out = "index,score\n";
  for (std::size_t i = 0; i < scores.scores.size(); ++i) {
    out += fmt::format("{},", i);
    internal::AppendDouble(out, scores.scores[i]);
    out += '\n';
  }
  return out;
}

}  // namespace leakscope
