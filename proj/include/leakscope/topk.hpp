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

#ifndef LEAKSCOPE_TOPK_HPP_
#define LEAKSCOPE_TOPK_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "leakscope/embedding_store.hpp"
#include "leakscope/metrics.hpp"

namespace leakscope {

struct Neighbor {
  std::string sample_id;
  double score = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Most similar first; equal scores ordered by ascending sample_id.
struct NeighborList {
  std::string probe_id;
  std::vector<Neighbor> neighbors;
  Metric metric;
};

// Exact k most similar enrolled gallery records by exhaustive scan.
NeighborList TopK(const EmbeddingRecord& probe, const EmbeddingSet& gallery,
                  const Metric& m, std::size_t k);

struct TopKBatch {
  std::vector<NeighborList> lists;  // one per enrolled probe, probe order
  std::size_t skipped_probes = 0;   // unenrolled probes
};

// Streams probe blocks against gallery tiles; memory is O(gallery + probes *
// k), never a full score matrix. Output is identical for any thread count.
TopKBatch TopKBatchSearch(const EmbeddingSet& probes,
                          const EmbeddingSet& gallery, const Metric& m,
                          std::size_t k, unsigned threads = 0);

// "probe_id,rank,neighbor_id,score" with 1-based ranks.
std::string NeighborsToCsv(const std::vector<NeighborList>& lists);

}  // namespace leakscope

#endif  // LEAKSCOPE_TOPK_HPP_
