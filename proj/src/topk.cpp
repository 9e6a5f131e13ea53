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

#include "leakscope/topk.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "format_util.hpp"
#include "leakscope/error.hpp"
#include "leakscope/parallel.hpp"

namespace leakscope {
namespace {

constexpr std::size_t kProbeBlock = 128;
constexpr std::size_t kGalleryTile = 64;
constexpr std::size_t kBlockProbes = 4;
constexpr std::size_t kBlockRows = 2;

using BlockFn = void (*)(const double*, std::size_t, const double*,
                         std::size_t, std::size_t, double*);

// [dot | squared distance][probes - 1][rows - 1]
constexpr BlockFn kBlockKernels[2][kBlockProbes][kBlockRows] = {
    {{kernel::BlockScores<false, 1, 1>, kernel::BlockScores<false, 1, 2>},
     {kernel::BlockScores<false, 2, 1>, kernel::BlockScores<false, 2, 2>},
     {kernel::BlockScores<false, 3, 1>, kernel::BlockScores<false, 3, 2>},
     {kernel::BlockScores<false, 4, 1>, kernel::BlockScores<false, 4, 2>}},
    {{kernel::BlockScores<true, 1, 1>, kernel::BlockScores<true, 1, 2>},
     {kernel::BlockScores<true, 2, 1>, kernel::BlockScores<true, 2, 2>},
     {kernel::BlockScores<true, 3, 1>, kernel::BlockScores<true, 3, 2>},
     {kernel::BlockScores<true, 4, 1>, kernel::BlockScores<true, 4, 2>}}};

struct Candidate {
  double score;
  std::size_t index;  // into the gallery's record list
};

// Bounded selection of the k best candidates. The heap keeps the worst
// retained candidate on top so most scores are rejected by one comparison.
class BestK {
 public:
  BestK(std::size_t k, const Metric& m, const EmbeddingSet& gallery)
      : k_(k), metric_(m), records_(&gallery.records()) {
    heap_.reserve(k);
  }

  auto better() const {
    return [this](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return IsCloser(a.score, b.score, metric_);
      return (*records_)[a.index].sample_id < (*records_)[b.index].sample_id;
    };
  }

  void offer(double score, std::size_t index) {
    const Candidate c{score, index};
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), better());
    } else if (better()(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), better());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), better());
    }
  }

  // Quick reject: true if `score` cannot enter the heap.
  bool rejects(double score) const {
    if (heap_.size() < k_) return false;
    return IsCloser(heap_.front().score, score, metric_);
  }

  std::vector<Neighbor> take() {
    std::sort_heap(heap_.begin(), heap_.end(), better());
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    for (const Candidate& c : heap_) {
      out.push_back({(*records_)[c.index].sample_id, c.score});
    }
    heap_.clear();
    return out;
  }

 private:
  std::size_t k_;
  Metric metric_;
  const std::vector<EmbeddingRecord>* records_;
  std::vector<Candidate> heap_;
};

void CheckSearchArgs(const EmbeddingSet& gallery, std::size_t k) {
  if (k == 0) throw ValidationError("top-k: k must be at least 1");
  if (gallery.enrolled_count() == 0) {
    throw ProtocolError("top-k: gallery has no enrolled records");
  }
}

bool UsesCosineKernel(const Metric& m) {
  return m.kind == MetricKind::kCosine ||
         (m.kind == MetricKind::kSimilarity && m.similarity == nullptr);
}

double ScoreFromDot(const Metric& m, double dot, double norm_probe,
                    double norm_gallery) {
  const double c = kernel::CosineSimilarity(dot, norm_probe, norm_gallery);
  return m.kind == MetricKind::kCosine ? 1.0 - c : c;
}

// Gallery enrolled records as a dense row-major double matrix.
struct PackedGallery {
  std::size_t dim = 0;
  std::vector<std::size_t> record_index;
  std::vector<double> data;
  std::vector<double> norms;  // filled for cosine kernels
};

PackedGallery Pack(const EmbeddingSet& gallery, bool with_norms) {
  PackedGallery g;
  g.dim = gallery.dimension();
  const auto& records = gallery.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].enrolled) g.record_index.push_back(i);
  }
  g.data.resize(g.record_index.size() * g.dim);
  for (std::size_t r = 0; r < g.record_index.size(); ++r) {
    const auto& v = records[g.record_index[r]].vector;
    std::copy(v.begin(), v.end(), g.data.begin() + r * g.dim);
  }
  if (with_norms) {
    g.norms.resize(g.record_index.size());
    for (std::size_t r = 0; r < g.record_index.size(); ++r) {
      const double* row = g.data.data() + r * g.dim;
      g.norms[r] = std::sqrt(kernel::Dot(row, row, g.dim));
      if (g.norms[r] == 0.0) {
        throw ValidationError(fmt::format(
            "top-k: gallery sample '{}' is a zero vector under a cosine kernel",
            records[g.record_index[r]].sample_id));
      }
    }
  }
  return g;
}

}  // namespace

NeighborList TopK(const EmbeddingRecord& probe, const EmbeddingSet& gallery,
                  const Metric& m, std::size_t k) {
  if (!probe.enrolled) {
    throw ProtocolError(
        fmt::format("top-k: probe '{}' is not enrolled", probe.sample_id));
  }
  CheckSearchArgs(gallery, k);
  BestK best(k, m, gallery);
  const auto& records = gallery.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].enrolled) continue;
    best.offer(Compare(probe.values(), records[i].values(), m), i);
  }
  return {probe.sample_id, best.take(), m};
}

TopKBatch TopKBatchSearch(const EmbeddingSet& probes,
                          const EmbeddingSet& gallery, const Metric& m,
                          std::size_t k, unsigned threads) {
  CheckSearchArgs(gallery, k);
  TopKBatch result;
  std::vector<const EmbeddingRecord*> probe_refs;
  for (const EmbeddingRecord& r : probes.records()) {
    if (r.enrolled) {
      probe_refs.push_back(&r);
    } else {
      ++result.skipped_probes;
    }
  }
  if (probe_refs.empty()) return result;
  if (probes.dimension() != gallery.dimension()) {
    throw ValidationError(fmt::format(
        "top-k: probe dimension {} differs from gallery dimension {}",
        probes.dimension(), gallery.dimension()));
  }

  const bool cosine = UsesCosineKernel(m);
  const bool custom = m.kind == MetricKind::kSimilarity && !cosine;
  const PackedGallery g = Pack(gallery, cosine);
  const std::size_t dim = g.dim;
  const std::size_t n_gallery = g.record_index.size();
  const auto& gallery_records = gallery.records();

  result.lists.resize(probe_refs.size());
  const std::size_t n_blocks =
      (probe_refs.size() + kProbeBlock - 1) / kProbeBlock;

  ParallelForChunks(n_blocks, threads, [&](std::size_t b0, std::size_t b1) {
    std::vector<double> probe_data(kProbeBlock * dim);
    std::vector<double> probe_norms(kProbeBlock);
    for (std::size_t block = b0; block < b1; ++block) {
      const std::size_t p0 = block * kProbeBlock;
      const std::size_t p1 = std::min(p0 + kProbeBlock, probe_refs.size());
      std::vector<BestK> best;
      best.reserve(p1 - p0);
      for (std::size_t p = p0; p < p1; ++p) {
        best.emplace_back(k, m, gallery);
        const auto& v = probe_refs[p]->vector;
        double* row = probe_data.data() + (p - p0) * dim;
        std::copy(v.begin(), v.end(), row);
        if (cosine) {
          probe_norms[p - p0] = std::sqrt(kernel::Dot(row, row, dim));
          if (probe_norms[p - p0] == 0.0) {
            throw ValidationError(fmt::format(
                "top-k: probe '{}' is a zero vector under a cosine kernel",
                probe_refs[p]->sample_id));
          }
        }
      }

      for (std::size_t t0 = 0; t0 < n_gallery; t0 += kGalleryTile) {
        const std::size_t t1 = std::min(t0 + kGalleryTile, n_gallery);
        if (custom) {
          for (std::size_t p = p0; p < p1; ++p) {
            for (std::size_t r = t0; r < t1; ++r) {
              const std::size_t gi = g.record_index[r];
              const double score = Compare(probe_refs[p]->values(),
                                           gallery_records[gi].values(), m);
              if (!best[p - p0].rejects(score)) best[p - p0].offer(score, gi);
            }
          }
          continue;
        }
        for (std::size_t q = p0; q < p1; q += kBlockProbes) {
          const std::size_t np = std::min(kBlockProbes, p1 - q);
          for (std::size_t r = t0; r < t1; r += kBlockRows) {
            const std::size_t nr = std::min(kBlockRows, t1 - r);
            double raw[kBlockProbes * kBlockRows];
            kBlockKernels[cosine ? 0 : 1][np - 1][nr - 1](
                probe_data.data() + (q - p0) * dim, dim,
                g.data.data() + r * dim, dim, dim, raw);
            for (std::size_t p = 0; p < np; ++p) {
              BestK& heap = best[q - p0 + p];
              for (std::size_t j = 0; j < nr; ++j) {
                const double v = raw[p * nr + j];
                const double score =
                    cosine ? ScoreFromDot(m, v, probe_norms[q - p0 + p],
                                          g.norms[r + j])
                           : std::sqrt(v);
                if (!heap.rejects(score)) heap.offer(score, g.record_index[r + j]);
              }
            }
          }
        }
      }

      for (std::size_t p = p0; p < p1; ++p) {
        result.lists[p] = {probe_refs[p]->sample_id, best[p - p0].take(), m};
      }
    }
  });
  return result;
}

std::string NeighborsToCsv(const std::vector<NeighborList>& lists) {
  std::string out = "probe_id,rank,neighbor_id,score\n";
  for (const NeighborList& list : lists) {
    for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
      out += fmt::format("{},{},{},", list.probe_id, r + 1,
                         list.neighbors[r].sample_id);
      internal::AppendDouble(out, list.neighbors[r].score);
      out += '\n';
    }
  }
  return out;
}

}  // namespace leakscope
