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

#ifndef LEAKSCOPE_METRICS_HPP_
#define LEAKSCOPE_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace leakscope {

enum class MetricKind { kEuclidean, kCosine, kSimilarity };
enum class Orientation { kSmallerIsMoreSimilar, kLargerIsMoreSimilar };

// Similarity kernels may be swapped in for matchers with proprietary scores.
// A custom kernel must be symmetric and return finite values.
using SimilarityFn = double (*)(std::span<const float>, std::span<const float>);

struct Metric {
  MetricKind kind = MetricKind::kEuclidean;
  // Only consulted for kSimilarity; nullptr selects cosine similarity.
  SimilarityFn similarity = nullptr;

  Orientation orientation() const {
    return kind == MetricKind::kSimilarity ? Orientation::kLargerIsMoreSimilar
                                           : Orientation::kSmallerIsMoreSimilar;
  }
  bool is_distance() const {
    return orientation() == Orientation::kSmallerIsMoreSimilar;
  }
  // CLI name: euclidean | cosine | similarity.
  std::string_view name() const;

  static Metric Euclidean() { return {MetricKind::kEuclidean, nullptr}; }
  static Metric Cosine() { return {MetricKind::kCosine, nullptr}; }
  static Metric Similarity(SimilarityFn fn = nullptr) {
    return {MetricKind::kSimilarity, fn};
  }
};

Metric ParseMetric(std::string_view name);

// Comparison score between two equal-length finite vectors. Throws
// ValidationError on a length mismatch, or a zero vector under the cosine
// kernels.
double Compare(std::span<const float> a, std::span<const float> b,
               const Metric& m);

// True iff s1 denotes strictly greater similarity than s2 under m.
inline bool IsCloser(double s1, double s2, const Metric& m) {
  return m.is_distance() ? s1 < s2 : s1 > s2;
}

namespace kernel {

// Summation order shared by every scoring path: element i accumulates into
// lane i % kLanes (in increasing i), then lanes fold pairwise. Any caller
// that uses these helpers gets bit-identical scores regardless of tiling or
// thread count. The library is compiled with -ffp-contract=off so no path
// silently fuses multiply-adds.
inline constexpr std::size_t kLanes = 16;

inline double FoldLanes(double (&acc)[kLanes]) {
  for (std::size_t width = kLanes / 2; width > 0; width /= 2) {
    for (std::size_t l = 0; l < width; ++l) acc[l] += acc[l + width];
  }
  return acc[0];
}

template <typename T, typename U>
double Dot(const T* a, const U* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  for (std::size_t l = 0; i + l < n; ++l) {
    acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
  }
  return FoldLanes(acc);
}

template <typename T, typename U>
double SquaredDistance(const T* a, const U* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double d =
          static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
      acc[l] += d * d;
    }
  }
  for (std::size_t l = 0; i + l < n; ++l) {
    const double d =
        static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
    acc[l] += d * d;
  }
  return FoldLanes(acc);
}

// Eight doubles per vector register; kLanes / 8 registers per pair.
using Lanes8 = double __attribute__((vector_size(64)));
inline constexpr std::size_t kVectorsPerPair = kLanes / 8;

inline Lanes8 LoadLanes(const double* p) {
  Lanes8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// Register-blocked form of Dot (kSquared = false) and SquaredDistance
// (kSquared = true): scores P rows of `a` against R rows of `b`, both
// row-major with the given strides, into out[p * R + r]. Each pair
// accumulates in exactly the order of the single-pair kernels.
template <bool kSquared, int P, int R>
void BlockScores(const double* a, std::size_t a_stride, const double* b,
                 std::size_t b_stride, std::size_t n, double* out) {
  constexpr std::size_t W = kVectorsPerPair;
  Lanes8 acc[P][R][W] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    Lanes8 x[P][W];
    for (int p = 0; p < P; ++p) {
      for (std::size_t w = 0; w < W; ++w) {
        x[p][w] = LoadLanes(a + p * a_stride + i + 8 * w);
      }
    }
    for (int r = 0; r < R; ++r) {
      for (std::size_t w = 0; w < W; ++w) {
        const Lanes8 y = LoadLanes(b + r * b_stride + i + 8 * w);
        for (int p = 0; p < P; ++p) {
          if constexpr (kSquared) {
            const Lanes8 d = x[p][w] - y;
            acc[p][r][w] += d * d;
          } else {
            acc[p][r][w] += x[p][w] * y;
          }
        }
      }
    }
  }
  for (int p = 0; p < P; ++p) {
    for (int r = 0; r < R; ++r) {
      double lanes[kLanes];
      for (std::size_t w = 0; w < W; ++w) {
        const Lanes8 v = acc[p][r][w];
        std::memcpy(lanes + 8 * w, &v, sizeof v);
      }
      const double* ap = a + p * a_stride;
      const double* bp = b + r * b_stride;
      for (std::size_t l = 0; i + l < n; ++l) {
        if constexpr (kSquared) {
          const double d = ap[i + l] - bp[i + l];
          lanes[l] += d * d;
        } else {
          lanes[l] += ap[i + l] * bp[i + l];
        }
      }
      out[p * R + r] = FoldLanes(lanes);
    }
  }
}

// Normalized dot product clamped to [-1, 1].
inline double CosineSimilarity(double dot, double norm_a, double norm_b) {
  const double c = dot / (norm_a * norm_b);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

}  // namespace kernel
}  // namespace leakscope

#endif  // LEAKSCOPE_METRICS_HPP_
