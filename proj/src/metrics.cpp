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

#include "leakscope/metrics.hpp"

#include <fmt/format.h>

#include "leakscope/error.hpp"

namespace leakscope {

std::string_view Metric::name() const {
  switch (kind) {
    case MetricKind::kEuclidean:
      return "euclidean";
    case MetricKind::kCosine:
      return "cosine";
    case MetricKind::kSimilarity:
      return "similarity";
  }
  return "unknown";
}

Metric ParseMetric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean();
  if (name == "cosine") return Metric::Cosine();
  if (name == "similarity") return Metric::Similarity();
  throw ValidationError(fmt::format(
      "unknown metric '{}' (expected euclidean|cosine|similarity)", name));
}

double Compare(std::span<const float> a, std::span<const float> b,
               const Metric& m) {
  if (a.size() != b.size()) {
    throw ValidationError(fmt::format("dimension mismatch: {} vs {}",
                                      a.size(), b.size()));
  }
  const std::size_t n = a.size();
  if (m.kind == MetricKind::kEuclidean) {
    return std::sqrt(kernel::SquaredDistance(a.data(), b.data(), n));
  }
  if (m.kind == MetricKind::kSimilarity && m.similarity != nullptr) {
    return m.similarity(a, b);
  }
  const double norm_a = std::sqrt(kernel::Dot(a.data(), a.data(), n));
  const double norm_b = std::sqrt(kernel::Dot(b.data(), b.data(), n));
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ValidationError("zero vector under a cosine kernel");
  }
  const double cos = kernel::CosineSimilarity(
      kernel::Dot(a.data(), b.data(), n), norm_a, norm_b);
  return m.kind == MetricKind::kCosine ? 1.0 - cos : cos;
}

}  // namespace leakscope
