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

#ifndef LEAKSCOPE_SIMULATOR_HPP_
#define LEAKSCOPE_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>

#include "leakscope/embedding_store.hpp"
#include "leakscope/metrics.hpp"

namespace leakscope {

struct SimConfig {
  std::uint32_t dimension = 512;
  std::size_t n_identities = 1000;
  std::size_t samples_per_identity = 4;
  double noise_sigma = 0.1;  // per-component within-identity spread
  // Probability that a generated sample is anchored to a training identity.
  double leak_lambda = 0.0;
  // Shrink of leaked anchors toward the training mean direction.
  double truncation_psi = 1.0;
  std::size_t n_generated = 1000;
  std::uint64_t seed = 0;

  // Throws ValidationError on zero counts or parameters out of range.
  void Validate() const;
};

struct SimulatedPopulations {
  EmbeddingSet real_train;
  EmbeddingSet real_disjoint;
  EmbeddingSet generated;
};

// Identity anchors are unit-normalized isotropic Gaussians; samples add
// N(0, sigma^2) noise per component and are not re-normalized. Each record
// draws from its own counter-based stream, so output is independent of the
// thread count.
//
// real_train:    n_identities x samples_per_identity, ids "train-I-J".
// real_disjoint: same shape around fresh anchors, ids "disjoint-I-J".
// generated:     n_generated single-sample identities "gen-G". With
//                probability lambda the anchor is
//                psi * a_k + (1 - psi) * mu, a_k a uniformly chosen training
//                anchor and mu the unit mean direction of all training
//                anchors; otherwise a fresh unit anchor.
//
// A generated record leaks iff its uniform draw u satisfies u < lambda, so
// for a fixed seed the leaked set grows monotonically with lambda.
SimulatedPopulations SimulatePopulations(const SimConfig& cfg,
                                         unsigned threads = 0);

enum class ShiftSign { kNegative, kZero, kPositive };

// Predicted sign of mean(R-G) - mean(R-R): zero without leakage, toward
// similarity (negative for distances, positive for similarities) otherwise.
ShiftSign OracleExpectedShift(const SimConfig& cfg, const Metric& m);

}  // namespace leakscope

#endif  // LEAKSCOPE_SIMULATOR_HPP_
