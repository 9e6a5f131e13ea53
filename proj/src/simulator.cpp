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

#include "leakscope/simulator.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "leakscope/error.hpp"
#include "leakscope/parallel.hpp"
#include "leakscope/random.hpp"

namespace leakscope {
namespace {

enum Domain : std::uint64_t {
  kTrainAnchor = 1,
  kTrainNoise = 2,
  kDisjointAnchor = 3,
  kDisjointNoise = 4,
  kGenChoice = 5,
  kFreshAnchor = 6,
  kGenNoise = 7,
};

// Unit-normalized isotropic Gaussian direction.
void DrawUnit(std::uint64_t stream, double* out, std::size_t dim) {
  SplitMix64 rng(stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      out[i] = normal(rng);
      norm2 += out[i] * out[i];
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim; ++i) out[i] *= inv;
}

std::vector<float> AddNoise(std::uint64_t stream, const double* anchor,
                            std::size_t dim, double sigma) {
  SplitMix64 rng(stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = static_cast<float>(anchor[i] + sigma * normal(rng));
  }
  return v;
}

std::size_t Digits(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

std::vector<double> Anchors(std::uint64_t seed, Domain domain,
                            std::size_t count, std::size_t dim,
                            unsigned threads) {
  std::vector<double> anchors(count * dim);
  ParallelForChunks(count, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      DrawUnit(StreamSeed(seed, domain, i), anchors.data() + i * dim, dim);
    }
  });
  return anchors;
}

EmbeddingSet MultiSamplePopulation(const SimConfig& cfg,
                                   const std::vector<double>& anchors,
                                   Domain noise_domain, const char* prefix,
                                   std::string_view label, unsigned threads) {
  const std::size_t dim = cfg.dimension;
  const std::size_t spi = cfg.samples_per_identity;
  const std::size_t wi = Digits(cfg.n_identities - 1);
  const std::size_t ws = Digits(spi - 1);
  std::vector<EmbeddingRecord> records(cfg.n_identities * spi);
  ParallelForChunks(records.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const std::size_t i = r / spi;
      const std::size_t j = r % spi;
      EmbeddingRecord& rec = records[r];
      rec.subject_id = fmt::format("{}-{:0{}}", prefix, i, wi);
      rec.sample_id = fmt::format("{}-{:0{}}", rec.subject_id, j, ws);
      rec.enrolled = true;
      rec.vector = AddNoise(StreamSeed(cfg.seed, noise_domain, r),
                            anchors.data() + i * dim, dim, cfg.noise_sigma);
    }
  });
  return EmbeddingSet::Create(
      std::string(label), cfg.dimension, std::move(records),
      fmt::format("simulated seed={}", cfg.seed));
}

}  // namespace

void SimConfig::Validate() const {
  if (dimension == 0) throw ValidationError("simulate: dimension must be > 0");
  if (n_identities == 0) {
    throw ValidationError("simulate: identities must be > 0");
  }
  if (samples_per_identity == 0) {
    throw ValidationError("simulate: samples per identity must be > 0");
  }
  if (n_generated == 0) {
    throw ValidationError("simulate: generated count must be > 0");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("simulate: sigma must be finite and >= 0");
  }
  if (!(leak_lambda >= 0.0 && leak_lambda <= 1.0)) {
    throw ValidationError("simulate: lambda must lie in [0, 1]");
  }
  if (!(truncation_psi >= 0.0 && truncation_psi <= 1.0)) {
    throw ValidationError("simulate: psi must lie in [0, 1]");
  }
}

SimulatedPopulations SimulatePopulations(const SimConfig& cfg,
                                         unsigned threads) {
  cfg.Validate();
  const std::size_t dim = cfg.dimension;
  const std::size_t n = cfg.n_identities;

  const std::vector<double> train =
      Anchors(cfg.seed, kTrainAnchor, n, dim, threads);
  const std::vector<double> disjoint =
      Anchors(cfg.seed, kDisjointAnchor, n, dim, threads);

  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) mean[c] += train[i * dim + c];
  }
  double norm2 = 0.0;
  for (double v : mean) norm2 += v * v;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : mean) v *= inv;
  }

  SimulatedPopulations out;
  out.real_train = MultiSamplePopulation(cfg, train, kTrainNoise, "train",
                                         kRealTrain, threads);
  out.real_disjoint = MultiSamplePopulation(cfg, disjoint, kDisjointNoise,
                                            "disjoint", kRealDisjoint, threads);

  const std::size_t wg = Digits(cfg.n_generated - 1);
  const double psi = cfg.truncation_psi;
  std::vector<EmbeddingRecord> records(cfg.n_generated);
  ParallelForChunks(records.size(), threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> anchor(dim);
    for (std::size_t g = b; g < e; ++g) {
      SplitMix64 choice(StreamSeed(cfg.seed, kGenChoice, g));
      const double u = UniformUnit(choice);
      const std::size_t k = UniformIndex(choice, n);
      if (u < cfg.leak_lambda) {
        const double* a = train.data() + k * dim;
        for (std::size_t c = 0; c < dim; ++c) {
          anchor[c] = psi * a[c] + (1.0 - psi) * mean[c];
        }
      } else {
        DrawUnit(StreamSeed(cfg.seed, kFreshAnchor, g), anchor.data(), dim);
      }
      EmbeddingRecord& rec = records[g];
      rec.sample_id = fmt::format("gen-{:0{}}", g, wg);
      rec.enrolled = true;
      rec.vector = AddNoise(StreamSeed(cfg.seed, kGenNoise, g), anchor.data(),
                            dim, cfg.noise_sigma);
    }
  });
  out.generated = EmbeddingSet::Create(
      std::string(kGenerated), cfg.dimension, std::move(records),
      fmt::format("simulated seed={} lambda={} psi={}", cfg.seed,
                  cfg.leak_lambda, cfg.truncation_psi));
  return out;
}

ShiftSign OracleExpectedShift(const SimConfig& cfg, const Metric& m) {
  if (cfg.leak_lambda == 0.0) return ShiftSign::kZero;
  return m.is_distance() ? ShiftSign::kNegative : ShiftSign::kPositive;
}

}  // namespace leakscope
