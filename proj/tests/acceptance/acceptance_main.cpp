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

// Acceptance suite: one [PASS]/[FAIL] line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "leakscope/cli.hpp"
#include "leakscope/embedding_store.hpp"
#include "leakscope/metrics.hpp"
#include "leakscope/pairing.hpp"
#include "leakscope/simulator.hpp"
#include "leakscope/statistics.hpp"
#include "leakscope/topk.hpp"

namespace leakscope {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Check(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  if (!o.pass) ++failures;
  std::cout << fmt::format("[{}] {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL",
                           name, o.detail, Seconds(start))
            << std::flush;
}

EmbeddingRecord Record(std::string id, std::string subject, std::vector<float> v) {
  EmbeddingRecord r;
  r.sample_id = std::move(id);
  r.subject_id = std::move(subject);
  r.enrolled = true;
  r.vector = std::move(v);
  return r;
}

std::vector<double> Normals(std::mt19937_64& rng, std::size_t n, double mean,
                            double sd) {
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

std::vector<double> Grid(std::mt19937_64& rng, std::size_t n, int levels, int offset) {
  std::uniform_int_distribution<int> pick(0, levels);
  std::vector<double> v(n);
  for (double& x : v) x = 0.125 * (pick(rng) + offset);
  return v;
}

// ---------------------------------------------------------------- pairing

Outcome PairingCounts() {
  const auto start = Clock::now();
  std::vector<EmbeddingRecord> records;
  for (int s = 0; s < 333; ++s) {
    for (int j = 0; j < 4; ++j) {
      records.push_back(Record(fmt::format("s{:03}-{}", s, j), fmt::format("s{:03}", s),
                               {static_cast<float>(s), static_cast<float>(j)}));
    }
  }
  const auto multi = EmbeddingSet::Create("REAL_TRAIN", 2, std::move(records));
  const std::size_t fvl = ImpostorPairsFirstVsLatter(multi).pairs.size();

  std::vector<EmbeddingRecord> flat;
  for (int i = 0; i < 57094; ++i) {
    flat.push_back(Record(fmt::format("r{:06}", i), {}, {static_cast<float>(i)}));
  }
  const auto single = EmbeddingSet::Create("REAL_TRAIN", 1, std::move(flat));
  const std::size_t split = ImpostorPairsSplitHalf(single).pairs.size();
  const double t = Seconds(start);
  return {fvl == 442224 && split == 28547 && t < 10.0,
          fmt::format("first-vs-latter {} (want 442224), split-half {} (want 28547), "
                      "{:.2f} s (limit 10)",
                      fvl, split, t)};
}

// ---------------------------------------------------------------- d-prime

Outcome DPrimeOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  const auto g1 = Normals(rng, 100000, 1.0, 1.0);
  const auto i1 = Normals(rng, 100000, 0.0, 1.0);
  const double d1 = DPrime(g1, i1);
  const double mu = 0.4, sigma = 0.15;
  const auto g2 = Normals(rng, 100000, mu + 2 * sigma, sigma);
  const auto i2 = Normals(rng, 100000, mu, sigma);
  const double d2 = DPrime(g2, i2);
  const double t = Seconds(start);
  const bool ok = std::abs(d1 - 1.0) <= 0.02 && std::abs(d2 - 2.0) <= 0.04 && t < 5.0;
  return {ok, fmt::format("d'={:.4f} (1 +/- 2%), d'={:.4f} (2 +/- 2%), {:.2f} s (limit 5)",
                          d1, d2, t)};
}

// --------------------------------------------------------------------- KS

double AllPointsKs(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  double best = 0.0;
  for (double x : pts) {
    double fa = 0, fb = 0;
    for (double v : a) fa += v <= x;
    for (double v : b) fb += v <= x;
    best = std::max(best, std::abs(fa / a.size() - fb / b.size()));
  }
  return best;
}

Outcome KsEquivalence() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t na = 1 + rng() % 1000, nb = 1 + rng() % 1000;
    const bool ties = t % 2 == 0;
    const auto a = ties ? Grid(rng, na, 40, 0) : Normals(rng, na, 0.0, 1.0);
    const auto b = ties ? Grid(rng, nb, 40, 2) : Normals(rng, nb, 0.1, 1.2);
    worst = std::max(worst, std::abs(KsTwoSample(a, b).statistic - AllPointsKs(a, b)));
  }
  std::size_t violations = 0;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    double prev = 1.0;
    for (int s = 0; s <= 2000; ++s) {
      const double p = KsPValue(s / 2000.0, n, n);
      violations += p > prev;
      prev = p;
    }
  }
  return {worst <= 1e-12 && violations == 0,
          fmt::format("max |sweep - oracle| = {:.3g} (limit 1e-12), p-value "
                      "monotonicity violations = {}",
                      worst, violations)};
}

// -------------------------------------------------------------------- AUC

double AllPairsAuc(const std::vector<double>& pos, const std::vector<double>& neg,
                   const Metric& m) {
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    for (double n : neg) {
      if (p == n) {
        ++ties;
      } else if (m.is_distance() ? p < n : p > n) {
        ++wins;
      }
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

Outcome AucEquivalence() {
  std::mt19937_64 rng(1003);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t np = 1 + rng() % 1000, nn = 1 + rng() % 1000;
    const bool ties = t % 2 == 0;
    const auto g = ties ? Grid(rng, np, 30, 0) : Normals(rng, np, 0.0, 1.0);
    const auto i = ties ? Grid(rng, nn, 30, 3) : Normals(rng, nn, 0.7, 1.0);
    const Metric m = t % 4 < 2 ? Metric::Euclidean() : Metric::Similarity();
    mismatches += Auc(g, i, m) != AllPairsAuc(g, i, m);
  }
  return {mismatches == 0, fmt::format("{} of 200 differ from all-pairs counting", mismatches)};
}

// ------------------------------------------------------------------ top-k

Outcome TopKEquivalence() {
  std::mt19937_64 rng(1004);
  const std::uint32_t dim = 64;
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::uniform_int_distribution<int> grid(-2, 2);
  auto vec = [&](bool coarse) {
    std::vector<float> v(dim);
    for (float& x : v) x = coarse ? 0.5f * grid(rng) : normal(rng);
    if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) v[0] = 1.0f;
    return v;
  };
  std::vector<EmbeddingRecord> gallery_records;
  for (int i = 0; i < 5000; ++i) {
    // Every fifth record duplicates an earlier one so exact ties occur.
    std::vector<float> v = (i % 5 == 4) ? gallery_records[rng() % i].vector : vec(i % 2 == 0);
    gallery_records.push_back(Record(fmt::format("g{:05}", (i * 7919) % 5000), {}, v));
  }
  const auto gallery = EmbeddingSet::Create("GENERATED", dim, std::move(gallery_records));
  std::vector<EmbeddingRecord> probe_records;
  for (int p = 0; p < 100; ++p) {
    probe_records.push_back(Record(fmt::format("p{:03}", p), {}, vec(p % 2 == 0)));
  }
  const auto probes = EmbeddingSet::Create("REAL_TRAIN", dim, std::move(probe_records));

  std::size_t mismatches = 0, checked = 0;
  for (const Metric& m : {Metric::Euclidean(), Metric::Cosine(), Metric::Similarity()}) {
    for (std::size_t k : {1u, 3u, 10u}) {
      const auto batch = TopKBatchSearch(probes, gallery, m, k);
      for (std::size_t p = 0; p < probes.size(); ++p) {
        std::vector<Neighbor> all;
        for (const auto& g : gallery.records()) {
          all.push_back({g.sample_id, Compare(probes.records()[p].values(), g.values(), m)});
        }
        std::sort(all.begin(), all.end(), [&](const Neighbor& a, const Neighbor& b) {
          if (a.score != b.score) return m.is_distance() ? a.score < b.score : a.score > b.score;
          return a.sample_id < b.sample_id;
        });
        all.resize(k);
        mismatches += batch.lists[p].neighbors != all;
        mismatches += TopK(probes.records()[p], gallery, m, k).neighbors != all;
        checked += 2;
      }
    }
  }
  return {mismatches == 0,
          fmt::format("{} of {} neighbor lists differ from full sort", mismatches, checked)};
}

// -------------------------------------------------------------- simulator

struct AuditNumbers {
  AuditReport report;
  ScoreSet rr;
  ScoreSet rg;
};

AuditNumbers SimulatedAudit(const SimConfig& cfg, const Metric& m, double baseline) {
  const auto pops = SimulatePopulations(cfg);
  auto rr_pairs = std::make_shared<PairManifest>(ImpostorPairsSplitHalf(pops.real_train));
  auto rg_pairs = std::make_shared<PairManifest>(
      ImpostorPairsRealVsGenerated(pops.real_train, pops.generated, cfg.seed));
  AuditNumbers out;
  out.rr = Evaluate(rr_pairs, pops.real_train, m);
  out.rg = Evaluate(rg_pairs, pops.real_train, pops.generated, m);
  out.report = BuildReport(out.rr, out.rg, m, baseline);
  return out;
}

Outcome LeakageMonotonicity() {
  const double lambdas[] = {0.0, 0.25, 0.5, 1.0};
  double mean_d[4] = {}, mean_diff[4] = {};
  const int seeds = 20;
  for (int l = 0; l < 4; ++l) {
    for (int s = 0; s < seeds; ++s) {
      SimConfig cfg;
      cfg.dimension = 64;
      cfg.n_identities = 500;
      cfg.samples_per_identity = 10;
      cfg.noise_sigma = 0.1;
      cfg.leak_lambda = lambdas[l];
      cfg.truncation_psi = 0.5;
      cfg.n_generated = 5000;
      cfg.seed = 5000 + s;
      const auto a = SimulatedAudit(cfg, Metric::Cosine(), 0.001);
      mean_d[l] += a.report.d_prime / seeds;
      mean_diff[l] += a.report.mean_difference / seeds;
    }
  }
  bool ok = mean_d[3] > mean_d[0];
  for (int l = 1; l < 4; ++l) ok &= mean_d[l] >= mean_d[l - 1];
  ok &= mean_diff[2] < 0.0 && mean_diff[3] < 0.0;
  return {ok, fmt::format("mean d' over 20 seeds at lambda 0/0.25/0.5/1 = {:.4f}/{:.4f}/"
                          "{:.4f}/{:.4f}; mean_difference at 0.5/1 = {:.4g}/{:.4g}",
                          mean_d[0], mean_d[1], mean_d[2], mean_d[3], mean_diff[2],
                          mean_diff[3])};
}

Outcome NullCalibration() {
  int calm = 0;
  double min_p = 1.0;
  for (int s = 0; s < 100; ++s) {
    SimConfig cfg;
    cfg.dimension = 64;
    cfg.n_identities = 2000;
    cfg.samples_per_identity = 1;
    cfg.leak_lambda = 0.0;
    cfg.n_generated = 2000;
    cfg.seed = 9000 + s;
    const auto a = SimulatedAudit(cfg, Metric::Cosine(), 0.001);
    calm += a.report.ks_p_value > 0.01;
    min_p = std::min(min_p, a.report.ks_p_value);
  }
  return {calm >= 95, fmt::format("{} of 100 null runs with KS p > 0.01 (need >= 95), "
                                  "min p = {:.3g}",
                                  calm, min_p)};
}

Outcome AmplificationSanity() {
  std::string detail;
  bool ok = true;
  for (double lambda : {0.0, 1.0}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      SimConfig cfg;
      cfg.dimension = 64;
      cfg.n_identities = 500;
      cfg.samples_per_identity = 400;
      cfg.noise_sigma = 0.12;
      cfg.leak_lambda = lambda;
      cfg.truncation_psi = 0.75;
      cfg.n_generated = 200000;
      cfg.seed = 700 + seed;
      const auto a = SimulatedAudit(cfg, Metric::Euclidean(), 0.001);
      const double t = a.report.threshold_at_baseline;
      std::size_t rr = 0, rg = 0;
      for (double x : a.rr.scores) rr += x <= t;
      for (double x : a.rg.scores) rg += x <= t;
      const double brute = (static_cast<double>(rg) / a.rg.size()) /
                           (static_cast<double>(rr) / a.rr.size());
      const double amp = a.report.amplification;
      ok &= a.rr.size() >= 100000 && amp == brute;
      ok &= lambda == 0.0 ? (amp >= 0.5 && amp <= 2.0) : amp > 2.0;
      detail += fmt::format("lambda={} seed={}: {:.3f} (brute {:.3f}, |R-R|={}); ", lambda,
                            cfg.seed, amp, brute, a.rr.size());
    }
  }
  detail += "want [0.5, 2] at lambda 0, > 2 at lambda 1";
  return {ok, detail};
}

// ------------------------------------------------------------ performance

Outcome Performance() {
  const std::uint32_t dim = 512;
  auto make = [&](const char* label, const char* prefix, std::size_t n,
                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<EmbeddingRecord> recs(n);
    for (std::size_t i = 0; i < n; ++i) {
      recs[i].sample_id = fmt::format("{}{:06}", prefix, i);
      recs[i].enrolled = true;
      recs[i].vector.resize(dim);
      for (float& x : recs[i].vector) x = normal(rng);
    }
    return EmbeddingSet::Create(label, dim, std::move(recs));
  };
  const auto probes = make("REAL_TRAIN", "p", 10000, 31);
  const auto gallery = make("GENERATED", "g", 50000, 32);
  auto start = Clock::now();
  const auto one = TopKBatchSearch(probes, gallery, Metric::Cosine(), 3, 1);
  const double t1 = Seconds(start);
  start = Clock::now();
  const auto eight = TopKBatchSearch(probes, gallery, Metric::Cosine(), 3, 8);
  const double t8 = Seconds(start);
  const bool same = NeighborsToCsv(one.lists) == NeighborsToCsv(eight.lists);
  return {t1 < 60.0 && t8 < 60.0 && same,
          fmt::format("threads=1 {:.1f} s, threads=8 {:.1f} s (limit 60), outputs {} "
                      "(hardware threads: {})",
                      t1, t8, same ? "identical" : "DIFFER",
                      std::thread::hardware_concurrency())};
}

// ------------------------------------------------------------ determinism

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "leakscope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome AuditDeterminism() {
  const auto root = std::filesystem::temp_directory_path() /
                    fmt::format("leakscope-acceptance-{}", std::random_device{}());
  std::filesystem::create_directories(root);
  const std::string prefix = (root / "sim/").string();
  bool ok = RunCli({"simulate", "--dim", "64", "--identities", "400",
                    "--samples-per-identity", "6", "--lambda", "0.5", "--psi", "0.5",
                    "--generated", "3000", "--seed", "17", "--out-prefix", prefix}) == 0;
  std::size_t compared = 0, differing = 0;
  for (const char* dir : {"a", "b"}) {
    ok &= RunCli({"audit", "--real", prefix + "real_train.emb", "--generated",
                  prefix + "generated.emb", "--metric", "cosine", "--seed", "17",
                  "--include-scores", "--out", (root / dir).string()}) == 0;
  }
  if (ok) {
    for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
      const auto name = entry.path().filename();
      ++compared;
      differing += Slurp(entry.path()) != Slurp(root / "b" / name);
    }
  }
  std::filesystem::remove_all(root);
  return {ok && compared >= 9 && differing == 0,
          fmt::format("{} bundle files compared, {} differ", compared, differing)};
}

}  // namespace
}  // namespace leakscope

int main() {
  using namespace leakscope;
  Check("pairing-count exactness", PairingCounts);
  Check("d' analytic oracle", DPrimeOracle);
  Check("K-S brute-force equivalence", KsEquivalence);
  Check("AUC brute-force equivalence", AucEquivalence);
  Check("top-k oracle equivalence", TopKEquivalence);
  Check("leakage monotonicity", LeakageMonotonicity);
  Check("null calibration", NullCalibration);
  Check("amplification sanity", AmplificationSanity);
  Check("performance", Performance);
  Check("determinism", AuditDeterminism);
  std::cout << fmt::format("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
