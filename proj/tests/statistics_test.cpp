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

#include "leakscope/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "leakscope/error.hpp"

namespace leakscope {
namespace {

const Metric kDistance = Metric::Euclidean();
const Metric kSimilarity = Metric::Similarity();

std::vector<double> Normals(std::mt19937_64& rng, std::size_t n, double mean,
                            double sd) {
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Scores on a coarse grid so ties are common.
std::vector<double> GridScores(std::mt19937_64& rng, std::size_t n, int levels,
                               int offset) {
  std::uniform_int_distribution<int> pick(0, levels);
  std::vector<double> v(n);
  for (double& x : v) x = 0.125 * (pick(rng) + offset);
  return v;
}

double BruteForceKs(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  double best = 0.0;
  for (double x : points) {
    std::size_t ca = 0, cb = 0;
    for (double v : a) ca += v <= x;
    for (double v : b) cb += v <= x;
    best = std::max(best, std::abs(static_cast<double>(ca) / a.size() -
                                   static_cast<double>(cb) / b.size()));
  }
  return best;
}

double BruteForceAuc(const std::vector<double>& pos,
                     const std::vector<double>& neg, const Metric& m) {
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    for (double n : neg) {
      if (p == n) {
        ++ties;
      } else if (IsCloser(p, n, m)) {
        ++wins;
      }
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Alternating Kolmogorov series in extended precision with many terms.
double ReferenceQ(double lambda) {
  long double sum = 0;
  for (int j = 1; j <= 2000; ++j) {
    const long double term =
        std::exp(-2.0L * j * j * static_cast<long double>(lambda) * lambda);
    sum += (j % 2 ? 1 : -1) * term;
  }
  return static_cast<double>(2 * sum);
}

double LambdaFor(double d, std::size_t na, std::size_t nb) {
  const double ne = static_cast<double>(na) * nb / (na + nb);
  return (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
}

TEST(SummarizeTest, UnbiasedMomentsAndBounds) {
  const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
  const ScoreStatistics s = Summarize(x);
  EXPECT_EQ(s.count, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.variance, 32.0 / 7.0);
  EXPECT_EQ(s.min, 2.0);
  EXPECT_EQ(s.max, 9.0);
  EXPECT_THROW(Summarize(std::vector<double>{1.0}), Error);
}

TEST(DPrimeTest, IdenticalBagsGiveZero) {
  const std::vector<double> x = {0.3, 0.1, 0.7, 0.2};
  EXPECT_EQ(DPrime(x, x), 0.0);
}

TEST(DPrimeTest, ConstructedThreePointSetsGiveOne) {
  // {mu - 1, mu, mu + 1} has sample mean mu and unbiased variance 1.
  const std::vector<double> genuine = {0.0, 1.0, 2.0};
  const std::vector<double> impostor = {-1.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(Summarize(genuine).variance, 1.0);
  EXPECT_DOUBLE_EQ(Summarize(impostor).variance, 1.0);
  EXPECT_DOUBLE_EQ(DPrime(genuine, impostor), 1.0);
}

TEST(DPrimeTest, LargeNormalSamplesMatchAnalyticValue) {
  std::mt19937_64 rng(20);
  const auto g = Normals(rng, 100000, 1.0, 1.0);
  const auto i = Normals(rng, 100000, 0.0, 1.0);
  EXPECT_NEAR(DPrime(g, i), 1.0, 0.02);
  const auto g2 = Normals(rng, 100000, 3.0 + 2.0 * 0.5, 0.5);
  const auto i2 = Normals(rng, 100000, 3.0, 0.5);
  EXPECT_NEAR(DPrime(g2, i2), 2.0, 0.04);
}

TEST(DPrimeTest, ZeroPooledVariance) {
  const std::vector<double> a = {1, 1, 1};
  const std::vector<double> b = {2, 2};
  EXPECT_EQ(DPrime(a, a), 0.0);
  try {
    DPrime(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
  EXPECT_THROW(DPrime(std::vector<double>{1}, b), Error);
}

TEST(DPrimeTest, SymmetricAndScaleCovariant) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 200; ++t) {
    const auto a = Normals(rng, 2 + rng() % 300, 0.0, 1.0);
    const auto b = Normals(rng, 2 + rng() % 300, 0.5, 2.0);
    EXPECT_EQ(DPrime(a, b), DPrime(b, a));
    const double c = scale(rng);
    std::vector<double> ca = a, cb = b;
    for (double& x : ca) x *= c;
    for (double& x : cb) x *= c;
    EXPECT_NEAR(DPrime(ca, cb), DPrime(a, b), 1e-9 * DPrime(a, b) + 1e-12);
  }
}

TEST(KsTest, HandExamples) {
  const std::vector<double> same = {0.4, 0.1, 0.4, 0.9};
  EXPECT_EQ(KsTwoSample(same, same).statistic, 0.0);
  EXPECT_EQ(KsTwoSample(same, same).p_value, 1.0);
  EXPECT_EQ(KsTwoSample(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1})
                .statistic,
            1.0);
  EXPECT_EQ(KsTwoSample(std::vector<double>{1, 2, 3, 4},
                        std::vector<double>{3, 4, 5, 6})
                .statistic,
            0.5);
  EXPECT_THROW(KsTwoSample(std::vector<double>{}, same), Error);
}

TEST(KsTest, SweepEqualsAllPointsOracle) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 200; ++t) {
    const std::size_t na = 1 + rng() % 1000;
    const std::size_t nb = 1 + rng() % 1000;
    const bool ties = t % 2 == 0;
    const auto a = ties ? GridScores(rng, na, 40, 0) : Normals(rng, na, 0.0, 1.0);
    const auto b = ties ? GridScores(rng, nb, 40, 3) : Normals(rng, nb, 0.2, 1.1);
    EXPECT_NEAR(KsTwoSample(a, b).statistic, BruteForceKs(a, b), 1e-12);
  }
}

TEST(KsTest, PValueMatchesReferenceSeries) {
  for (double lambda = 0.3; lambda <= 3.0; lambda += 0.01) {
    // With na = nb = 200 the effective size is 100.
    const double d = lambda / (10.0 + 0.12 + 0.011);
    EXPECT_NEAR(KsPValue(d, 200, 200), std::clamp(ReferenceQ(lambda), 0.0, 1.0),
                1e-10)
        << lambda;
  }
  EXPECT_NEAR(KsPValue(1.0 / (10.0 + 0.12 + 0.011), 200, 200), 0.26999967167735456,
              1e-12);
}

TEST(KsTest, PValueDecreasesWithStatistic) {
  for (std::size_t n : {5u, 50u, 1000u, 100000u}) {
    double previous = 1.0;
    for (int step = 0; step <= 1000; ++step) {
      const double d = step / 1000.0;
      const double p = KsPValue(d, n, n);
      EXPECT_LE(p, previous) << n << " " << d;
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      previous = p;
    }
  }
  EXPECT_EQ(KsPValue(0.0, 10, 10), 1.0);
  EXPECT_NEAR(LambdaFor(0.1, 100, 300), (std::sqrt(75.0) + 0.12 + 0.11 / std::sqrt(75.0)) * 0.1,
              1e-15);
}

TEST(AucTest, HandExamples) {
  EXPECT_EQ(Auc(std::vector<double>{0.1, 0.2}, std::vector<double>{0.5, 0.9}, kDistance),
            1.0);
  const std::vector<double> x = {0.3, 0.1, 0.3};
  EXPECT_EQ(Auc(x, x, kDistance), 0.5);
  EXPECT_EQ(Auc(std::vector<double>{0.1, 0.4}, std::vector<double>{0.3, 0.9}, kDistance),
            0.75);
  EXPECT_EQ(Auc(std::vector<double>{0.1, 0.4}, std::vector<double>{0.3, 0.9}, kSimilarity),
            0.25);
  EXPECT_THROW(Auc(std::vector<double>{}, x, kDistance), Error);
}

TEST(AucTest, RankFormulaEqualsAllPairsCounting) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::size_t np = 1 + rng() % 1000;
    const std::size_t nn = 1 + rng() % 1000;
    const bool ties = t % 2 == 0;
    const auto g = ties ? GridScores(rng, np, 30, 0) : Normals(rng, np, 0.0, 1.0);
    const auto i = ties ? GridScores(rng, nn, 30, 4) : Normals(rng, nn, 1.0, 1.0);
    EXPECT_EQ(Auc(g, i, kDistance), BruteForceAuc(g, i, kDistance));
    EXPECT_EQ(Auc(g, i, kSimilarity), BruteForceAuc(g, i, kSimilarity));
  }
}

TEST(AucTest, FlippingOrientationAndNegatingScoresIsInvariant) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 100; ++t) {
    const auto g = GridScores(rng, 1 + rng() % 200, 20, 0);
    const auto i = GridScores(rng, 1 + rng() % 200, 20, 2);
    std::vector<double> ng = g, ni = i;
    for (double& x : ng) x = -x;
    for (double& x : ni) x = -x;
    EXPECT_EQ(Auc(g, i, kDistance), Auc(ng, ni, kSimilarity));
  }
}

TEST(MeanDifferenceTest, SignedSecondMinusFirst) {
  const std::vector<double> x = {0.25, 0.5};
  EXPECT_EQ(MeanDifference(x, x), 0.0);
  EXPECT_NEAR(MeanDifference(std::vector<double>{0.5, 1.5},
                             std::vector<double>{0.8, 1.0}),
              -0.1, 1e-15);
}

TEST(FmrCurveTest, DirectCounts) {
  const std::vector<double> scores = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> t = {0.0, 0.25, 0.3, 1.0};
  const auto d = FmrCurve(scores, kDistance, t);
  EXPECT_EQ(d[0].fmr, 0.0);
  EXPECT_EQ(d[1].fmr, 0.5);
  EXPECT_EQ(d[2].fmr, 0.75);
  EXPECT_EQ(d[3].fmr, 1.0);
  const auto s = FmrCurve(scores, kSimilarity, t);
  EXPECT_EQ(s[0].fmr, 1.0);
  EXPECT_EQ(s[1].fmr, 0.5);
  EXPECT_EQ(s[2].fmr, 0.5);
  EXPECT_EQ(s[3].fmr, 0.0);
  EXPECT_THROW(FmrCurve(scores, kDistance, std::vector<double>{0.3, 0.1}), Error);
  EXPECT_THROW(FmrCurve(std::vector<double>{}, kDistance, t), Error);
}

TEST(FmrCurveTest, MonotoneUnderOrientation) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const auto scores = GridScores(rng, 1 + rng() % 500, 50, 0);
    std::vector<double> t = GridScores(rng, 100, 60, -5);
    std::sort(t.begin(), t.end());
    const auto d = FmrCurve(scores, kDistance, t);
    const auto s = FmrCurve(scores, kSimilarity, t);
    for (std::size_t k = 1; k < t.size(); ++k) {
      EXPECT_LE(d[k - 1].fmr, d[k].fmr);
      EXPECT_GE(s[k - 1].fmr, s[k].fmr);
    }
  }
}

TEST(AmplificationTest, IdenticalDistributionsGiveOne) {
  std::mt19937_64 rng(26);
  const auto rr = Normals(rng, 5000, 1.0, 0.1);
  const auto a = AmplificationAtBaseline(rr, rr, kDistance, 0.001);
  EXPECT_EQ(a.ratio, 1.0);
  EXPECT_EQ(a.fmr_rr, 0.001);
  std::vector<double> sorted = rr;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(a.threshold, sorted[4]);
}

TEST(AmplificationTest, SimilarityOrientationUsesUpperTail) {
  std::vector<double> rr(1000);
  for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = static_cast<double>(i);
  const auto a = AmplificationAtBaseline(rr, rr, kSimilarity, 0.002);
  EXPECT_EQ(a.threshold, 998.0);
  EXPECT_EQ(a.fmr_rr, 0.002);
}

TEST(AmplificationTest, ShiftedGeneratedRatioMatchesBruteForceCount) {
  std::mt19937_64 rng(27);
  const auto rr = Normals(rng, 100000, 1.0, 0.1);
  const auto rg = Normals(rng, 100000, 0.97, 0.1);
  const auto a = AmplificationAtBaseline(rr, rg, kDistance, 0.001);
  std::size_t brute_rr = 0, brute_rg = 0;
  for (double x : rr) brute_rr += x <= a.threshold;
  for (double x : rg) brute_rg += x <= a.threshold;
  EXPECT_EQ(brute_rr, 100u);
  EXPECT_EQ(a.fmr_rr, static_cast<double>(brute_rr) / rr.size());
  EXPECT_EQ(a.fmr_rg, static_cast<double>(brute_rg) / rg.size());
  EXPECT_EQ(a.ratio, (static_cast<double>(brute_rg) / rg.size()) /
                         (static_cast<double>(brute_rr) / rr.size()));
  EXPECT_GT(a.ratio, 1.0);
}

TEST(AmplificationTest, InterpolatesBetweenOrderStatistics) {
  std::vector<double> rr(1500);
  for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = 10.0 + static_cast<double>(i);
  const auto a = AmplificationAtBaseline(rr, rr, kDistance, 0.001);
  EXPECT_DOUBLE_EQ(a.threshold, 10.5);
  EXPECT_EQ(a.fmr_rr, 1.0 / 1500.0);
}

TEST(AmplificationTest, Preconditions) {
  const std::vector<double> small(100, 1.0);
  try {
    AmplificationAtBaseline(small, small, kDistance, 0.001);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
  for (double bad : {0.0, 1.0, -0.1, 2.0}) {
    try {
      AmplificationAtBaseline(small, small, kDistance, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    }
  }
}

ScoreSet Scores(PairLabel label, std::vector<double> v) {
  ScoreSet s;
  s.label = label;
  s.metric = kDistance;
  s.scores = std::move(v);
  return s;
}

TEST(BuildReportTest, IdenticalSetsGiveNeutralReport) {
  std::mt19937_64 rng(28);
  const auto values = Normals(rng, 2000, 0.8, 0.1);
  const auto rr = Scores(PairLabel::kImpostorRR, values);
  const auto rg = Scores(PairLabel::kImpostorRG, values);
  const AuditReport r = BuildReport(rr, rg, kDistance, 0.001, 0.01, 0.02);
  EXPECT_EQ(r.d_prime, 0.0);
  EXPECT_EQ(r.ks_statistic, 0.0);
  EXPECT_EQ(r.ks_p_value, 1.0);
  EXPECT_EQ(r.auc, 0.5);
  EXPECT_EQ(r.mean_difference, 0.0);
  EXPECT_EQ(r.amplification, 1.0);
  EXPECT_EQ(r.fte_left, 0.01);
  EXPECT_EQ(r.fte_right, 0.02);
  EXPECT_EQ(r.count_left, 2000u);
  EXPECT_EQ(r.label_left, "IMPOSTOR_RR");
  EXPECT_EQ(r.label_right, "IMPOSTOR_RG");
}

TEST(BuildReportTest, CurveCoversDistinctScoresAndThreshold) {
  std::mt19937_64 rng(29);
  const auto rr = Scores(PairLabel::kImpostorRR, GridScores(rng, 3000, 80, 0));
  const auto rg = Scores(PairLabel::kImpostorRG, GridScores(rng, 2500, 80, -3));
  const AuditReport r = BuildReport(rr, rg, kDistance, 0.001);
  std::vector<double> distinct = rr.scores;
  distinct.push_back(r.threshold_at_baseline);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  ASSERT_EQ(r.fmr_curve.size(), distinct.size());
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    EXPECT_EQ(r.fmr_curve[k].threshold, distinct[k]);
    EXPECT_GE(r.fmr_curve[k].fmr_rr, 0.0);
    EXPECT_LE(r.fmr_curve[k].fmr_rg, 1.0);
    if (k > 0) {
      EXPECT_LE(r.fmr_curve[k - 1].fmr_rr, r.fmr_curve[k].fmr_rr);
      EXPECT_LE(r.fmr_curve[k - 1].fmr_rg, r.fmr_curve[k].fmr_rg);
    }
  }
  EXPECT_GT(r.auc, 0.5);
  EXPECT_LT(r.mean_difference, 0.0);
  EXPECT_GE(r.ks_statistic, 0.0);
  EXPECT_LE(r.ks_statistic, 1.0);
}

}  // namespace
}  // namespace leakscope
