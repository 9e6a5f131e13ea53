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

#ifndef LEAKSCOPE_STATISTICS_HPP_
#define LEAKSCOPE_STATISTICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "leakscope/metrics.hpp"
#include "leakscope/pairing.hpp"

namespace leakscope {

struct ScoreStatistics {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n - 1
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
};

// Needs at least two scores.
ScoreStatistics Summarize(std::span<const double> scores);

// Decidability |mean_g - mean_i| / sqrt((var_g + var_i) / 2) with unbiased
// variances. Throws when either side has fewer than two scores, or when both
// variances vanish while the means differ.
double DPrime(std::span<const double> genuine, std::span<const double> impostor);
double DPrime(const ScoreSet& genuine, const ScoreSet& impostor);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic two-sample p-value Q(lambda) with
// lambda = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * d and ne = na*nb/(na+nb).
double KsPValue(double statistic, std::size_t na, std::size_t nb);

// Exact sup |ECDF_a - ECDF_b| by a merged sweep over the sorted samples.
KsResult KsTwoSample(std::span<const double> a, std::span<const double> b);
KsResult KsTwoSample(const ScoreSet& a, const ScoreSet& b);

// P(random positive score is more similar than a random negative score)
// under m, ties counted one half. Rank based, O((n+m) log(n+m)).
double Auc(std::span<const double> positive, std::span<const double> negative,
           const Metric& m);
double Auc(const ScoreSet& genuine, const ScoreSet& impostor, const Metric& m);

// mean(rg) - mean(rr). Negative under a distance metric means R-G scores
// moved toward similarity.
double MeanDifference(std::span<const double> rr, std::span<const double> rg);
double MeanDifference(const ScoreSet& rr, const ScoreSet& rg);

struct FmrPoint {
  double threshold = 0.0;
  double fmr = 0.0;
};

// Fraction of impostor scores accepted at each threshold: score <= t for
// distances, score >= t for similarities. Thresholds must be sorted.
std::vector<FmrPoint> FmrCurve(std::span<const double> impostor,
                               const Metric& m,
                               std::span<const double> thresholds);

// Accepted-count helper used by the curve and the amplification ratio.
std::size_t AcceptedCount(std::span<const double> sorted_ascending,
                          const Metric& m, double threshold);

struct Amplification {
  double threshold = 0.0;
  double fmr_rr = 0.0;
  double fmr_rg = 0.0;
  double ratio = 0.0;
};

// Threshold at which R-R reaches the baseline FMR, read off the R-R order
// statistics (interpolated when baseline * n is fractional), and the R-G to
// R-R FMR ratio there. Throws ProtocolError when |rr| < 1 / baseline.
Amplification AmplificationAtBaseline(std::span<const double> rr,
                                      std::span<const double> rg,
                                      const Metric& m, double baseline);

struct FmrCurvePoint {
  double threshold = 0.0;
  double fmr_rr = 0.0;
  double fmr_rg = 0.0;
};

struct AuditReport {
  Metric metric;
  std::string label_left;   // score-set label of the R-R side
  std::string label_right;  // score-set label of the R-G side
  double d_prime = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  // P(R-G score more similar than R-R score); 0.5 without leakage.
  double auc = 0.5;
  double mean_difference = 0.0;
  double fte_left = 0.0;
  double fte_right = 0.0;
  double baseline_fmr = 0.0;
  double threshold_at_baseline = 0.0;
  double fmr_rr_at_threshold = 0.0;
  double fmr_rg_at_threshold = 0.0;
  double amplification = 0.0;
  std::size_t count_left = 0;
  std::size_t count_right = 0;
  std::vector<FmrCurvePoint> fmr_curve;
};

// Full R-R vs R-G comparison. The FMR curve is sampled at every distinct R-R
// score plus the baseline threshold.
AuditReport BuildReport(const ScoreSet& rr, const ScoreSet& rg,
                        const Metric& m, double baseline,
                        double fte_left = 0.0, double fte_right = 0.0);

}  // namespace leakscope

#endif  // LEAKSCOPE_STATISTICS_HPP_
