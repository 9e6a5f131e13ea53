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
#include <cstdint>
#include <numbers>

#include <fmt/format.h>

#include "leakscope/error.hpp"

namespace leakscope {
namespace {

std::vector<double> Sorted(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

void RequireNonEmpty(std::span<const double> x, const char* what) {
  if (x.empty()) throw ProtocolError(fmt::format("{}: empty score set", what));
}

double Mean(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

}  // namespace

ScoreStatistics Summarize(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw ProtocolError(fmt::format(
        "need at least 2 scores for a sample variance, have {}",
        scores.size()));
  }
  ScoreStatistics s;
  s.count = scores.size();
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  s.min = *lo;
  s.max = *hi;
  s.mean = std::clamp(Mean(scores), s.min, s.max);
  double ss = 0.0;
  for (double v : scores) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(s.count - 1);
  return s;
}

double DPrime(std::span<const double> genuine,
              std::span<const double> impostor) {
  const ScoreStatistics g = Summarize(genuine);
  const ScoreStatistics i = Summarize(impostor);
  const double diff = std::abs(g.mean - i.mean);
  const double pooled = 0.5 * (g.variance + i.variance);
  if (pooled == 0.0) {
    if (diff == 0.0) return 0.0;
    throw ProtocolError("d': zero pooled variance with unequal means");
  }
  return diff / std::sqrt(pooled);
}

double DPrime(const ScoreSet& genuine, const ScoreSet& impostor) {
  return DPrime(genuine.scores, impostor.scores);
}

double KsPValue(double statistic, std::size_t na, std::size_t nb) {
  if (na == 0 || nb == 0) throw ProtocolError("K-S: empty score set");
  const double ne = static_cast<double>(na) * static_cast<double>(nb) /
                    static_cast<double>(na + nb);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * statistic;
  if (lambda <= 0.0) return 1.0;
  double q;
  if (lambda < 1.0) {
    // Jacobi-theta form of the same Kolmogorov tail; the alternating series
    // converges too slowly for small lambda.
    constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double k = 2.0 * j - 1.0;
      const double term = std::exp(-k * k * kPi2 / (8.0 * lambda * lambda));
      sum += term;
      if (term < 1e-12 * sum || term == 0.0) break;
    }
    q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(-2.0 * j * j * lambda * lambda);
      sum += sign * term;
      sign = -sign;
      if (term < 1e-12) break;
    }
    q = 2.0 * sum;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsResult KsTwoSample(std::span<const double> a, std::span<const double> b) {
  RequireNonEmpty(a, "K-S");
  RequireNonEmpty(b, "K-S");
  const std::vector<double> sa = Sorted(a);
  const std::vector<double> sb = Sorted(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return {d, KsPValue(d, sa.size(), sb.size())};
}

KsResult KsTwoSample(const ScoreSet& a, const ScoreSet& b) {
  return KsTwoSample(a.scores, b.scores);
}

double Auc(std::span<const double> positive, std::span<const double> negative,
           const Metric& m) {
  RequireNonEmpty(positive, "AUC");
  RequireNonEmpty(negative, "AUC");
  struct Entry {
    double value;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(positive.size() + negative.size());
  for (double v : positive) all.push_back({v, true});
  for (double v : negative) all.push_back({v, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& x, const Entry& y) { return x.value < y.value; });

  // Twice the positive rank sum, with tied groups sharing their mean rank,
  // keeps everything in exact integers.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t s = 0; s < all.size();) {
    std::size_t e = s;
    std::uint64_t group_pos = 0;
    while (e < all.size() && all[e].value == all[s].value) {
      group_pos += all[e].positive ? 1 : 0;
      ++e;
    }
    twice_rank_sum += group_pos * (s + 1 + e);
    s = e;
  }
  const std::uint64_t np = positive.size();
  const std::uint64_t nn = negative.size();
  // 2 * #(pos > neg) + #(pos == neg)
  const std::uint64_t u2 = twice_rank_sum - np * (np + 1);
  const std::uint64_t wins2 = m.is_distance() ? 2 * np * nn - u2 : u2;
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(np) *
                                       static_cast<double>(nn));
}

double Auc(const ScoreSet& genuine, const ScoreSet& impostor,
           const Metric& m) {
  return Auc(genuine.scores, impostor.scores, m);
}

double MeanDifference(std::span<const double> rr, std::span<const double> rg) {
  RequireNonEmpty(rr, "mean difference");
  RequireNonEmpty(rg, "mean difference");
  return Mean(rg) - Mean(rr);
}

double MeanDifference(const ScoreSet& rr, const ScoreSet& rg) {
  return MeanDifference(rr.scores, rg.scores);
}

std::size_t AcceptedCount(std::span<const double> sorted_ascending,
                          const Metric& m, double threshold) {
  if (m.is_distance()) {
    return static_cast<std::size_t>(
        std::upper_bound(sorted_ascending.begin(), sorted_ascending.end(),
                         threshold) -
        sorted_ascending.begin());
  }
  return static_cast<std::size_t>(
      sorted_ascending.end() -
      std::lower_bound(sorted_ascending.begin(), sorted_ascending.end(),
                       threshold));
}

std::vector<FmrPoint> FmrCurve(std::span<const double> impostor,
                               const Metric& m,
                               std::span<const double> thresholds) {
  RequireNonEmpty(impostor, "FMR curve");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ValidationError("FMR curve: thresholds must be sorted ascending");
  }
  const std::vector<double> sorted = Sorted(impostor);
  const double n = static_cast<double>(sorted.size());
  std::vector<FmrPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    curve.push_back({t, static_cast<double>(AcceptedCount(sorted, m, t)) / n});
  }
  return curve;
}

Amplification AmplificationAtBaseline(std::span<const double> rr,
                                      std::span<const double> rg,
                                      const Metric& m, double baseline) {
  if (!(baseline > 0.0 && baseline < 1.0)) {
    throw ValidationError(
        fmt::format("baseline FMR {} outside (0, 1)", baseline));
  }
  RequireNonEmpty(rr, "amplification");
  RequireNonEmpty(rg, "amplification");
  const std::vector<double> rr_sorted = Sorted(rr);
  const std::vector<double> rg_sorted = Sorted(rg);
  const std::size_t n = rr_sorted.size();

  double rank = baseline * static_cast<double>(n);
  const double nearest = std::round(rank);
  if (std::abs(rank - nearest) <= 1e-9 * std::max(1.0, rank)) rank = nearest;
  if (rank < 1.0) {
    throw ProtocolError(fmt::format(
        "baseline FMR {} unattainable with {} R-R scores (need >= {})",
        baseline, n, static_cast<std::size_t>(std::ceil(1.0 / baseline))));
  }
  // k-th most similar R-R score, 1-based.
  auto order_stat = [&](std::size_t k) {
    return m.is_distance() ? rr_sorted[k - 1] : rr_sorted[n - k];
  };
  const auto k = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(k);
  double threshold = order_stat(k);
  if (frac > 0.0 && k < n) {
    threshold += frac * (order_stat(k + 1) - threshold);
  }

  Amplification out;
  out.threshold = threshold;
  out.fmr_rr = static_cast<double>(AcceptedCount(rr_sorted, m, threshold)) /
               static_cast<double>(n);
  out.fmr_rg = static_cast<double>(AcceptedCount(rg_sorted, m, threshold)) /
               static_cast<double>(rg_sorted.size());
  out.ratio = out.fmr_rg / out.fmr_rr;
  return out;
}

AuditReport BuildReport(const ScoreSet& rr, const ScoreSet& rg,
                        const Metric& m, double baseline, double fte_left,
                        double fte_right) {
  AuditReport report;
  report.metric = m;
  report.label_left = PairLabelName(rr.label);
  report.label_right = PairLabelName(rg.label);
  report.d_prime = DPrime(rr, rg);
  const KsResult ks = KsTwoSample(rr, rg);
  report.ks_statistic = ks.statistic;
  report.ks_p_value = ks.p_value;
  report.auc = Auc(rg, rr, m);
  report.mean_difference = MeanDifference(rr, rg);
  report.fte_left = fte_left;
  report.fte_right = fte_right;
  report.baseline_fmr = baseline;
  const Amplification amp =
      AmplificationAtBaseline(rr.scores, rg.scores, m, baseline);
  report.threshold_at_baseline = amp.threshold;
  report.fmr_rr_at_threshold = amp.fmr_rr;
  report.fmr_rg_at_threshold = amp.fmr_rg;
  report.amplification = amp.ratio;
  report.count_left = rr.size();
  report.count_right = rg.size();

  std::vector<double> thresholds = Sorted(rr.scores);
  thresholds.push_back(amp.threshold);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  const auto curve_rr = FmrCurve(rr.scores, m, thresholds);
  const auto curve_rg = FmrCurve(rg.scores, m, thresholds);
  report.fmr_curve.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    report.fmr_curve.push_back(
        {thresholds[i], curve_rr[i].fmr, curve_rg[i].fmr});
  }
  return report;
}

}  // namespace leakscope
