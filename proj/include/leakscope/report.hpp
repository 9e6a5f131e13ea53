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

#ifndef LEAKSCOPE_REPORT_HPP_
#define LEAKSCOPE_REPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leakscope/pairing.hpp"
#include "leakscope/statistics.hpp"

namespace leakscope {

enum class Normalization { kCount, kDensity };

struct HistogramSpec {
  std::size_t bin_count = 100;
  // Explicit [lo, hi]; unset selects the data range.
  std::optional<std::pair<double, double>> range;
  Normalization normalization = Normalization::kCount;

  // Throws ValidationError unless bin_count >= 1 and lo < hi.
  void Validate() const;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
};

// Uniform bins, each half-open except the right-most, which is closed.
// Scores outside an explicit range are not counted. A data range with
// min == max yields the single bin [v - 0.5, v + 0.5] holding every score.
std::vector<HistogramBin> Histogram(std::span<const double> scores,
                                    const HistogramSpec& spec);

// Histograms of two score sets over one shared range: the explicit range if
// given, otherwise the combined min/max of both sets.
std::pair<std::vector<HistogramBin>, std::vector<HistogramBin>> HistogramPair(
    std::span<const double> left, std::span<const double> right,
    const HistogramSpec& spec);

// "bin_lo,bin_hi,value".
std::string HistogramToCsv(const std::vector<HistogramBin>& bins);
// "threshold,fmr_rr,fmr_rg".
std::string FmrCurveToCsv(const std::vector<FmrCurvePoint>& curve);

// report.json text, "leakscope-report/1" schema, two-space indented.
std::string ReportToJson(const AuditReport& report,
                         std::optional<std::uint64_t> seed = std::nullopt);

struct BundleOptions {
  HistogramSpec histogram;
  std::optional<std::uint64_t> seed;
  // Also write scores_rr.csv, scores_rg.csv, pairs_rr.csv, pairs_rg.csv.
  bool include_scores = false;
};

struct BundleFile {
  std::string name;
  std::size_t bytes = 0;
  std::string sha256;  // lowercase hex
};

// Written files in name order, MANIFEST.json excluded.
struct BundleManifest {
  std::vector<BundleFile> files;
};

std::string Sha256Hex(std::string_view data);

// Writes report.json, hist_rr.csv, hist_rg.csv, fmr_curve.csv and
// MANIFEST.json into out_dir, creating it if needed. Throws IoError naming
// the failing path.
BundleManifest EmitAuditBundle(const AuditReport& report, const ScoreSet& rr,
                               const ScoreSet& rg,
                               const std::filesystem::path& out_dir,
                               const BundleOptions& options = {});

}  // namespace leakscope

#endif  // LEAKSCOPE_REPORT_HPP_
