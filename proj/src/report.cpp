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

#include "leakscope/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "format_util.hpp"
#include "leakscope/error.hpp"

namespace leakscope {
namespace {

using internal::AppendDouble;

std::vector<HistogramBin> Bin(std::span<const double> scores, double lo,
                              double hi, const HistogramSpec& spec) {
  const std::size_t bins = spec.bin_count;
  const double width = (hi - lo) / static_cast<double>(bins);
  const auto edge = [&](std::size_t i) {
    return i == bins ? hi : lo + width * static_cast<double>(i);
  };
  std::vector<std::size_t> counts(bins, 0);
  std::size_t total = 0;
  for (double x : scores) {
    if (x < lo || x > hi) continue;
    auto idx = static_cast<std::size_t>(
        std::min((x - lo) / width, static_cast<double>(bins - 1)));
    while (idx > 0 && x < edge(idx)) --idx;
    while (idx + 1 < bins && x >= edge(idx + 1)) ++idx;
    ++counts[idx];
    ++total;
  }
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lo = edge(i);
    out[i].hi = edge(i + 1);
    const double c = static_cast<double>(counts[i]);
    if (spec.normalization == Normalization::kCount) {
      out[i].value = c;
    } else {
      out[i].value =
          total == 0 ? 0.0
                     : c / (static_cast<double>(total) * (out[i].hi - out[i].lo));
    }
  }
  return out;
}

std::vector<HistogramBin> SingleBin(std::span<const double> scores, double v,
                                    const HistogramSpec& spec) {
  HistogramBin bin{v - 0.5, v + 0.5, static_cast<double>(scores.size())};
  if (spec.normalization == Normalization::kDensity) {
    bin.value = scores.empty() ? 0.0 : 1.0 / (bin.hi - bin.lo);
  }
  return {bin};
}

void RequireScores(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("histogram: no scores");
}

std::string ToHex(const unsigned char* bytes, unsigned len) {
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", bytes[i]);
  return out;
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

nlohmann::ordered_json Number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

void HistogramSpec::Validate() const {
  if (bin_count < 1) throw ValidationError("histogram: bin_count must be >= 1");
  if (range && !(range->first < range->second)) {
    throw ValidationError("histogram: explicit range needs lo < hi");
  }
  if (range && !(std::isfinite(range->first) && std::isfinite(range->second))) {
    throw ValidationError("histogram: explicit range must be finite");
  }
}

std::vector<HistogramBin> Histogram(std::span<const double> scores,
                                    const HistogramSpec& spec) {
  spec.Validate();
  RequireScores(scores);
  if (spec.range) return Bin(scores, spec.range->first, spec.range->second, spec);
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return SingleBin(scores, *lo, spec);
  return Bin(scores, *lo, *hi, spec);
}

std::pair<std::vector<HistogramBin>, std::vector<HistogramBin>> HistogramPair(
    std::span<const double> left, std::span<const double> right,
    const HistogramSpec& spec) {
  spec.Validate();
  RequireScores(left);
  RequireScores(right);
  if (spec.range) return {Histogram(left, spec), Histogram(right, spec)};
  const auto [llo, lhi] = std::minmax_element(left.begin(), left.end());
  const auto [rlo, rhi] = std::minmax_element(right.begin(), right.end());
  const double lo = std::min(*llo, *rlo);
  const double hi = std::max(*lhi, *rhi);
  if (lo == hi) return {SingleBin(left, lo, spec), SingleBin(right, lo, spec)};
  return {Bin(left, lo, hi, spec), Bin(right, lo, hi, spec)};
}

std::string HistogramToCsv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lo,bin_hi,value\n";
  for (const HistogramBin& b : bins) {
    AppendDouble(out, b.lo);
    out += ',';
    AppendDouble(out, b.hi);
    out += ',';
    AppendDouble(out, b.value);
    out += '\n';
  }
  return out;
}

std::string FmrCurveToCsv(const std::vector<FmrCurvePoint>& curve) {
  std::string out = "threshold,fmr_rr,fmr_rg\n";
  for (const FmrCurvePoint& p : curve) {
    AppendDouble(out, p.threshold);
    out += ',';
    AppendDouble(out, p.fmr_rr);
    out += ',';
    AppendDouble(out, p.fmr_rg);
    out += '\n';
  }
  return out;
}

std::string ReportToJson(const AuditReport& report,
                         std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json j;
  j["version"] = "leakscope-report/1";
  j["metric"] = std::string(report.metric.name());
  j["label_left"] = report.label_left;
  j["label_right"] = report.label_right;
  j["d_prime"] = Number(report.d_prime);
  j["ks_statistic"] = Number(report.ks_statistic);
  j["ks_p_value"] = Number(report.ks_p_value);
  j["auc"] = Number(report.auc);
  j["mean_difference"] = Number(report.mean_difference);
  j["fte_left"] = Number(report.fte_left);
  j["fte_right"] = Number(report.fte_right);
  j["baseline_fmr"] = Number(report.baseline_fmr);
  j["amplification"] = Number(report.amplification);
  j["threshold_at_baseline"] = Number(report.threshold_at_baseline);
  j["fmr_rr_at_threshold"] = Number(report.fmr_rr_at_threshold);
  j["fmr_rg_at_threshold"] = Number(report.fmr_rg_at_threshold);
  j["counts"] = {{"left", report.count_left}, {"right", report.count_right}};
  if (seed) j["seed"] = *seed;
  return j.dump(2) + "\n";
}

std::string Sha256Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) !=
      1) {
    throw Error(ErrorKind::kIo, "sha256 digest failed");
  }
  return ToHex(md, len);
}

BundleManifest EmitAuditBundle(const AuditReport& report, const ScoreSet& rr,
                               const ScoreSet& rg,
                               const std::filesystem::path& out_dir,
                               const BundleOptions& options) {
  std::map<std::string, std::string> files;
  files["report.json"] = ReportToJson(report, options.seed);
  auto [hist_rr, hist_rg] = HistogramPair(rr.scores, rg.scores, options.histogram);
  files["hist_rr.csv"] = HistogramToCsv(hist_rr);
  files["hist_rg.csv"] = HistogramToCsv(hist_rg);
  files["fmr_curve.csv"] = FmrCurveToCsv(report.fmr_curve);
  if (options.include_scores) {
    files["scores_rr.csv"] = ScoresToCsv(rr);
    files["scores_rg.csv"] = ScoresToCsv(rg);
    if (rr.manifest) files["pairs_rr.csv"] = ManifestToCsv(*rr.manifest);
    if (rg.manifest) files["pairs_rg.csv"] = ManifestToCsv(*rg.manifest);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create directory '{}': {}",
                              out_dir.string(), ec.message()));
  }

  BundleManifest manifest;
  nlohmann::ordered_json listing = nlohmann::ordered_json::array();
  for (const auto& [name, content] : files) {
    WriteFile(out_dir / name, content);
    BundleFile f{name, content.size(), Sha256Hex(content)};
    listing.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    manifest.files.push_back(std::move(f));
  }
  nlohmann::ordered_json m;
  m["version"] = "leakscope-manifest/1";
  m["files"] = std::move(listing);
  WriteFile(out_dir / "MANIFEST.json", m.dump(2) + "\n");
  return manifest;
}

}  // namespace leakscope
