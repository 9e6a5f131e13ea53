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

#include "leakscope/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "leakscope/embedding_store.hpp"
#include "leakscope/metrics.hpp"
#include "leakscope/pairing.hpp"
#include "leakscope/report.hpp"
#include "leakscope/simulator.hpp"
#include "leakscope/statistics.hpp"
#include "leakscope/topk.hpp"

namespace leakscope::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kMetricNames = {"euclidean", "cosine",
                                               "similarity"};
const std::vector<std::string> kFormatNames = {"auto", "binary", "csv"};

FileFormat ResolveFormat(const std::string& name, const fs::path& path) {
  return name == "auto" ? FormatFromPath(path) : ParseFileFormat(name);
}

void EnsureParentDir(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError(fmt::format("cannot create directory '{}': {}",
                                path.parent_path().string(), ec.message()));
    }
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  EnsureParentDir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void AddConfig(CLI::App* sub) {
  sub->add_option("--config", "key = value file supplying any long flag");
}

bool IsFlag(const CLI::Option* opt) { return opt->get_expected_max() == 0; }

// Rewrites `SUB ... --config FILE ...` into `SUB <file flags> ...`, dropping
// file keys that the command line also sets.
std::vector<std::string> ExpandConfig(CLI::App& app,
                                      const std::vector<std::string>& args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::FileError&) {
    throw IoError(fmt::format("cannot read config file '{}'", path));
  }
  std::vector<std::string> expanded = {args[0]};
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents.front() != sub->get_name()) {
      continue;
    }
    const std::string flag = "--" + item.name;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || item.name == "config") {
      throw ValidationError(fmt::format("config file '{}': unknown key '{}'",
                                        path, item.name));
    }
    const bool on_command_line =
        std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    if (on_command_line) continue;
    if (IsFlag(opt)) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      if (v == "true" || v == "1") {
        expanded.push_back(flag);
      } else if (v != "false" && v != "0") {
        throw ValidationError(fmt::format(
            "config file '{}': key '{}' expects true or false", path, item.name));
      }
      continue;
    }
    expanded.push_back(flag);
    expanded.insert(expanded.end(), item.inputs.begin(), item.inputs.end());
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

void AddThreads(CLI::App* sub, unsigned& threads) {
  sub->add_option("--threads", threads, "worker count, 0 = one per core")
      ->capture_default_str();
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string format = "auto";
  std::string label = "CUSTOM";
  std::string out;
  std::string out_format = "auto";
};

void RunIngest(const IngestArgs& a, std::ostream& out) {
  const EmbeddingSet set =
      LoadEmbeddingSet(a.input, ResolveFormat(a.format, a.input), a.label);
  out << fmt::format("file: {}\nlabel: {}\ndimension: {}\nrecords: {}\n",
                     a.input, set.label(), set.dimension(), set.size());
  out << fmt::format("enrolled: {}\nfte: {}\n", set.enrolled_count(),
                     FteRate(set));
  if (!a.out.empty()) {
    WriteEmbeddingSet(set, a.out, ResolveFormat(a.out_format, a.out));
    out << fmt::format("written: {}\n", a.out);
  }
}

// ------------------------------------------------------------------ rank

struct RankArgs {
  std::vector<std::string> inputs;
  std::string format = "auto";
  std::string metric = "euclidean";
  std::string json;
  unsigned threads = 0;
};

struct MatcherRow {
  std::string name;
  double fte = 0.0;
  double auc = 0.0;
  double d_prime = 0.0;
  std::size_t genuine = 0;
  std::size_t impostor = 0;
  std::size_t removed = 0;
};

void RunRank(const RankArgs& a, std::ostream& out) {
  const Metric m = ParseMetric(a.metric);
  std::vector<EmbeddingSet> sets;
  std::vector<std::string> names;
  for (const std::string& path : a.inputs) {
    names.push_back(fs::path(path).stem().string());
    sets.push_back(
        LoadEmbeddingSet(path, ResolveFormat(a.format, path), names.back()));
  }
  const std::vector<FilteredSet> filtered = IntersectEnrolled(sets);

  std::vector<MatcherRow> rows;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const EmbeddingSet& set = filtered[i].set;
    auto genuine_pairs = std::make_shared<PairManifest>(GenuinePairs(set));
    auto impostor_pairs =
        std::make_shared<PairManifest>(ImpostorPairsFirstVsLatter(set));
    const ScoreSet genuine = Evaluate(genuine_pairs, set, m, a.threads);
    const ScoreSet impostor = Evaluate(impostor_pairs, set, m, a.threads);
    rows.push_back({names[i], FteRate(sets[i]), Auc(genuine, impostor, m),
                    DPrime(genuine, impostor), genuine.size(), impostor.size(),
                    filtered[i].removed});
  }

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return rows[x].d_prime > rows[y].d_prime;
  });

  out << fmt::format("metric: {}\nsurviving samples: {}\n", m.name(),
                     filtered.front().set.size());
  out << "rank,matcher,fte_percent,auc,d_prime,genuine_pairs,impostor_pairs,"
         "removed\n";
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const MatcherRow& row = rows[order[r]];
    out << fmt::format("{},{},{:.4f},{:.6f},{:.6f},{},{},{}\n", r + 1,
                       row.name, 100.0 * row.fte, row.auc, row.d_prime,
                       row.genuine, row.impostor, row.removed);
    rows_json.push_back({{"rank", r + 1},
                         {"matcher", row.name},
                         {"fte_percent", 100.0 * row.fte},
                         {"auc", row.auc},
                         {"d_prime", row.d_prime},
                         {"genuine_pairs", row.genuine},
                         {"impostor_pairs", row.impostor},
                         {"removed", row.removed}});
  }
  if (!a.json.empty()) {
    nlohmann::ordered_json j;
    j["version"] = "leakscope-rank/1";
    j["metric"] = std::string(m.name());
    j["surviving_samples"] = filtered.front().set.size();
    j["matchers"] = std::move(rows_json);
    WriteText(a.json, j.dump(2) + "\n");
  }
}

// ----------------------------------------------------------------- audit

struct AuditArgs {
  std::string real;
  std::string generated;
  std::string format = "auto";
  std::string metric = "euclidean";
  double baseline = 0.001;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t bins = 100;
  bool density = false;
  bool include_scores = false;
  unsigned threads = 0;
};

void RunAudit(const AuditArgs& a, std::ostream& out) {
  const Metric m = ParseMetric(a.metric);
  const EmbeddingSet real = LoadEmbeddingSet(
      a.real, ResolveFormat(a.format, a.real), std::string(kRealTrain));
  const EmbeddingSet generated =
      LoadEmbeddingSet(a.generated, ResolveFormat(a.format, a.generated),
                       std::string(kGenerated));

  auto rr_pairs = std::make_shared<PairManifest>(ImpostorPairsSplitHalf(real));
  auto rg_pairs = std::make_shared<PairManifest>(
      ImpostorPairsRealVsGenerated(real, generated, a.seed));
  const ScoreSet rr = Evaluate(rr_pairs, real, m, a.threads);
  const ScoreSet rg = Evaluate(rg_pairs, real, generated, m, a.threads);

  const AuditReport report = BuildReport(rr, rg, m, a.baseline, FteRate(real),
                                         FteRate(generated));
  BundleOptions options;
  options.histogram.bin_count = a.bins;
  options.histogram.normalization =
      a.density ? Normalization::kDensity : Normalization::kCount;
  options.seed = a.seed;
  options.include_scores = a.include_scores;
  const BundleManifest manifest = EmitAuditBundle(report, rr, rg, a.out_dir, options);

  out << fmt::format("metric: {}\nseed: {}\nR-R pairs: {}\nR-G pairs: {}\n",
                     m.name(), a.seed, rr.size(), rg.size());
  out << fmt::format("d_prime: {:.6f}\nks_statistic: {:.6f}\nks_p_value: {:.6g}\n",
                     report.d_prime, report.ks_statistic, report.ks_p_value);
  out << fmt::format("auc: {:.6f}\nmean_difference: {:.6g}\n", report.auc,
                     report.mean_difference);
  out << fmt::format(
      "threshold_at_baseline: {:.6g}\nfmr_rr: {:.6g}\nfmr_rg: {:.6g}\n"
      "amplification: {:.6g}\n",
      report.threshold_at_baseline, report.fmr_rr_at_threshold,
      report.fmr_rg_at_threshold, report.amplification);
  out << fmt::format("bundle: {} ({} files + MANIFEST.json)\n", a.out_dir,
                     manifest.files.size());
}

// ------------------------------------------------------------------ topk

struct TopKArgs {
  std::string probes;
  std::string gallery;
  std::string format = "auto";
  std::string metric = "euclidean";
  std::size_t k = 3;
  std::string out_path;
  unsigned threads = 0;
};

void RunTopK(const TopKArgs& a, std::ostream& out, std::ostream& err) {
  const Metric m = ParseMetric(a.metric);
  const EmbeddingSet probes = LoadEmbeddingSet(
      a.probes, ResolveFormat(a.format, a.probes), std::string(kRealTrain));
  const EmbeddingSet gallery = LoadEmbeddingSet(
      a.gallery, ResolveFormat(a.format, a.gallery), std::string(kGenerated));
  const TopKBatch batch = TopKBatchSearch(probes, gallery, m, a.k, a.threads);
  if (batch.skipped_probes > 0) {
    err << fmt::format("notice: skipped {} unenrolled probe(s)\n",
                       batch.skipped_probes);
  }
  WriteText(a.out_path, NeighborsToCsv(batch.lists));
  out << fmt::format("probes: {}\ngallery: {}\nk: {}\nwritten: {}\n",
                     batch.lists.size(), gallery.enrolled_count(), a.k,
                     a.out_path);
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  SimConfig cfg;
  std::string prefix = "sim/";
  unsigned threads = 0;
};

void RunSimulate(const SimulateArgs& a, std::ostream& out) {
  const SimulatedPopulations pops = SimulatePopulations(a.cfg, a.threads);
  const std::string files[] = {a.prefix + "real_train.emb",
                               a.prefix + "real_disjoint.emb",
                               a.prefix + "generated.emb"};
  const EmbeddingSet* sets[] = {&pops.real_train, &pops.real_disjoint,
                                &pops.generated};
  for (int i = 0; i < 3; ++i) {
    EnsureParentDir(files[i]);
    WriteEmbeddingSet(*sets[i], files[i], FileFormat::kBinary);
  }
  out << fmt::format(
      "seed: {}\ndimension: {}\nidentities: {}\nsamples_per_identity: {}\n"
      "sigma: {}\nlambda: {}\npsi: {}\ngenerated: {}\n",
      a.cfg.seed, a.cfg.dimension, a.cfg.n_identities,
      a.cfg.samples_per_identity, a.cfg.noise_sigma, a.cfg.leak_lambda,
      a.cfg.truncation_psi, a.cfg.n_generated);
  for (const std::string& f : files) out << "written: " << f << "\n";
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return kExitValidation;
    case ErrorKind::kProtocol:
      return kExitProtocol;
    case ErrorKind::kIo:
      return kExitIo;
  }
  return kExitOther;
}

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"leakscope: identity-leakage audits for face embeddings"};
  app.name("leakscope");
  app.require_subcommand(1);

  IngestArgs ingest;
  CLI::App* ingest_cmd =
      app.add_subcommand("ingest", "validate an embedding file, optionally convert it");
  AddConfig(ingest_cmd);
  ingest_cmd->add_option("--input", ingest.input, "EMB1 or CSV file")->required();
  ingest_cmd->add_option("--format", ingest.format)
      ->check(CLI::IsMember(kFormatNames))
      ->capture_default_str();
  ingest_cmd->add_option("--label", ingest.label)->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "write the validated set here");
  ingest_cmd->add_option("--out-format", ingest.out_format)
      ->check(CLI::IsMember(kFormatNames))
      ->capture_default_str();

  RankArgs rank;
  CLI::App* rank_cmd = app.add_subcommand(
      "rank", "rank matchers by d' on genuine vs first-vs-latter impostor scores");
  AddConfig(rank_cmd);
  rank_cmd->add_option("--inputs,inputs", rank.inputs,
                       "one embedding file per matcher")
      ->required();
  rank_cmd->add_option("--format", rank.format)
      ->check(CLI::IsMember(kFormatNames))
      ->capture_default_str();
  rank_cmd->add_option("--metric", rank.metric)
      ->check(CLI::IsMember(kMetricNames))
      ->capture_default_str();
  rank_cmd->add_option("--json", rank.json, "also write the table as JSON");
  AddThreads(rank_cmd, rank.threads);

  AuditArgs audit;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "compare R-R and R-G impostor distributions");
  AddConfig(audit_cmd);
  audit_cmd->add_option("--real", audit.real)->required();
  audit_cmd->add_option("--generated", audit.generated)->required();
  audit_cmd->add_option("--format", audit.format)
      ->check(CLI::IsMember(kFormatNames))
      ->capture_default_str();
  audit_cmd->add_option("--metric", audit.metric)
      ->check(CLI::IsMember(kMetricNames))
      ->capture_default_str();
  audit_cmd->add_option("--baseline-fmr", audit.baseline)->capture_default_str();
  audit_cmd->add_option("--seed", audit.seed)->capture_default_str();
  audit_cmd->add_option("--out", audit.out_dir, "bundle directory")->required();
  audit_cmd->add_option("--bins", audit.bins)->capture_default_str();
  audit_cmd->add_flag("--density", audit.density, "density-normalized histograms");
  audit_cmd->add_flag("--include-scores", audit.include_scores,
                      "also write raw scores and pair manifests");
  AddThreads(audit_cmd, audit.threads);

  TopKArgs topk;
  CLI::App* topk_cmd =
      app.add_subcommand("topk", "k most similar gallery records per probe");
  AddConfig(topk_cmd);
  topk_cmd->add_option("--probes", topk.probes)->required();
  topk_cmd->add_option("--gallery", topk.gallery)->required();
  topk_cmd->add_option("--format", topk.format)
      ->check(CLI::IsMember(kFormatNames))
      ->capture_default_str();
  topk_cmd->add_option("--metric", topk.metric)
      ->check(CLI::IsMember(kMetricNames))
      ->capture_default_str();
  topk_cmd->add_option("--k", topk.k)->capture_default_str();
  topk_cmd->add_option("--out", topk.out_path, "neighbors CSV")->required();
  AddThreads(topk_cmd, topk.threads);

  SimulateArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "write simulated real and generated populations");
  AddConfig(sim_cmd);
  sim_cmd->add_option("--dim", sim.cfg.dimension)->capture_default_str();
  sim_cmd->add_option("--identities", sim.cfg.n_identities)->capture_default_str();
  sim_cmd->add_option("--samples-per-identity", sim.cfg.samples_per_identity)
      ->capture_default_str();
  sim_cmd->add_option("--sigma", sim.cfg.noise_sigma)->capture_default_str();
  sim_cmd->add_option("--lambda", sim.cfg.leak_lambda)->capture_default_str();
  sim_cmd->add_option("--psi", sim.cfg.truncation_psi)->capture_default_str();
  sim_cmd->add_option("--generated", sim.cfg.n_generated)->capture_default_str();
  sim_cmd->add_option("--seed", sim.cfg.seed)->capture_default_str();
  sim_cmd->add_option("--out-prefix", sim.prefix, "prefix for the three .emb files")
      ->capture_default_str();
  AddThreads(sim_cmd, sim.threads);

  try {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    args = ExpandConfig(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << "\n";
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*ingest_cmd) {
      RunIngest(ingest, out);
    } else if (*rank_cmd) {
      RunRank(rank, out);
    } else if (*audit_cmd) {
      RunAudit(audit, out);
    } else if (*topk_cmd) {
      RunTopK(topk, out, err);
    } else if (*sim_cmd) {
      RunSimulate(sim, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}

}  // namespace leakscope::cli
