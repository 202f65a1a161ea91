// Copyright 2026 The wordbot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Subcommand implementations behind tools/wordbot. Each returns the process
// exit code: 0 success, 1 partial or analysis failure, 2 invalid input.

#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wordbot/analysis.hpp"
#include "wordbot/config.hpp"
#include "wordbot/embeddings.hpp"
#include "wordbot/io.hpp"
#include "wordbot/parallel.hpp"
#include "wordbot/protocol.hpp"

namespace wordbot::cli {

namespace fs = std::filesystem;

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kInvalidInput = 2;

inline constexpr const char* kChampionFile = "champion.genome";
inline constexpr const char* kLedgerFile = "ledger.jsonl";
inline constexpr const char* kSummaryFile = "summary.json";

// Key/value overrides applied on top of a config file (from CLI flags).
using Overrides = std::map<std::string, std::string>;

inline std::string trial_dir_name(Seed seed) { return "trial_" + std::to_string(seed); }

inline TrialConfig load_config(const std::optional<fs::path>& path, const Overrides& overrides) {
  TrialConfig c;
  if (path) {
    std::string text;
    try {
      text = io::read_file(*path);
    } catch (const std::exception& e) {
      throw ConfigError("config", e.what());
    }
    c = parse_config(text);
  }
  for (const auto& [k, v] : overrides) set_config_value(c, k, v);
  validate(c);
  return c;
}

// Runs one trial and writes champion, ledger and summary into `out`.
inline void run_and_write(const TrialConfig& config, const fs::path& out) {
  const auto spec = make_trial(config);
  const auto result = run_trial(spec);
  fs::create_directories(out);
  io::write_file_atomic(out / kChampionFile, to_text(result.champion.genome));
  io::write_file_atomic(out / kLedgerFile, ledger_jsonl(result.ledger));
  io::write_file_atomic(out / kSummaryFile, summary_json(spec, result).dump(2) + "\n");
}

struct RunOptions {
  std::optional<fs::path> config;
  Overrides overrides;
  std::optional<fs::path> out;
};

inline int cmd_run(const RunOptions& opt, std::ostream& log) {
  TrialConfig config;
  try {
    config = load_config(opt.config, opt.overrides);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  const fs::path out = opt.out.value_or(fs::path(trial_dir_name(config.seed)));
  try {
    make_trial(config);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  try {
    run_and_write(config, out);
  } catch (const std::exception& e) {
    log << "error: trial failed: " << e.what() << "\n";
    return kFailure;
  }
  log << "wrote " << (out / kSummaryFile).string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Batches

enum class TrialStatus { kPending, kRunning, kDone, kFailed };

inline const char* to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::kPending: return "pending";
    case TrialStatus::kRunning: return "running";
    case TrialStatus::kDone: return "done";
    case TrialStatus::kFailed: return "failed";
  }
  return "?";
}

inline TrialStatus parse_status(const std::string& s) {
  if (s == "pending") return TrialStatus::kPending;
  if (s == "running") return TrialStatus::kRunning;
  if (s == "done") return TrialStatus::kDone;
  if (s == "failed") return TrialStatus::kFailed;
  throw std::invalid_argument("unknown trial status '" + s + "'");
}

struct BatchTrial {
  TrialConfig config;
  TrialStatus status = TrialStatus::kPending;
  std::string error;
};

// JSON manifest:
//   {"output_dir": "<dir, relative to the manifest>",
//    "trials": [{"config": {"seed": "1", "morphology": "...", ...},
//                "status": "pending"}, ...]}
struct BatchManifest {
  fs::path output_dir = "results";
  std::vector<BatchTrial> trials;
};

inline nlohmann::ordered_json config_json(const TrialConfig& c) {
  nlohmann::ordered_json j;
  std::istringstream in(format_config(c));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

inline std::string manifest_json(const BatchManifest& m) {
  nlohmann::ordered_json j;
  j["output_dir"] = m.output_dir.string();
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : m.trials) {
    nlohmann::ordered_json e;
    e["config"] = config_json(t.config);
    e["status"] = to_string(t.status);
    if (!t.error.empty()) e["error"] = t.error;
    j["trials"].push_back(e);
  }
  return j.dump(2) + "\n";
}

inline BatchManifest parse_manifest(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  BatchManifest m;
  m.output_dir = j.value("output_dir", std::string("results"));
  std::set<Seed> seeds;
  for (const auto& e : j.at("trials")) {
    BatchTrial t;
    for (const auto& [k, v] : e.at("config").items())
      set_config_value(t.config, k, v.is_string() ? v.get<std::string>() : v.dump());
    validate(t.config);
    t.status = parse_status(e.value("status", std::string("pending")));
    t.error = e.value("error", std::string());
    if (!seeds.insert(t.config.seed).second)
      throw ConfigError("seed", "duplicate trial seed " + std::to_string(t.config.seed) + " in batch");
    m.trials.push_back(std::move(t));
  }
  return m;
}

// A grid of `runs` trials per (morphology, treatment) with consecutive,
// unique seeds starting at `first_seed`.
inline BatchManifest make_grid(const TrialConfig& base, const std::vector<MorphologyId>& morphologies,
                               const std::vector<Treatment>& treatments, std::size_t runs,
                               Seed first_seed, fs::path output_dir = "results") {
  BatchManifest m;
  m.output_dir = std::move(output_dir);
  Seed seed = first_seed;
  for (auto morph : morphologies)
    for (auto treat : treatments)
      for (std::size_t r = 0; r < runs; ++r) {
        BatchTrial t;
        t.config = base;
        t.config.morphology = morph;
        t.config.treatment = treat;
        t.config.seed = seed++;
        m.trials.push_back(std::move(t));
      }
  return m;
}

struct BatchOptions {
  fs::path manifest;
  std::size_t parallel = 1;
  // Test hook: stop scheduling after this many trials have started.
  std::optional<std::size_t> stop_after;
};

inline int cmd_batch(const BatchOptions& opt, std::ostream& log) {
  BatchManifest manifest;
  try {
    manifest = parse_manifest(io::read_file(opt.manifest));
  } catch (const std::exception& e) {
    log << "error: invalid manifest: " << e.what() << "\n";
    return kInvalidInput;
  }
  const fs::path root = opt.manifest.parent_path() / manifest.output_dir;
  fs::create_directories(root);

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < manifest.trials.size(); ++i) {
    auto& t = manifest.trials[i];
    const bool complete = fs::exists(root / trial_dir_name(t.config.seed) / kSummaryFile);
    if (t.status == TrialStatus::kDone && complete) continue;
    t.status = TrialStatus::kPending;
    pending.push_back(i);
  }
  if (opt.stop_after && pending.size() > *opt.stop_after) pending.resize(*opt.stop_after);

  std::mutex mutex;
  auto save = [&] {
    io::write_file_atomic(opt.manifest, manifest_json(manifest));
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (const auto& t : manifest.trials)
      index.push_back({{"seed", t.config.seed},
                       {"morphology", to_string(t.config.morphology)},
                       {"treatment", to_string(t.config.treatment)},
                       {"regime", to_string(t.config.regime)},
                       {"status", to_string(t.status)},
                       {"dir", trial_dir_name(t.config.seed)}});
    io::write_file_atomic(root / "index.json", index.dump(2) + "\n");
  };
  {
    std::lock_guard lock(mutex);
    save();
  }
  parallel_for(pending.size(), opt.parallel, [&](std::size_t k) {
    auto& t = manifest.trials[pending[k]];
    {
      std::lock_guard lock(mutex);
      t.status = TrialStatus::kRunning;
      save();
    }
    std::string error;
    try {
      run_and_write(t.config, root / trial_dir_name(t.config.seed));
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lock(mutex);
    t.status = error.empty() ? TrialStatus::kDone : TrialStatus::kFailed;
    t.error = error;
    save();
    log << (error.empty() ? "done " : "FAILED ") << trial_dir_name(t.config.seed)
        << (error.empty() ? "" : ": " + error) << "\n";
  });

  std::vector<std::string> failed;
  std::size_t done = 0;
  for (const auto& t : manifest.trials) {
    if (t.status == TrialStatus::kFailed) failed.push_back(trial_dir_name(t.config.seed));
    if (t.status == TrialStatus::kDone) ++done;
  }
  log << done << "/" << manifest.trials.size() << " trials done\n";
  if (!failed.empty()) {
    log << "failed trials:";
    for (const auto& f : failed) log << " " << f;
    log << "\n";
    return kFailure;
  }
  return done == manifest.trials.size() ? kOk : kFailure;
}

// ---------------------------------------------------------------------------
// Analysis

struct AnalyzeOptions {
  fs::path results;
  std::optional<fs::path> out;
  analysis::Options analysis;
};

inline std::vector<nlohmann::json> load_summaries(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() == kSummaryFile) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<nlohmann::json> out;
  for (const auto& p : paths) out.push_back(nlohmann::json::parse(io::read_file(p)));
  return out;
}

inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log) {
  if (!fs::is_directory(opt.results)) {
    log << "error: results directory '" << opt.results.string() << "' not found\n";
    return kInvalidInput;
  }
  std::vector<analysis::ChampionRecord> records;
  std::set<analysis::GroupKey> present;
  try {
    for (const auto& s : load_summaries(opt.results)) {
      records.push_back(analysis::champion_record(s));
      present.insert({records.back().panel, records.back().treatment});
    }
  } catch (const std::exception& e) {
    log << "error: unreadable summary: " << e.what() << "\n";
    return kFailure;
  }
  // Groups named in a batch index must have at least one completed trial.
  const fs::path index_path = opt.results / "index.json";
  if (fs::exists(index_path)) {
    for (const auto& e : nlohmann::json::parse(io::read_file(index_path))) {
      const analysis::GroupKey key{
          analysis::panel_name(parse_morphology(e.at("morphology").get<std::string>()),
                               parse_regime(e.at("regime").get<std::string>())),
          parse_treatment(e.at("treatment").get<std::string>())};
      if (!present.count(key)) {
        log << "error: group " << key.name() << " has no completed trials\n";
        return kFailure;
      }
    }
  }
  if (records.empty()) {
    log << "error: no completed trials under '" << opt.results.string() << "'\n";
    return kFailure;
  }
  analysis::Report report;
  try {
    report = analysis::analyze(records, opt.analysis);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kFailure;
  }
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";
  const fs::path out = opt.out.value_or(opt.results / "analysis");
  io::write_file_atomic(out / "groups.csv", analysis::groups_csv(report));
  io::write_file_atomic(out / "comparisons.csv", analysis::comparisons_csv(report));
  io::write_file_atomic(out / "long.csv", analysis::long_csv(report));
  char line[256];
  for (const auto& g : report.groups) {
    std::snprintf(line, sizeof(line), "%-24s %s %-5s n=%-3zu median=%.4f  CI=[%.4f, %.4f]\n",
                  g.key.panel.c_str(), analysis::treatment_tag(g.key.treatment),
                  analysis::to_string(g.measure), g.n, g.median, g.ci.lo, g.ci.hi);
    log << line;
  }
  for (const auto& c : report.comparisons) {
    std::snprintf(line, sizeof(line), "%-36s U=%-7.1f p=%.3g p_adj=%.3g%s\n", c.id.c_str(),
                  c.result.u_statistic, c.result.p_value, c.p_adjusted, c.reject ? " *" : "");
    log << line;
  }
  log << "wrote " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayOptions {
  fs::path champion;
  std::string word;
  std::optional<fs::path> out;
};

// Hidden-state CSV: one row per serially fed element.
inline std::string hidden_csv(std::span<const HiddenState> trace, std::span<const double> command) {
  std::string out = "element,input";
  const std::size_t H = trace.empty() ? 0 : trace.front().h.size();
  for (std::size_t j = 0; j < H; ++j) out += ",h" + std::to_string(j);
  out += "\n";
  char buf[32];
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out += std::to_string(t);
    std::snprintf(buf, sizeof(buf), ",%.9g", command[t]);
    out += buf;
    for (double v : trace[t].h) {
      std::snprintf(buf, sizeof(buf), ",%.9g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline int cmd_replay(const ReplayOptions& opt, std::ostream& log) {
  Genome genome;
  TrialSpec spec;
  try {
    genome = genome_from_text(io::read_file(opt.champion));
    const auto summary = nlohmann::json::parse(io::read_file(opt.champion.parent_path() / kSummaryFile));
    spec = make_trial(config_from_summary(summary));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  const CommandTask* task = nullptr;
  bool heldout = false;
  for (const auto& t : spec.training_set)
    if (t.word == opt.word) task = &t;
  if (spec.heldout.word == opt.word) {
    task = &spec.heldout;
    heldout = true;
  }
  if (!task) {
    log << "error: '" << opt.word << "' is not a command of this trial\n";
    return kInvalidInput;
  }
  std::vector<HiddenState> trace;
  const auto h0 = prime(genome, task->vector, &trace);
  const auto traj = evaluate(spec.iface, genome, h0, spec.config.steps, spec.config.dt, spec.sim);
  const auto d = displacement_metrics(traj, body_length(spec.iface.id, spec.sim));

  const fs::path out = opt.out.value_or(opt.champion.parent_path() / ("replay_" + opt.word));
  io::write_file_atomic(out / "trajectory.csv", trajectory_csv(traj));
  io::write_file_atomic(out / "hidden.csv", hidden_csv(trace, task->vector.values));
  nlohmann::ordered_json j;
  j["word"] = task->word;
  j["task"] = to_string(task->kind);
  j["heldout"] = heldout;
  j["score"] = objective(task->kind, d, spec.config.regime);
  j["dx_bl"] = d.dx_bl;
  j["dist_bl"] = d.dist_bl;
  j["path_bl"] = d.path_bl;
  io::write_file_atomic(out / "replay.json", j.dump(2) + "\n");
  log << j.dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Embeddings

inline int cmd_embed_synth(const fs::path& gram_path, std::size_t dim, Seed seed, const fs::path& out,
                           std::ostream& log) {
  GramSpec gram;
  try {
    gram = parse_gram_text(io::read_file(gram_path));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (dim < gram.size()) {
    log << "error: --dim must be >= " << gram.size() << "\n";
    return kInvalidInput;
  }
  const auto synth = synthesize_from_gram(gram, dim, seed);
  if (synth.repair.repaired)
    log << "warning: Gram matrix was indefinite (min eigenvalue " << synth.repair.min_eigenvalue
        << "); repaired, max entry change " << synth.repair.max_abs_delta << "\n";
  io::write_file_atomic(out, write_word2vec_bin(to_table(synth.vectors)));
  log << "wrote " << synth.vectors.size() << " vectors of dimension " << dim << " to " << out.string()
      << "\n";
  return kOk;
}

inline int cmd_embed_cos(const fs::path& table_path, const std::string& w1, const std::string& w2,
                         std::ostream& out, std::ostream& log) {
  try {
    const auto table = load_word2vec_bin(table_path.string());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f\n", cosine(lookup(table, w1), lookup(table, w2)));
    out << buf;
    return kOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
}

}  // namespace wordbot::cli
