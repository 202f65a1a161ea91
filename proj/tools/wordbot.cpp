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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wordbot/cli.hpp"

namespace {

using namespace wordbot;

// Flags shared by `run` and `batch init` that override config keys.
struct OverrideFlags {
  std::string seed, treatment, morphology, regime, parallel;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "Run seed");
    app.add_option("--treatment", treatment, "experimental | control");
    app.add_option("--morphology", morphology, "quadruped | minimal | sphere1d_s | sphere1d_ns | sphere2d_s | sphere2d_ns");
    app.add_option("--regime", regime, "original | per_task_balanced");
    app.add_option("--parallel", parallel, "Worker threads for evaluation");
  }

  cli::Overrides overrides() const {
    cli::Overrides o;
    if (!seed.empty()) o["seed"] = seed;
    if (!treatment.empty()) o["treatment"] = treatment;
    if (!morphology.empty()) o["morphology"] = morphology;
    if (!regime.empty()) o["regime"] = regime;
    if (!parallel.empty()) o["threads"] = parallel;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve word-commanded robot controllers and analyze the results"};
  app.require_subcommand(1);
  int code = cli::kOk;

  // run
  auto* run = app.add_subcommand("run", "Run one evolutionary trial");
  std::string run_config, run_out;
  OverrideFlags run_flags;
  run->add_option("--config", run_config, "Config file (key = value lines)");
  run->add_option("--out", run_out, "Output directory (default trial_<seed>)");
  run_flags.add_to(*run);
  run->callback([&] {
    cli::RunOptions opt;
    if (!run_config.empty()) opt.config = run_config;
    if (!run_out.empty()) opt.out = run_out;
    opt.overrides = run_flags.overrides();
    code = cli::cmd_run(opt, std::cerr);
  });

  // batch
  auto* batch = app.add_subcommand("batch", "Run or create a batch of trials");
  std::string manifest;
  std::size_t batch_parallel = 1;
  batch->add_option("manifest", manifest, "Batch manifest (JSON)")->required();
  batch->add_option("--parallel", batch_parallel, "Trials run concurrently")->check(CLI::PositiveNumber);
  std::string init_config;
  OverrideFlags init_flags;
  std::size_t init_runs = 0;
  std::string init_morphs, init_results = "results";
  auto* init = batch->add_flag("--init", "Write a grid manifest instead of running one");
  batch->add_option("--config", init_config, "Base config for --init");
  batch->add_option("--runs", init_runs, "Trials per (morphology, treatment) for --init");
  batch->add_option("--morphologies", init_morphs, "Comma separated list for --init (default all)");
  batch->add_option("--results", init_results, "Output directory recorded in the manifest");
  batch->add_option("--seed", init_flags.seed, "First seed for --init");
  batch->add_option("--regime", init_flags.regime, "Regime for --init");
  batch->callback([&] {
    if (!*init) {
      code = cli::cmd_batch({manifest, batch_parallel, std::nullopt}, std::cerr);
      return;
    }
    try {
      cli::Overrides o = init_flags.overrides();
      const Seed first = o.count("seed") ? std::stoull(o["seed"]) : 1;
      o.erase("seed");
      const auto base = cli::load_config(init_config.empty() ? std::nullopt : std::optional<cli::fs::path>(init_config), o);
      std::vector<MorphologyId> morphs;
      if (init_morphs.empty()) {
        morphs.assign(kAllMorphologies.begin(), kAllMorphologies.end());
      } else {
        std::stringstream ss(init_morphs);
        std::string item;
        while (std::getline(ss, item, ',')) morphs.push_back(parse_morphology(item));
      }
      const auto m = cli::make_grid(base, morphs, {Treatment::kExperimental, Treatment::kControl},
                                    init_runs == 0 ? 1 : init_runs, first, init_results);
      io::write_file_atomic(manifest, cli::manifest_json(m));
      std::cerr << "wrote " << m.trials.size() << " trials to " << manifest << "\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      code = cli::kInvalidInput;
    }
  });

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Summarize a results directory");
  std::string results, analyze_out;
  std::size_t budget = 0, iterations = stats::kDefaultBootstrapIterations;
  double alpha = 0.05;
  analyze->add_option("results", results, "Results directory")->required();
  analyze->add_option("--out", analyze_out, "Output directory (default <results>/analysis)");
  analyze->add_option("--budget", budget, "Declared number of comparisons in the family");
  analyze->add_option("--alpha", alpha, "Family-wise error rate");
  analyze->add_option("--bootstrap", iterations, "Bootstrap iterations");
  analyze->callback([&] {
    cli::AnalyzeOptions opt;
    opt.results = results;
    if (!analyze_out.empty()) opt.out = analyze_out;
    opt.analysis.alpha = alpha;
    opt.analysis.bootstrap_iterations = iterations;
    if (budget) opt.analysis.declared_budget = budget;
    code = cli::cmd_analyze(opt, std::cout);
  });

  // replay
  auto* replay = app.add_subcommand("replay", "Re-simulate a champion on one command word");
  std::string champion, word, replay_out;
  replay->add_option("champion", champion, "champion.genome inside a trial directory")->required();
  replay->add_option("word", word, "Command word")->required();
  replay->add_option("--out", replay_out, "Output directory");
  replay->callback([&] {
    cli::ReplayOptions opt{champion, word, std::nullopt};
    if (!replay_out.empty()) opt.out = replay_out;
    code = cli::cmd_replay(opt, std::cout);
  });

  // embed
  auto* embed = app.add_subcommand("embed", "Embedding utilities");
  embed->require_subcommand(1);
  auto* synth = embed->add_subcommand("synth", "Synthesize vectors from a Gram matrix");
  std::string gram, synth_out;
  std::size_t dim = 300;
  Seed synth_seed = 2019;
  synth->add_option("--gram", gram, "Gram matrix text file")->required();
  synth->add_option("--dim", dim, "Vector dimension");
  synth->add_option("--seed", synth_seed, "Synthesis seed");
  synth->add_option("--out", synth_out, "Output word2vec binary file")->required();
  synth->callback([&] { code = cli::cmd_embed_synth(gram, dim, synth_seed, synth_out, std::cerr); });
  auto* cos = embed->add_subcommand("cos", "Cosine similarity of two words");
  std::string table, w1, w2;
  cos->add_option("table", table, "word2vec binary file")->required();
  cos->add_option("word1", w1)->required();
  cos->add_option("word2", w2)->required();
  cos->callback([&] { code = cli::cmd_embed_cos(table, w1, w2, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kInvalidInput;
  }
  return code;
}
