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

// The experiment: command sets and their objectives, held-out synonym
// selection, experimental vs permuted-control vectors, AFPO over controller
// genomes, and zero-shot testing of the run champion.

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wordbot/afpo.hpp"
#include "wordbot/config.hpp"
#include "wordbot/controller.hpp"
#include "wordbot/embeddings.hpp"
#include "wordbot/simulator.hpp"

namespace wordbot {

enum class TaskKind { kForward, kBackward, kStop };

inline const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kForward: return "forward";
    case TaskKind::kBackward: return "backward";
    case TaskKind::kStop: return "stop";
  }
  return "?";
}

struct CommandWord {
  const char* word;
  TaskKind kind;
  bool holdout_candidate;
};

// Command universe per regime, in a fixed order. Indices into this list key
// the control-treatment permutation seeds.
inline std::vector<CommandWord> command_words(Regime regime) {
  if (regime == Regime::kOriginal)
    return {{"forward", TaskKind::kForward, false}, {"backward", TaskKind::kBackward, false},
            {"halt", TaskKind::kStop, true},        {"stop", TaskKind::kStop, true},
            {"suspend", TaskKind::kStop, true},     {"cease", TaskKind::kStop, true}};
  return {{"forward", TaskKind::kForward, false},   {"foward", TaskKind::kForward, false},
          {"backward", TaskKind::kBackward, false}, {"backwards", TaskKind::kBackward, false},
          {"stop", TaskKind::kStop, true},          {"suspend", TaskKind::kStop, true},
          {"cease", TaskKind::kStop, true}};
}

struct CommandTask {
  std::string word;
  TaskKind kind = TaskKind::kStop;
  CommandVector vector;
  std::size_t universe_index = 0;
};

// Unmodified command vectors for every word of the regime, from the
// configured source: "synthetic" (Gram-matched synthesis) or a word2vec
// binary file.
inline std::vector<CommandVector> command_universe(const TrialConfig& c, PsdRepair* repair = nullptr) {
  const auto words = command_words(c.regime);
  std::vector<CommandVector> out;
  if (c.embedding == "synthetic") {
    const GramSpec gram =
        c.regime == Regime::kOriginal ? reference_command_gram() : balanced_command_gram();
    auto synth = synthesize_from_gram(gram, c.embedding_dim, c.embedding_seed);
    if (repair) *repair = synth.repair;
    for (const auto& w : words) {
      auto it = std::find_if(synth.vectors.begin(), synth.vectors.end(),
                             [&](const CommandVector& v) { return v.label == w.word; });
      out.push_back(*it);
    }
    return out;
  }
  const auto table = load_word2vec_bin(c.embedding);
  for (const auto& w : words) out.push_back(lookup(table, w.word));
  return out;
}

struct TrialSpec {
  TrialConfig config;
  MorphologyInterface iface{};
  std::vector<CommandTask> training_set;
  CommandTask heldout;
  AfpoConfig afpo;
  SimParams sim;
};

// The trial seed fixes the held-out synonym, the control permutations (one
// independent permutation per word, constant for the run) and the AFPO
// seed. Experimental and control trials with equal seeds differ only in
// vector values.
inline TrialSpec make_trial(const TrialConfig& config, const std::vector<CommandVector>& universe) {
  validate(config);
  const auto words = command_words(config.regime);
  if (universe.size() != words.size())
    throw std::invalid_argument("make_trial: universe has " + std::to_string(universe.size()) +
                                " vectors, regime needs " + std::to_string(words.size()));
  TrialSpec spec;
  spec.config = config;
  spec.iface = interface_for(config.morphology);
  spec.afpo = {config.population, config.generations, derive_seed(config.seed, {stream::kAfpo}),
               config.threads};

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (words[i].holdout_candidate) candidates.push_back(i);
  Rng rng(derive_seed(config.seed, {stream::kHeldOut}));
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const std::size_t heldout_index = candidates[pick(rng)];

  for (std::size_t i = 0; i < words.size(); ++i) {
    if (universe[i].label != words[i].word)
      throw std::invalid_argument("make_trial: universe entry " + std::to_string(i) + " is '" +
                                  universe[i].label + "', expected '" + words[i].word + "'");
    CommandTask task{words[i].word, words[i].kind, universe[i], i};
    if (config.treatment == Treatment::kControl)
      task.vector = permute(universe[i], derive_seed(config.seed, {stream::kPermutation, i}));
    if (i == heldout_index)
      spec.heldout = std::move(task);
    else
      spec.training_set.push_back(std::move(task));
  }
  return spec;
}

inline TrialSpec make_trial(const TrialConfig& config) {
  return make_trial(config, command_universe(config));
}

// Score to maximize for one command. The balanced regime's stop objective
// penalizes total path length instead of final distance.
inline double objective(TaskKind kind, const Displacement& d, Regime regime = Regime::kOriginal) {
  switch (kind) {
    case TaskKind::kForward: return d.dx;
    case TaskKind::kBackward: return -d.dx;
    case TaskKind::kStop:
      return regime == Regime::kOriginal ? -d.dist_from_origin : -d.path_length;
  }
  return 0;
}

inline double objective(TaskKind kind, const Trajectory& t, Regime regime = Regime::kOriginal) {
  return objective(kind, displacement_metrics(t, 1.0), regime);
}

// Records every vector primed during optimization.
class PrimingAudit {
 public:
  void record(const CommandVector& v) {
    const auto fp = fingerprint(v.values);
    std::lock_guard lock(mutex_);
    words_.insert(v.label);
    fingerprints_.insert(fp);
  }
  bool saw(const CommandVector& v) const {
    std::lock_guard lock(mutex_);
    return words_.count(v.label) != 0 || fingerprints_.count(fingerprint(v.values)) != 0;
  }
  std::set<std::string> words() const {
    std::lock_guard lock(mutex_);
    return words_;
  }
  std::set<std::uint64_t> fingerprints() const {
    std::lock_guard lock(mutex_);
    return fingerprints_;
  }

  static std::uint64_t fingerprint(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
    return h;
  }

 private:
  mutable std::mutex mutex_;
  std::set<std::string> words_;
  std::set<std::uint64_t> fingerprints_;
};

struct CommandOutcome {
  std::string word;
  TaskKind kind = TaskKind::kStop;
  double score = 0;
  Displacement displacement;
  bool aborted = false;
};

inline CommandOutcome run_command(const Genome& g, const CommandTask& task, const TrialSpec& spec) {
  CommandOutcome out{task.word, task.kind, kWorstFitness, {}, false};
  try {
    const auto traj = evaluate(spec.iface, g, prime(g, task.vector), spec.config.steps,
                               spec.config.dt, spec.sim, Logging::kPosesOnly);
    out.displacement = displacement_metrics(traj, body_length(spec.iface.id, spec.sim));
    out.score = objective(task.kind, out.displacement, spec.config.regime);
  } catch (const SimulationError&) {
    out.aborted = true;
  }
  return out;
}

// One score per training command, in training-set order. A simulator abort
// scores kWorstFitness for that command.
inline std::vector<double> fitness_vector(const Genome& g, const TrialSpec& spec,
                                          PrimingAudit* audit = nullptr) {
  std::vector<double> scores;
  scores.reserve(spec.training_set.size());
  for (const auto& task : spec.training_set) {
    if (audit) audit->record(task.vector);
    scores.push_back(run_command(g, task, spec).score);
  }
  return scores;
}

class RobotProblem {
 public:
  using Genome = wordbot::Genome;

  RobotProblem(const TrialSpec& spec, PrimingAudit* audit) : spec_(spec), audit_(audit) {}

  Genome random_genome(Seed seed) const { return new_genome(spec_.iface, seed); }
  Genome mutate(const Genome& g, Seed seed) const { return wordbot::mutate(g, seed); }
  std::vector<double> evaluate(const Genome& g) const { return fitness_vector(g, spec_, audit_); }

 private:
  const TrialSpec& spec_;
  PrimingAudit* audit_;
};

struct TrialResult {
  Individual<Genome> champion;
  std::vector<CommandOutcome> training;  // champion replayed on each training command
  CommandOutcome test;                   // champion under the held-out command
  double test_error = 0;                 // final displacement, body lengths
  std::vector<GenerationRecord> ledger;
  std::set<std::string> primed_words;
  bool heldout_primed = false;
};

// Final displacement (body lengths) of the champion primed with the
// held-out vector; under the control treatment that vector carries the
// run's permutation for its word.
inline double test_champion(const Genome& champion, const TrialSpec& spec,
                            CommandOutcome* outcome = nullptr) {
  auto o = run_command(champion, spec.heldout, spec);
  if (outcome) *outcome = o;
  if (o.aborted) return -kWorstFitness;
  return o.displacement.dist_bl;
}

inline TrialResult run_trial(const TrialSpec& spec,
                             const std::function<void(const GenerationRecord&)>& on_generation = {}) {
  PrimingAudit audit;
  RobotProblem problem(spec, &audit);
  Afpo<RobotProblem> afpo(problem, spec.afpo);
  auto run = afpo.run(on_generation);

  TrialResult r;
  r.champion = std::move(run.champion);
  r.ledger = std::move(run.ledger);
  r.primed_words = audit.words();
  r.heldout_primed = audit.saw(spec.heldout.vector);
  for (const auto& task : spec.training_set) r.training.push_back(run_command(r.champion.genome, task, spec));
  r.test_error = test_champion(r.champion.genome, spec, &r.test);
  return r;
}

// Summary record. Contains no timing or thread-count information, so equal
// (config, seed) give byte-identical output.
inline nlohmann::ordered_json summary_json(const TrialSpec& spec, const TrialResult& r) {
  auto outcome = [](const CommandOutcome& o) {
    nlohmann::ordered_json j;
    j["word"] = o.word;
    j["task"] = to_string(o.kind);
    j["score"] = o.score;
    j["aborted"] = o.aborted;
    j["dx_m"] = o.displacement.dx;
    j["dist_m"] = o.displacement.dist_from_origin;
    j["path_m"] = o.displacement.path_length;
    j["dx_bl"] = o.displacement.dx_bl;
    j["dist_bl"] = o.displacement.dist_bl;
    j["path_bl"] = o.displacement.path_bl;
    return j;
  };
  nlohmann::ordered_json j;
  j["morphology"] = to_string(spec.config.morphology);
  j["treatment"] = to_string(spec.config.treatment);
  j["regime"] = to_string(spec.config.regime);
  j["seed"] = spec.config.seed;
  j["population"] = spec.config.population;
  j["generations"] = spec.config.generations;
  j["embedding"] = spec.config.embedding;
  j["embedding_dim"] = spec.config.embedding_dim;
  j["embedding_seed"] = spec.config.embedding_seed;
  j["steps"] = spec.config.steps;
  j["dt"] = spec.config.dt;
  j["heldout"] = spec.heldout.word;
  auto& words = j["training_words"] = nlohmann::ordered_json::array();
  for (const auto& t : spec.training_set) words.push_back(t.word);
  j["champion"] = {{"id", r.champion.id},
                   {"age", r.champion.age},
                   {"fitness", r.champion.fitness},
                   {"fitness_per_command", r.champion.fitness_per_command}};
  auto& training = j["training"] = nlohmann::ordered_json::array();
  for (const auto& o : r.training) training.push_back(outcome(o));
  j["test"] = outcome(r.test);
  j["test_error"] = r.test_error;
  j["primed_words"] = r.primed_words;
  j["heldout_primed"] = r.heldout_primed;
  return j;
}

// Rebuilds the trial config stored in a summary record.
inline TrialConfig config_from_summary(const nlohmann::json& j) {
  TrialConfig c;
  c.morphology = parse_morphology(j.at("morphology").get<std::string>());
  c.treatment = parse_treatment(j.at("treatment").get<std::string>());
  c.regime = parse_regime(j.at("regime").get<std::string>());
  c.seed = j.at("seed").get<Seed>();
  c.population = j.at("population").get<std::size_t>();
  c.generations = j.at("generations").get<std::size_t>();
  c.embedding = j.at("embedding").get<std::string>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.embedding_seed = j.at("embedding_seed").get<Seed>();
  c.steps = j.at("steps").get<std::size_t>();
  c.dt = j.at("dt").get<double>();
  return c;
}

}  // namespace wordbot
