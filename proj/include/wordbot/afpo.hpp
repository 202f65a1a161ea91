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

// Age-Fitness Pareto Optimization. Individuals compete on two objectives:
// maximize aggregate fitness and minimize age (generations since the
// lineage's founding). Each generation every member spawns one mutated
// child, one fresh random individual is injected at age 0, and the pool is
// truncated back to N by removing Pareto-dominated members.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wordbot/parallel.hpp"
#include "wordbot/random.hpp"

namespace wordbot {

// Score given to individuals whose evaluation failed.
inline constexpr double kWorstFitness = -1e9;

template <typename P>
concept AfpoProblem = requires(const P& p, const typename P::Genome& g, Seed s) {
  typename P::Genome;
  { p.random_genome(s) } -> std::convertible_to<typename P::Genome>;
  { p.mutate(g, s) } -> std::convertible_to<typename P::Genome>;
  { p.evaluate(g) } -> std::convertible_to<std::vector<double>>;
};

template <typename G>
struct Individual {
  G genome;
  std::size_t age = 0;
  std::vector<double> fitness_per_command;
  double fitness = kWorstFitness;
  std::uint64_t id = 0;
  bool evaluated = false;
  bool evaluation_failed = false;
};

// True iff `a` is no worse than `b` on both objectives and strictly better
// on at least one.
template <typename G>
bool pareto_dominates(const Individual<G>& a, const Individual<G>& b) {
  return a.fitness >= b.fitness && a.age <= b.age && (a.fitness > b.fitness || a.age < b.age);
}

template <typename G>
struct Population {
  std::vector<Individual<G>> members;
  std::size_t generation = 0;
  Seed rng_seed = 0;
  std::uint64_t next_id = 0;
};

struct AfpoConfig {
  std::size_t population = 50;
  std::size_t generations = 6000;
  Seed seed = 0;
  std::size_t threads = 1;
};

struct GenerationRecord {
  std::size_t generation = 0;
  double best_fitness = 0;
  double mean_fitness = 0;
  std::size_t front_size = 0;
  std::size_t min_age = 0;
  double median_age = 0;
  std::size_t max_age = 0;
  std::size_t newborns_after_injection = 0;
  std::size_t overflow_removed = 0;     // removed by the non-dominated overflow rule
  std::size_t dominated_survivors = 0;  // dominated members kept because size hit N
  std::size_t evaluations = 0;
};

inline nlohmann::ordered_json to_json(const GenerationRecord& r) {
  nlohmann::ordered_json j;
  j["generation"] = r.generation;
  j["best_fitness"] = r.best_fitness;
  j["mean_fitness"] = r.mean_fitness;
  j["front_size"] = r.front_size;
  j["min_age"] = r.min_age;
  j["median_age"] = r.median_age;
  j["max_age"] = r.max_age;
  j["newborns"] = r.newborns_after_injection;
  j["overflow_removed"] = r.overflow_removed;
  j["dominated_survivors"] = r.dominated_survivors;
  j["evaluations"] = r.evaluations;
  return j;
}

inline GenerationRecord generation_record_from_json(const nlohmann::json& j) {
  GenerationRecord r;
  r.generation = j.at("generation").get<std::size_t>();
  r.best_fitness = j.at("best_fitness").get<double>();
  r.mean_fitness = j.at("mean_fitness").get<double>();
  r.front_size = j.at("front_size").get<std::size_t>();
  r.min_age = j.at("min_age").get<std::size_t>();
  r.median_age = j.at("median_age").get<double>();
  r.max_age = j.at("max_age").get<std::size_t>();
  r.newborns_after_injection = j.at("newborns").get<std::size_t>();
  r.overflow_removed = j.at("overflow_removed").get<std::size_t>();
  r.dominated_survivors = j.at("dominated_survivors").get<std::size_t>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  return r;
}

// Line-delimited JSON, one record per generation.
inline std::string ledger_jsonl(const std::vector<GenerationRecord>& ledger) {
  std::string out;
  for (const auto& r : ledger) out += to_json(r).dump() + "\n";
  return out;
}

template <typename G>
struct AfpoResult {
  Individual<G> champion;
  std::vector<GenerationRecord> ledger;
  Population<G> final_population;
};

template <AfpoProblem P>
class Afpo {
 public:
  using Genome = typename P::Genome;
  using Member = Individual<Genome>;

  Afpo(const P& problem, AfpoConfig config) : problem_(problem), config_(config) {
    if (config_.population < 1) throw std::invalid_argument("AFPO population must be >= 1");
  }

  const AfpoConfig& config() const { return config_; }

  Population<Genome> initialize() {
    Population<Genome> pop;
    pop.rng_seed = config_.seed;
    for (std::size_t i = 0; i < config_.population; ++i) {
      Member m;
      m.genome = problem_.random_genome(
          derive_seed(config_.seed, {stream::kNewborn, std::numeric_limits<std::uint64_t>::max(), i}));
      m.id = pop.next_id++;
      pop.members.push_back(std::move(m));
    }
    evaluate_pending(pop.members);
    note_champion(pop.members);
    return pop;
  }

  GenerationRecord generation_step(Population<Genome>& pop) {
    const std::size_t n = config_.population;
    const std::uint64_t gen = pop.generation;
    for (auto& m : pop.members) ++m.age;

    std::vector<Member> pool = pop.members;
    pool.reserve(2 * pop.members.size() + 1);
    for (const auto& parent : pop.members) {
      Member child;
      child.genome = problem_.mutate(parent.genome,
                                     derive_seed(pop.rng_seed, {stream::kMutation, gen, parent.id}));
      child.age = parent.age;
      child.id = pop.next_id++;
      pool.push_back(std::move(child));
    }
    {
      Member newborn;
      newborn.genome = problem_.random_genome(derive_seed(pop.rng_seed, {stream::kNewborn, gen}));
      newborn.age = 0;
      newborn.id = pop.next_id++;
      pool.push_back(std::move(newborn));
    }
    GenerationRecord rec;
    rec.generation = gen;
    rec.newborns_after_injection = static_cast<std::size_t>(
        std::count_if(pool.begin(), pool.end(), [](const Member& m) { return m.age == 0; }));
    rec.evaluations = evaluate_pending(pool);
    note_champion(pool);

    truncate(pool, n, derive_seed(pop.rng_seed, {stream::kTruncation, gen}), rec);
    pop.members = std::move(pool);
    pop.generation = gen + 1;
    summarize(pop.members, rec);
    return rec;
  }

  AfpoResult<Genome> run(const std::function<void(const GenerationRecord&)>& on_generation = {}) {
    champion_.reset();
    AfpoResult<Genome> result;
    auto pop = initialize();
    result.ledger.reserve(config_.generations);
    for (std::size_t g = 0; g < config_.generations; ++g) {
      result.ledger.push_back(generation_step(pop));
      if (on_generation) on_generation(result.ledger.back());
    }
    result.champion = *champion_;
    result.final_population = std::move(pop);
    return result;
  }

  // Highest aggregate fitness among all individuals evaluated so far
  // (earliest on ties).
  const std::optional<Member>& champion() const { return champion_; }

 private:
  std::size_t evaluate_pending(std::vector<Member>& members) const {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (!members[i].evaluated) pending.push_back(i);
    parallel_for(pending.size(), config_.threads, [&](std::size_t k) {
      Member& m = members[pending[k]];
      try {
        m.fitness_per_command = problem_.evaluate(m.genome);
        m.fitness = m.fitness_per_command.empty()
                        ? kWorstFitness
                        : std::accumulate(m.fitness_per_command.begin(),
                                          m.fitness_per_command.end(), 0.0) /
                              static_cast<double>(m.fitness_per_command.size());
      } catch (...) {
        m.fitness_per_command.clear();
        m.fitness = kWorstFitness;
        m.evaluation_failed = true;
      }
      m.evaluated = true;
    });
    return pending.size();
  }

  void note_champion(const std::vector<Member>& members) {
    for (const auto& m : members)
      if (!champion_ || m.fitness > champion_->fitness) champion_ = m;
  }

  static std::vector<std::size_t> dominated_indices(const std::vector<Member>& pool) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (std::size_t j = 0; j < pool.size(); ++j)
        if (i != j && pareto_dominates(pool[j], pool[i])) {
          out.push_back(i);
          break;
        }
    return out;
  }

  static void truncate(std::vector<Member>& pool, std::size_t n, Seed seed, GenerationRecord& rec) {
    Rng rng(seed);
    while (pool.size() > n) {
      const auto dominated = dominated_indices(pool);
      if (dominated.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, dominated.size() - 1);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(dominated[pick(rng)]));
    }
    if (pool.size() > n) {
      // Non-dominated overflow: drop lowest fitness first, older first on
      // ties, then a seeded random order. The fittest member always stays.
      std::vector<std::uint64_t> tiebreak(pool.size());
      for (auto& t : tiebreak) t = rng();
      std::size_t keep = 0;
      for (std::size_t i = 1; i < pool.size(); ++i)
        if (pool[i].fitness > pool[keep].fitness) keep = i;
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pool[a].fitness != pool[b].fitness) return pool[a].fitness < pool[b].fitness;
        if (pool[a].age != pool[b].age) return pool[a].age > pool[b].age;
        return tiebreak[a] < tiebreak[b];
      });
      std::vector<bool> drop(pool.size(), false);
      std::size_t to_drop = pool.size() - n;
      for (std::size_t i : order) {
        if (to_drop == 0) break;
        if (i == keep) continue;
        drop[i] = true;
        --to_drop;
      }
      rec.overflow_removed = pool.size() - n;
      std::vector<Member> kept;
      kept.reserve(n);
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(pool[i]));
      pool = std::move(kept);
    }
    rec.dominated_survivors = dominated_indices(pool).size();
  }

  static void summarize(const std::vector<Member>& members, GenerationRecord& rec) {
    double best = -std::numeric_limits<double>::infinity(), sum = 0;
    std::vector<std::size_t> ages;
    for (const auto& m : members) {
      best = std::max(best, m.fitness);
      sum += m.fitness;
      ages.push_back(m.age);
    }
    rec.best_fitness = best;
    rec.mean_fitness = sum / static_cast<double>(members.size());
    std::sort(ages.begin(), ages.end());
    rec.min_age = ages.front();
    rec.max_age = ages.back();
    const std::size_t mid = ages.size() / 2;
    rec.median_age = ages.size() % 2 ? static_cast<double>(ages[mid])
                                     : 0.5 * static_cast<double>(ages[mid - 1] + ages[mid]);
    rec.front_size = members.size() - dominated_indices(members).size();
  }

  const P& problem_;
  AfpoConfig config_;
  std::optional<Member> champion_;
};

}  // namespace wordbot
