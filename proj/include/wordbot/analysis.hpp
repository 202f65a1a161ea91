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

// Grouped analysis of run champions: per (panel, treatment) medians and
// bootstrap CIs of the Move / Stop / Test displacements, and the pairwise
// Mann-Whitney grid corrected as one Holm family.
//
// A panel is a morphology under one regime. Each panel with both treatments
// contributes 8 comparisons:
//   move vs stop (E), move vs stop (C), stop vs test (E), stop vs test (C),
//   move E vs C, stop E vs C, test E vs C, training fitness E vs C.
// The standard grid (six morphologies plus the balanced quadruped) thus
// registers 56.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wordbot/config.hpp"
#include "wordbot/io.hpp"
#include "wordbot/protocol.hpp"
#include "wordbot/stats.hpp"

namespace wordbot::analysis {

enum class Measure { kMove, kStop, kTest };
inline constexpr std::array kMeasures = {Measure::kMove, Measure::kStop, Measure::kTest};

inline const char* to_string(Measure m) {
  switch (m) {
    case Measure::kMove: return "move";
    case Measure::kStop: return "stop";
    case Measure::kTest: return "test";
  }
  return "?";
}

inline constexpr std::size_t kComparisonsPerPanel = 8;
inline constexpr std::size_t kStandardGridComparisons = 56;

inline std::string panel_name(MorphologyId m, Regime r) {
  std::string s = to_string(m);
  if (r == Regime::kPerTaskBalanced) s += "_balanced";
  return s;
}

inline std::vector<std::string> standard_panels() {
  std::vector<std::string> out;
  for (auto m : kAllMorphologies) out.push_back(panel_name(m, Regime::kOriginal));
  out.push_back(panel_name(MorphologyId::kQuadruped, Regime::kPerTaskBalanced));
  return out;
}

inline const char* treatment_tag(Treatment t) { return t == Treatment::kExperimental ? "E" : "C"; }

// Per-champion measures, all in body lengths except fitness.
struct ChampionRecord {
  std::string panel;
  MorphologyId morphology = MorphologyId::kQuadruped;
  Regime regime = Regime::kOriginal;
  Treatment treatment = Treatment::kExperimental;
  Seed seed = 0;
  double move = 0;     // mean net displacement over forward/backward commands
  double stop = 0;     // mean net displacement over training stop commands
  double test = 0;     // test error
  double fitness = 0;  // aggregate training fitness

  double value(Measure m) const {
    switch (m) {
      case Measure::kMove: return move;
      case Measure::kStop: return stop;
      case Measure::kTest: return test;
    }
    return 0;
  }
};

inline ChampionRecord champion_record(const nlohmann::json& summary) {
  ChampionRecord r;
  const auto cfg = config_from_summary(summary);
  r.morphology = cfg.morphology;
  r.regime = cfg.regime;
  r.treatment = cfg.treatment;
  r.seed = cfg.seed;
  r.panel = panel_name(r.morphology, r.regime);
  double move = 0, stop = 0;
  int n_move = 0, n_stop = 0;
  for (const auto& o : summary.at("training")) {
    const double d = o.at("dist_bl").get<double>();
    if (o.at("task").get<std::string>() == "stop") {
      stop += d;
      ++n_stop;
    } else {
      move += d;
      ++n_move;
    }
  }
  r.move = n_move ? move / n_move : 0;
  r.stop = n_stop ? stop / n_stop : 0;
  r.test = summary.at("test_error").get<double>();
  r.fitness = summary.at("champion").at("fitness").get<double>();
  return r;
}

struct GroupKey {
  std::string panel;
  Treatment treatment;
  auto operator<=>(const GroupKey&) const = default;
  std::string name() const { return panel + ":" + treatment_tag(treatment); }
};

struct GroupRow {
  GroupKey key;
  Measure measure;
  std::size_t n = 0;
  double median = 0;
  stats::Interval ci;
};

struct Options {
  double alpha = 0.05;
  std::size_t bootstrap_iterations = stats::kDefaultBootstrapIterations;
  Seed bootstrap_seed = 0;
  std::optional<std::size_t> declared_budget;  // defaults to the planned count
};

struct Report {
  std::vector<GroupRow> groups;
  std::vector<stats::Comparison> comparisons;
  std::vector<ChampionRecord> records;
  std::vector<std::string> warnings;
  std::size_t budget = 0;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct PlannedComparison {
  std::string id, group_a, group_b;
  std::vector<double> a, b;
};

}  // namespace detail

inline Report analyze(std::vector<ChampionRecord> records, const Options& opt = {}) {
  Report rep;
  std::sort(records.begin(), records.end(), [](const ChampionRecord& a, const ChampionRecord& b) {
    if (a.panel != b.panel) return a.panel < b.panel;
    if (a.treatment != b.treatment) return a.treatment < b.treatment;
    return a.seed < b.seed;
  });
  std::map<GroupKey, std::vector<const ChampionRecord*>> groups;
  for (const auto& r : records) groups[{r.panel, r.treatment}].push_back(&r);

  auto values = [&](const GroupKey& k, auto&& get) {
    std::vector<double> v;
    for (const auto* r : groups.at(k)) v.push_back(get(*r));
    return v;
  };

  for (const auto& [key, members] : groups) {
    for (auto m : kMeasures) {
      auto v = values(key, [m](const ChampionRecord& r) { return r.value(m); });
      GroupRow row{key, m, v.size(), stats::median(v), {}};
      if (v.size() == 1) {
        row.ci = {v.front(), v.front()};
      } else {
        const Seed s = derive_seed(opt.bootstrap_seed,
                                   {hash_name(key.name()), static_cast<std::uint64_t>(m)});
        row.ci = stats::bootstrap_median_ci(v, opt.bootstrap_iterations, s);
      }
      rep.groups.push_back(row);
    }
  }

  std::vector<detail::PlannedComparison> plan;
  auto add = [&](std::string id, const GroupKey& ka, auto&& get_a, const GroupKey& kb, auto&& get_b,
                 const char* label_a, const char* label_b) {
    auto a = values(ka, get_a);
    auto b = values(kb, get_b);
    if (a.size() < 2 || b.size() < 2) {
      rep.warnings.push_back("skipping " + id + ": fewer than 2 champions in a group");
      return;
    }
    plan.push_back({std::move(id), ka.name() + ":" + label_a, kb.name() + ":" + label_b, std::move(a),
                    std::move(b)});
  };
  auto get_move = [](const ChampionRecord& r) { return r.move; };
  auto get_stop = [](const ChampionRecord& r) { return r.stop; };
  auto get_test = [](const ChampionRecord& r) { return r.test; };
  auto get_fit = [](const ChampionRecord& r) { return r.fitness; };

  std::vector<std::string> panels;
  for (const auto& [key, _] : groups)
    if (panels.empty() || panels.back() != key.panel) panels.push_back(key.panel);
  for (const auto& panel : panels) {
    const GroupKey e{panel, Treatment::kExperimental}, c{panel, Treatment::kControl};
    const bool has_e = groups.count(e) != 0, has_c = groups.count(c) != 0;
    for (const auto& k : {e, c}) {
      if (!groups.count(k)) continue;
      const std::string t = treatment_tag(k.treatment);
      add(panel + ":move_vs_stop:" + t, k, get_move, k, get_stop, "move", "stop");
      add(panel + ":stop_vs_test:" + t, k, get_stop, k, get_test, "stop", "test");
    }
    if (has_e && has_c) {
      add(panel + ":move:E_vs_C", e, get_move, c, get_move, "move", "move");
      add(panel + ":stop:E_vs_C", e, get_stop, c, get_stop, "stop", "stop");
      add(panel + ":test:E_vs_C", e, get_test, c, get_test, "test", "test");
      add(panel + ":fitness:E_vs_C", e, get_fit, c, get_fit, "fitness", "fitness");
    } else {
      rep.warnings.push_back("panel " + panel + " has a single treatment; E vs C comparisons skipped");
    }
  }

  rep.budget = opt.declared_budget.value_or(plan.size());
  stats::ComparisonFamily family(rep.budget, opt.alpha);
  for (const auto& p : plan) family.add(p.id, p.group_a, p.a, p.group_b, p.b);
  if (!plan.empty() || rep.budget != 0) rep.comparisons = family.finalize();
  rep.records = std::move(records);
  return rep;
}

inline std::string groups_csv(const Report& rep) {
  std::string out = "panel,treatment,measure,n,median,ci_lo,ci_hi\n";
  for (const auto& g : rep.groups)
    out += io::csv_field(g.key.panel) + "," + treatment_tag(g.key.treatment) + "," +
           to_string(g.measure) + "," + std::to_string(g.n) + "," + detail::num(g.median) + "," +
           detail::num(g.ci.lo) + "," + detail::num(g.ci.hi) + "\n";
  return out;
}

inline std::string comparisons_csv(const Report& rep) {
  std::string out =
      "comparison_id,group_a,group_b,n_a,n_b,U,p_raw,p_adjusted,reject,significance_tier,method\n";
  for (const auto& c : rep.comparisons) {
    const double tier = stats::significance_tier(c.p_adjusted);
    out += io::csv_field(c.id) + "," + io::csv_field(c.group_a) + "," + io::csv_field(c.group_b) +
           "," + std::to_string(c.result.n1) + "," + std::to_string(c.result.n2) + "," +
           detail::num(c.result.u_statistic) + "," + detail::num(c.result.p_value) + "," +
           detail::num(c.p_adjusted) + "," + (c.reject ? "true" : "false") + "," +
           (tier > 0 ? detail::num(tier) : std::string("ns")) + "," + stats::to_string(c.result.method) +
           "\n";
  }
  return out;
}

// Plot-ready long format: one row per (champion, measure).
inline std::string long_csv(const Report& rep) {
  std::string out = "panel,morphology,regime,treatment,seed,measure,value\n";
  for (const auto& r : rep.records)
    for (auto m : kMeasures)
      out += io::csv_field(r.panel) + "," + to_string(r.morphology) + "," + to_string(r.regime) + "," +
             treatment_tag(r.treatment) + "," + std::to_string(r.seed) + "," + to_string(m) + "," +
             detail::num(r.value(m)) + "\n";
  return out;
}

}  // namespace wordbot::analysis
