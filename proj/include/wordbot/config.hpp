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

#pragma once

#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wordbot/controller.hpp"
#include "wordbot/random.hpp"

namespace wordbot {

enum class Treatment { kExperimental, kControl };
enum class Regime { kOriginal, kPerTaskBalanced };

inline const char* to_string(Treatment t) {
  return t == Treatment::kExperimental ? "experimental" : "control";
}
inline const char* to_string(Regime r) {
  return r == Regime::kOriginal ? "original" : "per_task_balanced";
}

inline Treatment parse_treatment(std::string_view s) {
  if (s == "experimental") return Treatment::kExperimental;
  if (s == "control") return Treatment::kControl;
  throw std::invalid_argument("unknown treatment '" + std::string(s) + "'");
}
inline Regime parse_regime(std::string_view s) {
  if (s == "original") return Regime::kOriginal;
  if (s == "per_task_balanced" || s == "balanced") return Regime::kPerTaskBalanced;
  throw std::invalid_argument("unknown regime '" + std::string(s) + "'");
}

// Offending key is available for diagnostics (exit code 2 in the CLI).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Everything needed to describe one evolutionary trial. Defaults are the
// desk-scale setup (population 30, 300 generations).
struct TrialConfig {
  MorphologyId morphology = MorphologyId::kSphere1dSensors;
  Treatment treatment = Treatment::kExperimental;
  Regime regime = Regime::kOriginal;
  Seed seed = 1;
  std::size_t population = 30;
  std::size_t generations = 300;
  std::size_t threads = 1;
  std::string embedding = "synthetic";  // or a path to a word2vec .bin
  std::size_t embedding_dim = 300;
  Seed embedding_seed = 2019;
  std::size_t steps = 500;
  double dt = 0.05;

  bool operator==(const TrialConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline unsigned long long parse_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + v + "'");
  }
}

}  // namespace detail

inline void set_config_value(TrialConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "morphology") c.morphology = parse_morphology(value);
    else if (key == "treatment") c.treatment = parse_treatment(value);
    else if (key == "regime") c.regime = parse_regime(value);
    else if (key == "seed") c.seed = detail::parse_count(key, value);
    else if (key == "population") c.population = detail::parse_count(key, value);
    else if (key == "generations") c.generations = detail::parse_count(key, value);
    else if (key == "threads" || key == "parallel") c.threads = detail::parse_count(key, value);
    else if (key == "embedding") c.embedding = value;
    else if (key == "embedding_dim") c.embedding_dim = detail::parse_count(key, value);
    else if (key == "embedding_seed") c.embedding_seed = detail::parse_count(key, value);
    else if (key == "steps") c.steps = detail::parse_count(key, value);
    else if (key == "dt") {
      std::size_t used = 0;
      c.dt = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } else
      throw ConfigError(key, "unknown key");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, std::string("invalid value '") + value + "'");
  }
}

inline void validate(const TrialConfig& c) {
  if (c.population < 1) throw ConfigError("population", "must be >= 1");
  if (c.generations < 1) throw ConfigError("generations", "must be >= 1");
  if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
  if (c.steps < 1) throw ConfigError("steps", "must be >= 1");
  if (!(c.dt > 0)) throw ConfigError("dt", "must be > 0");
  if (c.embedding_dim < 8) throw ConfigError("embedding_dim", "must be >= 8 (number of command words)");
  if (c.embedding.empty()) throw ConfigError("embedding", "must be 'synthetic' or a file path");
}

// Flat "key = value" lines; '#' starts a comment line.
inline TrialConfig parse_config(const std::string& text, TrialConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(t, "line " + std::to_string(lineno) + " is not 'key = value'");
    set_config_value(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  validate(base);
  return base;
}

inline std::string format_config(const TrialConfig& c) {
  std::ostringstream out;
  out << "morphology = " << to_string(c.morphology) << "\n"
      << "treatment = " << to_string(c.treatment) << "\n"
      << "regime = " << to_string(c.regime) << "\n"
      << "seed = " << c.seed << "\n"
      << "population = " << c.population << "\n"
      << "generations = " << c.generations << "\n"
      << "threads = " << c.threads << "\n"
      << "embedding = " << c.embedding << "\n"
      << "embedding_dim = " << c.embedding_dim << "\n"
      << "embedding_seed = " << c.embedding_seed << "\n"
      << "steps = " << c.steps << "\n"
      << "dt = " << format_double(c.dt) << "\n";
  return out.str();
}

}  // namespace wordbot
