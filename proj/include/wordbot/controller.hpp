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

// Three-layer recurrent controller. A command vector is fed serially through
// a single auditory neuron into the recurrent hidden layer ("priming"); the
// auditory synapses are then dropped and the network runs closed-loop from
// sensors through the hidden layer to the motors.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wordbot/embeddings.hpp"
#include "wordbot/random.hpp"

namespace wordbot {

inline constexpr std::size_t kHiddenNeurons = 5;

enum class MorphologyId {
  kQuadruped,
  kMinimal,
  kSphere1dSensors,
  kSphere1dNoSensors,
  kSphere2dSensors,
  kSphere2dNoSensors,
};

inline constexpr std::array kAllMorphologies = {
    MorphologyId::kQuadruped,        MorphologyId::kMinimal,
    MorphologyId::kSphere1dSensors,  MorphologyId::kSphere1dNoSensors,
    MorphologyId::kSphere2dSensors,  MorphologyId::kSphere2dNoSensors,
};

inline const char* to_string(MorphologyId id) {
  switch (id) {
    case MorphologyId::kQuadruped: return "quadruped";
    case MorphologyId::kMinimal: return "minimal";
    case MorphologyId::kSphere1dSensors: return "sphere1d_s";
    case MorphologyId::kSphere1dNoSensors: return "sphere1d_ns";
    case MorphologyId::kSphere2dSensors: return "sphere2d_s";
    case MorphologyId::kSphere2dNoSensors: return "sphere2d_ns";
  }
  return "?";
}

inline MorphologyId parse_morphology(std::string_view name) {
  for (auto id : kAllMorphologies)
    if (name == to_string(id)) return id;
  throw std::invalid_argument("unknown morphology '" + std::string(name) + "'");
}

struct MorphologyInterface {
  MorphologyId id;
  std::size_t n_sensors;
  std::size_t n_motors;
};

inline MorphologyInterface interface_for(MorphologyId id) {
  switch (id) {
    case MorphologyId::kQuadruped: return {id, 4, 8};        // touch per lower leg; hip+knee
    case MorphologyId::kMinimal: return {id, 3, 1};          // 2 touch + joint angle
    case MorphologyId::kSphere1dSensors: return {id, 1, 1};  // pendulum angle
    case MorphologyId::kSphere1dNoSensors: return {id, 0, 1};
    case MorphologyId::kSphere2dSensors: return {id, 2, 2};
    case MorphologyId::kSphere2dNoSensors: return {id, 0, 2};
  }
  throw std::invalid_argument("bad morphology id");
}

struct HiddenState {
  std::vector<double> h;
  bool operator==(const HiddenState&) const = default;
};

// All synapse weights of one controller in a single buffer, laid out as
// [w_ah | w_hh | w_sh | w_hm], each block row-major:
//   w_ah[j]        auditory -> hidden j
//   w_hh[i*H + j]  hidden i -> hidden j (includes self-connections)
//   w_sh[s*H + j]  sensor s -> hidden j
//   w_hm[j*M + m]  hidden j -> motor m
class Genome {
 public:
  Genome() = default;
  Genome(MorphologyId morphology, std::size_t hidden, std::size_t sensors, std::size_t motors)
      : morphology_(morphology),
        hidden_(hidden),
        sensors_(sensors),
        motors_(motors),
        weights_(hidden + hidden * hidden + sensors * hidden + hidden * motors, 0.0) {
    if (hidden == 0) throw std::invalid_argument("genome needs at least one hidden neuron");
  }
  explicit Genome(const MorphologyInterface& iface, std::size_t hidden = kHiddenNeurons)
      : Genome(iface.id, hidden, iface.n_sensors, iface.n_motors) {}

  MorphologyId morphology() const { return morphology_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t sensors() const { return sensors_; }
  std::size_t motors() const { return motors_; }
  std::size_t size() const { return weights_.size(); }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }

  std::span<double> w_ah() { return block(0, hidden_); }
  std::span<double> w_hh() { return block(hh_offset(), hidden_ * hidden_); }
  std::span<double> w_sh() { return block(sh_offset(), sensors_ * hidden_); }
  std::span<double> w_hm() { return block(hm_offset(), hidden_ * motors_); }
  std::span<const double> w_ah() const { return block(0, hidden_); }
  std::span<const double> w_hh() const { return block(hh_offset(), hidden_ * hidden_); }
  std::span<const double> w_sh() const { return block(sh_offset(), sensors_ * hidden_); }
  std::span<const double> w_hm() const { return block(hm_offset(), hidden_ * motors_); }

  bool operator==(const Genome&) const = default;

 private:
  std::size_t hh_offset() const { return hidden_; }
  std::size_t sh_offset() const { return hh_offset() + hidden_ * hidden_; }
  std::size_t hm_offset() const { return sh_offset() + sensors_ * hidden_; }
  std::span<double> block(std::size_t off, std::size_t n) { return {weights_.data() + off, n}; }
  std::span<const double> block(std::size_t off, std::size_t n) const {
    return {weights_.data() + off, n};
  }

  MorphologyId morphology_ = MorphologyId::kQuadruped;
  std::size_t hidden_ = 0;
  std::size_t sensors_ = 0;
  std::size_t motors_ = 0;
  std::vector<double> weights_;
};

inline Genome new_genome(const MorphologyInterface& iface, Seed seed,
                         std::size_t hidden = kHiddenNeurons) {
  Genome g(iface, hidden);
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (double& w : g.weights()) w = uniform(rng);
  return g;
}

namespace detail {

// out[j] = tanh(sum_i w_hh[i][j] * h[i] + extra[j])
inline void recurrent_update(const Genome& g, std::span<const double> h,
                             std::span<const double> extra, std::span<double> out) {
  const std::size_t H = g.hidden();
  const auto w = g.w_hh();
  for (std::size_t j = 0; j < H; ++j) {
    double a = extra[j];
    for (std::size_t i = 0; i < H; ++i) a += w[i * H + j] * h[i];
    out[j] = std::tanh(a);
  }
}

}  // namespace detail

// Serial auditory priming from h = 0. If `trace` is given it receives the
// hidden state after every element (one row per element).
inline HiddenState prime(const Genome& g, std::span<const double> command,
                         std::vector<HiddenState>* trace = nullptr) {
  const std::size_t H = g.hidden();
  std::vector<double> h(H, 0.0), next(H), drive(H);
  const auto w_ah = g.w_ah();
  if (trace) trace->reserve(trace->size() + command.size());
  for (double c : command) {
    for (std::size_t j = 0; j < H; ++j) drive[j] = w_ah[j] * c;
    detail::recurrent_update(g, h, drive, next);
    h.swap(next);
    if (trace) trace->push_back({h});
  }
  return {std::move(h)};
}

inline HiddenState prime(const Genome& g, const CommandVector& cmd,
                         std::vector<HiddenState>* trace = nullptr) {
  return prime(g, std::span<const double>(cmd.values), trace);
}

// One closed-loop update. `h` is advanced in place; motors receive
// tanh(w_hm^T h').
inline void step(const Genome& g, HiddenState& h, std::span<const double> sensors,
                 std::span<double> motors) {
  const std::size_t H = g.hidden();
  if (sensors.size() != g.sensors())
    throw std::invalid_argument("step: expected " + std::to_string(g.sensors()) + " sensors");
  if (motors.size() != g.motors())
    throw std::invalid_argument("step: expected " + std::to_string(g.motors()) + " motors");
  thread_local std::vector<double> drive, next;
  drive.assign(H, 0.0);
  next.resize(H);
  const auto w_sh = g.w_sh();
  for (std::size_t s = 0; s < sensors.size(); ++s)
    for (std::size_t j = 0; j < H; ++j) drive[j] += w_sh[s * H + j] * sensors[s];
  detail::recurrent_update(g, h.h, drive, next);
  h.h.assign(next.begin(), next.end());

  const std::size_t M = g.motors();
  const auto w_hm = g.w_hm();
  for (std::size_t m = 0; m < M; ++m) {
    double a = 0;
    for (std::size_t j = 0; j < H; ++j) a += w_hm[j * M + m] * h.h[j];
    motors[m] = std::tanh(a);
  }
}

struct StepResult {
  HiddenState hidden;
  std::vector<double> motors;
};

inline StepResult step(const Genome& g, const HiddenState& h, std::span<const double> sensors) {
  StepResult r{h, std::vector<double>(g.motors())};
  step(g, r.hidden, sensors, r.motors);
  return r;
}

inline constexpr double kMinMutationStd = 1e-9;

// Perturbs one uniformly chosen weight: w ~ Normal(w, |w|), with the
// standard deviation floored at kMinMutationStd. Returns the index touched.
template <typename Urbg>
std::size_t mutate_one_weight(std::span<double> weights, Urbg& rng) {
  if (weights.empty()) throw std::invalid_argument("mutate: genome has no weights");
  std::uniform_int_distribution<std::size_t> pick(0, weights.size() - 1);
  const std::size_t idx = pick(rng);
  const double old = weights[idx];
  std::normal_distribution<double> normal(old, std::max(std::abs(old), kMinMutationStd));
  weights[idx] = normal(rng);
  return idx;
}

inline Genome mutate(const Genome& g, Seed seed) {
  Genome child = g;
  Rng rng(seed);
  mutate_one_weight(child.weights(), rng);
  return child;
}

// Text form:
//   wordbot-genome 1
//   morphology <id>
//   hidden <H>
//   sensors <S>
//   motors <M>
//   w_ah <H values>
//   w_hh <H*H values>
//   w_sh <S*H values>
//   w_hm <H*M values>
// Values use the shortest decimal form that round-trips exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return {buf, end};
}

inline double parse_double(std::string_view s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::string to_text(const Genome& g) {
  std::string out = "wordbot-genome 1\n";
  out += "morphology " + std::string(to_string(g.morphology())) + "\n";
  out += "hidden " + std::to_string(g.hidden()) + "\n";
  out += "sensors " + std::to_string(g.sensors()) + "\n";
  out += "motors " + std::to_string(g.motors()) + "\n";
  auto emit = [&](const char* name, std::span<const double> block) {
    out += name;
    for (double w : block) out += " " + format_double(w);
    out += "\n";
  };
  emit("w_ah", g.w_ah());
  emit("w_hh", g.w_hh());
  emit("w_sh", g.w_sh());
  emit("w_hm", g.w_hm());
  return out;
}

inline Genome genome_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_fields = [&](const char* key) {
    if (!std::getline(in, line)) throw std::invalid_argument(std::string("genome: missing '") + key + "'");
    std::istringstream fields(line);
    std::string name;
    fields >> name;
    if (name != key)
      throw std::invalid_argument(std::string("genome: expected '") + key + "', got '" + name + "'");
    std::vector<std::string> rest;
    for (std::string tok; fields >> tok;) rest.push_back(tok);
    return rest;
  };
  auto single = [&](const char* key) {
    auto f = next_fields(key);
    if (f.size() != 1) throw std::invalid_argument(std::string("genome: bad '") + key + "' line");
    return f.front();
  };
  if (!std::getline(in, line) || line != "wordbot-genome 1")
    throw std::invalid_argument("genome: missing 'wordbot-genome 1' header");
  const auto morph = parse_morphology(single("morphology"));
  const auto count = [&](const char* key) {
    return static_cast<std::size_t>(std::stoul(single(key)));
  };
  const auto H = count("hidden");
  const auto S = count("sensors");
  const auto M = count("motors");
  Genome g(morph, H, S, M);
  auto fill = [&](const char* key, std::span<double> block) {
    auto f = next_fields(key);
    if (f.size() != block.size())
      throw std::invalid_argument(std::string("genome: '") + key + "' expects " +
                                  std::to_string(block.size()) + " values, got " +
                                  std::to_string(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) {
      block[i] = parse_double(f[i]);
      if (!std::isfinite(block[i])) throw std::invalid_argument("genome: non-finite weight");
    }
  };
  fill("w_ah", g.w_ah());
  fill("w_hh", g.w_hh());
  fill("w_sh", g.w_sh());
  fill("w_hm", g.w_hm());
  return g;
}

}  // namespace wordbot
