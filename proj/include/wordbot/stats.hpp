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

// Rank statistics used by the analysis: two-sided Mann-Whitney U (exact and
// normal approximation), Holm-Bonferroni step-down correction, and
// percentile-bootstrap confidence intervals of the median.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wordbot/random.hpp"

namespace wordbot::stats {

enum class Method { kExact, kNormalApprox };
enum class Mode { kAuto, kExact, kApprox };

inline const char* to_string(Method m) {
  return m == Method::kExact ? "exact" : "normal_approx";
}

// Largest pooled sample size handled by exact enumeration.
inline constexpr std::size_t kExactLimit = 20;

struct ComparisonResult {
  double u_statistic = 0;  // min(U_x, U_y)
  double u_x = 0;          // #{x_i > y_j} + 0.5 #{x_i == y_j}
  double p_value = 1;
  Method method = Method::kExact;
  std::size_t n1 = 0, n2 = 0;
};

namespace detail {

// Twice the mid-rank of each pooled observation, so ties stay integral.
inline std::vector<long> doubled_midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<long> r2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // ranks i+1..j+1 share the mean (i+j+2)/2
    const long doubled = static_cast<long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) r2[order[k]] = doubled;
    i = j + 1;
  }
  return r2;
}

inline double tie_term(std::span<const double> pooled) {
  std::vector<double> v(pooled.begin(), pooled.end());
  std::sort(v.begin(), v.end());
  double t = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double c = static_cast<double>(j - i + 1);
    t += c * c * c - c;
    i = j + 1;
  }
  return t;
}

}  // namespace detail

// Two-sided test. Exact mode counts, over all C(n1+n2, n1) relabelings of
// the pooled sample, those whose U_x lies at least as far from n1*n2/2 as
// the observed one. Approximate mode uses the normal approximation with tie
// and continuity corrections.
inline ComparisonResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                       Mode mode = Mode::kAuto) {
  if (x.empty() || y.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  for (double v : pooled)
    if (std::isnan(v)) throw std::invalid_argument("mann_whitney_u: NaN in sample");

  const auto r2 = detail::doubled_midranks(pooled);
  long r2x = 0;
  for (std::size_t i = 0; i < n1; ++i) r2x += r2[i];
  // 2*U_x = 2*R_x - n1(n1+1)
  const long base = static_cast<long>(n1 * (n1 + 1));
  const long two_ux = r2x - base;
  const long two_mean = static_cast<long>(n1 * n2);  // 2 * (n1 n2 / 2)

  ComparisonResult r;
  r.n1 = n1;
  r.n2 = n2;
  r.u_x = 0.5 * static_cast<double>(two_ux);
  r.u_statistic = std::min(r.u_x, static_cast<double>(n1 * n2) - r.u_x);

  const bool exact = mode == Mode::kExact || (mode == Mode::kAuto && n <= kExactLimit);
  if (exact) {
    if (n > kExactLimit)
      throw std::invalid_argument("mann_whitney_u: exact mode needs n1 + n2 <= " +
                                  std::to_string(kExactLimit));
    r.method = Method::kExact;
    // counts[k][s]: subsets of size k whose doubled ranks sum to s.
    const long max_sum = static_cast<long>(n * (n + 1));
    std::vector<std::vector<double>> counts(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    counts[0][0] = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k)
        for (long s = max_sum; s >= r2[i]; --s) counts[k][s] += counts[k - 1][s - r2[i]];
    const long observed = std::labs(two_ux - two_mean);
    double extreme = 0, total = 0;
    for (long s = 0; s <= max_sum; ++s) {
      const double c = counts[n1][s];
      if (c == 0) continue;
      total += c;
      if (std::labs(s - base - two_mean) >= observed) extreme += c;
    }
    r.p_value = std::min(1.0, extreme / total);
    return r;
  }

  r.method = Method::kNormalApprox;
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                     ((nn + 1) - detail::tie_term(pooled) / (nn * (nn - 1)));
  const double dev = std::abs(r.u_x - static_cast<double>(n1 * n2) / 2.0) - 0.5;
  if (var <= 0 || dev <= 0) {
    r.p_value = 1.0;
    return r;
  }
  const double z = dev / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

struct CorrectionReport {
  std::vector<double> raw_p;
  std::vector<double> adjusted_p;
  std::vector<bool> reject;
  double alpha = 0.05;
};

// Holm-Bonferroni step-down. Results are reported in input order.
inline CorrectionReport holm_bonferroni(std::span<const double> p, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("holm_bonferroni: alpha must be in (0,1)");
  for (double v : p)
    if (!(v >= 0 && v <= 1)) throw std::invalid_argument("holm_bonferroni: p-values must be in [0,1]");
  const std::size_t m = p.size();
  CorrectionReport rep;
  rep.alpha = alpha;
  rep.raw_p.assign(p.begin(), p.end());
  rep.adjusted_p.assign(m, 0.0);
  rep.reject.assign(m, false);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  double running = 0;
  bool rejecting = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double factor = static_cast<double>(m - i);
    const double pi = p[order[i]];
    running = std::max(running, std::min(1.0, factor * pi));
    rep.adjusted_p[order[i]] = running;
    if (rejecting && pi <= alpha / factor)
      rep.reject[order[i]] = true;
    else
      rejecting = false;
  }
  return rep;
}

inline double median(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("median: empty sample");
  std::vector<double> v(sample.begin(), sample.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Linear interpolation between order statistics (q in [0,1]).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Interval {
  double lo = 0, hi = 0;
};

inline constexpr std::size_t kDefaultBootstrapIterations = 10000;

// Percentile bootstrap of the median. Iteration i draws from its own
// stream derived from (seed, i), so the result does not depend on how
// iterations are scheduled.
inline Interval bootstrap_median_ci(std::span<const double> sample,
                                    std::size_t iterations = kDefaultBootstrapIterations,
                                    Seed seed = 0, double level = 0.95) {
  if (sample.empty()) throw std::invalid_argument("bootstrap_median_ci: empty sample");
  if (iterations < 1) throw std::invalid_argument("bootstrap_median_ci: iterations must be >= 1");
  const std::size_t n = sample.size();
  std::vector<double> medians(iterations), resample(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    Rng rng(derive_seed(seed, {stream::kBootstrap, it}));
    for (auto& v : resample) v = sample[pick(rng)];
    medians[it] = median(resample);
  }
  const double tail = (1.0 - level) / 2.0;
  return {quantile(medians, tail), quantile(medians, 1.0 - tail)};
}

// 0.0001 / 0.001 / 0.01 tiers (three, two, one asterisk); 0 when not
// significant at 0.01.
inline double significance_tier(double adjusted_p) {
  if (adjusted_p < 0.0001) return 0.0001;
  if (adjusted_p < 0.001) return 0.001;
  if (adjusted_p < 0.01) return 0.01;
  return 0;
}

struct Comparison {
  std::string id;
  std::string group_a, group_b;
  ComparisonResult result;
  double p_adjusted = 1;
  bool reject = false;
};

// A family of pairwise comparisons corrected together. The family declares
// how many comparisons it expects; finalize() refuses to correct a family
// that registered a different number.
class ComparisonFamily {
 public:
  explicit ComparisonFamily(std::size_t declared_budget, double alpha = 0.05)
      : budget_(declared_budget), alpha_(alpha) {}

  void add(std::string id, std::string group_a, std::span<const double> a, std::string group_b,
           std::span<const double> b, Mode mode = Mode::kAuto) {
    if (finalized_) throw std::logic_error("ComparisonFamily: already finalized");
    items_.push_back({std::move(id), std::move(group_a), std::move(group_b), mann_whitney_u(a, b, mode)});
  }

  std::size_t size() const { return items_.size(); }
  std::size_t budget() const { return budget_; }

  const std::vector<Comparison>& finalize() {
    if (items_.size() != budget_)
      throw std::runtime_error("comparison family registered " + std::to_string(items_.size()) +
                               " comparisons but declared " + std::to_string(budget_));
    std::vector<double> raw;
    for (const auto& c : items_) raw.push_back(c.result.p_value);
    const auto rep = holm_bonferroni(raw, alpha_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
      items_[i].p_adjusted = rep.adjusted_p[i];
      items_[i].reject = rep.reject[i];
    }
    finalized_ = true;
    return items_;
  }

  const std::vector<Comparison>& comparisons() const { return items_; }

 private:
  std::size_t budget_;
  double alpha_;
  bool finalized_ = false;
  std::vector<Comparison> items_;
};

}  // namespace wordbot::stats
