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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "wordbot/analysis.hpp"
#include "wordbot/stats.hpp"

using namespace wordbot;
using namespace wordbot::stats;

namespace {

std::vector<double> sample(std::mt19937_64& rng, std::size_t n, bool ties) {
  std::vector<double> v(n);
  if (ties) {
    std::uniform_int_distribution<int> d(0, 4);
    for (double& x : v) x = d(rng);
  } else {
    std::normal_distribution<double> d;
    for (double& x : v) x = d(rng);
  }
  return v;
}

}  // namespace

TEST(MannWhitney, HandExamples) {
  const auto r = mann_whitney_u(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}, Mode::kExact);
  EXPECT_EQ(r.u_statistic, 0.0);
  EXPECT_NEAR(r.p_value, 0.1, 1e-15);
  EXPECT_EQ(r.method, Method::kExact);
  const auto s = mann_whitney_u(std::vector<double>{1, 3, 5}, std::vector<double>{2, 4, 6});
  EXPECT_EQ(s.u_x, 3.0);
  EXPECT_EQ(s.u_statistic, 3.0);
}

TEST(MannWhitney, ComplementarityAndBounds) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto x = sample(rng, 1 + t % 9, false), y = sample(rng, 1 + t % 7, false);
    const auto rx = mann_whitney_u(x, y), ry = mann_whitney_u(y, x);
    EXPECT_DOUBLE_EQ(rx.u_x + ry.u_x, static_cast<double>(x.size() * y.size()));
    EXPECT_GE(rx.u_statistic, 0.0);
    EXPECT_LE(rx.u_statistic, static_cast<double>(x.size() * y.size()) / 2);
    EXPECT_GE(rx.p_value, 0.0);
    EXPECT_LE(rx.p_value, 1.0);
    EXPECT_NEAR(rx.p_value, ry.p_value, 1e-15);
  }
}

TEST(MannWhitney, ExactMatchesBruteForceEnumeration) {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (std::size_t n1 = 1; n1 <= 7; ++n1)
    for (std::size_t n2 = 1; n2 <= 7; ++n2)
      for (bool ties : {false, true})
        for (int rep = 0; rep < 3; ++rep) {
          const auto x = sample(rng, n1, ties), y = sample(rng, n2, ties);
          const auto r = mann_whitney_u(x, y, Mode::kExact);
          EXPECT_NEAR(r.p_value, oracle::mwu_exact_bruteforce(x, y), 1e-12) << n1 << "x" << n2;
          EXPECT_DOUBLE_EQ(r.u_x, oracle::u_of(x, y));
          ++checked;
        }
  EXPECT_GE(checked, 200);
}

TEST(MannWhitney, ApproxAgreesWithExactAtTen) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto x = sample(rng, 10, false), y = sample(rng, 10, false);
    for (double& v : y) v += 0.5;
    const auto e = mann_whitney_u(x, y, Mode::kExact), a = mann_whitney_u(x, y, Mode::kApprox);
    EXPECT_EQ(a.method, Method::kNormalApprox);
    EXPECT_NEAR(e.p_value, a.p_value, 0.02);
  }
}

TEST(MannWhitney, ModeSelectionAndErrors) {
  std::vector<double> x(11, 0.0), y(10, 1.0);
  EXPECT_EQ(mann_whitney_u(x, y).method, Method::kNormalApprox);
  EXPECT_THROW(mann_whitney_u(x, y, Mode::kExact), std::invalid_argument);
  x.pop_back();
  EXPECT_EQ(mann_whitney_u(x, y).method, Method::kExact);
  EXPECT_THROW(mann_whitney_u(std::vector<double>{}, y), std::invalid_argument);
  // All values tied: no evidence either way.
  EXPECT_EQ(mann_whitney_u(std::vector<double>(30, 2.0), std::vector<double>(30, 2.0)).p_value, 1.0);
}

TEST(Holm, HandExamples) {
  const auto a = holm_bonferroni(std::vector<double>{0.01, 0.02, 0.04}, 0.05);
  EXPECT_EQ(a.reject, (std::vector<bool>{true, true, true}));
  EXPECT_NEAR(a.adjusted_p[0], 0.03, 1e-15);
  EXPECT_NEAR(a.adjusted_p[1], 0.04, 1e-15);
  EXPECT_NEAR(a.adjusted_p[2], 0.04, 1e-15);
  const auto b = holm_bonferroni(std::vector<double>{0.03, 0.04}, 0.05);
  EXPECT_EQ(b.reject, (std::vector<bool>{false, false}));
  const auto c = holm_bonferroni(std::vector<double>{0.049}, 0.05);
  EXPECT_TRUE(c.reject[0]);
  EXPECT_EQ(c.adjusted_p[0], 0.049);
}

TEST(Holm, MonotoneAndPermutationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 0.1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(8);
    for (double& v : p) v = u(rng);
    const auto rep = holm_bonferroni(p, 0.05);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    bool seen_accept = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_GE(rep.adjusted_p[order[i]], p[order[i]]);
      if (i) {
        EXPECT_GE(rep.adjusted_p[order[i]], rep.adjusted_p[order[i - 1]]);
      }
      if (!rep.reject[order[i]]) {
        seen_accept = true;
      } else {
        EXPECT_FALSE(seen_accept);  // rejections form a prefix
      }
    }
    auto shuffled = order;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<double> q;
    for (auto i : shuffled) q.push_back(p[i]);
    const auto rep2 = holm_bonferroni(q, 0.05);
    for (std::size_t k = 0; k < q.size(); ++k) {
      EXPECT_EQ(rep2.adjusted_p[k], rep.adjusted_p[shuffled[k]]);
      EXPECT_EQ(rep2.reject[k], rep.reject[shuffled[k]]);
    }
  }
}

TEST(Bootstrap, ConstantSample) {
  const auto ci = bootstrap_median_ci(std::vector<double>{5, 5, 5, 5}, 1000, 1);
  EXPECT_EQ(ci.lo, 5.0);
  EXPECT_EQ(ci.hi, 5.0);
}

TEST(Bootstrap, BracketsMedianAndIsSeeded) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const auto s = sample(rng, 1 + t % 25, t % 3 == 0);
    const auto ci = bootstrap_median_ci(s, 200, t);
    const double m = median(s);
    EXPECT_LE(ci.lo, m);
    EXPECT_GE(ci.hi, m);
  }
  const std::vector<double> s{1, 4, 2, 8, 5, 7};
  const auto a = bootstrap_median_ci(s, 500, 9), b = bootstrap_median_ci(s, 500, 9);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
}

TEST(Median, EvenAndOdd) {
  EXPECT_EQ(median(std::vector<double>{3, 1, 2}), 2.0);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
  EXPECT_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
}

TEST(Tier, AsteriskConvention) {
  EXPECT_EQ(significance_tier(0.00005), 0.0001);
  EXPECT_EQ(significance_tier(0.0005), 0.001);
  EXPECT_EQ(significance_tier(0.005), 0.01);
  EXPECT_EQ(significance_tier(0.02), 0.0);
}

TEST(Family, BudgetIsEnforced) {
  ComparisonFamily f(2);
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  f.add("one", "a", a, "b", b);
  EXPECT_THROW(f.finalize(), std::runtime_error);
  f.add("two", "b", b, "a", a);
  const auto& items = f.finalize();
  ASSERT_EQ(items.size(), 2u);
  EXPECT_NEAR(items[0].p_adjusted, 0.2, 1e-15);
}

TEST(Family, StandardGridRegisters56) {
  std::vector<analysis::ChampionRecord> records;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  Seed seed = 1;
  for (auto morph : kAllMorphologies)
    for (auto regime : {Regime::kOriginal, Regime::kPerTaskBalanced}) {
      if (regime == Regime::kPerTaskBalanced && morph != MorphologyId::kQuadruped) continue;
      for (auto t : {Treatment::kExperimental, Treatment::kControl})
        for (int r = 0; r < 4; ++r) {
          analysis::ChampionRecord c;
          c.morphology = morph;
          c.regime = regime;
          c.panel = analysis::panel_name(morph, regime);
          c.treatment = t;
          c.seed = seed++;
          c.move = 5 + n(rng);
          c.stop = n(rng);
          c.test = n(rng);
          c.fitness = n(rng);
          records.push_back(c);
        }
    }
  analysis::Options opt;
  opt.bootstrap_iterations = 50;
  opt.declared_budget = analysis::kStandardGridComparisons;
  const auto rep = analysis::analyze(records, opt);
  EXPECT_EQ(rep.comparisons.size(), 56u);
  EXPECT_EQ(analysis::standard_panels().size() * analysis::kComparisonsPerPanel, 56u);
  opt.declared_budget = 55;
  EXPECT_THROW(analysis::analyze(records, opt), std::runtime_error);
}
