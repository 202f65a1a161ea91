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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wordbot/io.hpp"
#include "wordbot/simulator.hpp"

using namespace wordbot;

namespace {

SphereParams conservative() {
  SphereParams p;
  p.rolling_damping = 0.0;
  return p;
}

double oracle_energy(const SpherePlane& s, const SphereParams& p) {
  return oracle::sphere_energy(s.xdot, s.phi, s.phidot, p.shell_mass, p.bob_mass, p.radius,
                               p.shell_inertia, p.arm, p.gravity);
}

Trajectory straight_line(std::vector<std::pair<double, double>> xy) {
  Trajectory t;
  t.dt = 0.05;
  for (auto [x, y] : xy) t.poses.push_back({x, y, 0, 0});
  return t;
}

}  // namespace

TEST(Sphere, MassMatrixPositiveDefinite) {
  const SphereParams p;
  const double a11 = p.shell_mass + p.bob_mass + p.shell_inertia / (p.radius * p.radius);
  for (double phi = -4; phi <= 4; phi += 0.01) {
    const double c = std::cos(phi);
    EXPECT_GT(a11 * p.bob_mass * p.arm * p.arm - std::pow(p.bob_mass * p.arm * c, 2), 0.0);
  }
}

TEST(Sphere, EquilibriumUnchanged) {
  for (auto integ : {Integrator::kRk4, Integrator::kSemiImplicitEuler}) {
    SphereParams p;
    p.integrator = integ;
    const auto s = sphere_step(SpherePlane{}, 0.0, 0.05, p);
    EXPECT_EQ(s.x, 0.0);
    EXPECT_EQ(s.xdot, 0.0);
    EXPECT_EQ(s.phi, 0.0);
    EXPECT_EQ(s.phidot, 0.0);
  }
}

TEST(Sphere, EnergyMatchesLagrangianOracle) {
  const auto p = conservative();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const SpherePlane s{u(rng), u(rng), u(rng), u(rng)};
    EXPECT_NEAR(sphere_energy(s, p), oracle_energy(s, p), 1e-12);
  }
}

TEST(Sphere, PassiveEnergyDriftBelowOnePercent) {
  const auto p = conservative();
  SpherePlane s{0, 0, 0.3, 0};
  const double e0 = oracle_energy(s, p);
  const double scale = std::abs(e0 - sphere_rest_energy(p));
  double worst = 0;
  for (int k = 0; k < 500; ++k) {
    s = sphere_step(s, 0.0, 0.05, p);
    worst = std::max(worst, std::abs(oracle_energy(s, p) - e0));
  }
  EXPECT_LT(worst / scale, 0.01);
}

TEST(Sphere, SemiImplicitEulerUpdatesVelocitiesFirst) {
  SphereParams p = conservative();
  p.integrator = Integrator::kSemiImplicitEuler;
  p.substeps = 1;
  const SpherePlane s0{0, 0, 0.3, 0};
  // Solve the 2x2 system by Cramer's rule at the initial state.
  const double c = std::cos(0.3), sn = std::sin(0.3);
  const double a11 = p.shell_mass + p.bob_mass + p.shell_inertia / (p.radius * p.radius);
  const double a12 = p.bob_mass * p.arm * c, a22 = p.bob_mass * p.arm * p.arm;
  const double b1 = 0, b2 = -p.bob_mass * p.gravity * p.arm * sn;
  const double det = a11 * a22 - a12 * a12;
  const double xdd = (b1 * a22 - a12 * b2) / det, pdd = (a11 * b2 - a12 * b1) / det;
  const double dt = 0.05;
  const auto s1 = sphere_step(s0, 0.0, dt, p);
  EXPECT_NEAR(s1.xdot, dt * xdd, 1e-14);
  EXPECT_NEAR(s1.phidot, dt * pdd, 1e-14);
  EXPECT_NEAR(s1.x, dt * dt * xdd, 1e-14);
  EXPECT_NEAR(s1.phi, 0.3 + dt * dt * pdd, 1e-14);
}

// Small-angle sign analysis: with the pendulum near the bottom, a positive
// torque gives xddot < 0. That holds over 20 steps only while the torque is
// below m g l; at tau_max the pendulum goes over the top near step 5.
TEST(Sphere, ConstantTorqueGivesMonotoneX) {
  for (double damping : {0.0, 4.0}) {
    SphereParams p;
    p.rolling_damping = damping;
    const double holding = p.bob_mass * p.gravity * p.arm;
    for (double tau : {0.1, 0.3, 0.5}) {
      ASSERT_LT(tau, holding);
      SpherePlane s;
      double prev = 0;
      for (int k = 0; k < 20; ++k) {
        s = sphere_step(s, tau, 0.05, p);
        EXPECT_LT(s.x, prev) << "tau " << tau << " step " << k;
        prev = s.x;
      }
    }
    SpherePlane s;
    double prev = 0;
    for (int k = 0; k < 5; ++k) {
      s = sphere_step(s, p.tau_max, 0.05, p);
      EXPECT_LT(s.x, prev) << "tau_max step " << k;
      prev = s.x;
    }
  }
}

TEST(Sphere, SymmetricUnderTorqueReversal) {
  SpherePlane a, b;
  for (int k = 0; k < 100; ++k) {
    a = sphere_step(a, 0.8, 0.05);
    b = sphere_step(b, -0.8, 0.05);
    EXPECT_DOUBLE_EQ(a.x, -b.x);
    EXPECT_DOUBLE_EQ(a.phi, -b.phi);
  }
}

TEST(Anchored, SingleAnchorTranslation) {
  const std::vector<Planar> before{{1, 0}}, after{{0.9, 0}};
  const auto pose = register_anchors(BodyPose{}, before, after);
  EXPECT_NEAR(pose.x, 0.1, 1e-15);
  EXPECT_NEAR(pose.y, 0.0, 1e-15);
  EXPECT_EQ(pose.yaw, 0.0);
}

TEST(Anchored, NoAnchorsNoMotion) {
  const BodyPose p0{0.3, -0.2, 0.1, 0.7};
  EXPECT_EQ(register_anchors(p0, {}, {}), p0);
}

TEST(Anchored, AntisymmetricAnchorsRotatePurely) {
  const std::vector<Planar> before{{1, 0}, {-1, 0}}, after{{1, 0.1}, {-1, -0.1}};
  const auto pose = register_anchors(BodyPose{}, before, after);
  const auto ref = oracle::procrustes_svd({{1, 0}, {-1, 0}}, {{1, 0.1}, {-1, -0.1}});
  EXPECT_NEAR(pose.x, 0.0, 1e-12);
  EXPECT_NEAR(pose.y, 0.0, 1e-12);
  EXPECT_NEAR(pose.yaw, -std::atan(0.1), 1e-12);
  EXPECT_NEAR(pose.yaw, ref.dpsi, 1e-9);
  EXPECT_NEAR(pose.x, ref.dx, 1e-9);
}

TEST(Anchored, MatchesProcrustesSearchOnRandomClouds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5), small(-0.05, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Planar> before, after;
    std::vector<std::pair<double, double>> b2, a2;
    for (int k = 0; k < 4; ++k) {
      const Planar b{u(rng), u(rng)};
      const Planar a{b.x + small(rng), b.y + small(rng)};
      before.push_back(b);
      after.push_back(a);
      b2.emplace_back(b.x, b.y);
      a2.emplace_back(a.x, a.y);
    }
    const auto pose = register_anchors(BodyPose{}, before, after);
    const auto ref = oracle::procrustes_svd(b2, a2);
    EXPECT_NEAR(pose.yaw, ref.dpsi, 1e-9);
    EXPECT_NEAR(pose.x, ref.dx, 1e-9);
    EXPECT_NEAR(pose.y, ref.dy, 1e-9);
    // The search minimum is flat (quadratic), so it only resolves ~1e-8.
    const auto searched = oracle::procrustes_search(b2, a2);
    EXPECT_NEAR(pose.yaw, searched.dpsi, 1e-7);
  }
}

TEST(Anchored, StationaryAnchorsLeavePoseUnchanged) {
  const BodyPose p0{1.0, 2.0, 0.0, 0.4};
  const std::vector<Planar> pts{{0.2, 0.1}, {-0.3, 0.4}, {0.0, -0.2}};
  const auto p1 = register_anchors(p0, pts, pts);
  EXPECT_NEAR(p1.x, p0.x, 1e-12);
  EXPECT_NEAR(p1.y, p0.y, 1e-12);
  EXPECT_NEAR(p1.yaw, p0.yaw, 1e-12);
}

TEST(Anchored, FrozenJointsDoNotDisplace) {
  for (auto kind : {LeggedKind::kQuadruped, LeggedKind::kMinimal}) {
    auto st = legged_rest_state(kind);
    // Move joints somewhere first, then hold them.
    std::vector<double> targets(joint_count(kind), 0.6);
    for (int k = 0; k < 40; ++k) st = anchored_body_step(kind, st, targets, 0.05);
    const BodyPose held = st.pose;
    for (int k = 0; k < 500; ++k) st = anchored_body_step(kind, st, targets, 0.05);
    EXPECT_LT(std::hypot(st.pose.x - held.x, st.pose.y - held.y), 1e-9);
    EXPECT_LT(std::abs(st.pose.yaw - held.yaw), 1e-9);
  }
}

TEST(Anchored, NonPenetrationLimitsAndTouchOnRandomSequences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  const LeggedParams p;
  for (int seq = 0; seq < 200; ++seq) {
    const auto kind = seq % 2 ? LeggedKind::kMinimal : LeggedKind::kQuadruped;
    auto st = legged_rest_state(kind);
    std::vector<double> targets(joint_count(kind));
    for (int k = 0; k < 50; ++k) {
      for (double& t : targets) t = u(rng);
      st = anchored_body_step(kind, st, targets, 0.05);
      std::array<Vec3, 8> pts;
      const auto n = candidate_points(kind, st.joints.q, p, pts);
      double lowest = 1e9;
      for (std::size_t i = 0; i < n; ++i) lowest = std::min(lowest, st.pose.z + pts[i].z);
      EXPECT_EQ(lowest, 0.0);
      EXPECT_GE(st.pose.z, 0.0);
      for (double q : st.joints.q) EXPECT_LE(std::abs(q), p.joint_limit);
    }
  }
}

TEST(Anchored, SlewRateLimited) {
  auto st = legged_rest_state(LeggedKind::kMinimal);
  st = anchored_body_step(LeggedKind::kMinimal, st, std::vector<double>{1.0}, 0.05);
  EXPECT_NEAR(st.joints.q[0], kPi / 2 * 0.05, 1e-15);
}

TEST(Quadruped, SensorsAreTouchValues) {
  const auto g = new_genome(interface_for(MorphologyId::kQuadruped), 4);
  const auto t = evaluate(interface_for(MorphologyId::kQuadruped), g, prime(g, std::vector<double>{0.5}), 100);
  for (const auto& row : t.sensor_log)
    for (double v : row) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Evaluate, BookkeepingAndSensorRanges) {
  for (auto id : kAllMorphologies) {
    const auto iface = interface_for(id);
    const auto g = new_genome(iface, 17);
    const auto t = evaluate(iface, g, prime(g, std::vector<double>{0.4, -0.1}), 120);
    ASSERT_EQ(t.poses.size(), 121u);
    ASSERT_EQ(t.sensor_log.size(), 120u);
    ASSERT_EQ(t.motor_log.size(), 120u);
    EXPECT_EQ(t.poses.front().x, 0.0);
    EXPECT_EQ(t.poses.front().y, 0.0);
    for (const auto& row : t.sensor_log) {
      ASSERT_EQ(row.size(), iface.n_sensors);
      for (double v : row) EXPECT_LE(std::abs(v), 1.0);
    }
  }
}

TEST(Evaluate, ZeroGenomeStaysPut) {
  for (auto id : kAllMorphologies) {
    const auto iface = interface_for(id);
    const Genome g(iface);
    const auto t = evaluate(iface, g, HiddenState{std::vector<double>(5, 0.0)});
    const auto d = displacement_metrics(t, body_length(id, SimParams{}));
    EXPECT_LT(d.dist_from_origin, 1e-9) << to_string(id);
    EXPECT_LT(d.path_length, 1e-9) << to_string(id);
  }
}

TEST(Evaluate, BitReproducible) {
  const auto iface = interface_for(MorphologyId::kSphere2dSensors);
  const auto g = new_genome(iface, 99);
  const auto h = prime(g, std::vector<double>{0.3, 0.9, -0.2});
  const auto a = evaluate(iface, g, h), b = evaluate(iface, g, h);
  EXPECT_EQ(a.poses, b.poses);
  EXPECT_EQ(a.motor_log, b.motor_log);
  EXPECT_EQ(trajectory_csv(a), trajectory_csv(b));
}

TEST(Evaluate, RejectsBadArguments) {
  const auto iface = interface_for(MorphologyId::kMinimal);
  const Genome g(iface);
  const HiddenState h{std::vector<double>(5, 0.0)};
  EXPECT_THROW(evaluate(iface, g, h, 0), std::invalid_argument);
  EXPECT_THROW(evaluate(iface, g, h, 10, 0.0), std::invalid_argument);
  EXPECT_THROW(evaluate(interface_for(MorphologyId::kQuadruped), g, h), std::invalid_argument);
}

TEST(Displacement, Examples) {
  const auto still = displacement_metrics(straight_line({{0, 0}, {0, 0}}), 0.5);
  EXPECT_EQ(still.dx, 0);
  EXPECT_EQ(still.dist_from_origin, 0);
  EXPECT_EQ(still.path_length, 0);
  const auto line = displacement_metrics(straight_line({{0, 0}, {1, 0}, {2, 0}}), 0.5);
  EXPECT_DOUBLE_EQ(line.dx, 2);
  EXPECT_DOUBLE_EQ(line.dist_from_origin, 2);
  EXPECT_DOUBLE_EQ(line.path_length, 2);
  EXPECT_DOUBLE_EQ(line.dx_bl, 4);
  const auto back = displacement_metrics(straight_line({{0, 0}, {1, 1}, {0, 0}}), 0.5);
  EXPECT_EQ(back.dx, 0);
  EXPECT_EQ(back.dist_from_origin, 0);
  EXPECT_GT(back.path_length, 0);
}

TEST(TrajectoryCsv, HeaderRowsAndPrecision) {
  const auto iface = interface_for(MorphologyId::kMinimal);
  const auto g = new_genome(iface, 5);
  const auto t = evaluate(iface, g, prime(g, std::vector<double>{1.0}), 30);
  const auto table = io::parse_csv(trajectory_csv(t));
  EXPECT_EQ(table.header, (std::vector<std::string>{"step", "t", "x", "y", "z", "yaw", "q0", "s0", "s1", "s2", "m0"}));
  ASSERT_EQ(table.rows.size(), 30u);
  EXPECT_EQ(table.rows[0][0], "1");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", t.poses[30].x);
  EXPECT_EQ(table.rows[29][table.column("x")], buf);
}
