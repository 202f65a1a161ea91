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

// Reduced-order bodies for closed-loop evaluation.
//
// Spheres: a pendulum hung from the sphere center, driven by a motor torque
// between shell and pendulum, rolling without slip on a plane. The 2-DOF
// sphere is two decoupled planar copies (xz and yz).
//
// Legged bodies (quadruped, minimal): kinematic anchored-contact model. The
// body stays level; after every joint update the contact points that were on
// the ground are held fixed by a least-squares planar rigid registration,
// then the body is dropped so its lowest point touches the plane.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wordbot/controller.hpp"

namespace wordbot {

inline constexpr double kPi = std::numbers::pi;

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

enum class Integrator { kRk4, kSemiImplicitEuler };

struct SphereParams {
  double radius = 0.25;      // R, m
  double shell_mass = 1.0;   // M, kg
  double shell_inertia = 2.0 / 3.0 * 1.0 * 0.25 * 0.25;  // I_s, thin shell
  double bob_mass = 0.5;     // m, kg
  double arm = 0.15;         // l, m
  double gravity = 9.81;
  double tau_max = 1.0;      // N m
  double rolling_damping = 4.0;  // viscous resistance on xdot, N s/m; 0 is conservative
  Integrator integrator = Integrator::kRk4;
  int substeps = 2;          // integrator steps per control step
};

struct LeggedParams {
  double omega_max = kPi / 2;  // joint slew limit, rad/s
  double joint_limit = kPi / 4;
  double contact_eps = 1e-3;   // m
  // Quadruped: hips at (+-hip_x, +-hip_y); sagittal hip and knee.
  double hip_x = 0.25;
  double hip_y = 0.15;
  double upper_leg = 0.2;
  double lower_leg = 0.2;
  // Minimal robot: two collinear segments and one hinge.
  double segment = 0.2;
};

struct SimParams {
  SphereParams sphere;
  LeggedParams legged;
  double quadruped_length = 0.5;
  double sphere_length = 0.5;
  double minimal_length = 0.4;
};

inline double body_length(MorphologyId id, const SimParams& p = {}) {
  switch (id) {
    case MorphologyId::kQuadruped: return p.quadruped_length;
    case MorphologyId::kMinimal: return p.minimal_length;
    default: return p.sphere_length;
  }
}

// ---------------------------------------------------------------------------
// Sphere

struct SpherePlane {
  double x = 0;       // shell center, m
  double xdot = 0;
  double phi = 0;     // pendulum angle from the downward vertical
  double phidot = 0;
};

namespace detail {

struct SphereDeriv {
  double xdot, xddot, phidot, phiddot;
};

// Solves
//   (M + m + I/R^2) xdd + m l cos(phi) phidd = m l sin(phi) phid^2 - tau/R
//   m l cos(phi) xdd    + m l^2 phidd        = -m g l sin(phi) + tau
inline SphereDeriv sphere_accel(const SpherePlane& s, double tau, const SphereParams& p) {
  const double c = std::cos(s.phi), sn = std::sin(s.phi);
  const double a11 = p.shell_mass + p.bob_mass + p.shell_inertia / (p.radius * p.radius);
  const double a12 = p.bob_mass * p.arm * c;
  const double a22 = p.bob_mass * p.arm * p.arm;
  const double b1 = p.bob_mass * p.arm * sn * s.phidot * s.phidot - tau / p.radius -
                    p.rolling_damping * s.xdot;
  const double b2 = -p.bob_mass * p.gravity * p.arm * sn + tau;
  const double det = a11 * a22 - a12 * a12;
  return {s.xdot, (a22 * b1 - a12 * b2) / det, s.phidot, (a11 * b2 - a12 * b1) / det};
}

}  // namespace detail

inline SpherePlane sphere_step(const SpherePlane& s, double tau, double dt,
                               const SphereParams& p = {}) {
  const int n = std::max(1, p.substeps);
  const double h = dt / n;
  SpherePlane cur = s;
  for (int k = 0; k < n; ++k) {
    if (p.integrator == Integrator::kSemiImplicitEuler) {
      const auto d = detail::sphere_accel(cur, tau, p);
      cur.xdot += h * d.xddot;
      cur.phidot += h * d.phiddot;
      cur.x += h * cur.xdot;
      cur.phi += h * cur.phidot;
      continue;
    }
    auto shifted = [&](const detail::SphereDeriv& d, double f) {
      return SpherePlane{cur.x + f * d.xdot, cur.xdot + f * d.xddot, cur.phi + f * d.phidot,
                         cur.phidot + f * d.phiddot};
    };
    const auto k1 = detail::sphere_accel(cur, tau, p);
    const auto k2 = detail::sphere_accel(shifted(k1, h / 2), tau, p);
    const auto k3 = detail::sphere_accel(shifted(k2, h / 2), tau, p);
    const auto k4 = detail::sphere_accel(shifted(k3, h), tau, p);
    cur.x += h / 6 * (k1.xdot + 2 * k2.xdot + 2 * k3.xdot + k4.xdot);
    cur.xdot += h / 6 * (k1.xddot + 2 * k2.xddot + 2 * k3.xddot + k4.xddot);
    cur.phi += h / 6 * (k1.phidot + 2 * k2.phidot + 2 * k3.phidot + k4.phidot);
    cur.phidot += h / 6 * (k1.phiddot + 2 * k2.phiddot + 2 * k3.phiddot + k4.phiddot);
  }
  return cur;
}

// Kinetic plus potential energy; potential is zero at the pivot height.
inline double sphere_energy(const SpherePlane& s, const SphereParams& p = {}) {
  const double a11 = p.shell_mass + p.bob_mass + p.shell_inertia / (p.radius * p.radius);
  const double ml = p.bob_mass * p.arm;
  const double kinetic = 0.5 * a11 * s.xdot * s.xdot + ml * std::cos(s.phi) * s.xdot * s.phidot +
                         0.5 * ml * p.arm * s.phidot * s.phidot;
  return kinetic - ml * p.gravity * std::cos(s.phi);
}

inline double sphere_rest_energy(const SphereParams& p = {}) {
  return -p.bob_mass * p.gravity * p.arm;
}

// ---------------------------------------------------------------------------
// Anchored-contact legged bodies

struct BodyPose {
  double x = 0, y = 0, z = 0;
  double yaw = 0;
  bool operator==(const BodyPose&) const = default;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

struct Planar {
  double x = 0, y = 0;
};

struct JointState {
  std::vector<double> q;
  std::vector<double> qdot;
};

// New planar pose (x, y, yaw) that keeps anchor points, given in body frame
// before (`before`) and after (`after`) a joint update, as close as possible
// to their world positions. Least squares over rotation and translation
// (2-D orthogonal Procrustes); translation only for a single anchor or when
// the anchors coincide; unchanged pose for no anchors.
inline BodyPose register_anchors(const BodyPose& pose, std::span<const Planar> before,
                                 std::span<const Planar> after) {
  if (before.size() != after.size())
    throw std::invalid_argument("register_anchors: size mismatch");
  const std::size_t n = before.size();
  if (n == 0) return pose;
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  auto rot = [](double cs, double sn, Planar p) {
    return Planar{cs * p.x - sn * p.y, sn * p.x + cs * p.y};
  };
  // World targets and the after-update points in the current orientation.
  std::array<Planar, 16> target_buf, src_buf;
  std::vector<Planar> target_heap, src_heap;
  Planar* target = target_buf.data();
  Planar* src = src_buf.data();
  if (n > target_buf.size()) {
    target_heap.resize(n);
    src_heap.resize(n);
    target = target_heap.data();
    src = src_heap.data();
  }
  Planar ct, cs_;
  for (std::size_t k = 0; k < n; ++k) {
    const Planar w = rot(c, s, before[k]);
    target[k] = {w.x + pose.x, w.y + pose.y};
    src[k] = rot(c, s, after[k]);
    ct.x += target[k].x;
    ct.y += target[k].y;
    cs_.x += src[k].x;
    cs_.y += src[k].y;
  }
  ct.x /= n;
  ct.y /= n;
  cs_.x /= n;
  cs_.y /= n;

  double sum_dot = 0, sum_cross = 0, spread = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Planar a{src[k].x - cs_.x, src[k].y - cs_.y};
    const Planar b{target[k].x - ct.x, target[k].y - ct.y};
    sum_dot += a.x * b.x + a.y * b.y;
    sum_cross += a.x * b.y - a.y * b.x;
    spread += a.x * a.x + a.y * a.y;
  }
  double dpsi = 0;
  if (n > 1 && spread > 1e-18 && (sum_dot != 0 || sum_cross != 0))
    dpsi = std::atan2(sum_cross, sum_dot);
  const double dc = std::cos(dpsi), ds = std::sin(dpsi);
  const Planar rc = rot(dc, ds, cs_);
  BodyPose out = pose;
  out.x = ct.x - rc.x;
  out.y = ct.y - rc.y;
  out.yaw = pose.yaw + dpsi;
  return out;
}

enum class LeggedKind { kQuadruped, kMinimal };

// Contact candidate points in the body frame for joint angles q.
// Quadruped legs (order FL, FR, RL, RR) swing in sagittal planes; q holds
// [hip0, knee0, hip1, knee1, ...]. Candidates: 4 feet then 4 body corners.
// Minimal robot: segment A fixed along -x, segment B hinged at the origin in
// the horizontal plane; candidates are the 4 segment endpoints.
inline std::size_t candidate_points(LeggedKind kind, std::span<const double> q,
                                    const LeggedParams& p, std::span<Vec3> out) {
  if (kind == LeggedKind::kQuadruped) {
    static constexpr std::array<std::array<double, 2>, 4> corner = {
        {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}}};
    for (std::size_t leg = 0; leg < 4; ++leg) {
      const double hx = corner[leg][0] * p.hip_x, hy = corner[leg][1] * p.hip_y;
      const double hip = q[2 * leg], knee = q[2 * leg + 1];
      out[leg] = {hx + p.upper_leg * std::sin(hip) + p.lower_leg * std::sin(hip + knee), hy,
                  -p.upper_leg * std::cos(hip) - p.lower_leg * std::cos(hip + knee)};
      out[4 + leg] = {hx, hy, 0.0};
    }
    return 8;
  }
  out[0] = {-p.segment, 0, 0};
  out[1] = {0, 0, 0};
  out[2] = {0, 0, 0};
  out[3] = {p.segment * std::cos(q[0]), p.segment * std::sin(q[0]), 0};
  return 4;
}

inline std::size_t joint_count(LeggedKind kind) { return kind == LeggedKind::kQuadruped ? 8 : 1; }

struct LeggedState {
  BodyPose pose;
  JointState joints;
  std::vector<bool> contacts;  // per candidate point, after settling
};

namespace detail {

inline void settle(LeggedState& st, std::span<const Vec3> pts, double eps) {
  double lowest = pts[0].z;
  for (const auto& p : pts) lowest = std::min(lowest, p.z);
  st.pose.z = -lowest;
  st.contacts.resize(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) st.contacts[k] = st.pose.z + pts[k].z <= eps;
}

}  // namespace detail

inline LeggedState legged_rest_state(LeggedKind kind, const LeggedParams& p = {}) {
  LeggedState st;
  st.joints.q.assign(joint_count(kind), 0.0);
  st.joints.qdot.assign(joint_count(kind), 0.0);
  std::array<Vec3, 8> pts;
  const auto n = candidate_points(kind, st.joints.q, p, pts);
  detail::settle(st, std::span<const Vec3>(pts.data(), n), p.contact_eps);
  return st;
}

// One kinematic step: slew joints toward motor_targets * joint_limit, hold
// previously grounded points in place, then settle vertically.
inline LeggedState anchored_body_step(LeggedKind kind, const LeggedState& state,
                                      std::span<const double> motor_targets, double dt,
                                      const LeggedParams& p = {}) {
  const std::size_t nj = joint_count(kind);
  if (motor_targets.size() != nj)
    throw std::invalid_argument("anchored_body_step: expected " + std::to_string(nj) + " targets");
  std::array<Vec3, 8> before, after;
  const auto n = candidate_points(kind, state.joints.q, p, before);

  LeggedState next = state;
  const double max_delta = p.omega_max * dt;
  for (std::size_t j = 0; j < nj; ++j) {
    const double target = std::clamp(motor_targets[j], -1.0, 1.0) * p.joint_limit;
    const double delta = std::clamp(target - state.joints.q[j], -max_delta, max_delta);
    next.joints.q[j] = std::clamp(state.joints.q[j] + delta, -p.joint_limit, p.joint_limit);
    next.joints.qdot[j] = (next.joints.q[j] - state.joints.q[j]) / dt;
  }
  candidate_points(kind, next.joints.q, p, after);

  std::array<Planar, 8> anchor_before, anchor_after;
  std::size_t anchors = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (state.pose.z + before[k].z <= p.contact_eps) {
      anchor_before[anchors] = {before[k].x, before[k].y};
      anchor_after[anchors] = {after[k].x, after[k].y};
      ++anchors;
    }
  }
  next.pose = register_anchors(state.pose, std::span<const Planar>(anchor_before.data(), anchors),
                               std::span<const Planar>(anchor_after.data(), anchors));
  detail::settle(next, std::span<const Vec3>(after.data(), n), p.contact_eps);
  return next;
}

// ---------------------------------------------------------------------------
// Closed-loop evaluation

struct Trajectory {
  std::vector<BodyPose> poses;                  // steps + 1
  std::vector<std::vector<double>> joint_log;   // steps + 1 rows
  std::vector<std::vector<double>> sensor_log;  // steps rows
  std::vector<std::vector<double>> motor_log;   // steps rows
  double dt = 0;

  std::size_t steps() const { return poses.empty() ? 0 : poses.size() - 1; }
};

// Owns the physical state of one morphology and maps motors/sensors.
class Body {
 public:
  explicit Body(MorphologyId id, const SimParams& params = {})
      : id_(id), iface_(interface_for(id)), params_(params) {
    if (is_legged()) {
      legged_ = legged_rest_state(legged_kind(), params_.legged);
    } else {
      planes_.assign(iface_.n_motors, SpherePlane{});
    }
  }

  bool is_legged() const {
    return id_ == MorphologyId::kQuadruped || id_ == MorphologyId::kMinimal;
  }
  LeggedKind legged_kind() const {
    return id_ == MorphologyId::kQuadruped ? LeggedKind::kQuadruped : LeggedKind::kMinimal;
  }

  BodyPose pose() const {
    if (is_legged()) return legged_.pose;
    BodyPose p;
    p.x = planes_[0].x;
    p.y = planes_.size() > 1 ? planes_[1].x : 0.0;
    p.z = params_.sphere.radius;
    return p;
  }

  std::vector<double> joints() const {
    if (is_legged()) return legged_.joints.q;
    std::vector<double> q;
    for (const auto& pl : planes_) q.push_back(pl.phi);
    return q;
  }

  std::size_t joint_dim() const { return is_legged() ? joint_count(legged_kind()) : planes_.size(); }

  void read_sensors(std::span<double> out) const {
    switch (id_) {
      case MorphologyId::kQuadruped:
        for (std::size_t leg = 0; leg < 4; ++leg) out[leg] = legged_.contacts[leg] ? 1.0 : 0.0;
        break;
      case MorphologyId::kMinimal:
        out[0] = (legged_.contacts[0] || legged_.contacts[1]) ? 1.0 : 0.0;
        out[1] = (legged_.contacts[2] || legged_.contacts[3]) ? 1.0 : 0.0;
        out[2] = std::clamp(legged_.joints.q[0] / params_.legged.joint_limit, -1.0, 1.0);
        break;
      case MorphologyId::kSphere1dSensors:
      case MorphologyId::kSphere2dSensors:
        for (std::size_t k = 0; k < planes_.size(); ++k)
          out[k] = std::clamp(planes_[k].phi / kPi, -1.0, 1.0);
        break;
      default:
        break;
    }
  }

  void apply(std::span<const double> motors, double dt) {
    if (is_legged()) {
      legged_ = anchored_body_step(legged_kind(), legged_, motors, dt, params_.legged);
    } else {
      for (std::size_t k = 0; k < planes_.size(); ++k)
        planes_[k] = sphere_step(planes_[k], std::clamp(motors[k], -1.0, 1.0) * params_.sphere.tau_max,
                                 dt, params_.sphere);
    }
  }

  bool finite() const {
    const auto p = pose();
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.yaw))
      return false;
    for (const auto& pl : planes_)
      if (!std::isfinite(pl.xdot) || !std::isfinite(pl.phi) || !std::isfinite(pl.phidot)) return false;
    return true;
  }

  const LeggedState& legged_state() const { return legged_; }
  std::span<const SpherePlane> sphere_planes() const { return planes_; }

 private:
  MorphologyId id_;
  MorphologyInterface iface_;
  SimParams params_;
  LeggedState legged_;
  std::vector<SpherePlane> planes_;
};

inline constexpr std::size_t kDefaultSteps = 500;
inline constexpr double kDefaultDt = 0.05;

// kPosesOnly skips the joint, sensor and motor logs; poses are identical.
enum class Logging { kFull, kPosesOnly };

// Sensors are read from the current physical state, the controller advances
// one update, and the motors drive the body for dt.
inline Trajectory evaluate(const MorphologyInterface& iface, const Genome& g, HiddenState h,
                           std::size_t steps = kDefaultSteps, double dt = kDefaultDt,
                           const SimParams& params = {}, Logging logging = Logging::kFull) {
  if (steps < 1) throw std::invalid_argument("evaluate: steps must be >= 1");
  if (!(dt > 0)) throw std::invalid_argument("evaluate: dt must be > 0");
  if (g.sensors() != iface.n_sensors || g.motors() != iface.n_motors)
    throw std::invalid_argument("evaluate: genome does not match morphology '" +
                                std::string(to_string(iface.id)) + "'");
  Body body(iface.id, params);
  Trajectory t;
  t.dt = dt;
  const bool full = logging == Logging::kFull;
  t.poses.reserve(steps + 1);
  t.poses.push_back(body.pose());
  if (full) {
    t.joint_log.reserve(steps + 1);
    t.sensor_log.reserve(steps);
    t.motor_log.reserve(steps);
    t.joint_log.push_back(body.joints());
  }
  std::vector<double> sensors(iface.n_sensors), motors(iface.n_motors);
  for (std::size_t k = 0; k < steps; ++k) {
    body.read_sensors(sensors);
    step(g, h, sensors, motors);
    body.apply(motors, dt);
    if (!body.finite()) throw SimulationError("non-finite body state", k);
    t.poses.push_back(body.pose());
    if (full) {
      t.sensor_log.push_back(sensors);
      t.motor_log.push_back(motors);
      t.joint_log.push_back(body.joints());
    }
  }
  return t;
}

struct Displacement {
  double dx = 0;
  double dist_from_origin = 0;
  double path_length = 0;
  // Same quantities divided by the body length.
  double dx_bl = 0;
  double dist_bl = 0;
  double path_bl = 0;
};

inline Displacement displacement_metrics(const Trajectory& t, double body_length_m) {
  Displacement d;
  if (t.poses.empty()) return d;
  const auto& first = t.poses.front();
  const auto& last = t.poses.back();
  d.dx = last.x - first.x;
  d.dist_from_origin = std::hypot(last.x - first.x, last.y - first.y);
  for (std::size_t k = 1; k < t.poses.size(); ++k)
    d.path_length += std::hypot(t.poses[k].x - t.poses[k - 1].x, t.poses[k].y - t.poses[k - 1].y);
  d.dx_bl = d.dx / body_length_m;
  d.dist_bl = d.dist_from_origin / body_length_m;
  d.path_bl = d.path_length / body_length_m;
  return d;
}

// CSV: step,t,x,y,z,yaw,q...,s...,m... with one row per step; row k holds
// the pose and joints after step k and the sensors/motors used during it.
inline std::string trajectory_csv(const Trajectory& t) {
  const std::size_t nq = t.joint_log.empty() ? 0 : t.joint_log.front().size();
  const std::size_t ns = t.sensor_log.empty() ? 0 : t.sensor_log.front().size();
  const std::size_t nm = t.motor_log.empty() ? 0 : t.motor_log.front().size();
  std::string out = "step,t,x,y,z,yaw";
  for (std::size_t i = 0; i < nq; ++i) out += ",q" + std::to_string(i);
  for (std::size_t i = 0; i < ns; ++i) out += ",s" + std::to_string(i);
  for (std::size_t i = 0; i < nm; ++i) out += ",m" + std::to_string(i);
  out += "\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += ',';
    out += buf;
  };
  for (std::size_t k = 1; k <= t.steps(); ++k) {
    out += std::to_string(k);
    num(static_cast<double>(k) * t.dt);
    const auto& p = t.poses[k];
    num(p.x);
    num(p.y);
    num(p.z);
    num(p.yaw);
    for (double v : t.joint_log[k]) num(v);
    for (double v : t.sensor_log[k - 1]) num(v);
    for (double v : t.motor_log[k - 1]) num(v);
    out += "\n";
  }
  return out;
}

}  // namespace wordbot
