// Copyright 2026 The AutoOdom Authors
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

#include "autoodom/synthgym.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace autoodom {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-joint coupling of the body twist (v_x, v_y, w_z) and of planar speed
// into the joint's swing amplitude. Two mirrored 6-joint legs: hip yaw, hip
// roll, hip pitch, knee, ankle pitch, ankle roll.
struct JointCoupling {
  double vx;
  double vy;
  double wz;
  double speed;
};

constexpr std::array<JointCoupling, 6> kLegCoupling = {{
    {0.0, 0.0, 0.5, 0.0},  // hip yaw
    {0.0, 1.0, 0.0, 0.0},  // hip roll
    {1.0, 0.0, 0.0, 0.0},  // hip pitch
    {0.0, 0.0, 0.0, 1.0},  // knee
    {0.7, 0.0, 0.0, 0.0},  // ankle pitch
    {0.0, 0.7, 0.0, 0.0},  // ankle roll
}};

// Sway reaches full amplitude at this planar speed.
constexpr double kSwayFullSpeed = 0.5;

std::uint64_t noise_stream_seed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

// Body-frame displacement of a constant twist held for dt.
Eigen::Vector2d se2_exp_translation(double vx, double vy, double wz,
                                    double dt) {
  const double th = wz * dt;
  if (std::abs(th) < 1e-9) {
    // second-order series keeps the small-angle branch continuous
    return {(vx - 0.5 * th * vy) * dt, (vy + 0.5 * th * vx) * dt};
  }
  const double s = std::sin(th) / th;
  const double c = (1.0 - std::cos(th)) / th;
  return {(s * vx - c * vy) * dt, (c * vx + s * vy) * dt};
}

double joint_drive(const JointCoupling& k, const Eigen::Vector3d& v) {
  return k.vx * v.x() + k.vy * v.y() + k.wz * v.z() +
         k.speed * std::hypot(v.x(), v.y());
}

}  // namespace

GaitSpec GaitSpec::defaults() {
  GaitSpec g;
  constexpr std::array<double, 6> kAmp = {0.3, 0.35, 0.45, 0.6, 0.3, 0.2};
  constexpr std::array<double, 6> kPhase = {0.0, 0.0, 0.0, 0.6, -0.4, 0.3};
  for (int leg = 0; leg < 2; ++leg) {
    for (int j = 0; j < 6; ++j) {
      g.joint_amp[leg * 6 + j] = kAmp[j];
      g.joint_phase[leg * 6 + j] = kPhase[j] + (leg == 1 ? kPi : 0.0);
    }
  }
  return g;
}

void GaitSpec::validate() const {
  if (!(gait_freq_hz > 0.0)) throw std::invalid_argument("gait_freq must be > 0");
  if (!(vel_tracking_tau_s > 0.0)) {
    throw std::invalid_argument("vel_tracking_tau must be > 0");
  }
  if (!std::isfinite(body_sway_amp)) {
    throw std::invalid_argument("body_sway_amp must be finite");
  }
}

NoiseSpec NoiseSpec::real_like_defaults() {
  NoiseSpec n;
  n.gyro_std = 0.02;
  n.accel_std = 0.15;
  n.accel_bias_walk_std = 0.02;
  n.joint_std = 0.01;
  n.dp_feedback_std = 0.05;
  return n;
}

void NoiseSpec::validate() const {
  for (double v : {gyro_std, accel_std, accel_bias_walk_std, joint_std,
                   dp_feedback_std}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("noise parameters must be finite and >= 0");
    }
  }
}

std::vector<Eigen::Vector3d> sample_command_profile(std::uint64_t seed,
                                                    double duration_s,
                                                    double rate_hz) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");
  if (!(rate_hz > 0.0)) throw std::invalid_argument("rate must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> seg_len(1.0, 4.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Eigen::Vector3d> out;
  out.reserve(n);
  while (out.size() < n) {
    const auto len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(seg_len(rng) * rate_hz)));
    Eigen::Vector3d cmd(kMaxCmdVx * unit(rng), kMaxCmdVy * unit(rng),
                        kMaxCmdWz * unit(rng));
    // Mostly forward walking; occasional standing and pure turns.
    const double mode = coin(rng);
    if (mode < 0.1) {
      cmd.setZero();
    } else if (mode < 0.2) {
      cmd.head<2>().setZero();
    } else if (mode < 0.6) {
      cmd.x() = std::abs(cmd.x());
    }
    for (std::size_t i = 0; i < len && out.size() < n; ++i) out.push_back(cmd);
  }
  return out;
}

Trajectory generate_from_commands(const std::vector<Eigen::Vector3d>& commands,
                                  std::uint64_t seed, const GaitSpec& gait,
                                  const NoiseSpec& noise, Source flavor,
                                  double rate_hz,
                                  std::optional<double> start_yaw) {
  gait.validate();
  noise.validate();
  if (!(rate_hz > 0.0)) throw std::invalid_argument("rate must be > 0");
  const std::size_t n = commands.size();
  if (n < 2) throw std::invalid_argument("need at least two commands");
  const double dt = 1.0 / rate_hz;
  const double tau = gait.vel_tracking_tau_s;
  const double decay = std::exp(-dt / tau);
  // mean of the first-order response over one step, relative to its start
  const double mean_factor = tau * (1.0 - decay) / dt;

  std::mt19937_64 kin_rng(seed + 0x5bd1e995ULL);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  const double yaw0 = start_yaw ? *start_yaw : heading(kin_rng);

  // Kinematic states for frames 0..n (one extra for look-ahead channels).
  std::vector<Eigen::Vector3d> twist(n + 1);      // tracked (v_x, v_y, w_z)
  std::vector<double> phase(n + 1);
  std::vector<double> sway(n + 1);
  std::vector<Pose2D> pose(n + 1);
  twist[0].setZero();
  phase[0] = 0.0;
  pose[0] = Pose2D::make(0.0, 0.0, yaw0);
  const double dphase = 2.0 * kPi * gait.gait_freq_hz * dt;
  for (std::size_t k = 0; k <= n; ++k) {
    const double speed = twist[k].head<2>().norm();
    sway[k] = gait.body_sway_amp * std::min(1.0, speed / kSwayFullSpeed) *
              std::sin(phase[k]);
    if (k == n) break;
    const Eigen::Vector3d& cmd = commands[k];
    const Eigen::Vector3d mean = cmd + (twist[k] - cmd) * mean_factor;
    const Eigen::Vector2d step =
        se2_exp_translation(mean.x(), mean.y() + sway[k], mean.z(), dt);
    const Eigen::Vector2d p = pose[k].position() + pose[k].rotation() * step;
    pose[k + 1] = Pose2D::make(p.x(), p.y(), pose[k].yaw + mean.z() * dt);
    twist[k + 1] = cmd + (twist[k] - cmd) * decay;
    phase[k + 1] = phase[k] + dphase;
  }

  // Clean joint positions for frames 0..n.
  std::vector<std::array<double, kNumJoints>> q(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    for (int j = 0; j < kNumJoints; ++j) {
      const double drive = joint_drive(kLegCoupling[j % 6], twist[k]);
      q[k][j] = gait.joint_amp[j] * drive *
                std::sin(phase[k] + gait.joint_phase[j]);
    }
  }

  // World-frame body velocity, differentiated for the accelerometer.
  std::vector<Eigen::Vector2d> world_vel(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    world_vel[k] = pose[k].rotation() *
                   Eigen::Vector2d(twist[k].x(), twist[k].y() + sway[k]);
  }

  std::mt19937_64 noise_rng(noise_stream_seed(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool noisy = flavor == Source::kRealLike;
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  const double bias_step = noise.accel_bias_walk_std * std::sqrt(dt);

  Trajectory traj;
  traj.rate_hz = rate_hz;
  traj.meta = TrajectoryMeta{seed, static_cast<double>(n) * dt, flavor};
  traj.frames.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ObservationFrame& f = traj.frames[k];
    f.cmd_vel = {commands[k].x(), commands[k].y(), commands[k].z()};
    f.gyro = {0.0, 0.0, twist[k].z()};
    f.rot = yaw_to_rot(pose[k].yaw);
    f.gt_pose = pose[k];

    const std::size_t prev = k == 0 ? 0 : k - 1;
    const Eigen::Vector2d world_acc =
        (world_vel[k + 1] - world_vel[prev]) / (static_cast<double>(k + 1 - prev) * dt);
    const Eigen::Vector2d body_acc = pose[k].rotation().transpose() * world_acc;
    f.accel = {body_acc.x(), body_acc.y(), kGravity};

    for (int j = 0; j < kNumJoints; ++j) {
      f.joint_pos[j] = q[k][j];
      f.joint_vel[j] = (q[k + 1][j] - q[prev][j]) /
                       (static_cast<double>(k + 1 - prev) * dt);
    }
    for (int j = 0; j < kNumActions; ++j) f.actions[j] = q[k + 1][j];

    if (noisy) {
      for (double& g : f.gyro) g += noise.gyro_std * normal(noise_rng);
      for (int i = 0; i < 3; ++i) {
        accel_bias[i] += bias_step * normal(noise_rng);
        f.accel[i] += accel_bias[i] + noise.accel_std * normal(noise_rng);
      }
      for (double& v : f.joint_pos) v += noise.joint_std * normal(noise_rng);
      for (double& v : f.joint_vel) v += noise.joint_std * normal(noise_rng);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d dp = dp_history(traj, k, kDpHistoryLag);
    auto& out = traj.frames[k].dp_hist;
    out = {dp.x(), dp.y()};
    if (noisy) {
      for (double& v : out) v += noise.dp_feedback_std * normal(noise_rng);
    }
  }
  return traj;
}

Trajectory generate_trajectory(std::uint64_t seed, double duration_s,
                               const GaitSpec& gait, const NoiseSpec& noise,
                               Source flavor, double rate_hz) {
  if (!(duration_s >= 2.0)) {
    throw std::invalid_argument("trajectory duration must be >= 2 s");
  }
  return generate_from_commands(
      sample_command_profile(seed, duration_s, rate_hz), seed, gait, noise,
      flavor, rate_hz);
}

Eigen::Vector2d gt_increment(const Trajectory& traj, std::size_t t,
                             std::size_t horizon) {
  if (t + horizon >= traj.size()) {
    throw std::out_of_range("increment [" + std::to_string(t) + ", " +
                            std::to_string(t + horizon) + "] past " +
                            std::to_string(traj.size()) + " frames");
  }
  const auto& a = traj.frames[t].gt_pose;
  const auto& b = traj.frames[t + horizon].gt_pose;
  if (!a || !b) throw std::invalid_argument("trajectory lacks ground truth");
  return yaw_rotation(traj.frames[t].yaw()).transpose() *
         (b->position() - a->position());
}

std::vector<Trajectory> generate_dataset(std::uint64_t base_seed,
                                         std::size_t count, double duration_s,
                                         const GaitSpec& gait,
                                         const NoiseSpec& noise,
                                         Source flavor) {
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(
        generate_trajectory(base_seed + i, duration_s, gait, noise, flavor));
  }
  return out;
}

}  // namespace autoodom
