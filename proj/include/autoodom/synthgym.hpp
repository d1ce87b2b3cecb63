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

// Kinematic legged-locomotion data generator.
//
// The body follows a unicycle with first-order tracking of piecewise-constant
// velocity commands. Joint channels are gait-phase sinusoids whose
// amplitudes are driven by the tracked body velocity, so the proprioceptive
// channels jointly determine the ground-truth displacement. Poses are
// integrated exactly over each 20 ms step (SE(2) exponential of the mean
// step twist), which makes constant-curvature commands trace exact circles.

#ifndef AUTOODOM_SYNTHGYM_HPP_
#define AUTOODOM_SYNTHGYM_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "autoodom/datamodel.hpp"

namespace autoodom {

inline constexpr double kGravity = 9.81;

inline constexpr double kMaxCmdVx = 1.0;
inline constexpr double kMaxCmdVy = 0.5;
inline constexpr double kMaxCmdWz = 1.0;

struct GaitSpec {
  double gait_freq_hz = 1.8;
  // rad of joint swing per unit of joint drive (m/s or rad/s)
  std::array<double, kNumJoints> joint_amp{};
  std::array<double, kNumJoints> joint_phase{};
  double vel_tracking_tau_s = 0.25;
  // m/s of lateral sway at full walking speed
  double body_sway_amp = 0.03;

  static GaitSpec defaults();
  void validate() const;
};

struct NoiseSpec {
  double gyro_std = 0.0;             // rad/s
  double accel_std = 0.0;            // m/s^2
  double accel_bias_walk_std = 0.0;  // m/s^2 / sqrt(s)
  double joint_std = 0.0;            // rad (and rad/s on joint_vel)
  double dp_feedback_std = 0.0;      // m

  static NoiseSpec none() { return {}; }
  static NoiseSpec real_like_defaults();
  void validate() const;
};

// Piecewise-constant [v_x, v_y, w_z] with 1-4 s segments. Returns
// round(duration * rate) samples.
std::vector<Eigen::Vector3d> sample_command_profile(std::uint64_t seed,
                                                    double duration_s,
                                                    double rate_hz);

Trajectory generate_trajectory(std::uint64_t seed, double duration_s,
                               const GaitSpec& gait, const NoiseSpec& noise,
                               Source flavor,
                               double rate_hz = kDefaultRateHz);

// Same kinematics driven by an explicit command sequence (one per frame).
// The start heading is drawn from `seed`; pass start_yaw to pin it.
Trajectory generate_from_commands(const std::vector<Eigen::Vector3d>& commands,
                                  std::uint64_t seed, const GaitSpec& gait,
                                  const NoiseSpec& noise, Source flavor,
                                  double rate_hz = kDefaultRateHz,
                                  std::optional<double> start_yaw = {});

// Body-frame (at t) ground-truth displacement from t to t + horizon.
Eigen::Vector2d gt_increment(const Trajectory& traj, std::size_t t,
                             std::size_t horizon);

// Batch helper: trajectories seeded base_seed, base_seed + 1, ...
std::vector<Trajectory> generate_dataset(std::uint64_t base_seed,
                                         std::size_t count, double duration_s,
                                         const GaitSpec& gait,
                                         const NoiseSpec& noise, Source flavor);

}  // namespace autoodom

#endif  // AUTOODOM_SYNTHGYM_HPP_
