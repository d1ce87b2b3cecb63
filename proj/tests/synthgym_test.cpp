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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "autoodom/eval.hpp"
#include "autoodom/io.hpp"
#include "autoodom/synthgym.hpp"
#include "test_util.hpp"

namespace autoodom {
namespace {

using testing::constant_commands;
using testing::swayless_gait;
constexpr double kPi = std::numbers::pi;

TEST(CommandProfile, DeterministicAndSized) {
  const auto a = sample_command_profile(42, 20.0, 50.0);
  const auto b = sample_command_profile(42, 20.0, 50.0);
  ASSERT_EQ(a.size(), 1000u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample_command_profile(43, 20.0, 50.0));
  EXPECT_EQ(sample_command_profile(1, 2.5, 50.0).size(), 125u);
}

TEST(CommandProfile, BoundsAndSegmentLengths) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cmds = sample_command_profile(seed, 30.0, 50.0);
    for (const auto& c : cmds) {
      ASSERT_LE(std::abs(c.x()), kMaxCmdVx);
      ASSERT_LE(std::abs(c.y()), kMaxCmdVy);
      ASSERT_LE(std::abs(c.z()), kMaxCmdWz);
    }
    // Runs of equal commands: at least 1 s except the final, clipped one,
    // and at most 4 s unless two standing segments happen to meet.
    std::size_t start = 0;
    for (std::size_t k = 1; k <= cmds.size(); ++k) {
      if (k < cmds.size() && cmds[k] == cmds[start]) continue;
      const std::size_t len = k - start;
      if (k < cmds.size()) EXPECT_GE(len, 50u);
      if (!cmds[start].isZero()) EXPECT_LE(len, 200u);
      start = k;
    }
  }
}

TEST(Generate, StationaryWithoutCommands) {
  const Trajectory traj = generate_from_commands(
      constant_commands(300, 0.0, 0.0, 0.0), 9, GaitSpec::defaults(),
      NoiseSpec::none(), Source::kSim);
  const Pose2D p0 = *traj.frames.front().gt_pose;
  for (const auto& f : traj.frames) {
    EXPECT_EQ(f.gt_pose->x, p0.x);
    EXPECT_EQ(f.gt_pose->y, p0.y);
    EXPECT_EQ(f.gt_pose->yaw, p0.yaw);
    EXPECT_EQ(f.gyro, (std::array<double, 3>{0.0, 0.0, 0.0}));
    EXPECT_EQ(f.dp_hist, (std::array<double, 2>{0.0, 0.0}));
  }
}

TEST(Generate, FirstOrderTrackingResponse) {
  // From rest, x(t) = v (t - tau (1 - exp(-t / tau))).
  const double v = 0.5;
  GaitSpec gait = swayless_gait();
  for (double tau : {0.1, 0.25, 0.6}) {
    gait.vel_tracking_tau_s = tau;
    const Trajectory traj = generate_from_commands(
        constant_commands(500, v, 0.0, 0.0), 1, gait, NoiseSpec::none(),
        Source::kSim, 50.0, 0.0);
    for (std::size_t k = 0; k < traj.size(); k += 7) {
      const double t = 0.02 * static_cast<double>(k);
      const double expected = v * (t - tau * (1.0 - std::exp(-t / tau)));
      EXPECT_NEAR(traj.frames[k].gt_pose->x, expected, 1e-9) << k;
      EXPECT_NEAR(traj.frames[k].gt_pose->y, 0.0, 1e-12);
    }
  }
}

TEST(Generate, ConstantTurnTracesCircle) {
  const double v = 0.5;
  const double w = kPi / 10.0;
  const Trajectory traj = generate_from_commands(
      constant_commands(1000, v, 0.0, w), 2, swayless_gait(), NoiseSpec::none(),
      Source::kSim, 50.0, 0.4);
  const double radius = v / w;
  EXPECT_NEAR(radius, 1.5915494309, 1e-9);
  const Pose2D& p0 = *traj.frames.front().gt_pose;
  const Eigen::Vector2d centre =
      p0.position() + p0.rotation() * Eigen::Vector2d(0.0, radius);
  for (const auto& f : traj.frames) {
    EXPECT_NEAR((f.gt_pose->position() - centre).norm(), radius, 1e-6);
  }
}

TEST(Generate, FrameCountAndMetadata) {
  const Trajectory traj = generate_trajectory(77, 20.0, GaitSpec::defaults(),
                                              NoiseSpec::none(), Source::kSim);
  EXPECT_EQ(traj.size(), 1000u);
  EXPECT_EQ(traj.rate_hz, 50.0);
  EXPECT_EQ(traj.meta.seed, 77u);
  EXPECT_DOUBLE_EQ(traj.meta.duration_s, 20.0);
  EXPECT_EQ(traj.meta.source, Source::kSim);
  EXPECT_TRUE(traj.has_ground_truth());
}

TEST(Generate, RejectsInvalidSpecs) {
  GaitSpec g = GaitSpec::defaults();
  g.gait_freq_hz = 0.0;
  EXPECT_THROW(generate_trajectory(1, 5.0, g, NoiseSpec::none(), Source::kSim),
               std::invalid_argument);
  g = GaitSpec::defaults();
  g.vel_tracking_tau_s = -1.0;
  EXPECT_THROW(generate_trajectory(1, 5.0, g, NoiseSpec::none(), Source::kSim),
               std::invalid_argument);
  NoiseSpec n;
  n.joint_std = -0.1;
  EXPECT_THROW(generate_trajectory(1, 5.0, GaitSpec::defaults(), n, Source::kRealLike),
               std::invalid_argument);
  EXPECT_THROW(generate_trajectory(1, 1.5, GaitSpec::defaults(), NoiseSpec::none(),
                                   Source::kSim),
               std::invalid_argument);
}

TEST(Generate, SimChannelsFollowTheKinematics) {
  const Trajectory traj = generate_from_commands(
      constant_commands(600, 0.4, 0.0, 0.3), 3, GaitSpec::defaults(),
      NoiseSpec::none(), Source::kSim);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& f = traj.frames[k];
    EXPECT_EQ(f.gyro[0], 0.0);
    EXPECT_EQ(f.gyro[1], 0.0);
    EXPECT_EQ(f.accel[2], kGravity);
    const Eigen::Vector2d dp = dp_history(traj, k, kDpHistoryLag);
    EXPECT_EQ(f.dp_hist[0], dp.x());
    EXPECT_EQ(f.dp_hist[1], dp.y());
    if (k + 1 < traj.size()) {
      // Actions lead the joint positions by one control step.
      for (int j = 0; j < kNumActions; ++j) {
        EXPECT_EQ(f.actions[j], traj.frames[k + 1].joint_pos[j]);
      }
    }
  }
  // Settled turn rate.
  EXPECT_NEAR(traj.frames.back().gyro[2], 0.3, 1e-12);
}

TEST(GtIncrement, ExamplesAndRange) {
  const Trajectory still = generate_from_commands(
      constant_commands(100, 0.0, 0.0, 0.0), 4, GaitSpec::defaults(),
      NoiseSpec::none(), Source::kSim);
  EXPECT_EQ(gt_increment(still, 10, 1), Eigen::Vector2d::Zero());

  const Trajectory walk = generate_from_commands(
      constant_commands(1000, 0.5, 0.0, 0.0), 4, swayless_gait(), NoiseSpec::none(),
      Source::kSim, 50.0, 0.0);
  const Eigen::Vector2d step = gt_increment(walk, 800, 1);
  EXPECT_NEAR(step.x(), 0.01, 1e-12);
  EXPECT_NEAR(step.y(), 0.0, 1e-12);
  // Horizon 51 spans 1.02 s.
  const Eigen::Vector2d long_step = gt_increment(walk, 800, 51);
  EXPECT_NEAR(long_step.x(), 0.5 * 1.02, 1e-12);

  EXPECT_THROW(gt_increment(walk, 999, 1), std::out_of_range);
  EXPECT_THROW(gt_increment(walk, 949, 51), std::out_of_range);
  EXPECT_NO_THROW(gt_increment(walk, 948, 51));
}

TEST(GtIncrement, IntegrationRoundTrip) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const Trajectory traj = generate_trajectory(seed, 20.0, GaitSpec::defaults(),
                                                NoiseSpec::none(), Source::kSim);
    std::vector<Eigen::Vector2d> inc;
    std::vector<double> yaws;
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      inc.push_back(gt_increment(traj, t, 1));
      yaws.push_back(traj.frames[t].yaw());
    }
    const auto pos = integrate_increments(inc, yaws, *traj.frames.front().gt_pose);
    const auto gt = traj.gt_positions();
    ASSERT_EQ(pos.size(), gt.size());
    for (std::size_t k = 0; k < gt.size(); ++k) EXPECT_LT((pos[k] - gt[k]).norm(), 1e-9);
  }
}

TEST(Flavors, ShareGroundTruth) {
  const Trajectory sim = generate_trajectory(31, 10.0, GaitSpec::defaults(),
                                             NoiseSpec::real_like_defaults(),
                                             Source::kSim);
  const Trajectory real = generate_trajectory(31, 10.0, GaitSpec::defaults(),
                                              NoiseSpec::real_like_defaults(),
                                              Source::kRealLike);
  ASSERT_EQ(sim.size(), real.size());
  bool sensors_differ = false;
  for (std::size_t k = 0; k < sim.size(); ++k) {
    EXPECT_EQ(sim.frames[k].gt_pose->x, real.frames[k].gt_pose->x);
    EXPECT_EQ(sim.frames[k].gt_pose->y, real.frames[k].gt_pose->y);
    EXPECT_EQ(sim.frames[k].gt_pose->yaw, real.frames[k].gt_pose->yaw);
    EXPECT_EQ(sim.frames[k].cmd_vel, real.frames[k].cmd_vel);
    sensors_differ |= sim.frames[k].gyro != real.frames[k].gyro;
  }
  EXPECT_TRUE(sensors_differ);
  // Noise settings are ignored for the sim flavour.
  EXPECT_EQ(format_trajectory(sim),
            format_trajectory(generate_trajectory(31, 10.0, GaitSpec::defaults(),
                                                  NoiseSpec::none(), Source::kSim)));
}

TEST(Flavors, RealLikeAccelOffsetMatchesBiasWalk) {
  const NoiseSpec noise = NoiseSpec::real_like_defaults();
  const double duration = 10.0;
  const int seeds = 100;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::size_t last = 0;
  for (int s = 0; s < seeds; ++s) {
    const Trajectory sim = generate_trajectory(500 + s, duration, GaitSpec::defaults(),
                                               noise, Source::kSim);
    const Trajectory real = generate_trajectory(500 + s, duration, GaitSpec::defaults(),
                                                noise, Source::kRealLike);
    last = sim.size() - 1;
    for (int i = 0; i < 3; ++i) sum[i] += real.frames[last].accel[i] - sim.frames[last].accel[i];
  }
  // At the last frame the offset is a bias walk of (last + 1) steps plus
  // white noise.
  const double walk_var = noise.accel_bias_walk_std * noise.accel_bias_walk_std *
                          0.02 * static_cast<double>(last + 1);
  const double sigma =
      std::sqrt((walk_var + noise.accel_std * noise.accel_std) / seeds);
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(sum[i] / seeds), 3.0 * sigma) << i;
}

TEST(Generate, ByteIdenticalForSameInputs) {
  for (Source flavor : {Source::kSim, Source::kRealLike}) {
    const auto a = generate_trajectory(8, 6.0, GaitSpec::defaults(),
                                       NoiseSpec::real_like_defaults(), flavor);
    const auto b = generate_trajectory(8, 6.0, GaitSpec::defaults(),
                                       NoiseSpec::real_like_defaults(), flavor);
    EXPECT_EQ(format_trajectory(a), format_trajectory(b));
  }
}

TEST(Generate, DatasetSeedsAreConsecutive) {
  const auto data = generate_dataset(10, 3, 2.0, GaitSpec::defaults(),
                                     NoiseSpec::none(), Source::kSim);
  ASSERT_EQ(data.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(data[i].meta.seed, 10 + i);
}

}  // namespace
}  // namespace autoodom
