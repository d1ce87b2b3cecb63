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

// Two-stage odometry training.
//
// Stage 1 regresses body-frame increments from windows whose displacement
// history comes from ground truth (teacher forcing). The trained input layer
// is then widened with zero-valued accelerometer columns, and stage 2
// fine-tunes on autoregressive rollouts: the displacement history fed to the
// network at each step is recomputed from the network's own integrated
// position estimates. Fed-back values are treated as constants when
// differentiating the loss.

#ifndef AUTOODOM_TRAIN_HPP_
#define AUTOODOM_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "autoodom/datamodel.hpp"
#include "autoodom/eval.hpp"
#include "autoodom/net.hpp"

namespace autoodom {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 256;
  double learning_rate = 1e-3;
  // Cosine decay from learning_rate to learning_rate * final_lr_fraction.
  double final_lr_fraction = 0.1;
  int history_len = 50;
  int horizon = 1;
  std::uint64_t seed = 1;
  std::string stage = "stage1";
  bool use_accel = false;
  bool use_dp_hist = true;
  bool use_actions = true;
  std::vector<int> hidden = {512, 256, 128};
  // Stage 2: frames per unrolled segment and segments per update.
  int segment_len = 250;
  int segments_per_batch = 4;

  SensorLayout layout() const;
  std::vector<int> layer_sizes() const;
  void validate() const;
  // Stable key=value rendering of every field.
  std::string canonical() const;
  // 16 hex digits, FNV-1a of canonical().
  std::string digest() const;
};

struct Checkpoint {
  Mlp model;
  SensorLayout layout;
  std::string stage;
  std::string config_digest;
  std::vector<double> loss_history;
  std::optional<double> holdout_ate_o;

  // Throws std::invalid_argument if the network input width is not
  // layout.window_dim().
  void validate() const;
};

NormStats compute_norm_stats(std::span<const Trajectory> dataset,
                             const SensorLayout& layout);

// Freshly initialized network with data normalization; no training steps.
Checkpoint untrained_checkpoint(std::span<const Trajectory> dataset,
                                const TrainConfig& config);

// Teacher-forced regression on any layout (used directly by ablations).
Checkpoint train_teacher_forced(std::span<const Trajectory> dataset,
                                const TrainConfig& config);

// Teacher-forced pre-training on "sim" data without the accelerometer.
Checkpoint train_stage1(std::span<const Trajectory> dataset_sim,
                        const TrainConfig& config);

// Widens the input layer for `new_layout` (the old layout plus accel).
// Accel statistics come from `stage2_data`; identity if it is empty.
Checkpoint zero_pad_transfer(const Checkpoint& stage1,
                             const SensorLayout& new_layout,
                             std::span<const Trajectory> stage2_data);

// Maps (window end frame, flattened window) to a body-frame increment over
// the layout's horizon.
using Predictor =
    std::function<Eigen::Vector2d(std::size_t, std::span<const double>)>;

Predictor model_predictor(const Checkpoint& ckpt);

struct RolloutOptions {
  std::size_t begin = 0;
  std::size_t end = std::numeric_limits<std::size_t>::max();  // exclusive
};

struct RolloutResult {
  // Anchor frames begin, begin + h, ... and the estimates there.
  std::vector<std::size_t> frames;
  std::vector<Eigen::Vector2d> positions;
  // Body-frame increment predicted at each anchor but the last.
  std::vector<Eigen::Vector2d> increments;
  // Positions at every frame in [0, last anchor]; frames between anchors are
  // linearly interpolated, frames before `begin` hold the seeded history.
  std::vector<Eigen::Vector2d> dense_positions;
};

// Dead-reckons `traj` with `predict`. The dp_hist channel of every window is
// rebuilt from the estimated positions; sensor channels and headings come
// from the trajectory. Windows that reach before frame 0 repeat frame 0.
// History before `begin` is the trajectory's ground truth translated onto
// `start` when available, otherwise `start` itself.
RolloutResult rollout(const Predictor& predict, const SensorLayout& layout,
                      const Trajectory& traj, const Eigen::Vector2d& start,
                      const RolloutOptions& options = {});

RolloutResult rollout(const Checkpoint& ckpt, const Trajectory& traj,
                      const Pose2D& start);

// Metrics of a rollout against the trajectory's ground truth at the anchor
// frames. Predicted headings are the recorded headings.
EvalReport evaluate_rollout(const Trajectory& traj, const RolloutResult& result);

Checkpoint train_stage2(std::span<const Trajectory> dataset_real_like,
                        const Checkpoint& transferred, const TrainConfig& config,
                        std::span<const Trajectory> holdout = {});

// RPE of ground-truth-fed windows against gt_increment over the horizon.
double teacher_forced_rpe(const Checkpoint& ckpt,
                          std::span<const Trajectory> dataset);

// Same windows, predicting increments from the commanded velocity.
double baseline_teacher_forced_rpe(std::span<const Trajectory> dataset,
                                   int horizon = 1);

// Mean of rollout ATE_o over trajectories, each started at its true pose.
double mean_rollout_ate_o(const Checkpoint& ckpt,
                          std::span<const Trajectory> dataset);

}  // namespace autoodom

#endif  // AUTOODOM_TRAIN_HPP_
