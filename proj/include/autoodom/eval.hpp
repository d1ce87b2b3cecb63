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

// Planar trajectory metrics: dead reckoning, RPE and ATE under first-frame
// or optimal rigid (Umeyama, no scale) alignment.

#ifndef AUTOODOM_EVAL_HPP_
#define AUTOODOM_EVAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "autoodom/datamodel.hpp"

namespace autoodom {

// x -> rotation * x + translation, a proper rigid motion in SE(2).
struct AlignmentTransform {
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const {
    return rotation * p + translation;
  }
  double angle() const;
};

struct AteResult {
  double ate = 0.0;
  AlignmentTransform transform;
};

struct EvalReport {
  double ate_o = 0.0;
  double ate_u = 0.0;
  double rpe = 0.0;
  AlignmentTransform first_frame_alignment;
  AlignmentTransform umeyama_alignment;
  std::size_t length = 0;
  double duration_s = 0.0;
};

// Returns n + 1 positions: p_0 = start, p_{k+1} = p_k + Yaw(yaw_k) dp_k.
std::vector<Eigen::Vector2d> integrate_increments(
    std::span<const Eigen::Vector2d> increments, std::span<const double> yaws,
    const Pose2D& start);

double rpe(std::span<const Eigen::Vector2d> gt_increments,
           std::span<const Eigen::Vector2d> pred_increments);

// RMSE of position residuals after mapping pred's first pose onto gt's.
AteResult ate_first_frame(std::span<const Pose2D> gt_poses,
                          std::span<const Pose2D> pred_poses);

// Rigid transform minimizing sum ||gt - S pred||^2 and its RMSE. If either
// set has all points coincident the rotation is identity and only the
// centroids are matched.
AteResult umeyama_align(std::span<const Eigen::Vector2d> gt_points,
                        std::span<const Eigen::Vector2d> pred_points);

double rmse_after(const AlignmentTransform& transform,
                  std::span<const Eigen::Vector2d> gt_points,
                  std::span<const Eigen::Vector2d> pred_points);

// Dead reckoning of the commanded planar velocity through the recorded
// heading. Starts at the first ground-truth position (origin if absent).
std::vector<Eigen::Vector2d> baseline_cmd_integration(const Trajectory& traj);

// Body-frame increments of the commanded velocity, one per frame step.
std::vector<Eigen::Vector2d> baseline_cmd_increments(const Trajectory& traj);

// Body-frame increments between consecutive positions, using yaws[k] for
// the step from k to k + 1.
std::vector<Eigen::Vector2d> body_increments(
    std::span<const Eigen::Vector2d> positions, std::span<const double> yaws);

EvalReport evaluate(std::span<const Pose2D> gt_poses,
                    std::span<const Pose2D> pred_poses, double duration_s);

}  // namespace autoodom

#endif  // AUTOODOM_EVAL_HPP_
