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

#include "autoodom/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace autoodom {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) +
                                ")");
  }
}

Eigen::Vector2d centroid(std::span<const Eigen::Vector2d> points) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

bool all_coincident(std::span<const Eigen::Vector2d> points) {
  for (const auto& p : points) {
    if (p != points.front()) return false;
  }
  return true;
}

}  // namespace

double AlignmentTransform::angle() const {
  return std::atan2(rotation(1, 0), rotation(0, 0));
}

std::vector<Eigen::Vector2d> integrate_increments(
    std::span<const Eigen::Vector2d> increments, std::span<const double> yaws,
    const Pose2D& start) {
  require_same_length(increments.size(), yaws.size(), "integrate_increments");
  std::vector<Eigen::Vector2d> out;
  out.reserve(increments.size() + 1);
  out.push_back(start.position());
  for (std::size_t k = 0; k < increments.size(); ++k) {
    out.push_back(out.back() + yaw_rotation(yaws[k]) * increments[k]);
  }
  return out;
}

double rpe(std::span<const Eigen::Vector2d> gt_increments,
           std::span<const Eigen::Vector2d> pred_increments) {
  require_same_length(gt_increments.size(), pred_increments.size(), "rpe");
  if (gt_increments.empty()) throw std::invalid_argument("rpe: no increments");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_increments.size(); ++i) {
    sum += (gt_increments[i] - pred_increments[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(gt_increments.size()));
}

double rmse_after(const AlignmentTransform& transform,
                  std::span<const Eigen::Vector2d> gt_points,
                  std::span<const Eigen::Vector2d> pred_points) {
  require_same_length(gt_points.size(), pred_points.size(), "rmse_after");
  if (gt_points.empty()) throw std::invalid_argument("rmse_after: no points");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_points.size(); ++i) {
    sum += (gt_points[i] - transform.apply(pred_points[i])).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(gt_points.size()));
}

AteResult ate_first_frame(std::span<const Pose2D> gt_poses,
                          std::span<const Pose2D> pred_poses) {
  require_same_length(gt_poses.size(), pred_poses.size(), "ate_first_frame");
  if (gt_poses.size() < 2) {
    throw std::invalid_argument("ate_first_frame: need at least two poses");
  }
  AteResult result;
  auto& s = result.transform;
  s.rotation = yaw_rotation(gt_poses.front().yaw - pred_poses.front().yaw);
  s.translation =
      gt_poses.front().position() - s.rotation * pred_poses.front().position();
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_poses.size(); ++i) {
    sum += (gt_poses[i].position() - s.apply(pred_poses[i].position()))
               .squaredNorm();
  }
  result.ate = std::sqrt(sum / static_cast<double>(gt_poses.size()));
  return result;
}

AteResult umeyama_align(std::span<const Eigen::Vector2d> gt_points,
                        std::span<const Eigen::Vector2d> pred_points) {
  require_same_length(gt_points.size(), pred_points.size(), "umeyama_align");
  if (gt_points.empty()) throw std::invalid_argument("umeyama_align: no points");
  const Eigen::Vector2d mu_gt = centroid(gt_points);
  const Eigen::Vector2d mu_pred = centroid(pred_points);

  AteResult result;
  auto& s = result.transform;
  if (!all_coincident(gt_points) && !all_coincident(pred_points)) {
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < gt_points.size(); ++i) {
      cov += (gt_points[i] - mu_gt) * (pred_points[i] - mu_pred).transpose();
    }
    cov /= static_cast<double>(gt_points.size());
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(
        cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
      d(1, 1) = -1.0;
    }
    s.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  }
  s.translation = mu_gt - s.rotation * mu_pred;
  result.ate = rmse_after(s, gt_points, pred_points);
  return result;
}

std::vector<Eigen::Vector2d> baseline_cmd_increments(const Trajectory& traj) {
  if (traj.size() < 2) throw std::invalid_argument("baseline: trajectory too short");
  std::vector<Eigen::Vector2d> out;
  out.reserve(traj.size() - 1);
  const double dt = traj.dt();
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto& cmd = traj.frames[k].cmd_vel;
    out.emplace_back(cmd[0] * dt, cmd[1] * dt);
  }
  return out;
}

std::vector<Eigen::Vector2d> baseline_cmd_integration(const Trajectory& traj) {
  const auto increments = baseline_cmd_increments(traj);
  std::vector<double> yaws = traj.yaws();
  yaws.pop_back();
  const auto& first = traj.frames.front().gt_pose;
  const Pose2D start = first ? *first : Pose2D{};
  return integrate_increments(increments, yaws, start);
}

std::vector<Eigen::Vector2d> body_increments(
    std::span<const Eigen::Vector2d> positions, std::span<const double> yaws) {
  if (positions.empty()) return {};
  if (yaws.size() + 1 < positions.size()) {
    throw std::invalid_argument("body_increments: not enough headings");
  }
  std::vector<Eigen::Vector2d> out;
  out.reserve(positions.size() - 1);
  for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
    out.push_back(yaw_rotation(yaws[k]).transpose() *
                  (positions[k + 1] - positions[k]));
  }
  return out;
}

EvalReport evaluate(std::span<const Pose2D> gt_poses,
                    std::span<const Pose2D> pred_poses, double duration_s) {
  require_same_length(gt_poses.size(), pred_poses.size(), "evaluate");
  if (gt_poses.size() < 2) throw std::invalid_argument("evaluate: need >= 2 poses");
  std::vector<Eigen::Vector2d> gt_pos;
  std::vector<Eigen::Vector2d> pred_pos;
  std::vector<double> gt_yaw;
  std::vector<double> pred_yaw;
  for (std::size_t i = 0; i < gt_poses.size(); ++i) {
    gt_pos.push_back(gt_poses[i].position());
    pred_pos.push_back(pred_poses[i].position());
    gt_yaw.push_back(gt_poses[i].yaw);
    pred_yaw.push_back(pred_poses[i].yaw);
  }
  EvalReport report;
  const auto first = ate_first_frame(gt_poses, pred_poses);
  const auto opt = umeyama_align(gt_pos, pred_pos);
  report.ate_o = first.ate;
  report.first_frame_alignment = first.transform;
  report.ate_u = opt.ate;
  report.umeyama_alignment = opt.transform;
  report.rpe = rpe(body_increments(gt_pos, gt_yaw),
                   body_increments(pred_pos, pred_yaw));
  report.length = gt_poses.size();
  report.duration_s = duration_s;
  return report;
}

}  // namespace autoodom
