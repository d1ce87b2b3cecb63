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

#include "autoodom/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace autoodom {

namespace {

constexpr std::array<Channel, 8> kChannelOrder = {
    Channel::kCmdVel,   Channel::kGyro,     Channel::kAccel,
    Channel::kJointPos, Channel::kJointVel, Channel::kRot,
    Channel::kDpHist,   Channel::kActions,
};

template <std::size_t N>
bool all_finite(const std::array<double, N>& values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

template <std::size_t N>
double* copy_into(const std::array<double, N>& values, double* out) {
  return std::copy(values.begin(), values.end(), out);
}

}  // namespace

double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

Eigen::Matrix2d yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

std::array<double, 9> yaw_to_rot(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0};
}

double rot_to_yaw(const std::array<double, 9>& rot) {
  return std::atan2(rot[3], rot[0]);
}

void validate_frame(const ObservationFrame& frame) {
  if (!all_finite(frame.actions) || !all_finite(frame.cmd_vel) ||
      !all_finite(frame.gyro) || !all_finite(frame.accel) ||
      !all_finite(frame.joint_pos) || !all_finite(frame.joint_vel) ||
      !all_finite(frame.rot) || !all_finite(frame.dp_hist)) {
    throw std::invalid_argument("observation frame has non-finite values");
  }
  if (frame.gt_pose && !(std::isfinite(frame.gt_pose->x) &&
                         std::isfinite(frame.gt_pose->y) &&
                         std::isfinite(frame.gt_pose->yaw))) {
    throw std::invalid_argument("ground-truth pose has non-finite values");
  }
  const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> r(
      frame.rot.data());
  const double err =
      (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-9) {
    throw std::invalid_argument("rotation rows are not orthonormal (error " +
                                std::to_string(err) + ")");
  }
}

std::string_view to_string(Source source) {
  return source == Source::kSim ? "sim" : "real-like";
}

Source source_from_string(std::string_view text) {
  if (text == "sim") return Source::kSim;
  if (text == "real-like") return Source::kRealLike;
  throw std::invalid_argument("unknown trajectory source '" +
                              std::string(text) + "'");
}

bool Trajectory::has_ground_truth() const {
  return !frames.empty() &&
         std::all_of(frames.begin(), frames.end(),
                     [](const ObservationFrame& f) { return f.gt_pose; });
}

std::vector<Eigen::Vector2d> Trajectory::gt_positions() const {
  std::vector<Eigen::Vector2d> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (!f.gt_pose) throw std::invalid_argument("trajectory lacks ground truth");
    out.push_back(f.gt_pose->position());
  }
  return out;
}

std::vector<Pose2D> Trajectory::gt_poses() const {
  std::vector<Pose2D> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (!f.gt_pose) throw std::invalid_argument("trajectory lacks ground truth");
    out.push_back(*f.gt_pose);
  }
  return out;
}

std::vector<double> Trajectory::yaws() const {
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.yaw());
  return out;
}

int channel_width(Channel channel) {
  switch (channel) {
    case Channel::kCmdVel:
    case Channel::kGyro:
    case Channel::kAccel:
      return 3;
    case Channel::kJointPos:
    case Channel::kJointVel:
      return kNumJoints;
    case Channel::kRot:
      return 9;
    case Channel::kDpHist:
      return 2;
    case Channel::kActions:
      return kNumActions;
  }
  return 0;
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kCmdVel: return "cmd_vel";
    case Channel::kGyro: return "gyro";
    case Channel::kAccel: return "accel";
    case Channel::kJointPos: return "joint_pos";
    case Channel::kJointVel: return "joint_vel";
    case Channel::kRot: return "rot";
    case Channel::kDpHist: return "dp_hist";
    case Channel::kActions: return "actions";
  }
  return "?";
}

SensorLayout::SensorLayout(bool use_accel, bool use_dp_hist, bool use_actions,
                           int history_len, int horizon)
    : use_accel_(use_accel),
      use_dp_hist_(use_dp_hist),
      use_actions_(use_actions),
      history_len_(history_len),
      horizon_(horizon) {
  if (history_len < 1) throw std::invalid_argument("history_len must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  offsets_.fill(-1);
  for (Channel c : kChannelOrder) {
    if (!is_active(c)) continue;
    offsets_[static_cast<int>(c)] = input_dim_;
    input_dim_ += channel_width(c);
  }
}

bool SensorLayout::is_active(Channel channel) const {
  switch (channel) {
    case Channel::kAccel: return use_accel_;
    case Channel::kDpHist: return use_dp_hist_;
    case Channel::kActions: return use_actions_;
    default: return true;
  }
}

std::optional<int> SensorLayout::offset(Channel channel) const {
  const int off = offsets_[static_cast<int>(channel)];
  if (off < 0) return std::nullopt;
  return off;
}

std::vector<Channel> SensorLayout::active_channels() const {
  std::vector<Channel> out;
  for (Channel c : kChannelOrder) {
    if (is_active(c)) out.push_back(c);
  }
  return out;
}

SensorLayout SensorLayout::with_accel(bool use_accel) const {
  return SensorLayout(use_accel, use_dp_hist_, use_actions_, history_len_,
                      horizon_);
}

void frame_features(const ObservationFrame& frame, const SensorLayout& layout,
                    std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(layout.input_dim())) {
    throw std::invalid_argument("feature buffer size does not match layout");
  }
  double* p = out.data();
  p = copy_into(frame.cmd_vel, p);
  p = copy_into(frame.gyro, p);
  if (layout.use_accel()) p = copy_into(frame.accel, p);
  p = copy_into(frame.joint_pos, p);
  p = copy_into(frame.joint_vel, p);
  p = copy_into(frame.rot, p);
  if (layout.use_dp_hist()) p = copy_into(frame.dp_hist, p);
  if (layout.use_actions()) p = copy_into(frame.actions, p);
}

Eigen::VectorXd flatten_window(const Trajectory& traj, std::size_t t,
                               const SensorLayout& layout) {
  const auto h = static_cast<std::size_t>(layout.history_len());
  if (t >= traj.size() || t + 1 < h) {
    throw std::out_of_range("window end " + std::to_string(t) +
                            " out of range for history " + std::to_string(h) +
                            " and " + std::to_string(traj.size()) + " frames");
  }
  const auto d = static_cast<std::size_t>(layout.input_dim());
  Eigen::VectorXd out(static_cast<Eigen::Index>(h * d));
  for (std::size_t i = 0; i < h; ++i) {
    frame_features(traj.frames[t + 1 - h + i], layout,
                   std::span<double>(out.data() + i * d, d));
  }
  return out;
}

FeatureTable::FeatureTable(const Trajectory& traj, const SensorLayout& layout)
    : layout_(layout),
      rows_(static_cast<Eigen::Index>(traj.size()), layout.input_dim()) {
  const auto d = static_cast<std::size_t>(layout.input_dim());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    frame_features(traj.frames[t], layout,
                   std::span<double>(rows_.row(static_cast<Eigen::Index>(t)).data(), d));
  }
}

void FeatureTable::set_dp_hist(std::size_t t, const Eigen::Vector2d& dp) {
  const auto off = layout_.offset(Channel::kDpHist);
  if (!off) return;
  rows_(static_cast<Eigen::Index>(t), *off) = dp.x();
  rows_(static_cast<Eigen::Index>(t), *off + 1) = dp.y();
}

void FeatureTable::window(std::size_t t, std::span<double> out) const {
  const auto h = static_cast<std::size_t>(layout_.history_len());
  const auto d = static_cast<std::size_t>(layout_.input_dim());
  if (t >= frames()) throw std::out_of_range("window end past trajectory end");
  if (out.size() != h * d) {
    throw std::invalid_argument("window buffer size does not match layout");
  }
  const double* base = rows_.data();
  if (t + 1 >= h) {
    std::copy_n(base + (t + 1 - h) * d, h * d, out.data());
    return;
  }
  const std::size_t pad = h - 1 - t;
  for (std::size_t i = 0; i < pad; ++i) {
    std::copy_n(base, d, out.data() + i * d);
  }
  std::copy_n(base, (t + 1) * d, out.data() + pad * d);
}

Eigen::Vector2d dp_history(std::span<const Eigen::Vector2d> positions,
                           double yaw_t, std::size_t t, std::size_t lag) {
  if (t >= positions.size()) {
    throw std::out_of_range("no position available at frame " +
                            std::to_string(t));
  }
  const std::size_t from = t >= lag ? t - lag : 0;
  return yaw_rotation(yaw_t).transpose() * (positions[t] - positions[from]);
}

Eigen::Vector2d dp_history(const Trajectory& traj, std::size_t t,
                           std::size_t lag) {
  if (t >= traj.size()) throw std::out_of_range("frame index out of range");
  const std::size_t from = t >= lag ? t - lag : 0;
  const auto& now = traj.frames[t].gt_pose;
  const auto& then = traj.frames[from].gt_pose;
  if (!now || !then) {
    throw std::invalid_argument("dp_history needs positions at frames " +
                                std::to_string(from) + " and " +
                                std::to_string(t));
  }
  return yaw_rotation(traj.frames[t].yaw()).transpose() *
         (now->position() - then->position());
}

}  // namespace autoodom
