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

#ifndef AUTOODOM_DATAMODEL_HPP_
#define AUTOODOM_DATAMODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace autoodom {

inline constexpr int kNumActions = 11;
inline constexpr int kNumJoints = 12;
inline constexpr double kDefaultRateHz = 50.0;
// Displacement-history lag: one second at 50 Hz.
inline constexpr std::size_t kDpHistoryLag = 50;

// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

Eigen::Matrix2d yaw_rotation(double yaw);

// Row-major 3x3 rotation about z (flat ground).
std::array<double, 9> yaw_to_rot(double yaw);

// Heading of a row-major rotation matrix, atan2(r10, r00).
double rot_to_yaw(const std::array<double, 9>& rot);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // (-pi, pi]

  static Pose2D make(double x, double y, double yaw) {
    return Pose2D{x, y, normalize_angle(yaw)};
  }

  Eigen::Vector2d position() const { return {x, y}; }
  Eigen::Matrix2d rotation() const { return yaw_rotation(yaw); }
};

// One 50 Hz sample of every proprioceptive channel plus ground truth.
struct ObservationFrame {
  std::array<double, kNumActions> actions{};
  std::array<double, 3> cmd_vel{};  // v_x, v_y, w_z
  std::array<double, 3> gyro{};
  std::array<double, 3> accel{};
  std::array<double, kNumJoints> joint_pos{};
  std::array<double, kNumJoints> joint_vel{};
  std::array<double, 9> rot{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 2> dp_hist{};
  std::optional<Pose2D> gt_pose;

  double yaw() const { return rot_to_yaw(rot); }
};

// Throws std::invalid_argument if a value is non-finite or rot is not
// orthonormal to 1e-9.
void validate_frame(const ObservationFrame& frame);

enum class Source { kSim, kRealLike };

std::string_view to_string(Source source);
Source source_from_string(std::string_view text);

struct TrajectoryMeta {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  Source source = Source::kSim;
};

struct Trajectory {
  std::vector<ObservationFrame> frames;
  double rate_hz = kDefaultRateHz;
  TrajectoryMeta meta;

  std::size_t size() const { return frames.size(); }
  double dt() const { return 1.0 / rate_hz; }
  bool has_ground_truth() const;
  std::vector<Eigen::Vector2d> gt_positions() const;
  std::vector<Pose2D> gt_poses() const;
  std::vector<double> yaws() const;
};

enum class Channel {
  kCmdVel,
  kGyro,
  kAccel,
  kJointPos,
  kJointVel,
  kRot,
  kDpHist,
  kActions,
};

int channel_width(Channel channel);
std::string_view to_string(Channel channel);

// Which channels feed the network and how many frames form a window.
// Flattened channel order is fixed: cmd_vel, gyro, [accel], joint_pos,
// joint_vel, rot, [dp_hist], [actions].
class SensorLayout {
 public:
  SensorLayout() : SensorLayout(false, true, true) {}
  SensorLayout(bool use_accel, bool use_dp_hist, bool use_actions,
               int history_len = 50, int horizon = 1);

  bool use_accel() const { return use_accel_; }
  bool use_dp_hist() const { return use_dp_hist_; }
  bool use_actions() const { return use_actions_; }
  int history_len() const { return history_len_; }
  int horizon() const { return horizon_; }

  // Per-frame feature count d_in.
  int input_dim() const { return input_dim_; }
  // history_len * input_dim.
  int window_dim() const { return history_len_ * input_dim_; }

  bool is_active(Channel channel) const;
  // Offset of the channel inside one frame's feature block.
  std::optional<int> offset(Channel channel) const;
  std::vector<Channel> active_channels() const;

  SensorLayout with_accel(bool use_accel) const;

  bool operator==(const SensorLayout&) const = default;

 private:
  bool use_accel_;
  bool use_dp_hist_;
  bool use_actions_;
  int history_len_;
  int horizon_;
  int input_dim_ = 0;
  std::array<int, 8> offsets_{};
};

// Writes the active channels of one frame (input_dim values).
void frame_features(const ObservationFrame& frame, const SensorLayout& layout,
                    std::span<double> out);

// Features of frames [t - H + 1, t], oldest first. Requires t >= H - 1.
Eigen::VectorXd flatten_window(const Trajectory& traj, std::size_t t,
                               const SensorLayout& layout);

// Per-frame feature rows of a whole trajectory. Windows are contiguous
// row blocks; windows that start before frame 0 are left-padded by
// repeating row 0.
class FeatureTable {
 public:
  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FeatureTable(const Trajectory& traj, const SensorLayout& layout);

  std::size_t frames() const { return static_cast<std::size_t>(rows_.rows()); }
  const SensorLayout& layout() const { return layout_; }
  const RowMatrix& rows() const { return rows_; }

  // Overwrites the dp_hist entries of frame t. No-op if the layout has no
  // dp_hist channel.
  void set_dp_hist(std::size_t t, const Eigen::Vector2d& dp);

  // Writes window_dim values ending at frame t.
  void window(std::size_t t, std::span<double> out) const;

 private:
  SensorLayout layout_;
  RowMatrix rows_;
};

// Body-frame displacement Yaw(R_t)^T (p_t - p_{t-lag}); uses p_0 when
// t < lag.
Eigen::Vector2d dp_history(std::span<const Eigen::Vector2d> positions,
                           double yaw_t, std::size_t t, std::size_t lag);

// Same, on the trajectory's ground-truth positions and R_t.
Eigen::Vector2d dp_history(const Trajectory& traj, std::size_t t,
                           std::size_t lag);

}  // namespace autoodom

#endif  // AUTOODOM_DATAMODEL_HPP_
