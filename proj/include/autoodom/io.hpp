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

// On-disk formats.
//
// Trajectory (UTF-8 CSV):
//   schema=autoodom.traj.v1,rate_hz=50[,seed=..,duration_s=..,source=..]
//   t,cmd_vx,cmd_vy,cmd_wz,gyro_x,gyro_y,gyro_z,accel_x,accel_y,accel_z,
//   q_0..q_11,dq_0..dq_11,rot_00..rot_22,act_0..act_10,[dp_x,dp_y],
//   [gt_x,gt_y,gt_yaw]
// Columns are matched by name. Without dp columns the displacement history
// is rebuilt from ground truth (zeros if there is none).
//
// Checkpoint: text header starting with AUTOODOM-CKPT/1 and ending with
// "end_header", then little-endian float32 values: per layer the row-major
// weight matrix and the bias, then normalization mean and std.

#ifndef AUTOODOM_IO_HPP_
#define AUTOODOM_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autoodom/datamodel.hpp"
#include "autoodom/train.hpp"

namespace autoodom {

// Malformed or inconsistent file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kTrajectorySchema = "autoodom.traj.v1";
inline constexpr std::string_view kCheckpointMagic = "AUTOODOM-CKPT/1";

std::vector<std::string> trajectory_columns(bool with_dp, bool with_gt);

std::string format_trajectory(const Trajectory& traj);
Trajectory parse_trajectory(std::string_view text);

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

// A directory loads every *.csv inside it in name order; a file loads itself.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);

std::string format_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Throws FormatError if the stored layout differs from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const SensorLayout& expected);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);
std::string read_file(const std::filesystem::path& path);

}  // namespace autoodom

#endif  // AUTOODOM_IO_HPP_
