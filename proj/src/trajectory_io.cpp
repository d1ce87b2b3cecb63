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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "autoodom/io.hpp"

namespace autoodom {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view cell, std::size_t line,
                    std::string_view column) {
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("line " + std::to_string(line) + ": column '" +
                      std::string(column) + "' is not a number: '" +
                      std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw FormatError("line " + std::to_string(line) + ": column '" +
                      std::string(column) + "' is not finite");
  }
  return value;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

template <std::size_t N>
void add_indexed(std::vector<std::string>& cols, const char* prefix) {
  for (std::size_t i = 0; i < N; ++i) cols.push_back(prefix + std::to_string(i));
}

}  // namespace

std::vector<std::string> trajectory_columns(bool with_dp, bool with_gt) {
  std::vector<std::string> cols = {"t",      "cmd_vx", "cmd_vy", "cmd_wz",
                                   "gyro_x", "gyro_y", "gyro_z", "accel_x",
                                   "accel_y", "accel_z"};
  add_indexed<kNumJoints>(cols, "q_");
  add_indexed<kNumJoints>(cols, "dq_");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      cols.push_back("rot_" + std::to_string(r) + std::to_string(c));
    }
  }
  add_indexed<kNumActions>(cols, "act_");
  if (with_dp) {
    cols.push_back("dp_x");
    cols.push_back("dp_y");
  }
  if (with_gt) {
    cols.push_back("gt_x");
    cols.push_back("gt_y");
    cols.push_back("gt_yaw");
  }
  return cols;
}

std::string format_trajectory(const Trajectory& traj) {
  const bool with_gt = traj.has_ground_truth();
  std::string out;
  out.reserve(traj.size() * 1200 + 512);
  out += "schema=";
  out += kTrajectorySchema;
  out += ",rate_hz=";
  append_number(out, traj.rate_hz);
  out += ",seed=" + std::to_string(traj.meta.seed);
  out += ",duration_s=";
  append_number(out, traj.meta.duration_s);
  out += ",source=";
  out += to_string(traj.meta.source);
  out += '\n';
  const auto cols = trajectory_columns(true, with_gt);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const ObservationFrame& f = traj.frames[k];
    std::vector<double> row;
    row.reserve(cols.size());
    row.push_back(static_cast<double>(k) / traj.rate_hz);
    row.insert(row.end(), f.cmd_vel.begin(), f.cmd_vel.end());
    row.insert(row.end(), f.gyro.begin(), f.gyro.end());
    row.insert(row.end(), f.accel.begin(), f.accel.end());
    row.insert(row.end(), f.joint_pos.begin(), f.joint_pos.end());
    row.insert(row.end(), f.joint_vel.begin(), f.joint_vel.end());
    row.insert(row.end(), f.rot.begin(), f.rot.end());
    row.insert(row.end(), f.actions.begin(), f.actions.end());
    row.insert(row.end(), f.dp_hist.begin(), f.dp_hist.end());
    if (with_gt) {
      row.push_back(f.gt_pose->x);
      row.push_back(f.gt_pose->y);
      row.push_back(f.gt_pose->yaw);
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_number(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() < 2) throw FormatError("trajectory file has no column header");

  Trajectory traj;
  bool schema_ok = false;
  bool rate_seen = false;
  for (std::string_view item : split(trim(lines[0]), ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("malformed header entry '" + std::string(item) + "'");
    }
    const std::string_view key = trim(item.substr(0, eq));
    const std::string_view value = trim(item.substr(eq + 1));
    if (key == "schema") {
      if (value != kTrajectorySchema) {
        throw FormatError("unsupported trajectory schema '" + std::string(value) +
                          "', expected " + std::string(kTrajectorySchema));
      }
      schema_ok = true;
    } else if (key == "rate_hz") {
      traj.rate_hz = parse_number(value, 1, key);
      if (!(traj.rate_hz > 0.0)) throw FormatError("rate_hz must be positive");
      rate_seen = true;
    } else if (key == "seed") {
      const auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), traj.meta.seed);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw FormatError("header seed is not an unsigned integer");
      }
    } else if (key == "duration_s") {
      traj.meta.duration_s = parse_number(value, 1, key);
    } else if (key == "source") {
      try {
        traj.meta.source = source_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
      }
    } else {
      throw FormatError("unknown header key '" + std::string(key) + "'");
    }
  }
  if (!schema_ok) throw FormatError("missing schema in trajectory header");
  if (!rate_seen) throw FormatError("missing rate_hz in trajectory header");

  std::map<std::string, std::size_t, std::less<>> index;
  const auto header = split(trim(lines[1]), ',');
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (!index.emplace(name, i).second) {
      throw FormatError("duplicate column '" + name + "'");
    }
  }
  const bool with_dp = index.count("dp_x") || index.count("dp_y");
  const bool with_gt =
      index.count("gt_x") || index.count("gt_y") || index.count("gt_yaw");
  const auto expected = trajectory_columns(with_dp, with_gt);
  for (const auto& col : expected) {
    if (!index.count(col)) throw FormatError("missing column '" + col + "'");
  }
  if (index.size() != expected.size()) {
    for (const auto& [name, pos] : index) {
      if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
        throw FormatError("unknown column '" + name + "'");
      }
    }
  }
  std::vector<std::size_t> slot;
  slot.reserve(expected.size());
  for (const auto& col : expected) slot.push_back(index.at(col));

  traj.frames.reserve(lines.size() - 2);
  std::vector<double> v(expected.size());
  for (std::size_t li = 2; li < lines.size(); ++li) {
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw FormatError("line " + std::to_string(li + 1) + ": expected " +
                        std::to_string(header.size()) + " values, found " +
                        std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < expected.size(); ++c) {
      v[c] = parse_number(cells[slot[c]], li + 1, expected[c]);
    }
    ObservationFrame f;
    std::size_t c = 1;  // skip t
    auto take = [&](auto& arr) {
      for (auto& x : arr) x = v[c++];
    };
    take(f.cmd_vel);
    take(f.gyro);
    take(f.accel);
    take(f.joint_pos);
    take(f.joint_vel);
    take(f.rot);
    take(f.actions);
    if (with_dp) take(f.dp_hist);
    if (with_gt) {
      f.gt_pose = Pose2D::make(v[c], v[c + 1], v[c + 2]);
    }
    try {
      validate_frame(f);
    } catch (const std::invalid_argument& e) {
      throw FormatError("line " + std::to_string(li + 1) + ": " + e.what());
    }
    traj.frames.push_back(f);
  }
  if (traj.frames.empty()) throw FormatError("trajectory has no frames");
  if (!with_dp && with_gt) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Eigen::Vector2d dp = dp_history(traj, k, kDpHistoryLag);
      traj.frames[k].dp_hist = {dp.x(), dp.y()};
    }
  }
  if (traj.meta.duration_s == 0.0) {
    traj.meta.duration_s = static_cast<double>(traj.size()) / traj.rate_hz;
  }
  return traj;
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  write_file_atomic(path, format_trajectory(traj));
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  try {
    return parse_trajectory(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw FormatError("no .csv trajectories in " + path.string());
    }
  } else {
    files.push_back(path);
  }
  std::vector<Trajectory> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_trajectory(f));
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  const auto parent = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
  if (!std::filesystem::is_directory(parent)) {
    throw FormatError("output directory does not exist: " + parent.string());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace autoodom
