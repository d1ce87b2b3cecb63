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

#ifndef AUTOODOM_CLI_HPP_
#define AUTOODOM_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "autoodom/eval.hpp"
#include "autoodom/train.hpp"

namespace autoodom {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Bad command line or configuration (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key = value configuration restricted to a known key set. Values set
// later override earlier ones, so load the file first and apply flags after.
class RunConfig {
 public:
  explicit RunConfig(std::set<std::string> allowed_keys);

  // '#' starts a comment; blank lines are ignored.
  void load_file(const std::filesystem::path& path);
  void parse_text(std::string_view text, std::string_view origin = "config");
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;

  // Required existing file or directory.
  std::filesystem::path input_path(const std::string& key) const;
  // Required output path whose parent directory exists.
  std::filesystem::path output_path(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::set<std::string> allowed_;
  std::map<std::string, std::string> values_;
};

// Overlay of ground truth (blue) and prediction (orange) as SVG polylines.
std::string render_overlay_svg(std::span<const Eigen::Vector2d> gt,
                               std::span<const Eigen::Vector2d> pred,
                               std::string_view title);
// series,index,x,y rows for the same points.
std::string render_overlay_csv(std::span<const Eigen::Vector2d> gt,
                               std::span<const Eigen::Vector2d> pred);

struct AblationRow {
  int horizon = 1;
  bool use_accel = false;
  bool use_dp_hist = false;
  bool use_actions = false;
  double ate_o = 0.0;
  double ate_u = 0.0;
  double rpe = 0.0;
  double tf_rpe = 0.0;
};

struct AblationSettings {
  std::size_t train_count = 20;
  std::size_t holdout_count = 5;
  double duration_s = 20.0;
  std::uint64_t seed = 1;
  TrainConfig base;  // layout flags and horizon are overridden per row
};

// Stage-1 grid over {accel, dp_hist, actions} x {horizon 1, 51} on
// synthetic sim data. Rows are ordered horizon-major, then accel, dp_hist,
// actions from all-on to all-off.
std::vector<AblationRow> run_ablation(const AblationSettings& settings);
std::string format_ablation_table(std::span<const AblationRow> rows);

std::string format_eval_table(
    std::span<const std::pair<std::string, EvalReport>> rows);

// Entry point; returns the process exit code and writes diagnostics to err.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace autoodom

#endif  // AUTOODOM_CLI_HPP_
