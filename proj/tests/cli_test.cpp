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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "autoodom/cli.hpp"
#include "autoodom/io.hpp"
#include "test_util.hpp"

namespace autoodom {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// Column `col` of the row whose first cell is `name`.
double table_value(const std::string& table, const std::string& name, const std::string& col) {
  std::stringstream ss(table);
  std::string line;
  std::getline(ss, line);
  const auto header = split_line(line);
  const auto it = std::find(header.begin(), header.end(), col);
  if (it == header.end()) throw std::runtime_error("no column " + col);
  while (std::getline(ss, line)) {
    const auto cells = split_line(line);
    if (!cells.empty() && cells[0] == name) {
      return std::stod(cells[static_cast<std::size_t>(it - header.begin())]);
    }
  }
  throw std::runtime_error("no row " + name);
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"gen", "--bogus", "1"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"gen"}).code, kExitUsage);  // out_dir missing
  EXPECT_EQ(run_cli({"gen", "--out_dir", "/nonexistent_autoodom"}).code, kExitUsage);
  const auto dir = testing::scratch_dir("cli_usage");
  EXPECT_EQ(run_cli({"gen", "--out_dir", dir.string(), "--count", "two"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"gen", "--out_dir", dir.string(), "--flavor", "mars"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"train1", "--data", (dir / "none").string(), "--out",
                     (dir / "m.ckpt").string()}).code,
            kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(Cli, DataErrorsExitTwo) {
  const auto dir = testing::scratch_dir("cli_data");
  write_file_atomic(dir / "bad.csv", "schema=autoodom.traj.v1,rate_hz=50\nt,cmd_vx\n0,1\n");
  const Outcome o = run_cli({"train1", "--data", (dir / "bad.csv").string(), "--out",
                             (dir / "m.ckpt").string()});
  EXPECT_EQ(o.code, kExitData);
  EXPECT_NE(o.err.find("missing column"), std::string::npos) << o.err;
  write_file_atomic(dir / "junk.ckpt", "not a checkpoint\n");
  ASSERT_EQ(run_cli({"gen", "--out_dir", dir.string(), "--count", "1", "--duration", "3"}).code,
            kExitOk);
  EXPECT_EQ(run_cli({"rollout", "--ckpt", (dir / "junk.ckpt").string(), "--traj",
                     (dir / "traj_0000.csv").string(), "--out", (dir / "p.csv").string()})
                .code,
            kExitData);
}

TEST(Cli, GenIsByteDeterministic) {
  const auto a = testing::scratch_dir("cli_gen_a");
  const auto b = testing::scratch_dir("cli_gen_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(run_cli({"gen", "--out_dir", d.string(), "--count", "2", "--duration", "3",
                       "--flavor", "real-like", "--seed", "11"})
                  .code,
              kExitOk);
  }
  for (const char* name : {"traj_0000.csv", "traj_0001.csv"}) {
    EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
  }
  EXPECT_EQ(load_trajectory(a / "traj_0001.csv").meta.seed, 12u);
  EXPECT_EQ(load_trajectory(a / "traj_0000.csv").meta.source, Source::kRealLike);
}

TEST(Cli, EvalOfIdenticalPathsIsZero) {
  const auto dir = testing::scratch_dir("cli_eval");
  ASSERT_EQ(run_cli({"gen", "--out_dir", dir.string(), "--count", "1", "--duration", "4"}).code,
            kExitOk);
  const std::string traj = (dir / "traj_0000.csv").string();
  const Outcome o = run_cli({"eval", "--gt", traj, "--pred", traj, "--out",
                             (dir / "report.csv").string(), "--baseline", "true"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string table = read_file(dir / "report.csv");
  EXPECT_EQ(table, o.out);
  for (const char* col : {"ate_o", "ate_u", "rpe"}) {
    EXPECT_EQ(table_value(table, "pred", col), 0.0) << col;
    EXPECT_GT(table_value(table, "baseline_cmd", col), 0.0) << col;
  }
  EXPECT_EQ(table_value(table, "pred", "frames"), 200.0);

  const Outcome p = run_cli({"plot", "--gt", traj, "--pred", traj, "--out",
                             (dir / "overlay.svg").string()});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  const std::string svg = read_file(dir / "overlay.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  EXPECT_EQ(count_lines(read_file(dir / "overlay.csv")), 1u + 2 * 200);
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const auto dir = testing::scratch_dir("cli_cfg");
  write_file_atomic(dir / "gen.cfg", "count = 3\nduration = 2\nseed = 40\n");
  ASSERT_EQ(run_cli({"gen", "--config", (dir / "gen.cfg").string(), "--out_dir",
                     dir.string(), "--count", "2"})
                .code,
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "traj_0001.csv"));
  EXPECT_FALSE(fs::exists(dir / "traj_0002.csv"));
  EXPECT_EQ(load_trajectory(dir / "traj_0000.csv").meta.seed, 40u);
  write_file_atomic(dir / "bad.cfg", "colour = blue\n");
  EXPECT_EQ(run_cli({"gen", "--config", (dir / "bad.cfg").string(), "--out_dir",
                     dir.string()})
                .code,
            kExitUsage);
  EXPECT_EQ(run_cli({"gen", "--config", (dir / "none.cfg").string(), "--out_dir",
                     dir.string()})
                .code,
            kExitUsage);
}

TEST(Cli, AblateGridIsDeterministic) {
  const auto dir = testing::scratch_dir("cli_ablate");
  const std::vector<std::string> common = {"--count", "3", "--holdout", "1", "--duration",
                                           "4", "--epochs", "1", "--hidden", "16",
                                           "--history_len", "10"};
  std::vector<std::string> tables;
  for (const char* name : {"a.csv", "b.csv"}) {
    std::vector<std::string> args = {"ablate", "--out", (dir / name).string()};
    args.insert(args.end(), common.begin(), common.end());
    const Outcome o = run_cli(args);
    ASSERT_EQ(o.code, kExitOk) << o.err;
    tables.push_back(read_file(dir / name));
  }
  EXPECT_EQ(tables[0], tables[1]);
  EXPECT_EQ(count_lines(tables[0]), 17u);
  EXPECT_EQ(tables[0].substr(0, tables[0].find('\n')),
            "row,dt_s,horizon,a_t,p_t,A_t,ate_o,ate_u,rpe,tf_rpe");
}

TEST(Cli, FullPipelineBeatsCommandBaseline) {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const std::string sim = (dir / "sim").string();
  const std::string real = (dir / "real").string();
  const std::string hold = (dir / "hold").string();
  for (const auto& d : {sim, real, hold}) fs::create_directories(d);
  ASSERT_EQ(run_cli({"gen", "--out_dir", sim, "--count", "20", "--duration", "20", "--seed",
                     "100"})
                .code,
            kExitOk);
  const std::vector<std::string> gap = {"--flavor", "real-like", "--joint_amp_scale", "1.25",
                                        "--tracking_tau", "0.4", "--duration", "20"};
  auto gen = [&](const std::string& d, const char* count, const char* seed) {
    std::vector<std::string> args = {"gen", "--out_dir", d, "--count", count, "--seed", seed};
    args.insert(args.end(), gap.begin(), gap.end());
    return run_cli(args).code;
  };
  ASSERT_EQ(gen(real, "4", "500"), kExitOk);
  ASSERT_EQ(gen(hold, "1", "900"), kExitOk);

  const std::string s1 = (dir / "s1.ckpt").string();
  const std::string tr = (dir / "tr.ckpt").string();
  const std::string s2 = (dir / "s2.ckpt").string();
  const std::vector<std::string> net = {"--hidden", "128,64"};
  std::vector<std::string> a1 = {"train1", "--data", sim, "--out", s1, "--epochs", "4"};
  a1.insert(a1.end(), net.begin(), net.end());
  Outcome o = run_cli(a1);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(load_checkpoint(s1).stage, "stage1");

  // Stage 2 refuses a checkpoint without the accelerometer.
  std::vector<std::string> a2 = {"train2", "--ckpt", s1, "--data", real, "--out", s2};
  a2.insert(a2.end(), net.begin(), net.end());
  o = run_cli(a2);
  EXPECT_EQ(o.code, kExitData);
  EXPECT_NE(o.err.find("layout"), std::string::npos) << o.err;

  o = run_cli({"transfer", "--ckpt", s1, "--data", real, "--out", tr});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  a2[2] = tr;
  a2.insert(a2.end(), {"--holdout", hold, "--epochs", "10"});
  o = run_cli(a2);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_TRUE(load_checkpoint(s2).holdout_ate_o.has_value());

  const std::string gt = (fs::path(hold) / "traj_0000.csv").string();
  const std::string pred = (dir / "pred.csv").string();
  o = run_cli({"rollout", "--ckpt", s2, "--traj", gt, "--out", pred});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string report = (dir / "report.csv").string();
  o = run_cli({"eval", "--gt", gt, "--pred", pred, "--out", report, "--baseline", "1"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string table = read_file(report);
  EXPECT_LT(table_value(table, "pred", "ate_o"), table_value(table, "baseline_cmd", "ate_o"))
      << table;
  EXPECT_LE(table_value(table, "pred", "ate_u"), table_value(table, "pred", "ate_o") + 1e-9);
}

}  // namespace
}  // namespace autoodom
