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

// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Thresholds and experiment sizes are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "autoodom/cli.hpp"
#include "autoodom/eval.hpp"
#include "autoodom/io.hpp"
#include "autoodom/net.hpp"
#include "autoodom/synthgym.hpp"
#include "autoodom/train.hpp"
#include "test_util.hpp"

namespace autoodom {
namespace {

using testing::random_vector;
using Clock = std::chrono::steady_clock;

constexpr double kGradEps = 1e-4;
constexpr double kGradTol = 1e-4;
constexpr double kGradFloor = 1e-6;
constexpr double kUmeyamaSlack = 1e-6;
constexpr double kRecoveryTol = 1e-9;
constexpr double kOrderSlack = 1e-9;
constexpr double kTransferTol = 1e-12;
constexpr double kRolloutTol = 1e-9;
constexpr double kLearnFactor = 5.0;
constexpr double kLearnBudgetS = 15.0 * 60.0;
constexpr double kOracleBudgetS = 10.0;
constexpr double kForwardBudgetMs = 1.0;
constexpr int kSeeds = 5;
constexpr int kMinWins = 4;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every (ATE_o, ATE_u) pair evaluated during the run.
std::vector<std::pair<double, double>> ate_pairs;

EvalReport record(const EvalReport& r) {
  ate_pairs.emplace_back(r.ate_o, r.ate_u);
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Trajectory> sim(std::uint64_t seed, std::size_t n, double dur = 20.0) {
  return generate_dataset(seed, n, dur, GaitSpec::defaults(), NoiseSpec::none(), Source::kSim);
}

void gradient_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> width(2, 8);
  std::uniform_int_distribution<int> depth(1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sizes = {width(rng)};
    for (int d = depth(rng); d > 0; --d) sizes.push_back(width(rng));
    sizes.push_back(kOutputDim);
    Mlp net = init_mlp(rng(), sizes);
    for (auto& l : net.layers) l.bias = random_vector(rng, l.bias.size(), 0.3);
    net.norm.mean = random_vector(rng, sizes.front(), 0.5);
    net.norm.std = random_vector(rng, sizes.front()).cwiseAbs().array() + 0.5;
    net.layers.back().weight *= 100.0;
    Eigen::MatrixXd x(sizes.front(), 4);
    Eigen::MatrixXd y(2, 4);
    for (Eigen::Index c = 0; c < 4; ++c) {
      x.col(c) = random_vector(rng, sizes.front(), 2.0);
      y.col(c) = random_vector(rng, 2);
    }
    const LossAndGrad lg = loss_and_grad(net, x, y);
    auto check = [&](double& p, double analytic) {
      const double saved = p;
      p = saved + kGradEps;
      const double up = mse_loss(net, x, y);
      p = saved - kGradEps;
      const double down = mse_loss(net, x, y);
      p = saved;
      const double numeric = (up - down) / (2.0 * kGradEps);
      const double scale = std::max({std::abs(numeric), std::abs(analytic), kGradFloor});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      auto& w = net.layers[i].weight;
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) check(w(r, c), lg.grad.layers[i].weight(r, c));
      }
      auto& b = net.layers[i].bias;
      for (Eigen::Index r = 0; r < b.size(); ++r) check(b(r), lg.grad.layers[i].bias(r));
    }
  }
  const double secs = seconds_since(t0);
  report(worst < kGradTol && secs < kOracleBudgetS, "gradient_oracle",
         fmt("max rel err %.3g over 20 nets (tol %.0e), %.2f s", worst, kGradTol, secs));
}

void umeyama_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  double worst_gap = -1e300;
  double worst_recovery = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Vector2d> gt(10);
    std::vector<Eigen::Vector2d> pred(10);
    for (int i = 0; i < 10; ++i) {
      gt[i] = random_vector(rng, 2, 3.0);
      pred[i] = random_vector(rng, 2, 3.0);
    }
    const double closed = umeyama_align(gt, pred).ate;
    worst_gap = std::max(worst_gap, closed - testing::numerical_rigid_rmse(gt, pred));
    // Noiseless rigid copy.
    const Eigen::Matrix2d r = yaw_rotation(angle(rng));
    const Eigen::Vector2d t = random_vector(rng, 2, 5.0);
    std::vector<Eigen::Vector2d> moved(10);
    for (int i = 0; i < 10; ++i) moved[i] = r.transpose() * (gt[i] - t);
    const AteResult a = umeyama_align(gt, moved);
    double err = a.ate;
    for (int i = 0; i < 10; ++i) err = std::max(err, (a.transform.apply(moved[i]) - gt[i]).norm());
    worst_recovery = std::max(worst_recovery, err);
  }
  const double secs = seconds_since(t0);
  report(worst_gap <= kUmeyamaSlack && worst_recovery < kRecoveryTol && secs < kOracleBudgetS,
         "umeyama_oracle",
         fmt("closed - numerical <= %.3g, recovery err %.3g, %.2f s", worst_gap,
             worst_recovery, secs));
}

void transfer_equivalence() {
  const auto train = sim(31, 3, 4.0);
  const auto real = generate_dataset(32, 2, 4.0, GaitSpec::defaults(),
                                     NoiseSpec::real_like_defaults(), Source::kRealLike);
  TrainConfig c;
  c.hidden = {64, 32};
  c.epochs = 2;
  const Checkpoint s1 = train_stage1(train, c);
  const SensorLayout wide = s1.layout.with_accel(true);
  const Checkpoint tr = zero_pad_transfer(s1, wide, real);
  const int h = wide.history_len();
  const int dn = wide.input_dim();
  const int dold = s1.layout.input_dim();
  const int off = *wide.offset(Channel::kAccel);
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd xn = random_vector(rng, h * dn, 3.0);
    Eigen::VectorXd xo(h * dold);
    for (int i = 0; i < h; ++i) {
      for (int ch = 0, k = 0; ch < dn; ++ch) {
        if (ch < off || ch >= off + 3) xo(i * dold + k++) = xn(i * dn + ch);
      }
    }
    const Eigen::Vector2d a = forward(s1.model, {xo.data(), static_cast<std::size_t>(xo.size())});
    const Eigen::Vector2d b = forward(tr.model, {xn.data(), static_cast<std::size_t>(xn.size())});
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  report(worst <= kTransferTol, "transfer_equivalence",
         fmt("max |delta| %.3g over 1000 inputs (tol %.0e)", worst, kTransferTol));
}

void rollout_fixed_point() {
  const auto data = sim(41, 5, 20.0);
  const SensorLayout layout;
  double worst_roll = 0.0;
  double worst_int = 0.0;
  for (const auto& traj : data) {
    const Predictor oracle = [&traj](std::size_t t, std::span<const double>) {
      return gt_increment(traj, t, 1);
    };
    const auto gt = traj.gt_positions();
    const RolloutResult r = rollout(oracle, layout, traj, gt.front());
    for (std::size_t k = 0; k < gt.size(); ++k) {
      worst_roll = std::max(worst_roll, (r.positions[k] - gt[k]).norm());
    }
    record(evaluate_rollout(traj, r));
    std::vector<Eigen::Vector2d> inc;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) inc.push_back(gt_increment(traj, k, 1));
    const auto yaws = traj.yaws();
    const auto back = integrate_increments(inc, std::span(yaws).first(inc.size()),
                                           *traj.frames.front().gt_pose);
    for (std::size_t k = 0; k < gt.size(); ++k) {
      worst_int = std::max(worst_int, (back[k] - gt[k]).norm());
    }
  }
  report(worst_roll < kRolloutTol && worst_int < kRolloutTol, "rollout_fixed_point",
         fmt("oracle rollout err %.3g, integrator err %.3g over 5 x 20 s", worst_roll,
             worst_int));
}

void learnability() {
  const auto t0 = Clock::now();
  const auto train = sim(1, 50, 20.0);
  const auto holdout = sim(10001, 10, 20.0);
  const TrainConfig config;  // default model and schedule
  const Checkpoint ckpt = train_stage1(train, config);
  const double secs = seconds_since(t0);
  const double trained = teacher_forced_rpe(ckpt, holdout);
  const double untrained = teacher_forced_rpe(untrained_checkpoint(train, config), holdout);
  const double baseline = baseline_teacher_forced_rpe(holdout, 1);
  for (const auto& traj : holdout) {
    record(evaluate_rollout(traj, rollout(ckpt, traj, *traj.frames.front().gt_pose)));
  }
  report(trained * kLearnFactor <= untrained && trained < baseline && secs < kLearnBudgetS,
         "learnability",
         fmt("held-out tf RPE %.5f vs untrained %.5f, cmd baseline %.5f; train %.0f s", trained,
             untrained, baseline, secs));
}

void two_stage_benefit() {
  // Real-like flavor: sensor noise, noisy dp feedback, and a gait gap.
  GaitSpec real_gait = GaitSpec::defaults();
  for (double& a : real_gait.joint_amp) a *= 1.25;
  real_gait.vel_tracking_tau_s = 0.4;
  const NoiseSpec noise = NoiseSpec::real_like_defaults();
  std::vector<double> s1_ate;
  std::vector<double> s2_ate;
  std::vector<double> gains;
  int wins = 0;
  std::string per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto base = static_cast<std::uint64_t>(s) * 1000;
    const auto train = sim(base, 50, 20.0);
    const auto real = generate_dataset(base + 500, 5, 20.0, real_gait, noise, Source::kRealLike);
    const auto holdout =
        generate_dataset(base + 900, 5, 20.0, real_gait, noise, Source::kRealLike);
    TrainConfig c;
    c.seed = static_cast<std::uint64_t>(s);
    c.hidden = {128, 64};
    c.epochs = 3;
    const Checkpoint s1 = train_stage1(train, c);
    const Checkpoint tr = zero_pad_transfer(s1, s1.layout.with_accel(true), real);
    TrainConfig c2 = c;
    c2.stage = "stage2";
    c2.epochs = 10;
    c2.learning_rate = 3e-5;
    const Checkpoint s2 = train_stage2(real, tr, c2);
    double a1 = 0.0;
    double a2 = 0.0;
    for (const auto& traj : holdout) {
      const Pose2D start = *traj.frames.front().gt_pose;
      a1 += record(evaluate_rollout(traj, rollout(s1, traj, start))).ate_o;
      a2 += record(evaluate_rollout(traj, rollout(s2, traj, start))).ate_o;
    }
    a1 /= static_cast<double>(holdout.size());
    a2 /= static_cast<double>(holdout.size());
    s1_ate.push_back(a1);
    s2_ate.push_back(a2);
    gains.push_back(a1 - a2);
    wins += a2 < a1;
    per_seed += fmt(" %.3f->%.3f", a1, a2);
  }
  const double med = median(gains);
  report(wins >= kMinWins && med > 0.0 && median(s2_ate) < median(s1_ate), "two_stage_benefit",
         fmt("stage1->stage2 ATE_o per seed:%s; %d/5 wins, median gain %.4f", per_seed.c_str(),
             wins, med));
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void ablation_machinery() {
  const auto dir = testing::scratch_dir("acceptance_ablate");
  std::vector<std::string> tables;
  for (const char* name : {"a.csv", "b.csv"}) {
    const std::vector<std::string> args = {
        "ablate", "--out", (dir / name).string(), "--count", "8", "--holdout", "3",
        "--duration", "20", "--epochs", "2", "--hidden", "128,64"};
    std::ostringstream out;
    std::ostringstream err;
    if (run(args, out, err) != kExitOk) {
      report(false, "ablation_machinery", "ablate failed: " + err.str());
      return;
    }
    tables.push_back(read_file(dir / name));
  }
  const auto rows = parse_csv(tables[0]);
  bool shape = rows.size() == 17 && rows[0].size() == 10 && rows[0][8] == "rpe";
  bool ordered = shape;
  std::string detail;
  if (shape) {
    for (int m = 0; m < 8; ++m) {
      const auto& h1 = rows[1 + m];
      const auto& h51 = rows[9 + m];
      shape = shape && h1[2] == "1" && h51[2] == "51";
      ordered = ordered && std::stod(h51[8]) > std::stod(h1[8]);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      ate_pairs.emplace_back(std::stod(rows[i][6]), std::stod(rows[i][7]));
    }
    detail = fmt("all-on RPE h1 %s vs h51 %s", rows[1][8].c_str(), rows[9][8].c_str());
  }
  const bool same = tables[0] == tables[1];
  report(shape && ordered && same, "ablation_machinery",
         fmt("16 rows %s, deterministic %s, h51 > h1 on every flag set %s; ",
             shape ? "yes" : "no", same ? "yes" : "no", ordered ? "yes" : "no") + detail);
}

void realtime_budget() {
  const TrainConfig config;
  const std::vector<int> sizes = config.layer_sizes();
  const Mlp net = init_mlp(3, sizes);
  std::mt19937_64 rng(4);
  const Eigen::VectorXd x = random_vector(rng, sizes.front());
  std::vector<double> ms;
  double sink = 0.0;
  for (int i = 0; i < 220; ++i) {
    const auto t0 = Clock::now();
    sink += forward(net, {x.data(), static_cast<std::size_t>(x.size())}).sum();
    if (i >= 20) ms.push_back(seconds_since(t0) * 1e3);
  }
  const double med = median(ms);
  report(med < kForwardBudgetMs && std::isfinite(sink), "realtime_budget",
         fmt("median forward %.4f ms for %zu parameters", med, net.parameter_count()));
}

void metric_ordering() {
  std::size_t bad = 0;
  double worst = -1e300;
  for (const auto& [o, u] : ate_pairs) {
    worst = std::max(worst, u - o);
    bad += u > o + kOrderSlack;
  }
  report(bad == 0 && !ate_pairs.empty(), "metric_ordering",
         fmt("%zu evaluated pairs, %zu violations, max(ATE_u - ATE_o) %.4f", ate_pairs.size(),
             bad, worst));
}

}  // namespace
}  // namespace autoodom

int main() {
  using namespace autoodom;
  gradient_oracle();
  umeyama_oracle();
  transfer_equivalence();
  rollout_fixed_point();
  realtime_budget();
  ablation_machinery();
  learnability();
  two_stage_benefit();
  metric_ordering();
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
