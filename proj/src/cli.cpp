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

#include "autoodom/cli.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>

#include "autoodom/io.hpp"
#include "autoodom/synthgym.hpp"

namespace autoodom {

namespace {

// Horizon standing in for a 1.02 s prediction interval at 50 Hz.
constexpr int kLongHorizon = 51;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<std::pair<std::string, std::string>> keys;  // key, description
  std::function<void(const RunConfig&, std::ostream&)> action;
};

TrainConfig train_config_from(const RunConfig& cfg, TrainConfig base) {
  base.epochs = cfg.get_int("epochs", base.epochs);
  base.batch_size = cfg.get_int("batch_size", base.batch_size);
  base.learning_rate = cfg.get_double("lr", base.learning_rate);
  base.final_lr_fraction = cfg.get_double("final_lr_fraction", base.final_lr_fraction);
  base.history_len = cfg.get_int("history_len", base.history_len);
  base.horizon = cfg.get_int("horizon", base.horizon);
  base.seed = cfg.get_u64("seed", base.seed);
  base.use_dp_hist = cfg.get_bool("use_dp_hist", base.use_dp_hist);
  base.use_actions = cfg.get_bool("use_actions", base.use_actions);
  base.hidden = cfg.get_int_list("hidden", base.hidden);
  base.segment_len = cfg.get_int("segment_len", base.segment_len);
  base.segments_per_batch = cfg.get_int("segments_per_batch", base.segments_per_batch);
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return base;
}

Pose2D start_pose(const Trajectory& traj) {
  const auto& f = traj.frames.front();
  return f.gt_pose ? *f.gt_pose : Pose2D::make(0.0, 0.0, f.yaw());
}

void report_loss(std::ostream& out, const Checkpoint& ckpt) {
  if (ckpt.loss_history.empty()) return;
  out << "loss: first " << num(ckpt.loss_history.front()) << ", last "
      << num(ckpt.loss_history.back()) << " over " << ckpt.loss_history.size()
      << " updates\n";
}

void cmd_gen(const RunConfig& cfg, std::ostream& out) {
  const auto dir = cfg.get_string("out_dir");
  if (!std::filesystem::is_directory(dir)) {
    throw UsageError("'out_dir' is not a directory: " + dir);
  }
  const Source flavor = [&] {
    try {
      return source_from_string(cfg.get_string("flavor", "sim"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  GaitSpec gait = GaitSpec::defaults();
  gait.gait_freq_hz = cfg.get_double("gait_freq", gait.gait_freq_hz);
  gait.vel_tracking_tau_s = cfg.get_double("tracking_tau", gait.vel_tracking_tau_s);
  gait.body_sway_amp = cfg.get_double("sway_amp", gait.body_sway_amp);
  const double amp_scale = cfg.get_double("joint_amp_scale", 1.0);
  for (double& a : gait.joint_amp) a *= amp_scale;
  NoiseSpec noise = flavor == Source::kRealLike ? NoiseSpec::real_like_defaults()
                                                : NoiseSpec::none();
  noise.gyro_std = cfg.get_double("gyro_std", noise.gyro_std);
  noise.accel_std = cfg.get_double("accel_std", noise.accel_std);
  noise.accel_bias_walk_std = cfg.get_double("accel_bias_walk_std", noise.accel_bias_walk_std);
  noise.joint_std = cfg.get_double("joint_std", noise.joint_std);
  noise.dp_feedback_std = cfg.get_double("dp_feedback_std", noise.dp_feedback_std);
  try {
    gait.validate();
    noise.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const int count = cfg.get_int("count", 1);
  const double duration = cfg.get_double("duration", 20.0);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  if (count < 1) throw UsageError("count must be >= 1");
  if (duration < 2.0) throw UsageError("duration must be >= 2 s");
  for (int i = 0; i < count; ++i) {
    const Trajectory traj =
        generate_trajectory(seed + static_cast<std::uint64_t>(i), duration, gait, noise, flavor);
    char name[32];
    std::snprintf(name, sizeof name, "traj_%04d.csv", i);
    save_trajectory(traj, std::filesystem::path(dir) / name);
  }
  out << "wrote " << count << " " << to_string(flavor) << " trajectories to " << dir << "\n";
}

void cmd_train1(const RunConfig& cfg, std::ostream& out) {
  const auto data_path = cfg.input_path("data");
  const auto out_path = cfg.output_path("out");
  TrainConfig config = train_config_from(cfg, TrainConfig{});
  config.stage = "stage1";
  const auto data = load_trajectories(data_path);
  const Checkpoint ckpt = train_stage1(data, config);
  save_checkpoint(ckpt, out_path);
  report_loss(out, ckpt);
  out << "stage-1 checkpoint: " << out_path.string() << " ("
      << ckpt.model.parameter_count() << " parameters)\n";
}

void cmd_transfer(const RunConfig& cfg, std::ostream& out) {
  const auto ckpt_path = cfg.input_path("ckpt");
  const auto data_path = cfg.input_path("data");
  const auto out_path = cfg.output_path("out");
  const Checkpoint stage1 = load_checkpoint(ckpt_path);
  const auto data = load_trajectories(data_path);
  const Checkpoint widened =
      zero_pad_transfer(stage1, stage1.layout.with_accel(true), data);
  save_checkpoint(widened, out_path);
  out << "transferred checkpoint: " << out_path.string() << " ("
      << widened.model.parameter_count() << " parameters)\n";
}

void cmd_train2(const RunConfig& cfg, std::ostream& out) {
  const auto ckpt_path = cfg.input_path("ckpt");
  const auto data_path = cfg.input_path("data");
  const auto out_path = cfg.output_path("out");
  std::vector<Trajectory> holdout;
  if (cfg.has("holdout")) holdout = load_trajectories(cfg.input_path("holdout"));
  TrainConfig base;
  base.epochs = 10;
  base.learning_rate = 3e-5;
  TrainConfig config = train_config_from(cfg, base);
  config.stage = "stage2";
  const Checkpoint loaded = load_checkpoint(ckpt_path);
  if (!loaded.layout.use_accel()) {
    load_checkpoint(ckpt_path, loaded.layout.with_accel(true));  // throws with hint
  }
  const auto data = load_trajectories(data_path);
  const Checkpoint ckpt = train_stage2(data, loaded, config, holdout);
  save_checkpoint(ckpt, out_path);
  report_loss(out, ckpt);
  if (ckpt.holdout_ate_o) out << "held-out rollout ATE_o: " << num(*ckpt.holdout_ate_o) << "\n";
  out << "stage-2 checkpoint: " << out_path.string() << "\n";
}

void cmd_rollout(const RunConfig& cfg, std::ostream& out) {
  const auto ckpt_path = cfg.input_path("ckpt");
  const auto traj_path = cfg.input_path("traj");
  const auto out_path = cfg.output_path("out");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  Trajectory traj = load_trajectory(traj_path);
  const RolloutResult result = rollout(ckpt, traj, start_pose(traj));
  traj.frames.resize(result.dense_positions.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    auto& f = traj.frames[k];
    f.gt_pose = Pose2D::make(result.dense_positions[k].x(),
                             result.dense_positions[k].y(), f.yaw());
  }
  save_trajectory(traj, out_path);
  out << "predicted path (" << traj.size() << " frames): " << out_path.string() << "\n";
}

std::pair<std::vector<Pose2D>, std::vector<Pose2D>> paired_poses(const RunConfig& cfg,
                                                                 Trajectory& gt_traj) {
  gt_traj = load_trajectory(cfg.input_path("gt"));
  const Trajectory pred_traj = load_trajectory(cfg.input_path("pred"));
  if (!gt_traj.has_ground_truth()) throw FormatError("gt file has no gt_x/gt_y/gt_yaw");
  if (!pred_traj.has_ground_truth()) throw FormatError("pred file has no gt_x/gt_y/gt_yaw");
  auto gt = gt_traj.gt_poses();
  auto pred = pred_traj.gt_poses();
  // Predictions may stop early (long horizons); compare the common prefix.
  if (pred.size() > gt.size()) throw FormatError("pred file is longer than gt file");
  gt.resize(pred.size());
  return {gt, pred};
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto out_path = cfg.output_path("out");
  Trajectory gt_traj;
  const auto [gt, pred] = paired_poses(cfg, gt_traj);
  const double duration = static_cast<double>(gt.size() - 1) * gt_traj.dt();
  std::vector<std::pair<std::string, EvalReport>> rows;
  rows.emplace_back("pred", evaluate(gt, pred, duration));
  if (cfg.get_bool("baseline", false)) {
    const auto base_pos = baseline_cmd_integration(gt_traj);
    std::vector<Pose2D> base;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      base.push_back(Pose2D::make(base_pos[k].x(), base_pos[k].y(), gt_traj.frames[k].yaw()));
    }
    rows.emplace_back("baseline_cmd", evaluate(gt, base, duration));
  }
  const std::string table = format_eval_table(rows);
  write_file_atomic(out_path, table);
  out << table;
}

void cmd_plot(const RunConfig& cfg, std::ostream& out) {
  const auto out_path = cfg.output_path("out");
  Trajectory gt_traj;
  const auto [gt, pred] = paired_poses(cfg, gt_traj);
  std::vector<Eigen::Vector2d> g;
  std::vector<Eigen::Vector2d> p;
  for (const auto& pose : gt) g.push_back(pose.position());
  for (const auto& pose : pred) p.push_back(pose.position());
  const std::string title = cfg.get_string("title", "ground truth vs prediction");
  write_file_atomic(out_path, render_overlay_svg(g, p, title));
  auto csv_path = out_path;
  csv_path.replace_extension(".csv");
  write_file_atomic(csv_path, render_overlay_csv(g, p));
  out << "plot: " << out_path.string() << " and " << csv_path.string() << "\n";
}

void cmd_ablate(const RunConfig& cfg, std::ostream& out) {
  const auto out_path = cfg.output_path("out");
  AblationSettings settings;
  const int count = cfg.get_int("count", 20);
  const int holdout = cfg.get_int("holdout", 5);
  if (count < 1 || holdout < 1) throw UsageError("count and holdout must be >= 1");
  settings.train_count = static_cast<std::size_t>(count);
  settings.holdout_count = static_cast<std::size_t>(holdout);
  settings.duration_s = cfg.get_double("duration", 20.0);
  if (settings.duration_s < 2.0) throw UsageError("duration must be >= 2 s");
  settings.seed = cfg.get_u64("seed", 1);
  TrainConfig base;
  base.epochs = 4;
  base.hidden = {128, 64};
  settings.base = train_config_from(cfg, base);
  const auto rows = run_ablation(settings);
  const std::string table = format_ablation_table(rows);
  write_file_atomic(out_path, table);
  out << table;
}

std::vector<Command> commands() {
  const std::vector<std::pair<std::string, std::string>> train_keys = {
      {"epochs", "training epochs"},
      {"batch_size", "windows per update"},
      {"lr", "initial learning rate"},
      {"final_lr_fraction", "cosine schedule floor as a fraction of lr"},
      {"history_len", "frames per window"},
      {"horizon", "prediction interval in frames"},
      {"hidden", "hidden layer widths, comma separated"},
      {"use_dp_hist", "feed the displacement-history channel"},
      {"use_actions", "feed the policy actions channel"},
      {"seed", "random seed"},
  };
  auto with = [](std::vector<std::pair<std::string, std::string>> a,
                 const std::vector<std::pair<std::string, std::string>>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {
      {"gen", "generate synthetic trajectories",
       {{"out_dir", "output directory"},
        {"count", "number of trajectories"},
        {"duration", "seconds per trajectory"},
        {"seed", "seed of the first trajectory"},
        {"flavor", "sim or real-like"},
        {"gait_freq", "gait frequency (Hz)"},
        {"tracking_tau", "velocity tracking time constant (s)"},
        {"sway_amp", "lateral sway amplitude (m/s)"},
        {"joint_amp_scale", "multiplier on every joint amplitude"},
        {"gyro_std", "gyro noise (rad/s)"},
        {"accel_std", "accelerometer noise (m/s^2)"},
        {"accel_bias_walk_std", "accelerometer bias walk (m/s^2/sqrt(s))"},
        {"joint_std", "joint noise (rad)"},
        {"dp_feedback_std", "displacement-history noise (m)"}},
       cmd_gen},
      {"train1", "stage-1 teacher-forced pre-training on sim data",
       with({{"data", "trajectory file or directory"}, {"out", "checkpoint path"}},
            train_keys),
       cmd_train1},
      {"transfer", "zero-pad the input layer to add the accelerometer",
       {{"ckpt", "stage-1 checkpoint"},
        {"data", "stage-2 trajectories for accelerometer statistics"},
        {"out", "checkpoint path"}},
       cmd_transfer},
      {"train2", "stage-2 autoregressive fine-tuning",
       with({{"ckpt", "transferred checkpoint"},
             {"data", "real-like trajectory file or directory"},
             {"holdout", "held-out trajectories for the final ATE_o"},
             {"out", "checkpoint path"},
             {"segment_len", "frames per unrolled segment"},
             {"segments_per_batch", "segments per update"}},
            train_keys),
       cmd_train2},
      {"rollout", "dead-reckon a trajectory with a checkpoint",
       {{"ckpt", "checkpoint"}, {"traj", "trajectory file"}, {"out", "predicted path file"}},
       cmd_rollout},
      {"eval", "ATE_o, ATE_u and RPE of a predicted path",
       {{"gt", "ground-truth trajectory file"},
        {"pred", "predicted trajectory file"},
        {"out", "report CSV"},
        {"baseline", "also evaluate command integration"}},
       cmd_eval},
      {"plot", "SVG overlay of ground truth and prediction",
       {{"gt", "ground-truth trajectory file"},
        {"pred", "predicted trajectory file"},
        {"out", "SVG path (a CSV is written next to it)"},
        {"title", "figure title"}},
       cmd_plot},
      {"ablate", "stage-1 input-modality ablation grid",
       with({{"out", "table CSV"},
             {"count", "training trajectories"},
             {"holdout", "held-out trajectories"},
             {"duration", "seconds per trajectory"}},
            train_keys),
       cmd_ablate},
  };
}

}  // namespace

std::vector<AblationRow> run_ablation(const AblationSettings& settings) {
  const GaitSpec gait = GaitSpec::defaults();
  const auto train = generate_dataset(settings.seed, settings.train_count,
                                      settings.duration_s, gait, NoiseSpec::none(),
                                      Source::kSim);
  const auto holdout = generate_dataset(settings.seed + 100000, settings.holdout_count,
                                        settings.duration_s, gait, NoiseSpec::none(),
                                        Source::kSim);
  std::vector<AblationRow> rows;
  for (int horizon : {1, kLongHorizon}) {
    for (int mask = 7; mask >= 0; --mask) {
      AblationRow row;
      row.horizon = horizon;
      row.use_accel = mask & 4;
      row.use_dp_hist = mask & 2;
      row.use_actions = mask & 1;
      TrainConfig config = settings.base;
      config.horizon = horizon;
      config.use_accel = row.use_accel;
      config.use_dp_hist = row.use_dp_hist;
      config.use_actions = row.use_actions;
      config.stage = "ablation";
      const Checkpoint ckpt = train_teacher_forced(train, config);
      row.tf_rpe = teacher_forced_rpe(ckpt, holdout);
      for (const auto& traj : holdout) {
        const EvalReport r = evaluate_rollout(traj, rollout(ckpt, traj, start_pose(traj)));
        row.ate_o += r.ate_o;
        row.ate_u += r.ate_u;
        row.rpe += r.rpe;
      }
      const auto n = static_cast<double>(holdout.size());
      row.ate_o /= n;
      row.ate_u /= n;
      row.rpe /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_ablation_table(std::span<const AblationRow> rows) {
  std::string out = "row,dt_s,horizon,a_t,p_t,A_t,ate_o,ate_u,rpe,tf_rpe\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += std::to_string(i + 1) + "," + num(0.02 * r.horizon) + "," +
           std::to_string(r.horizon) + "," + (r.use_accel ? "1" : "0") + "," +
           (r.use_dp_hist ? "1" : "0") + "," + (r.use_actions ? "1" : "0") + "," +
           num(r.ate_o) + "," + num(r.ate_u) + "," + num(r.rpe) + "," + num(r.tf_rpe) +
           "\n";
  }
  return out;
}

std::string format_eval_table(
    std::span<const std::pair<std::string, EvalReport>> rows) {
  std::string out =
      "name,ate_o,ate_u,rpe,frames,duration_s,ff_rot_rad,ff_tx,ff_ty,um_rot_rad,um_tx,um_ty\n";
  for (const auto& [name, r] : rows) {
    out += name + "," + num(r.ate_o) + "," + num(r.ate_u) + "," + num(r.rpe) + "," +
           std::to_string(r.length) + "," + num(r.duration_s) + "," +
           num(r.first_frame_alignment.angle()) + "," +
           num(r.first_frame_alignment.translation.x()) + "," +
           num(r.first_frame_alignment.translation.y()) + "," +
           num(r.umeyama_alignment.angle()) + "," +
           num(r.umeyama_alignment.translation.x()) + "," +
           num(r.umeyama_alignment.translation.y()) + "\n";
  }
  return out;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned proprioceptive odometry toolkit", "autoodom"};
  app.require_subcommand(1);
  const auto cmds = commands();
  std::vector<std::map<std::string, std::string>> flag_values(cmds.size());
  std::vector<std::string> config_files(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    sub->add_option("--config", config_files[i], "key = value configuration file");
    for (const auto& [key, help] : cmds[i].keys) {
      sub->add_option("--" + key, flag_values[i][key], help);
    }
    subs.push_back(sub);
  }

  std::vector<std::string> argv_storage(args.begin(), args.end());
  std::reverse(argv_storage.begin(), argv_storage.end());
  try {
    app.parse(argv_storage);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      std::set<std::string> allowed;
      for (const auto& key : cmds[i].keys) allowed.insert(key.first);
      RunConfig cfg(allowed);
      if (!config_files[i].empty()) cfg.load_file(config_files[i]);
      for (const auto& [key, help] : cmds[i].keys) {
        if (subs[i]->get_option("--" + key)->count() > 0) {
          cfg.set(key, flag_values[i][key]);
        }
      }
      cmds[i].action(cfg, out);
      return kExitOk;
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitData;
    }
  }
  return kExitUsage;
}

}  // namespace autoodom
