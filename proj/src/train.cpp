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

#include "autoodom/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "autoodom/synthgym.hpp"

namespace autoodom {

namespace {

// A checkpoint read back from disk holds the floor rounded up to float.
bool at_std_floor(double s) {
  return s <= static_cast<double>(norm_std_to_float(kMinNormStd));
}

struct Sample {
  std::size_t traj;
  std::size_t t;
};

double cosine_lr(const TrainConfig& config, long step, long total_steps) {
  if (total_steps <= 1) return config.learning_rate;
  const double progress =
      static_cast<double>(step) / static_cast<double>(total_steps - 1);
  const double floor = config.final_lr_fraction;
  return config.learning_rate *
         (floor + (1.0 - floor) * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * progress)));
}

std::vector<FeatureTable> build_tables(std::span<const Trajectory> dataset,
                                       const SensorLayout& layout) {
  std::vector<FeatureTable> tables;
  tables.reserve(dataset.size());
  for (const auto& traj : dataset) tables.emplace_back(traj, layout);
  return tables;
}

void require_ground_truth(std::span<const Trajectory> dataset) {
  for (const auto& traj : dataset) {
    if (!traj.has_ground_truth()) {
      throw std::invalid_argument("training trajectory lacks ground truth");
    }
  }
}

// Windows whose target increment fits inside the trajectory.
std::vector<Sample> all_samples(std::span<const Trajectory> dataset,
                                std::size_t horizon) {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t t = 0; t + horizon < dataset[i].size(); ++t) {
      samples.push_back({i, t});
    }
  }
  return samples;
}

Eigen::Vector2d body_step(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                          double yaw) {
  return yaw_rotation(yaw).transpose() * (to - from);
}

}  // namespace

SensorLayout TrainConfig::layout() const {
  return SensorLayout(use_accel, use_dp_hist, use_actions, history_len, horizon);
}

std::vector<int> TrainConfig::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(layout().window_dim());
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kOutputDim);
  return sizes;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (history_len < 1) throw std::invalid_argument("history_len must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw std::invalid_argument("final_lr_fraction must be in (0, 1]");
  }
  if (segment_len < 1 || segments_per_batch < 1) {
    throw std::invalid_argument("segment settings must be >= 1");
  }
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
  }
}

std::string TrainConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "epochs=" << epochs << ";batch_size=" << batch_size
     << ";learning_rate=" << learning_rate
     << ";final_lr_fraction=" << final_lr_fraction
     << ";history_len=" << history_len << ";horizon=" << horizon
     << ";seed=" << seed << ";stage=" << stage << ";use_accel=" << use_accel
     << ";use_dp_hist=" << use_dp_hist << ";use_actions=" << use_actions
     << ";hidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    os << (i ? "," : "") << hidden[i];
  }
  os << ";segment_len=" << segment_len
     << ";segments_per_batch=" << segments_per_batch;
  return os.str();
}

std::string TrainConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Checkpoint::validate() const {
  model.validate();
  if (model.input_dim() != layout.window_dim()) {
    throw std::invalid_argument(
        "checkpoint network input width " + std::to_string(model.input_dim()) +
        " does not match layout window " + std::to_string(layout.window_dim()));
  }
}

NormStats compute_norm_stats(std::span<const Trajectory> dataset,
                             const SensorLayout& layout) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  const auto h = static_cast<Eigen::Index>(layout.history_len());
  const Eigen::Index d = layout.input_dim();
  const auto tables = build_tables(dataset, layout);

  // Feature (i, c) of the window ending at t is row t - h + 1 + i, so over
  // all valid windows it ranges over rows i .. n - h + i.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(h * d);
  double count = 0.0;
  for (const auto& table : tables) {
    const auto n = static_cast<Eigen::Index>(table.frames());
    if (n < h) continue;
    const Eigen::Index windows = n - h + 1;
    for (Eigen::Index i = 0; i < h; ++i) {
      sum.segment(i * d, d) +=
          table.rows().middleRows(i, windows).colwise().sum().transpose();
    }
    count += static_cast<double>(windows);
  }
  if (count == 0.0) {
    throw std::invalid_argument("no trajectory is long enough for one window");
  }
  NormStats stats;
  stats.mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(h * d);
  for (const auto& table : tables) {
    const auto n = static_cast<Eigen::Index>(table.frames());
    if (n < h) continue;
    const Eigen::Index windows = n - h + 1;
    for (Eigen::Index i = 0; i < h; ++i) {
      const Eigen::RowVectorXd mu = stats.mean.segment(i * d, d).transpose();
      sq.segment(i * d, d) += (table.rows().middleRows(i, windows).rowwise() - mu)
                                  .array()
                                  .square()
                                  .colwise()
                                  .sum()
                                  .transpose()
                                  .matrix();
    }
  }
  stats.std = (sq / count).cwiseSqrt().cwiseMax(kMinNormStd);
  return stats;
}

Checkpoint untrained_checkpoint(std::span<const Trajectory> dataset,
                                const TrainConfig& config) {
  config.validate();
  Checkpoint ckpt;
  ckpt.layout = config.layout();
  const auto sizes = config.layer_sizes();
  ckpt.model = init_mlp(config.seed, sizes);
  ckpt.model.norm = compute_norm_stats(dataset, ckpt.layout);
  // A feature that never varies in training gets no gradient; silence its
  // column so unseen variation there (sensor noise) cannot leak through.
  auto& w = ckpt.model.layers.front().weight;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    if (at_std_floor(ckpt.model.norm.std(c))) w.col(c).setZero();
  }
  ckpt.stage = config.stage;
  ckpt.config_digest = config.digest();
  return ckpt;
}

Checkpoint train_teacher_forced(std::span<const Trajectory> dataset,
                                const TrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  require_ground_truth(dataset);
  Checkpoint ckpt = untrained_checkpoint(dataset, config);
  const SensorLayout& layout = ckpt.layout;
  const auto horizon = static_cast<std::size_t>(layout.horizon());
  const auto tables = build_tables(dataset, layout);

  std::vector<Sample> samples = all_samples(dataset, horizon);
  if (samples.empty()) throw std::invalid_argument("no training windows");
  // Targets are fixed under teacher forcing.
  Eigen::MatrixXd targets(kOutputDim, static_cast<Eigen::Index>(samples.size()));
  std::vector<std::size_t> target_col(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    targets.col(static_cast<Eigen::Index>(s)) =
        gt_increment(dataset[samples[s].traj], samples[s].t, horizon);
    target_col[s] = s;
  }

  std::mt19937_64 rng(config.seed + 1);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const long updates_per_epoch =
      static_cast<long>((samples.size() + batch - 1) / batch);
  const long total = updates_per_epoch * config.epochs;
  OptimizerState opt =
      OptimizerState::for_network(ckpt.model, AdamConfig{config.learning_rate});
  Eigen::MatrixXd x(layout.window_dim(), static_cast<Eigen::Index>(batch));
  Eigen::MatrixXd y(kOutputDim, static_cast<Eigen::Index>(batch));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(target_col.begin(), target_col.end(), rng);
    for (std::size_t first = 0; first < samples.size(); first += batch) {
      const std::size_t count = std::min(batch, samples.size() - first);
      if (x.cols() != static_cast<Eigen::Index>(count)) {
        x.resize(Eigen::NoChange, static_cast<Eigen::Index>(count));
        y.resize(Eigen::NoChange, static_cast<Eigen::Index>(count));
      }
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t s = target_col[first + j];
        const auto col = static_cast<Eigen::Index>(j);
        tables[samples[s].traj].window(
            samples[s].t,
            std::span<double>(x.col(col).data(), static_cast<std::size_t>(x.rows())));
        y.col(col) = targets.col(static_cast<Eigen::Index>(s));
      }
      opt.config.learning_rate = cosine_lr(config, opt.step, total);
      const LossAndGrad lg = loss_and_grad(ckpt.model, x, y);
      ckpt.loss_history.push_back(lg.loss);
      adam_update(opt, ckpt.model, lg.grad);
    }
    if (x.cols() != static_cast<Eigen::Index>(batch)) {
      x.resize(Eigen::NoChange, static_cast<Eigen::Index>(batch));
      y.resize(Eigen::NoChange, static_cast<Eigen::Index>(batch));
    }
  }
  return ckpt;
}

Checkpoint train_stage1(std::span<const Trajectory> dataset_sim,
                        const TrainConfig& config) {
  if (config.use_accel) {
    throw std::invalid_argument("stage 1 layout must exclude the accelerometer");
  }
  if (dataset_sim.empty()) throw std::invalid_argument("empty dataset");
  for (const auto& traj : dataset_sim) {
    if (traj.meta.source != Source::kSim) {
      throw std::invalid_argument("stage 1 expects sim trajectories");
    }
  }
  return train_teacher_forced(dataset_sim, config);
}

Checkpoint zero_pad_transfer(const Checkpoint& stage1,
                             const SensorLayout& new_layout,
                             std::span<const Trajectory> stage2_data) {
  stage1.validate();
  const SensorLayout& old_layout = stage1.layout;
  if (old_layout.use_accel()) {
    throw std::invalid_argument("checkpoint already has an accelerometer channel");
  }
  if (!(new_layout == old_layout.with_accel(true))) {
    throw std::invalid_argument(
        "transfer target must equal the source layout plus accel");
  }
  const int h = new_layout.history_len();
  const int d_old = old_layout.input_dim();
  const int d_new = new_layout.input_dim();
  const int accel_off = *new_layout.offset(Channel::kAccel);
  const int accel_w = channel_width(Channel::kAccel);

  // Column map: new index -> old index, or -1 for the accel block.
  std::vector<int> source(static_cast<std::size_t>(h * d_new), -1);
  for (int i = 0; i < h; ++i) {
    for (int c = 0; c < d_new; ++c) {
      if (c >= accel_off && c < accel_off + accel_w) continue;
      const int old_c = c < accel_off ? c : c - accel_w;
      source[static_cast<std::size_t>(i * d_new + c)] = i * d_old + old_c;
    }
  }

  NormStats fresh = NormStats::identity(h * d_new);
  if (!stage2_data.empty()) fresh = compute_norm_stats(stage2_data, new_layout);

  Checkpoint out = stage1;
  out.layout = new_layout;
  out.stage = "transferred";
  const DenseLayer& first = stage1.model.layers.front();
  DenseLayer& widened = out.model.layers.front();
  widened.weight = Eigen::MatrixXd::Zero(first.weight.rows(), h * d_new);
  out.model.norm = fresh;
  for (std::size_t j = 0; j < source.size(); ++j) {
    const int src = source[j];
    if (src < 0) continue;
    const auto col = static_cast<Eigen::Index>(j);
    widened.weight.col(col) = first.weight.col(src);
    // Degenerate stage-1 features with a silent column take stage-2 stats;
    // the output is unchanged either way.
    const bool refresh = !stage2_data.empty() &&
                         at_std_floor(stage1.model.norm.std(src)) &&
                         first.weight.col(src).isZero(0.0);
    if (refresh) continue;
    out.model.norm.mean(col) = stage1.model.norm.mean(src);
    out.model.norm.std(col) = stage1.model.norm.std(src);
  }
  out.validate();
  return out;
}

Predictor model_predictor(const Checkpoint& ckpt) {
  return [&model = ckpt.model](std::size_t, std::span<const double> window) {
    return forward(model, window);
  };
}

namespace {

// Shared unroll used by inference and stage-2 training. `on_step` sees the
// window fed at each anchor and the prediction made from it.
template <typename OnStep>
RolloutResult unroll(const Predictor& predict, FeatureTable& table,
                     const Trajectory& traj, const Eigen::Vector2d& start,
                     const RolloutOptions& options, OnStep&& on_step) {
  const SensorLayout& layout = table.layout();
  const std::size_t n = traj.size();
  const std::size_t end = std::min(options.end, n);
  const std::size_t begin = options.begin;
  const auto h = static_cast<std::size_t>(layout.horizon());
  if (begin >= end) throw std::invalid_argument("empty rollout range");

  const std::vector<double> yaws = traj.yaws();
  RolloutResult result;
  auto& dense = result.dense_positions;
  dense.resize(begin + 1);
  const bool gt = traj.has_ground_truth();
  for (std::size_t f = 0; f <= begin; ++f) {
    dense[f] = gt ? Eigen::Vector2d(start + (traj.frames[f].gt_pose->position() -
                                            traj.frames[begin].gt_pose->position()))
                  : start;
  }
  auto refresh_dp = [&](std::size_t f) {
    table.set_dp_hist(f, dp_history(dense, yaws[f], f, kDpHistoryLag));
  };
  if (layout.use_dp_hist()) {
    for (std::size_t f = 0; f <= begin; ++f) refresh_dp(f);
  }

  std::vector<double> window(static_cast<std::size_t>(layout.window_dim()));
  std::size_t t = begin;
  result.frames.push_back(t);
  result.positions.push_back(dense[t]);
  while (t + h < end) {
    table.window(t, window);
    const Eigen::Vector2d inc = predict(t, window);
    on_step(t, std::span<const double>(window), inc);
    const Eigen::Vector2d next = dense[t] + yaw_rotation(yaws[t]) * inc;
    for (std::size_t j = 1; j <= h; ++j) {
      const double a = static_cast<double>(j) / static_cast<double>(h);
      dense.push_back((1.0 - a) * dense[t] + a * next);
      if (layout.use_dp_hist()) refresh_dp(t + j);
    }
    result.increments.push_back(inc);
    t += h;
    result.frames.push_back(t);
    result.positions.push_back(next);
  }
  return result;
}

}  // namespace

RolloutResult rollout(const Predictor& predict, const SensorLayout& layout,
                      const Trajectory& traj, const Eigen::Vector2d& start,
                      const RolloutOptions& options) {
  FeatureTable table(traj, layout);
  return unroll(predict, table, traj, start, options,
                [](std::size_t, std::span<const double>, const Eigen::Vector2d&) {});
}

RolloutResult rollout(const Checkpoint& ckpt, const Trajectory& traj,
                      const Pose2D& start) {
  ckpt.validate();
  return rollout(model_predictor(ckpt), ckpt.layout, traj, start.position());
}

EvalReport evaluate_rollout(const Trajectory& traj, const RolloutResult& result) {
  std::vector<Pose2D> gt;
  std::vector<Pose2D> pred;
  for (std::size_t i = 0; i < result.frames.size(); ++i) {
    const auto& frame = traj.frames.at(result.frames[i]);
    if (!frame.gt_pose) throw std::invalid_argument("trajectory lacks ground truth");
    gt.push_back(*frame.gt_pose);
    pred.push_back(Pose2D{result.positions[i].x(), result.positions[i].y(),
                          normalize_angle(frame.yaw())});
  }
  const double duration =
      static_cast<double>(result.frames.back() - result.frames.front()) * traj.dt();
  return evaluate(gt, pred, duration);
}

Checkpoint train_stage2(std::span<const Trajectory> dataset_real_like,
                        const Checkpoint& transferred, const TrainConfig& config,
                        std::span<const Trajectory> holdout) {
  config.validate();
  transferred.validate();
  if (!transferred.layout.use_accel()) {
    throw std::invalid_argument(
        "stage 2 needs a transferred checkpoint with the accelerometer channel");
  }
  if (transferred.layout.horizon() != 1) {
    throw std::invalid_argument("stage 2 fine-tuning expects a one-frame horizon");
  }
  if (dataset_real_like.empty()) throw std::invalid_argument("empty dataset");
  require_ground_truth(dataset_real_like);
  Checkpoint ckpt = transferred;
  if (config.epochs == 0) return ckpt;

  ckpt.stage = "stage2";
  ckpt.config_digest = config.digest();
  ckpt.loss_history.clear();
  const SensorLayout& layout = ckpt.layout;
  auto tables = build_tables(dataset_real_like, layout);

  std::size_t total_steps = 0;
  for (const auto& traj : dataset_real_like) total_steps += traj.size() - 1;
  const auto seg = static_cast<std::size_t>(config.segment_len);
  const auto per_batch = static_cast<std::size_t>(config.segments_per_batch);
  const long updates_per_epoch =
      std::max<long>(1, static_cast<long>(total_steps / (seg * per_batch)));
  const long total = updates_per_epoch * config.epochs;

  std::mt19937_64 rng(config.seed + 2);
  std::uniform_int_distribution<std::size_t> pick_traj(0, dataset_real_like.size() - 1);
  OptimizerState opt =
      OptimizerState::for_network(ckpt.model, AdamConfig{config.learning_rate});
  const Predictor predict = model_predictor(ckpt);

  std::vector<double> xs;
  std::vector<double> ys;
  for (long update = 0; update < total; ++update) {
    xs.clear();
    ys.clear();
    for (std::size_t s = 0; s < per_batch; ++s) {
      const std::size_t i = pick_traj(rng);
      const Trajectory& traj = dataset_real_like[i];
      const std::size_t steps = std::min(seg, traj.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_start(0, traj.size() - 1 - steps);
      RolloutOptions range;
      range.begin = pick_start(rng);
      range.end = range.begin + steps + 1;
      const Eigen::Vector2d start = traj.frames[range.begin].gt_pose->position();
      unroll(predict, tables[i], traj, start, range,
             [&](std::size_t t, std::span<const double> window,
                 const Eigen::Vector2d&) {
               xs.insert(xs.end(), window.begin(), window.end());
               const Eigen::Vector2d target = gt_increment(traj, t, 1);
               ys.push_back(target.x());
               ys.push_back(target.y());
             });
    }
    const auto cols = static_cast<Eigen::Index>(ys.size() / 2);
    const Eigen::Map<const Eigen::MatrixXd> x(xs.data(), layout.window_dim(), cols);
    const Eigen::Map<const Eigen::MatrixXd> y(ys.data(), kOutputDim, cols);
    opt.config.learning_rate = cosine_lr(config, opt.step, total);
    const LossAndGrad lg = loss_and_grad(ckpt.model, x, y);
    ckpt.loss_history.push_back(lg.loss);
    adam_update(opt, ckpt.model, lg.grad);
  }
  if (!holdout.empty()) ckpt.holdout_ate_o = mean_rollout_ate_o(ckpt, holdout);
  return ckpt;
}

double teacher_forced_rpe(const Checkpoint& ckpt,
                          std::span<const Trajectory> dataset) {
  ckpt.validate();
  const SensorLayout& layout = ckpt.layout;
  const auto horizon = static_cast<std::size_t>(layout.horizon());
  constexpr std::size_t kChunk = 512;
  double sum = 0.0;
  std::size_t count = 0;
  Eigen::MatrixXd x(layout.window_dim(), static_cast<Eigen::Index>(kChunk));
  Eigen::MatrixXd y(kOutputDim, static_cast<Eigen::Index>(kChunk));
  for (const auto& traj : dataset) {
    const FeatureTable table(traj, layout);
    for (std::size_t first = 0; first + horizon < traj.size(); first += kChunk) {
      const std::size_t last = std::min(first + kChunk, traj.size() - horizon);
      const auto cols = static_cast<Eigen::Index>(last - first);
      for (std::size_t t = first; t < last; ++t) {
        const auto col = static_cast<Eigen::Index>(t - first);
        table.window(t, std::span<double>(x.col(col).data(),
                                          static_cast<std::size_t>(x.rows())));
        y.col(col) = gt_increment(traj, t, horizon);
      }
      const Eigen::MatrixXd pred = forward_batch(ckpt.model, x.leftCols(cols));
      sum += (pred - y.leftCols(cols)).squaredNorm();
      count += static_cast<std::size_t>(cols);
    }
  }
  if (count == 0) throw std::invalid_argument("no evaluation windows");
  return std::sqrt(sum / static_cast<double>(count));
}

double baseline_teacher_forced_rpe(std::span<const Trajectory> dataset,
                                   int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const auto h = static_cast<std::size_t>(horizon);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& traj : dataset) {
    const auto baseline = baseline_cmd_integration(traj);
    const auto yaws = traj.yaws();
    for (std::size_t t = 0; t + h < traj.size(); ++t) {
      const Eigen::Vector2d pred = body_step(baseline[t], baseline[t + h], yaws[t]);
      sum += (gt_increment(traj, t, h) - pred).squaredNorm();
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no evaluation windows");
  return std::sqrt(sum / static_cast<double>(count));
}

double mean_rollout_ate_o(const Checkpoint& ckpt,
                          std::span<const Trajectory> dataset) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  double sum = 0.0;
  for (const auto& traj : dataset) {
    const auto result = rollout(ckpt, traj, *traj.frames.front().gt_pose);
    sum += evaluate_rollout(traj, result).ate_o;
  }
  return sum / static_cast<double>(dataset.size());
}

}  // namespace autoodom
