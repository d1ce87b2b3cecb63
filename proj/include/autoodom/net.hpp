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

// Dense regression network mapping a flattened observation window to a
// planar displacement, with exact backpropagation of the mean squared error
// and a bias-corrected adaptive-moment optimizer.

#ifndef AUTOODOM_NET_HPP_
#define AUTOODOM_NET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace autoodom {

inline constexpr int kOutputDim = 2;
inline constexpr double kMinNormStd = 1e-6;

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Per-feature input standardization, (x - mean) / std.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static NormStats identity(Eigen::Index dim);
};

// Hidden layers use ELU (alpha = 1); the output layer is linear.
struct Mlp {
  std::vector<DenseLayer> layers;
  NormStats norm;

  std::vector<int> layer_sizes() const;
  int input_dim() const;
  std::size_t parameter_count() const;
  // Throws std::invalid_argument on incompatible shapes or std < 1e-6.
  void validate() const;
};

// He-style fan-in scaled weights, zero biases, identity normalization.
Mlp init_mlp(std::uint64_t seed, std::span<const int> layer_sizes);

std::size_t parameter_count(std::span<const int> layer_sizes);

double elu(double z);

Eigen::Vector2d forward(const Mlp& net, std::span<const double> x);

// Columns of `inputs` are samples; returns a 2 x N matrix.
Eigen::MatrixXd forward_batch(const Mlp& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs);

// Same shapes as Mlp::layers.
struct MlpGradient {
  std::vector<DenseLayer> layers;

  static MlpGradient zeros_like(const Mlp& net);
};

struct LossAndGrad {
  double loss = 0.0;
  MlpGradient grad;
};

// loss = (1/N) sum_j ||target_j - f(x_j)||^2 over the N columns.
LossAndGrad loss_and_grad(const Mlp& net,
                          const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          const Eigen::Ref<const Eigen::MatrixXd>& targets);

double mse_loss(const Mlp& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                const Eigen::Ref<const Eigen::MatrixXd>& targets);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  long step = 0;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;

  static OptimizerState for_network(const Mlp& net, const AdamConfig& config);
};

// One bias-corrected step; increments state.step.
void adam_update(OptimizerState& state, Mlp& net, const MlpGradient& grad);

// Rounds every parameter and normalization value to float32.
void round_to_float(Mlp& net);

// float32 narrowing of a normalization std that stays >= 1e-6.
float norm_std_to_float(double v);

}  // namespace autoodom

#endif  // AUTOODOM_NET_HPP_
