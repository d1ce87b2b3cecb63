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

#include "autoodom/net.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace autoodom {

namespace {

constexpr double kOutputInitGain = 0.01;

void check_shapes(const std::vector<DenseLayer>& a,
                  const std::vector<DenseLayer>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("layer count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].weight.rows() != b[i].weight.rows() ||
        a[i].weight.cols() != b[i].weight.cols() ||
        a[i].bias.size() != b[i].bias.size()) {
      throw std::invalid_argument("shape mismatch in layer " +
                                  std::to_string(i));
    }
  }
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                   Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

Eigen::MatrixXd normalized(const Mlp& net,
                           const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(inputs.rows()) +
                                " features, network expects " +
                                std::to_string(net.input_dim()));
  }
  return ((inputs.colwise() - net.norm.mean).array().colwise() /
          net.norm.std.array())
      .matrix();
}

void apply_elu(Eigen::MatrixXd& z) {
  z = z.unaryExpr([](double v) { return elu(v); });
}

}  // namespace

NormStats NormStats::identity(Eigen::Index dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

int Mlp::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  }
  return n;
}

void Mlp::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weight.rows()) {
      throw std::invalid_argument("bias size mismatch in layer " +
                                  std::to_string(i));
    }
    if (i > 0 && l.weight.cols() != layers[i - 1].weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  " input width does not match previous output");
    }
  }
  if (layers.back().weight.rows() != kOutputDim) {
    throw std::invalid_argument("output width must be 2");
  }
  if (norm.mean.size() != input_dim() || norm.std.size() != input_dim()) {
    throw std::invalid_argument("normalization stats length mismatch");
  }
  if ((norm.std.array() < kMinNormStd).any()) {
    throw std::invalid_argument("normalization std below 1e-6");
  }
}

std::size_t parameter_count(std::span<const int> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < layer_sizes.size(); ++i) {
    n += static_cast<std::size_t>(layer_sizes[i - 1]) * layer_sizes[i] +
         layer_sizes[i];
  }
  return n;
}

Mlp init_mlp(std::uint64_t seed, std::span<const int> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("network needs at least an input and output size");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  if (layer_sizes.back() != kOutputDim) {
    throw std::invalid_argument("output width must be 2");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mlp net;
  for (std::size_t i = 1; i < layer_sizes.size(); ++i) {
    const int fan_in = layer_sizes[i - 1];
    const bool output = i + 1 == layer_sizes.size();
    // Per-step increments are centimetres, so the output layer starts small.
    const double scale = output ? kOutputInitGain * std::sqrt(1.0 / fan_in)
                                : std::sqrt(2.0 / fan_in);
    DenseLayer layer;
    layer.weight.resize(layer_sizes[i], fan_in);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        layer.weight(r, c) = scale * normal(rng);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(layer_sizes[i]);
    net.layers.push_back(std::move(layer));
  }
  net.norm = NormStats::identity(layer_sizes.front());
  return net;
}

double elu(double z) { return z > 0.0 ? z : std::expm1(z); }

Eigen::Vector2d forward(const Mlp& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " features, network expects " +
                                std::to_string(net.input_dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> in(x.data(),
                                             static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd a =
      ((in - net.norm.mean).array() / net.norm.std.array()).matrix();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    Eigen::VectorXd z = l.bias;
    z.noalias() += l.weight * a;
    if (i + 1 < net.layers.size()) {
      a = z.unaryExpr([](double v) { return elu(v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::MatrixXd forward_batch(const Mlp& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  Eigen::MatrixXd a = normalized(net, inputs);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    Eigen::MatrixXd z = l.bias.replicate(1, a.cols());
    z.noalias() += l.weight * a;
    if (i + 1 < net.layers.size()) apply_elu(z);
    a = std::move(z);
  }
  return a;
}

MlpGradient MlpGradient::zeros_like(const Mlp& net) {
  return {autoodom::zeros_like(net.layers)};
}

LossAndGrad loss_and_grad(const Mlp& net,
                          const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  const Eigen::Index n = inputs.cols();
  if (n == 0) throw std::invalid_argument("empty batch");
  if (targets.rows() != kOutputDim || targets.cols() != n) {
    throw std::invalid_argument("targets must be 2 x batch");
  }
  const std::size_t depth = net.layers.size();

  // activations[i] is the input of layer i; hidden pre-activations are not
  // kept since ELU'(z) = elu(z) + 1 for z <= 0.
  std::vector<Eigen::MatrixXd> activations(depth);
  activations[0] = normalized(net, inputs);
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < depth; ++i) {
    const auto& l = net.layers[i];
    Eigen::MatrixXd z = l.bias.replicate(1, n);
    z.noalias() += l.weight * activations[i];
    if (i + 1 < depth) {
      apply_elu(z);
      activations[i + 1] = std::move(z);
    } else {
      out = std::move(z);
    }
  }

  LossAndGrad result;
  const Eigen::MatrixXd residual = out - targets;
  result.loss = residual.squaredNorm() / static_cast<double>(n);
  result.grad.layers.resize(depth);

  Eigen::MatrixXd delta = residual * (2.0 / static_cast<double>(n));
  for (std::size_t i = depth; i-- > 0;) {
    const auto& l = net.layers[i];
    auto& g = result.grad.layers[i];
    g.weight.noalias() = delta * activations[i].transpose();
    g.bias = delta.rowwise().sum();
    if (i == 0) break;
    Eigen::MatrixXd back = l.weight.transpose() * delta;
    const Eigen::MatrixXd& act = activations[i];
    delta = back.binaryExpr(act, [](double d, double a) {
      return a > 0.0 ? d : d * (a + 1.0);
    });
  }
  return result;
}

double mse_loss(const Mlp& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
  return (forward_batch(net, inputs) - targets).squaredNorm() /
         static_cast<double>(inputs.cols());
}

OptimizerState OptimizerState::for_network(const Mlp& net,
                                           const AdamConfig& config) {
  OptimizerState s;
  s.config = config;
  s.first_moment = zeros_like(net.layers);
  s.second_moment = zeros_like(net.layers);
  return s;
}

void adam_update(OptimizerState& state, Mlp& net, const MlpGradient& grad) {
  check_shapes(net.layers, grad.layers);
  check_shapes(net.layers, state.first_moment);
  check_shapes(net.layers, state.second_moment);
  const auto& c = state.config;
  ++state.step;
  const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    param.array() -= c.learning_rate * (m.array() / corr1) /
                     ((v.array() / corr2).sqrt() + c.epsilon);
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].weight, grad.layers[i].weight,
           state.first_moment[i].weight, state.second_moment[i].weight);
    update(net.layers[i].bias, grad.layers[i].bias, state.first_moment[i].bias,
           state.second_moment[i].bias);
  }
}

void round_to_float(Mlp& net) {
  auto round = [](auto& m) {
    m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  };
  for (auto& l : net.layers) {
    round(l.weight);
    round(l.bias);
  }
  round(net.norm.mean);
  net.norm.std = net.norm.std.unaryExpr([](double v) {
    return static_cast<double>(norm_std_to_float(v));
  });
}

float norm_std_to_float(double v) {
  float f = static_cast<float>(v);
  // keep the 1e-6 floor after narrowing
  while (static_cast<double>(f) < kMinNormStd) {
    f = std::nextafter(f, std::numeric_limits<float>::infinity());
  }
  return f;
}

}  // namespace autoodom
