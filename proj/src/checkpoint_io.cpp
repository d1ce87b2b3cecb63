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

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>

#include "autoodom/io.hpp"

namespace autoodom {

namespace {

constexpr std::string_view kEndHeader = "end_header";

void put_float(std::string& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>(bits & 0xffU));
    bits >>= 8;
  }
}

float get_float(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             static_cast<std::uint32_t>(p[1]) << 8 |
                             static_cast<std::uint32_t>(p[2]) << 16 |
                             static_cast<std::uint32_t>(p[3]) << 24;
  return std::bit_cast<float>(bits);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

long parse_long(std::string_view text, std::string_view key) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("checkpoint header '" + std::string(key) +
                      "' is not an integer: '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, std::string_view key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw FormatError("checkpoint header '" + std::string(key) +
                      "' is not a finite number");
  }
  return value;
}

bool parse_flag(std::string_view text, std::string_view key) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw FormatError("checkpoint header '" + std::string(key) + "' must be 0 or 1");
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(',', start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string describe(const SensorLayout& l) {
  return "accel=" + std::to_string(l.use_accel()) +
         " dp_hist=" + std::to_string(l.use_dp_hist()) +
         " actions=" + std::to_string(l.use_actions()) +
         " H=" + std::to_string(l.history_len()) +
         " horizon=" + std::to_string(l.horizon());
}

}  // namespace

std::string format_checkpoint(const Checkpoint& ckpt) {
  ckpt.validate();
  const auto sizes = ckpt.model.layer_sizes();
  const std::size_t blob = ckpt.model.parameter_count() +
                           2 * static_cast<std::size_t>(ckpt.model.input_dim());
  std::string out;
  out += kCheckpointMagic;
  out += "\nlayer_sizes=";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  const SensorLayout& l = ckpt.layout;
  out += "\nuse_accel=" + std::to_string(l.use_accel());
  out += "\nuse_dp_hist=" + std::to_string(l.use_dp_hist());
  out += "\nuse_actions=" + std::to_string(l.use_actions());
  out += "\nhistory_len=" + std::to_string(l.history_len());
  out += "\nhorizon=" + std::to_string(l.horizon());
  out += "\nnorm_len=" + std::to_string(ckpt.model.input_dim());
  out += "\nstage=" + ckpt.stage;
  out += "\nconfig_digest=" + ckpt.config_digest;
  if (ckpt.holdout_ate_o) out += "\nholdout_ate_o=" + format_double(*ckpt.holdout_ate_o);
  out += "\nloss_history=";
  for (std::size_t i = 0; i < ckpt.loss_history.size(); ++i) {
    if (i) out += ',';
    out += format_double(ckpt.loss_history[i]);
  }
  out += "\nblob_floats=" + std::to_string(blob);
  out += '\n';
  out += kEndHeader;
  out += '\n';

  out.reserve(out.size() + 4 * blob);
  for (const auto& layer : ckpt.model.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        put_float(out, static_cast<float>(layer.weight(r, c)));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      put_float(out, static_cast<float>(layer.bias(r)));
    }
  }
  for (Eigen::Index i = 0; i < ckpt.model.norm.mean.size(); ++i) {
    put_float(out, static_cast<float>(ckpt.model.norm.mean(i)));
  }
  for (Eigen::Index i = 0; i < ckpt.model.norm.std.size(); ++i) {
    put_float(out, norm_std_to_float(ckpt.model.norm.std(i)));
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  std::map<std::string, std::string, std::less<>> header;
  std::size_t pos = 0;
  bool first = true;
  bool ended = false;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) break;
    const std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (first) {
      if (line != kCheckpointMagic) {
        throw FormatError("not a checkpoint or unsupported version (expected " +
                          std::string(kCheckpointMagic) + ")");
      }
      first = false;
      continue;
    }
    if (line == kEndHeader) {
      ended = true;
      break;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("malformed checkpoint header line '" + std::string(line) + "'");
    }
    header.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  if (first) throw FormatError("not a checkpoint or unsupported version");
  if (!ended) throw FormatError("checkpoint header is not terminated");

  auto need = [&](const char* key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) {
      throw FormatError(std::string("checkpoint header lacks '") + key + "'");
    }
    return it->second;
  };

  std::vector<int> sizes;
  for (std::string_view s : split_commas(need("layer_sizes"))) {
    const long v = parse_long(s, "layer_sizes");
    if (v < 1) throw FormatError("checkpoint layer sizes must be positive");
    sizes.push_back(static_cast<int>(v));
  }
  if (sizes.size() < 2) throw FormatError("checkpoint needs at least two layer sizes");

  Checkpoint ckpt;
  try {
    ckpt.layout = SensorLayout(
        parse_flag(need("use_accel"), "use_accel"),
        parse_flag(need("use_dp_hist"), "use_dp_hist"),
        parse_flag(need("use_actions"), "use_actions"),
        static_cast<int>(parse_long(need("history_len"), "history_len")),
        static_cast<int>(parse_long(need("horizon"), "horizon")));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("checkpoint layout: ") + e.what());
  }
  const long norm_len = parse_long(need("norm_len"), "norm_len");
  if (norm_len != sizes.front()) {
    throw FormatError("checkpoint norm_len " + std::to_string(norm_len) +
                      " does not match input width " + std::to_string(sizes.front()));
  }
  if (sizes.front() != ckpt.layout.window_dim()) {
    throw FormatError("checkpoint input width " + std::to_string(sizes.front()) +
                      " inconsistent with its layout (" + describe(ckpt.layout) + ")");
  }
  ckpt.stage = need("stage");
  ckpt.config_digest = need("config_digest");
  if (const auto it = header.find("holdout_ate_o"); it != header.end()) {
    ckpt.holdout_ate_o = parse_double(it->second, "holdout_ate_o");
  }
  for (std::string_view s : split_commas(need("loss_history"))) {
    ckpt.loss_history.push_back(parse_double(s, "loss_history"));
  }

  const std::size_t expected = parameter_count(sizes) + 2 * static_cast<std::size_t>(sizes.front());
  const long declared = parse_long(need("blob_floats"), "blob_floats");
  if (declared < 0 || static_cast<std::size_t>(declared) != expected) {
    throw FormatError("checkpoint header declares " + std::to_string(declared) +
                      " floats but layer sizes require " + std::to_string(expected));
  }
  const std::size_t available = bytes.size() - pos;
  if (available != 4 * expected) {
    throw FormatError("checkpoint weight blob size mismatch: expected " +
                      std::to_string(4 * expected) + " bytes, found " +
                      std::to_string(available));
  }

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  auto next = [&p]() {
    const float f = get_float(p);
    p += 4;
    if (!std::isfinite(f)) throw FormatError("checkpoint contains non-finite values");
    return static_cast<double>(f);
  };
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    DenseLayer layer;
    layer.weight.resize(sizes[i], sizes[i - 1]);
    layer.bias.resize(sizes[i]);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = next();
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = next();
    ckpt.model.layers.push_back(std::move(layer));
  }
  ckpt.model.norm.mean.resize(sizes.front());
  ckpt.model.norm.std.resize(sizes.front());
  for (Eigen::Index i = 0; i < sizes.front(); ++i) ckpt.model.norm.mean(i) = next();
  for (Eigen::Index i = 0; i < sizes.front(); ++i) ckpt.model.norm.std(i) = next();
  try {
    ckpt.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, format_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const SensorLayout& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (!(ckpt.layout == expected)) {
    std::string hint;
    if (!ckpt.layout.use_accel() && expected.use_accel()) {
      hint = "; run 'transfer' to add the accelerometer channel first";
    }
    throw FormatError(path.string() + ": layout mismatch: checkpoint has " +
                      describe(ckpt.layout) + ", expected " + describe(expected) +
                      hint);
  }
  return ckpt;
}

}  // namespace autoodom
