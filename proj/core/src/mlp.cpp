/*
 * Copyright 2026 The fastfield Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fastfield/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Core>

#include "fastfield/container.hpp"
#include "fastfield/error.hpp"

namespace fastfield {

namespace {

constexpr char kWeightsMagic[] = "FFWT";
constexpr std::uint32_t kWeightsVersion = 1;

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void validate_chain(const std::vector<DenseLayer>& layers, int input, int output,
                    std::string_view name) {
  if (layers.empty()) throw Error(ErrorCode::kParse, std::string(name) + " network has no layers");
  int expected = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.inputs != expected) {
      throw Error(ErrorCode::kParse, std::string(name) + " layer " + std::to_string(i) +
                                         " expects " + std::to_string(l.inputs) +
                                         " inputs, previous layer gives " +
                                         std::to_string(expected));
    }
    if (l.outputs <= 0 ||
        l.weights.size() != static_cast<std::size_t>(l.inputs) * l.outputs ||
        l.bias.size() != static_cast<std::size_t>(l.outputs)) {
      throw Error(ErrorCode::kParse,
                  std::string(name) + " layer " + std::to_string(i) + " payload size mismatch");
    }
    expected = l.outputs;
  }
  if (expected != output) {
    throw Error(ErrorCode::kParse, std::string(name) + " network outputs " +
                                       std::to_string(expected) + ", expected " +
                                       std::to_string(output));
  }
}

class MlpSource final : public FieldSource {
 public:
  explicit MlpSource(MlpWeights w) : w_(std::move(w)) {
    w_.validate();
    pos_in_ = static_cast<int>(encoded_size(3, w_.encoding.l_pos));
    dir_in_ = static_cast<int>(encoded_size(3, w_.encoding.l_dir));
  }

  int num_components() const override { return w_.num_components; }

  void eval_pos_into(const Position& p, std::span<float> record) const override {
    eval_pos_batch(std::span<const Position>(&p, 1), record);
  }

  void eval_dir_into(const Direction& d, std::span<float> beta) const override {
    const double v[3] = {d.x(), d.y(), d.z()};
    Eigen::VectorXf x(dir_in_);
    encode_into(v, w_.encoding.l_dir, std::span<float>(x.data(), x.size()));
    Eigen::VectorXf y = run(w_.direction, x);
    std::copy(y.data(), y.data() + y.size(), beta.begin());
  }

  void eval_dir_batch(std::span<const Direction> dirs, std::span<float> betas) const override {
    const auto n = static_cast<Eigen::Index>(dirs.size());
    Eigen::MatrixXf x(dir_in_, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Direction& d = dirs[static_cast<std::size_t>(i)];
      const double v[3] = {d.x(), d.y(), d.z()};
      encode_into(v, w_.encoding.l_dir, std::span<float>(x.col(i).data(), dir_in_));
    }
    Eigen::Map<Eigen::MatrixXf>(betas.data(), w_.num_components, n) = run(w_.direction, x);
  }

  void eval_pos_batch(std::span<const Position> points, std::span<float> records) const override {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXf x(pos_in_, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Position& p = points[static_cast<std::size_t>(i)];
      const double v[3] = {p.x, p.y, p.z};
      encode_into(v, w_.encoding.l_pos, std::span<float>(x.col(i).data(), pos_in_));
    }
    Eigen::MatrixXf y = run(w_.position, x);
    Eigen::Map<Eigen::MatrixXf> out(records.data(), y.rows(), n);
    out = y;
    out.row(0) = out.row(0).cwiseMax(0.0f);
  }

  std::string describe() const override {
    return "mlp(D=" + std::to_string(w_.num_components) + ", pos " +
           std::to_string(w_.position.size()) + " layers, dir " +
           std::to_string(w_.direction.size()) + " layers)";
  }

 private:
  static Eigen::MatrixXf run(const std::vector<DenseLayer>& layers, Eigen::MatrixXf x) {
    for (const DenseLayer& l : layers) {
      Eigen::Map<const RowMatrix> W(l.weights.data(), l.outputs, l.inputs);
      Eigen::Map<const Eigen::VectorXf> b(l.bias.data(), l.outputs);
      Eigen::MatrixXf y = W * x;
      y.colwise() += b;
      if (l.activation == Activation::kRelu) y = y.cwiseMax(0.0f);
      x = std::move(y);
    }
    return x;
  }

  MlpWeights w_;
  int pos_in_ = 0;
  int dir_in_ = 0;
};

std::vector<DenseLayer> random_network(int inputs, int depth, int width, int outputs,
                                       std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  int in = inputs;
  for (int i = 0; i <= depth; ++i) {
    const bool last = i == depth;
    DenseLayer l;
    l.inputs = in;
    l.outputs = last ? outputs : width;
    l.activation = last ? Activation::kIdentity : Activation::kRelu;
    const float bound = std::sqrt(6.0f / static_cast<float>(in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    l.weights.resize(static_cast<std::size_t>(l.inputs) * l.outputs);
    for (float& w : l.weights) w = dist(rng);
    l.bias.assign(static_cast<std::size_t>(l.outputs), 0.0f);
    in = l.outputs;
    layers.push_back(std::move(l));
  }
  return layers;
}

nlohmann::json describe_layers(const std::vector<DenseLayer>& layers) {
  auto arr = nlohmann::json::array();
  for (const auto& l : layers) {
    arr.push_back({{"inputs", l.inputs},
                   {"outputs", l.outputs},
                   {"activation", std::string(to_string(l.activation))}});
  }
  return arr;
}

std::vector<DenseLayer> read_layers(const nlohmann::json& desc, const Container& c,
                                    std::string_view prefix) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < desc.size(); ++i) {
    DenseLayer l;
    l.inputs = desc[i].at("inputs").get<int>();
    l.outputs = desc[i].at("outputs").get<int>();
    l.activation = activation_from_string(desc[i].at("activation").get<std::string>());
    const std::string base = std::string(prefix) + "." + std::to_string(i);
    l.weights = c.array(base + ".weight").as<float>("f32");
    l.bias = c.array(base + ".bias").as<float>("f32");
    layers.push_back(std::move(l));
  }
  return layers;
}

}  // namespace

std::string_view to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kParse, "unknown activation '" + std::string(s) + "'");
}

void MlpWeights::validate() const {
  if (num_components < 1) throw Error(ErrorCode::kParse, "component count must be >= 1");
  if (encoding.l_pos < 0 || encoding.l_dir < 0) {
    throw Error(ErrorCode::kParse, "negative encoding band count");
  }
  validate_chain(position, static_cast<int>(encoded_size(3, encoding.l_pos)),
                 static_cast<int>(position_record_size(num_components)), "position");
  validate_chain(direction, static_cast<int>(encoded_size(3, encoding.l_dir)), num_components,
                 "direction");
}

MlpWeights random_weights(const MlpShape& shape, std::uint64_t seed) {
  shape.encoding.validate();
  std::mt19937_64 rng(seed);
  MlpWeights w;
  w.num_components = shape.num_components;
  w.encoding = shape.encoding;
  w.position = random_network(static_cast<int>(encoded_size(3, shape.encoding.l_pos)),
                              shape.position_depth, shape.position_width,
                              static_cast<int>(position_record_size(shape.num_components)), rng);
  w.direction = random_network(static_cast<int>(encoded_size(3, shape.encoding.l_dir)),
                               shape.direction_depth, shape.direction_width,
                               shape.num_components, rng);
  return w;
}

void save_weights(const MlpWeights& weights, const std::filesystem::path& path) {
  weights.validate();
  Container c;
  std::copy_n(kWeightsMagic, 4, c.magic.begin());
  c.version = kWeightsVersion;
  c.meta = {{"num_components", weights.num_components},
            {"l_pos", weights.encoding.l_pos},
            {"l_dir", weights.encoding.l_dir},
            {"position", describe_layers(weights.position)},
            {"direction", describe_layers(weights.direction)}};
  auto add = [&](const std::vector<DenseLayer>& layers, std::string_view prefix) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string base = std::string(prefix) + "." + std::to_string(i);
      c.arrays.push_back(ContainerArray::of<float>(base + ".weight", layers[i].weights));
      c.arrays.push_back(ContainerArray::of<float>(base + ".bias", layers[i].bias));
    }
  };
  add(weights.position, "position");
  add(weights.direction, "direction");
  write_container(path, c);
}

MlpWeights load_weights(const std::filesystem::path& path) {
  const Container c = read_container(path, kWeightsMagic, kWeightsVersion);
  MlpWeights w;
  try {
    w.num_components = c.meta.at("num_components").get<int>();
    w.encoding.l_pos = c.meta.at("l_pos").get<int>();
    w.encoding.l_dir = c.meta.at("l_dir").get<int>();
    w.position = read_layers(c.meta.at("position"), c, "position");
    w.direction = read_layers(c.meta.at("direction"), c, "direction");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("weights metadata: ") + e.what());
  }
  w.validate();
  return w;
}

FactorizedField make_mlp_field(MlpWeights weights) {
  return FactorizedField(std::make_shared<const MlpSource>(std::move(weights)));
}

}  // namespace fastfield
