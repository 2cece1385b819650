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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "fastfield/encoding.hpp"
#include "fastfield/field.hpp"

namespace fastfield {

enum class Activation { kRelu, kIdentity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

/// Fully connected layer, y = act(W x + b). Weights are row-major outputs x inputs.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  Activation activation = Activation::kRelu;
  std::vector<float> weights;
  std::vector<float> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Both networks of a factorized field. The position network maps the encoded
/// position to 1 + 3D outputs (sigma first, then triple-major components); the
/// direction network maps the encoded unit direction to D weights.
struct MlpWeights {
  int num_components = 8;
  EncodingConfig encoding;
  std::vector<DenseLayer> position;
  std::vector<DenseLayer> direction;

  /// Throws ParseError when layer dims do not chain or output widths disagree
  /// with num_components.
  void validate() const;
  bool operator==(const MlpWeights&) const = default;
};

struct MlpShape {
  int num_components = 8;
  EncodingConfig encoding;
  int position_depth = 8;
  int position_width = 384;
  int direction_depth = 4;
  int direction_width = 128;
};

/// Seeded He-uniform initialization; stands in for trained weights in tests
/// and benchmarks.
MlpWeights random_weights(const MlpShape& shape, std::uint64_t seed);

MlpWeights load_weights(const std::filesystem::path& path);
void save_weights(const MlpWeights& weights, const std::filesystem::path& path);

FactorizedField make_mlp_field(MlpWeights weights);

}  // namespace fastfield
