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

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fastfield/math.hpp"

namespace fastfield {

/// Position-dependent output: density plus D per-channel radiance components.
/// Components are stored triple-major: (u_1, v_1, w_1, u_2, v_2, w_2, ...).
struct DeepRadianceMap {
  float sigma = 0.0f;
  std::vector<float> components;

  static DeepRadianceMap empty(int num_components);

  int size() const { return static_cast<int>(components.size() / 3); }
  Rgb component(int i) const;
  bool operator==(const DeepRadianceMap&) const = default;
};

/// Direction-dependent output: one weight per component, shared across RGB.
struct WeightVector {
  std::vector<float> beta;

  int size() const { return static_cast<int>(beta.size()); }
  bool operator==(const WeightVector&) const = default;
};

/// Inner product c = sum_i beta_i (u_i, v_i, w_i). Throws DimensionMismatch.
/// No clamping is applied.
Rgb combine(const DeepRadianceMap& map, const WeightVector& weights);

/// Unchecked hot-path form over raw triple-major components.
inline Rgb combine(std::span<const float> components, std::span<const float> beta) {
  double r = 0.0, g = 0.0, b = 0.0;
  const float* c = components.data();
  for (std::size_t i = 0; i < beta.size(); ++i, c += 3) {
    const double w = beta[i];
    r += w * c[0];
    g += w * c[1];
    b += w * c[2];
  }
  return {r, g, b};
}

/// Number of floats in one flat position record: sigma followed by 3D components.
constexpr std::size_t position_record_size(int num_components) {
  return 1 + 3 * static_cast<std::size_t>(num_components);
}

/// Implementation interface behind FactorizedField. Implementations are
/// immutable after construction and safe for concurrent readers.
class FieldSource {
 public:
  virtual ~FieldSource() = default;

  virtual int num_components() const = 0;
  /// Writes one flat record (see position_record_size). sigma must already be
  /// rectified to be >= 0.
  virtual void eval_pos_into(const Position& p, std::span<float> record) const = 0;
  virtual void eval_dir_into(const Direction& d, std::span<float> beta) const = 0;
  /// Batched position evaluation; `records` holds points.size() flat records.
  virtual void eval_pos_batch(std::span<const Position> points, std::span<float> records) const;
  /// Batched direction evaluation; `betas` holds dirs.size() * D weights.
  virtual void eval_dir_batch(std::span<const Direction> dirs, std::span<float> betas) const;
  virtual std::string describe() const = 0;
};

/// Value-semantic handle over a factorized radiance field
/// F_pos: p -> {sigma, (u, v, w)} and F_dir: d -> beta.
class FactorizedField {
 public:
  FactorizedField() = default;
  explicit FactorizedField(std::shared_ptr<const FieldSource> source);

  bool initialized() const { return source_ != nullptr; }
  int num_components() const;

  DeepRadianceMap eval_pos(const Position& p) const;
  WeightVector eval_dir(const Direction& d) const;

  void eval_pos_into(const Position& p, std::span<float> record) const;
  void eval_dir_into(const Direction& d, std::span<float> beta) const;
  void eval_pos_batch(std::span<const Position> points, std::span<float> records) const;
  void eval_dir_batch(std::span<const Direction> dirs, std::span<float> betas) const;

  /// Convenience: combine(eval_pos(p), eval_dir(d)) and sigma.
  Rgb radiance(const Position& p, const Direction& d) const;
  std::string describe() const;

 private:
  const FieldSource& source() const;

  std::shared_ptr<const FieldSource> source_;
};

}  // namespace fastfield
