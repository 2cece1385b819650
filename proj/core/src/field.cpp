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

#include "fastfield/field.hpp"

#include <sstream>

#include "fastfield/error.hpp"

namespace fastfield {

DeepRadianceMap DeepRadianceMap::empty(int num_components) {
  DeepRadianceMap m;
  m.components.assign(3 * static_cast<std::size_t>(num_components), 0.0f);
  return m;
}

Rgb DeepRadianceMap::component(int i) const {
  const std::size_t k = 3 * static_cast<std::size_t>(i);
  return {components.at(k), components.at(k + 1), components.at(k + 2)};
}

Rgb combine(const DeepRadianceMap& map, const WeightVector& weights) {
  if (map.components.size() != 3 * weights.beta.size()) {
    std::ostringstream msg;
    msg << "deep radiance map has " << map.size() << " components, weights have "
        << weights.size();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  return combine(std::span<const float>(map.components), std::span<const float>(weights.beta));
}

void FieldSource::eval_pos_batch(std::span<const Position> points,
                                 std::span<float> records) const {
  const std::size_t stride = position_record_size(num_components());
  for (std::size_t i = 0; i < points.size(); ++i) {
    eval_pos_into(points[i], records.subspan(i * stride, stride));
  }
}

void FieldSource::eval_dir_batch(std::span<const Direction> dirs, std::span<float> betas) const {
  const auto d = static_cast<std::size_t>(num_components());
  for (std::size_t i = 0; i < dirs.size(); ++i) eval_dir_into(dirs[i], betas.subspan(i * d, d));
}

FactorizedField::FactorizedField(std::shared_ptr<const FieldSource> source)
    : source_(std::move(source)) {}

const FieldSource& FactorizedField::source() const {
  if (!source_) throw Error(ErrorCode::kUninitializedField, "field has no source attached");
  return *source_;
}

int FactorizedField::num_components() const { return source().num_components(); }

DeepRadianceMap FactorizedField::eval_pos(const Position& p) const {
  const FieldSource& src = source();
  std::vector<float> record(position_record_size(src.num_components()));
  src.eval_pos_into(p, record);
  DeepRadianceMap m;
  m.sigma = record[0];
  m.components.assign(record.begin() + 1, record.end());
  return m;
}

WeightVector FactorizedField::eval_dir(const Direction& d) const {
  const FieldSource& src = source();
  WeightVector w;
  w.beta.resize(static_cast<std::size_t>(src.num_components()));
  src.eval_dir_into(d, w.beta);
  return w;
}

void FactorizedField::eval_pos_into(const Position& p, std::span<float> record) const {
  const FieldSource& src = source();
  if (record.size() != position_record_size(src.num_components())) {
    throw Error(ErrorCode::kDimensionMismatch, "position record buffer has the wrong size");
  }
  src.eval_pos_into(p, record);
}

void FactorizedField::eval_dir_into(const Direction& d, std::span<float> beta) const {
  const FieldSource& src = source();
  if (beta.size() != static_cast<std::size_t>(src.num_components())) {
    throw Error(ErrorCode::kDimensionMismatch, "weight buffer has the wrong size");
  }
  src.eval_dir_into(d, beta);
}

void FactorizedField::eval_pos_batch(std::span<const Position> points,
                                     std::span<float> records) const {
  const FieldSource& src = source();
  if (records.size() != points.size() * position_record_size(src.num_components())) {
    throw Error(ErrorCode::kDimensionMismatch, "batch record buffer has the wrong size");
  }
  src.eval_pos_batch(points, records);
}

void FactorizedField::eval_dir_batch(std::span<const Direction> dirs,
                                     std::span<float> betas) const {
  const FieldSource& src = source();
  if (betas.size() != dirs.size() * static_cast<std::size_t>(src.num_components())) {
    throw Error(ErrorCode::kDimensionMismatch, "batch weight buffer has the wrong size");
  }
  src.eval_dir_batch(dirs, betas);
}

Rgb FactorizedField::radiance(const Position& p, const Direction& d) const {
  return combine(eval_pos(p), eval_dir(d));
}

std::string FactorizedField::describe() const {
  return source_ ? source_->describe() : std::string("<uninitialized>");
}

}  // namespace fastfield
