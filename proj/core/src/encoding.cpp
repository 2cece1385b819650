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

#include "fastfield/encoding.hpp"

#include <cmath>

#include "fastfield/error.hpp"

namespace fastfield {

void EncodingConfig::validate() const {
  if (l_pos < 0 || l_dir < 0) {
    throw Error(ErrorCode::kInvalidArgument, "encoding band counts must be non-negative");
  }
}

std::size_t encoded_size(std::size_t input_size, int bands) {
  return bands == 0 ? input_size : input_size * 2 * static_cast<std::size_t>(bands);
}

namespace {

template <typename Out>
void encode_impl(std::span<const double> values, int bands, Out* out) {
  if (bands < 0) throw Error(ErrorCode::kInvalidArgument, "negative band count");
  if (bands == 0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<Out>(values[i]);
    return;
  }
  std::size_t k = 0;
  for (const double x : values) {
    double scale = 1.0;
    for (int j = 0; j < bands; ++j) {
      out[k++] = static_cast<Out>(std::sin(scale * x));
      out[k++] = static_cast<Out>(std::cos(scale * x));
      scale *= 2.0;
    }
  }
}

}  // namespace

std::vector<double> encode(std::span<const double> values, int bands) {
  std::vector<double> out(encoded_size(values.size(), bands < 0 ? 0 : bands));
  encode_impl(values, bands, out.data());
  return out;
}

std::vector<double> encode(double value, int bands) {
  return encode(std::span<const double>(&value, 1), bands);
}

void encode_into(std::span<const double> values, int bands, std::span<float> out) {
  if (out.size() != encoded_size(values.size(), bands)) {
    throw Error(ErrorCode::kDimensionMismatch, "encoding output buffer has the wrong size");
  }
  encode_impl(values, bands, out.data());
}

}  // namespace fastfield
