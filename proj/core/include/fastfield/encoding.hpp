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
#include <span>
#include <vector>

namespace fastfield {

/// Fourier band counts for the two network inputs. Zero bands pass the raw
/// input through unchanged.
struct EncodingConfig {
  int l_pos = 10;
  int l_dir = 4;

  void validate() const;
  bool operator==(const EncodingConfig&) const = default;
};

std::size_t encoded_size(std::size_t input_size, int bands);

/// Maps each input x to (sin(2^0 x), cos(2^0 x), ..., sin(2^(L-1) x), cos(2^(L-1) x)),
/// concatenated per input component.
std::vector<double> encode(std::span<const double> values, int bands);
std::vector<double> encode(double value, int bands);

/// Single-precision variant used by network evaluation. `out` must hold
/// encoded_size(values.size(), bands) entries.
void encode_into(std::span<const double> values, int bands, std::span<float> out);

}  // namespace fastfield
