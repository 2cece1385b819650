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

#include <nlohmann/json.hpp>

namespace fastfield {

struct CacheSizeInputs {
  std::int64_t k = 1024;
  std::int64_t l = 1024;
  std::int64_t num_components = 8;
  double alpha = 1.0;
  // Bit widths. Defaults are the half-precision accounting (3 x 16 bits per triple).
  std::int64_t s_sigma = 16;
  std::int64_t s_rgb = 24;
  std::int64_t s_uvw = 48;
  std::int64_t s_beta = 16;
};

/// Byte counts for a dense 5D cache and for the factorized pair of caches:
///   M_NeRF     = alpha (s_sigma + s_rgb) k^3 l^2
///   M_FastNeRF = alpha (D s_uvw + s_sigma) k^3 + D s_beta l^2
/// Terms are accumulated in bits with exact integer arithmetic and rounded up
/// to whole bytes at the end. With alpha in {0, 1} every result is exact; other
/// alphas are applied with extended precision and rounded to the nearest bit.
struct CacheSizeReport {
  CacheSizeInputs inputs;
  std::uint64_t m_nerf_bytes = 0;
  std::uint64_t m_fastnerf_bytes = 0;
  std::uint64_t fastnerf_position_bytes = 0;   // alpha (D s_uvw + s_sigma) k^3, rounded up
  std::uint64_t fastnerf_direction_bytes = 0;  // D s_beta l^2, rounded up
};

/// Throws InvalidSparsity when alpha is outside [0, 1] and InvalidArgument for
/// non-positive sizes or results beyond 64-bit byte counts.
CacheSizeReport estimate_sizes(const CacheSizeInputs& inputs);

nlohmann::json to_json(const CacheSizeReport& report);

}  // namespace fastfield
