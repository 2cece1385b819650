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

#include "fastfield/size_estimate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fastfield/error.hpp"

namespace fastfield {
namespace {

using u128 = unsigned __int128;

constexpr std::int64_t kMaxResolution = std::int64_t{1} << 20;
constexpr std::int64_t kMaxSmall = std::int64_t{1} << 16;

void check_range(const char* name, std::int64_t v, std::int64_t hi) {
  if (v < 1 || v > hi) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be in [1, " + std::to_string(hi) + "], got " +
                    std::to_string(v));
  }
}

u128 scale_bits(u128 bits, double alpha) {
  if (alpha == 1.0) return bits;
  if (alpha == 0.0) return 0;
  const long double scaled = static_cast<long double>(bits) * static_cast<long double>(alpha);
  return static_cast<u128>(std::roundl(scaled));
}

std::uint64_t to_bytes(u128 bits) {
  const u128 bytes = (bits + 7) / 8;
  if (bytes > std::numeric_limits<std::uint64_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "estimated size exceeds 2^64 bytes");
  }
  return static_cast<std::uint64_t>(bytes);
}

}  // namespace

CacheSizeReport estimate_sizes(const CacheSizeInputs& in) {
  if (!(in.alpha >= 0.0 && in.alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidSparsity,
                "alpha must lie in [0, 1], got " + std::to_string(in.alpha));
  }
  check_range("k", in.k, kMaxResolution);
  check_range("l", in.l, kMaxResolution);
  check_range("D", in.num_components, kMaxSmall);
  check_range("s_sigma", in.s_sigma, kMaxSmall);
  check_range("s_rgb", in.s_rgb, kMaxSmall);
  check_range("s_uvw", in.s_uvw, kMaxSmall);
  check_range("s_beta", in.s_beta, kMaxSmall);

  const u128 k3 = static_cast<u128>(in.k) * in.k * in.k;
  const u128 l2 = static_cast<u128>(in.l) * in.l;
  const u128 D = static_cast<u128>(in.num_components);

  const u128 nerf_bits = scale_bits((static_cast<u128>(in.s_sigma) + in.s_rgb) * k3 * l2, in.alpha);
  const u128 pos_bits = scale_bits((D * in.s_uvw + in.s_sigma) * k3, in.alpha);
  const u128 dir_bits = D * in.s_beta * l2;

  CacheSizeReport r;
  r.inputs = in;
  r.m_nerf_bytes = to_bytes(nerf_bits);
  r.m_fastnerf_bytes = to_bytes(pos_bits + dir_bits);
  r.fastnerf_position_bytes = to_bytes(pos_bits);
  r.fastnerf_direction_bytes = to_bytes(dir_bits);
  return r;
}

nlohmann::json to_json(const CacheSizeReport& r) {
  const CacheSizeInputs& in = r.inputs;
  return {{"k", in.k},
          {"l", in.l},
          {"d", in.num_components},
          {"alpha", in.alpha},
          {"s_sigma_bits", in.s_sigma},
          {"s_rgb_bits", in.s_rgb},
          {"s_uvw_bits", in.s_uvw},
          {"s_beta_bits", in.s_beta},
          {"m_nerf_bytes", r.m_nerf_bytes},
          {"m_fastnerf_bytes", r.m_fastnerf_bytes},
          {"m_fastnerf_position_bytes", r.fastnerf_position_bytes},
          {"m_fastnerf_direction_bytes", r.fastnerf_direction_bytes}};
}

}  // namespace fastfield
