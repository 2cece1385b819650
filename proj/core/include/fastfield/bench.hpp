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

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fastfield/renderer.hpp"

namespace fastfield {

struct BenchSetup {
  /// Pose and fov; width and height are taken from each requested resolution.
  Camera camera;
  const PositionCache* position = nullptr;
  const DirectionCache* direction = nullptr;
  const Bvh* bvh = nullptr;
  RenderConfig config;
  /// Direct rendering is timed only when a field is given.
  const FactorizedField* direct_field = nullptr;
  Aabb direct_aabb;
  double direct_step = 0.0;
  /// Direct frames render every n-th pixel in raster order and scale the time
  /// by the pixel ratio. 1 renders the full frame. Even values are bumped to
  /// the next odd number so the subset does not align with image columns.
  int direct_pixel_stride = 1;
};

struct BenchResult {
  int width = 0;
  int height = 0;
  std::vector<double> cached_ms;
  std::vector<double> direct_ms;  // full-frame estimates
  double cached_median_ms = 0.0;
  std::optional<double> direct_median_ms;
  std::optional<double> speedup;  // direct / cached medians
  int direct_pixel_stride = 1;
  std::size_t direct_pixels = 0;
};

struct BenchReport {
  int repetitions = 0;
  std::vector<BenchResult> results;
};

double median(std::vector<double> values);

/// Times `repetitions` frames per resolution (square images of that size).
BenchReport run_bench(const BenchSetup& setup, std::span<const int> resolutions, int repetitions);

nlohmann::json to_json(const BenchReport& report);

}  // namespace fastfield
