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

#include <vector>

#include "fastfield/bvh.hpp"
#include "fastfield/cache.hpp"
#include "fastfield/camera.hpp"
#include "fastfield/field.hpp"
#include "fastfield/image.hpp"

namespace fastfield {

struct RenderConfig {
  /// Distance between samples. 0 selects one voxel edge of the position cache
  /// (cached rendering only; direct rendering needs an explicit step).
  double step = 0.0;
  /// A ray stops once its transmittance falls below this value. 0 disables
  /// early termination.
  double termination = 1e-3;
  Rgb background{1.0, 1.0, 1.0};
  int max_samples = 1 << 16;
  int workers = 0;

  void validate() const;
};

/// Per-ray integration result. `radiance` is the accumulated sum of
/// T_i (1 - exp(-sigma_i delta)) c_i before compositing.
struct RayResult {
  Rgb radiance;
  double transmittance = 1.0;
  int samples = 0;

  double alpha() const { return 1.0 - transmittance; }
  Rgb composite(const Rgb& background) const { return radiance + background * transmittance; }
};

/// Optional per-sample record for inspecting a single ray.
struct RayTrace {
  std::vector<double> t;
  std::vector<double> transmittance;  // after each sample
};

/// Samples sit at t_0 + i * step, where t_0 is where the ray enters the cache
/// AABB (or ray.t_min if later), up to the AABB exit or ray.t_max. With a BVH,
/// rays that miss the collision mesh are skipped and integration begins one
/// step before the lattice sample preceding the first entering hit; samples are
/// otherwise the same as without a BVH. An empty BVH (from an empty mesh)
/// skips every ray; pass nullptr to march without one. Throws
/// DimensionMismatch.
RayResult integrate_ray(const Ray& ray, const PositionCache& position, const DirectionCache& direction,
                        const Bvh* bvh, const RenderConfig& config, RayTrace* trace = nullptr);

/// Same sampling over `aabb`, evaluating the field at every sample.
RayResult integrate_ray_direct(const Ray& ray, const FactorizedField& field, const Aabb& aabb,
                               const RenderConfig& config, RayTrace* trace = nullptr);

/// Renders every pixel; output is independent of the worker count.
FrameBuffer render(const Camera& camera, const PositionCache& position,
                   const DirectionCache& direction, const Bvh* bvh, const RenderConfig& config);
FrameBuffer render_direct(const Camera& camera, const FactorizedField& field, const Aabb& aabb,
                          const RenderConfig& config);

}  // namespace fastfield
