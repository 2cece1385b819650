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

#include "fastfield/bench.hpp"

#include <algorithm>
#include <chrono>

#include "fastfield/error.hpp"
#include "parallel.hpp"

namespace fastfield {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchReport run_bench(const BenchSetup& setup, std::span<const int> resolutions, int repetitions) {
  if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  if (!setup.position || !setup.direction) {
    throw Error(ErrorCode::kInvalidArgument, "bench needs baked caches");
  }
  BenchReport report;
  report.repetitions = repetitions;
  for (int res : resolutions) {
    Camera cam = setup.camera;
    cam.width = res;
    cam.height = res;
    cam.validate();
    BenchResult r;
    r.width = res;
    r.height = res;
    for (int i = 0; i < repetitions; ++i) {
      const auto start = Clock::now();
      const FrameBuffer fb = render(cam, *setup.position, *setup.direction, setup.bvh, setup.config);
      r.cached_ms.push_back(elapsed_ms(start));
    }
    r.cached_median_ms = median(r.cached_ms);

    if (setup.direct_field) {
      int stride = std::max(1, setup.direct_pixel_stride);
      if (stride > 1 && stride % 2 == 0) ++stride;
      r.direct_pixel_stride = stride;
      const std::size_t total = static_cast<std::size_t>(res) * res;
      std::vector<std::size_t> pixels;
      for (std::size_t p = 0; p < total; p += stride) pixels.push_back(p);
      r.direct_pixels = pixels.size();
      RenderConfig cfg = setup.config;
      cfg.step = setup.direct_step;
      std::vector<RayResult> sink(pixels.size());
      for (int i = 0; i < repetitions; ++i) {
        const auto start = Clock::now();
        detail::parallel_for(cfg.workers, pixels.size(), [&](std::size_t k) {
          const int x = static_cast<int>(pixels[k] % res);
          const int y = static_cast<int>(pixels[k] / res);
          sink[k] = integrate_ray_direct(generate_ray(cam, x, y), *setup.direct_field,
                                         setup.direct_aabb, cfg);
        });
        r.direct_ms.push_back(elapsed_ms(start) * static_cast<double>(total) /
                              static_cast<double>(pixels.size()));
      }
      r.direct_median_ms = median(r.direct_ms);
      r.speedup = *r.direct_median_ms / r.cached_median_ms;
    }
    report.results.push_back(std::move(r));
  }
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : report.results) {
    nlohmann::json j = {{"width", r.width},
                        {"height", r.height},
                        {"cached_ms", r.cached_ms},
                        {"cached_median_ms", r.cached_median_ms}};
    if (r.direct_median_ms) {
      j["direct_ms"] = r.direct_ms;
      j["direct_median_ms"] = *r.direct_median_ms;
      j["speedup"] = *r.speedup;
      j["direct_pixel_stride"] = r.direct_pixel_stride;
      j["direct_pixels"] = r.direct_pixels;
    }
    results.push_back(std::move(j));
  }
  return {{"repetitions", report.repetitions}, {"results", results}};
}

}  // namespace fastfield
