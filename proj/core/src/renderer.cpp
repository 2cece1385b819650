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

#include "fastfield/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastfield/error.hpp"
#include "parallel.hpp"

namespace fastfield {

void RenderConfig::validate() const {
  if (!(step >= 0.0) || !std::isfinite(step)) throw Error(ErrorCode::kInvalidArgument, "step must be >= 0");
  if (!(termination >= 0.0 && termination < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "termination threshold must lie in [0, 1)");
  }
  if (max_samples < 1) throw Error(ErrorCode::kInvalidArgument, "max_samples must be >= 1");
}

namespace {

// Accumulates one sample; returns false once the ray is finished.
inline bool accumulate(RayResult& r, double sigma, double delta, const Rgb& c,
                       const RenderConfig& cfg) {
  if (sigma > 0.0) {
    const double e = std::exp(-sigma * delta);
    r.radiance += c * (r.transmittance * (1.0 - e));
    r.transmittance *= e;
  }
  return r.transmittance >= cfg.termination && r.transmittance > 0.0;
}

inline void record(RayTrace* trace, double t, double T) {
  if (trace) {
    trace->t.push_back(t);
    trace->transmittance.push_back(T);
  }
}

}  // namespace

RayResult integrate_ray(const Ray& ray, const PositionCache& pos, const DirectionCache& dir,
                        const Bvh* bvh, const RenderConfig& cfg, RayTrace* trace) {
  const int D = pos.num_components();
  if (dir.num_components() != D) {
    throw Error(ErrorCode::kDimensionMismatch, "position cache has D = " + std::to_string(D) +
                                                   ", direction cache has D = " +
                                                   std::to_string(dir.num_components()));
  }
  RayResult out;
  const auto span = intersect(pos.aabb(), ray);
  if (!span) return out;
  const double delta = cfg.step > 0.0 ? cfg.step : pos.voxel_size();
  const double t0 = (*span)[0];
  const double t_end = (*span)[1];
  long first = 0;
  if (bvh) {
    const auto hit = bvh->first_hit(ray);
    if (!hit) return out;
    if (hit->front_face && hit->t > t0) {
      first = std::max(0L, static_cast<long>(std::floor((hit->t - t0) / delta)) - 1);
    }
  }
  float beta_buf[64];
  std::vector<float> beta_heap;
  float* beta = beta_buf;
  if (D > 64) {
    beta_heap.resize(D);
    beta = beta_heap.data();
  }
  dir.lookup_into(Direction(ray.dir), std::span<float>(beta, D));
  const std::span<const float> beta_span(beta, D);

  for (long i = first; out.samples < cfg.max_samples; ++i) {
    const double t = t0 + static_cast<double>(i) * delta;
    if (t > t_end) break;
    ++out.samples;
    const float* rec = pos.lookup_record(ray.at(t));
    bool more = true;
    if (rec) {
      const Rgb c = combine(std::span<const float>(rec + 1, 3 * static_cast<std::size_t>(D)), beta_span);
      more = accumulate(out, rec[0], delta, c, cfg);
    }
    record(trace, t, out.transmittance);
    if (!more) break;
  }
  return out;
}

RayResult integrate_ray_direct(const Ray& ray, const FactorizedField& field, const Aabb& aabb,
                               const RenderConfig& cfg, RayTrace* trace) {
  if (!(cfg.step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "direct rendering needs an explicit step");
  }
  RayResult out;
  const auto span = intersect(aabb, ray);
  if (!span) return out;
  const int D = field.num_components();
  const double delta = cfg.step;
  const double t0 = (*span)[0];
  const double t_end = (*span)[1];
  const WeightVector beta = field.eval_dir(Direction(ray.dir));
  const std::size_t rs = position_record_size(D);

  // Samples are evaluated in small batches; a batch may run past the
  // termination point, but only samples before it are accumulated.
  constexpr int kBatch = 16;
  Position points[kBatch];
  std::vector<float> records(kBatch * rs);
  long i = 0;
  while (out.samples < cfg.max_samples) {
    int n = 0;
    double ts[kBatch];
    for (; n < kBatch && out.samples + n < cfg.max_samples; ++n) {
      const double t = t0 + static_cast<double>(i + n) * delta;
      if (t > t_end) break;
      ts[n] = t;
      points[n] = ray.at(t);
    }
    if (n == 0) break;
    field.eval_pos_batch(std::span<const Position>(points, n), std::span<float>(records.data(), n * rs));
    for (int k = 0; k < n; ++k) {
      const float* rec = records.data() + k * rs;
      ++out.samples;
      const Rgb c = combine(std::span<const float>(rec + 1, 3 * static_cast<std::size_t>(D)), beta.beta);
      const bool more = accumulate(out, rec[0], delta, c, cfg);
      record(trace, ts[k], out.transmittance);
      if (!more) return out;
    }
    i += n;
  }
  return out;
}

namespace {

template <typename PixelFn>
FrameBuffer render_pixels(const Camera& camera, const RenderConfig& cfg, PixelFn&& shade) {
  camera.validate();
  cfg.validate();
  FrameBuffer fb(camera.width, camera.height);
  detail::parallel_for(cfg.workers, static_cast<std::size_t>(camera.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < camera.width; ++x) {
      const RayResult r = shade(generate_ray(camera, x, y));
      fb.set(x, y, r.composite(cfg.background), r.alpha());
    }
  });
  return fb;
}

}  // namespace

FrameBuffer render(const Camera& camera, const PositionCache& pos, const DirectionCache& dir,
                   const Bvh* bvh, const RenderConfig& cfg) {
  return render_pixels(camera, cfg, [&](const Ray& ray) {
    return integrate_ray(ray, pos, dir, bvh, cfg);
  });
}

FrameBuffer render_direct(const Camera& camera, const FactorizedField& field, const Aabb& aabb,
                          const RenderConfig& cfg) {
  return render_pixels(camera, cfg, [&](const Ray& ray) {
    return integrate_ray_direct(ray, field, aabb, cfg);
  });
}

}  // namespace fastfield
