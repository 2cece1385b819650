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

// Acceptance suite: one PASS/FAIL line per criterion, each checked against its
// tolerance and its runtime budget. Exit status is nonzero when any fails.

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fastfield/analytic.hpp"
#include "fastfield/bench.hpp"
#include "fastfield/bvh.hpp"
#include "fastfield/cache.hpp"
#include "fastfield/camera.hpp"
#include "fastfield/catalog.hpp"
#include "fastfield/factorizer.hpp"
#include "fastfield/image.hpp"
#include "fastfield/mesher.hpp"
#include "fastfield/mlp.hpp"
#include "fastfield/renderer.hpp"
#include "fastfield/size_estimate.hpp"
#include "support/baselines.hpp"
#include "support/oracles.hpp"

namespace fastfield {
namespace {

const Aabb kBox{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(e_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(e_); }
  double normal() { return std::normal_distribution<double>()(e_); }
  Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 unit() {
    for (;;) {
      const Vec3 v{normal(), normal(), normal()};
      const double n = length(v);
      if (n > 1e-9) return v / n;
    }
  }

 private:
  std::mt19937_64 e_;
};

Camera orbit_camera(int size) { return baseline::psnr_camera(size); }

struct Baked {
  BakedCaches caches;
  Bvh bvh;
};

Baked bake_scene(const AnalyticScene& scene, int k, int l) {
  BakeOptions o;
  o.resolution = k;
  o.dir_resolution = l;
  Baked b;
  b.caches = bake(make_analytic_field(scene), kBox, o);
  const CollisionMesh mesh = build_collision_mesh(b.caches.position, {});
  if (!mesh.empty()) b.bvh = Bvh(mesh);
  return b;
}

// ---- criteria ----

Outcome cache_sizes() {
  CacheSizeInputs in;
  in.k = 1024;
  in.l = 1024;
  in.num_components = 8;
  in.alpha = 1.0;
  const CacheSizeReport r = estimate_sizes(in);
  const std::uint64_t nerf = 5629499534213120ull;
  const std::uint64_t fast = 53687091200ull + 16777216ull;
  return {r.m_nerf_bytes == nerf && r.m_fastnerf_bytes == fast,
          fmt("M_NeRF %llu, M_FastNeRF %llu", static_cast<unsigned long long>(r.m_nerf_bytes),
              static_cast<unsigned long long>(r.m_fastnerf_bytes))};
}

Outcome factorization_optimality() {
  Rng g(2001);
  double worst_gap = -1e300, worst_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int P = g.integer(8, 512);
    const int Q = g.integer(4, 128);
    const int D = g.integer(1, 6);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * P, Q);
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd a(3 * P), b(Q);
      for (auto& x : a) x = g.normal();
      for (auto& x : b) x = g.normal();
      m += std::pow(0.35, i) * a * b.transpose();
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 1e-3 * g.normal();
    const SampleGrid grid = SampleGrid::from_matrix(m);
    const double als = fit_als(grid, D, 300, static_cast<std::uint64_t>(trial) + 1).residual;
    const double oracle = fit_svd_oracle(grid, D).residual;
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
    double tail = 0.0;
    for (Eigen::Index i = D; i < sv.size(); ++i) tail += sv(i) * sv(i);
    worst_gap = std::max(worst_gap, als - oracle);
    worst_rel = std::max(worst_rel, std::abs(oracle * oracle - tail) / std::max(tail, 1e-300));
  }
  return {worst_gap <= 1e-4 && worst_rel <= 1e-8,
          fmt("max(als - oracle) %.3g, max rel |oracle^2 - tail| %.3g", worst_gap, worst_rel)};
}

Outcome rank_recovery() {
  const AnalyticScene scene = make_analytic_scene("spec-sphere");
  const SampleGrid grid = sample_reference(scene, kBox, {8, 8, 8}, 64);
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(grid.radiance_matrix()).singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * sv(0);
  const double r2 = fit_als(grid, 2, 200, 1).residual;
  const double r1 = fit_als(grid, 1, 200, 1).residual;
  return {rank <= 2 && r2 < 1e-6 && r1 > r2, fmt("rank %d, residual D=2 %.3g, D=1 %.3g", rank, r2, r1)};
}

Outcome beer_lambert() {
  // Slab |z| <= 0.25 with sigma 2, traversed along z; dyadic steps put every
  // sample on the same lattice.
  const FactorizedField field = make_analytic_field(make_analytic_scene("slab"));
  const double exact = 1.0 - std::exp(-2.0 * 0.5);
  const Ray ray{{0.1, -0.2, -2.0}, {0, 0, 1}, 0.0, 1e30};
  std::vector<double> err;
  for (int n = 4; n <= 8; ++n) {
    RenderConfig cfg;
    cfg.step = std::ldexp(1.0, -n);
    cfg.termination = 0.0;
    err.push_back(std::abs(integrate_ray_direct(ray, field, kBox, cfg).alpha() - exact));
  }
  double min_order = 1e300;
  std::string orders;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double o = std::log2(err[i - 1] / err[i]);
    min_order = std::min(min_order, o);
    orders += fmt("%s%.4f", i > 1 ? ", " : "", o);
  }
  return {min_order >= 0.9, "orders " + orders};
}

Outcome psnr_trend() {
  std::vector<double> v;
  for (const int k : {64, 128, 256}) v.push_back(baseline::cached_vs_direct_psnr("spec-sphere", k));
  const bool up = v[0] < v[1] && v[1] < v[2];
  return {up, fmt("PSNR k=64 %.3f dB, k=128 %.3f dB, k=256 %.3f dB", v[0], v[1], v[2])};
}

Outcome oracle_equivalence() {
  // BVH against an exhaustive search with the same triangle test, and the
  // t values against an independent Moller-Trumbore.
  const Baked b = bake_scene(make_analytic_scene("two-blobs"), 48, 4);
  const CollisionMesh mesh = build_collision_mesh(b.caches.position, {});
  const Bvh bvh(mesh);
  Rng g(2006);
  int mismatches = 0, hits = 0;
  double worst_t = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 origin = g.unit() * g.uniform(0.8, 2.0);
    const Vec3 dir = i % 3 == 0 ? g.unit() : normalize(g.vec(-0.4, 0.4) - origin);
    const Ray ray{origin, dir, 0.0, 1e30};
    const auto fast = bvh.first_hit(ray);
    std::optional<Hit> slow;
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const auto h = intersect_triangle(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], ray, t);
      if (h && (!slow || h->t < slow->t)) slow = h;
    }
    if (fast.has_value() != slow.has_value() || (fast && fast->triangle != slow->triangle)) {
      ++mismatches;
      continue;
    }
    if (!fast) continue;
    ++hits;
    const auto& tri = mesh.triangles[fast->triangle];
    const auto mt = oracle::moller_trumbore(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], ray);
    worst_t = std::max(worst_t, mt ? std::abs(*mt - fast->t) : 1e300);
    worst_t = std::max(worst_t, std::abs(slow->t - fast->t));
  }

  // Fully occupied k=16 cache over a non-cubic box.
  const Aabb box{{-0.5, -0.3, -0.4}, {0.5, 0.3, 0.4}};
  BakeOptions o;
  o.resolution = 16;
  o.dir_resolution = 2;
  const BakedCaches full =
      bake(make_analytic_field(make_analytic_scene("slab", {{"half_thickness", 10.0}})), box, o);
  int lookup_mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const Position p = g.vec(-0.6, 0.6);
    const auto v = oracle::nearest_voxel(full.position, p);
    const float* got = full.position.lookup_record(p);
    const float* want = v ? full.position.record(*v) : nullptr;
    lookup_mismatches += got != want;
  }
  return {mismatches == 0 && worst_t <= 1e-9 && hits > 100 && lookup_mismatches == 0,
          fmt("BVH: %d hits, %d mismatches, max |dt| %.2g; lookup: %d mismatches of 1e5", hits, mismatches,
              worst_t, lookup_mismatches)};
}

Outcome marching_cubes_accuracy() {
  const double r = 0.35;
  const DensityVolume sphere =
      DensityVolume::sample({64, 64, 64}, kBox, [&](const Position& p) { return r - length(p); });
  const CollisionMesh s = marching_cubes(sphere);
  const double diag = length(sphere.spacing);
  double worst_sphere = 0.0;
  for (const Vec3& v : s.vertices) worst_sphere = std::max(worst_sphere, std::abs(length(v) - r));

  const Vec3 n{0.3, -0.2, 0.5};
  const DensityVolume plane =
      DensityVolume::sample({64, 64, 64}, kBox, [&](const Position& p) { return dot(n, p) + 0.05; });
  const CollisionMesh pm = marching_cubes(plane);
  double worst_plane = 0.0;
  for (const Vec3& v : pm.vertices) worst_plane = std::max(worst_plane, std::abs(dot(n, v) + 0.05) / length(n));
  return {!s.empty() && !pm.empty() && worst_sphere <= diag && worst_plane <= 1e-6,
          fmt("sphere max | |v| - r | %.4g (diagonal %.4g), plane max distance %.3g", worst_sphere, diag,
              worst_plane)};
}

Outcome early_termination() {
  double worst = 0.0;
  std::string per;
  for (const auto& e : analytic_catalog()) {
    const Baked b = bake_scene(make_analytic_scene(e.id), 128, 32);
    RenderConfig on, off;
    on.termination = 0.001;
    off.termination = 0.0;
    const Camera cam = orbit_camera(128);
    const double d = max_abs_difference(render(cam, b.caches.position, b.caches.direction, &b.bvh, on),
                                        render(cam, b.caches.position, b.caches.direction, &b.bvh, off));
    worst = std::max(worst, d);
    per += fmt("%s%s %.2g", per.empty() ? "" : ", ", e.id.c_str(), d);
  }
  return {worst <= 0.002, per};
}

Outcome determinism() {
  const Baked b = bake_scene(make_analytic_scene("spec-sphere"), 128, 32);
  const Camera cam = orbit_camera(128);
  const int max_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<FrameBuffer> frames;
  for (const int w : {1, 2, max_workers}) {
    RenderConfig cfg;
    cfg.workers = w;
    frames.push_back(render(cam, b.caches.position, b.caches.direction, &b.bvh, cfg));
  }
  bool same = true;
  for (const auto& f : frames) same = same && f.rgba8 == frames[0].rgba8 && f.linear == frames[0].linear;
  return {same, fmt("workers 1, 2, %d", max_workers)};
}

// The full 8x384 network evaluated at every sample, with density taken from
// the analytic sphere so rays stop where the cached scene's rays stop.
class MaskedMlpSource final : public FieldSource {
 public:
  MaskedMlpSource(FactorizedField mlp, AnalyticScene shape) : mlp_(std::move(mlp)), shape_(std::move(shape)) {}
  int num_components() const override { return mlp_.num_components(); }
  void eval_pos_into(const Position& p, std::span<float> record) const override {
    eval_pos_batch(std::span<const Position>(&p, 1), record);
  }
  void eval_pos_batch(std::span<const Position> points, std::span<float> records) const override {
    mlp_.eval_pos_batch(points, records);
    const std::size_t rs = position_record_size(num_components());
    for (std::size_t i = 0; i < points.size(); ++i) records[i * rs] = static_cast<float>(shape_.sigma(points[i]));
  }
  void eval_dir_into(const Direction& d, std::span<float> beta) const override { mlp_.eval_dir_into(d, beta); }
  std::string describe() const override { return "masked " + mlp_.describe(); }

 private:
  FactorizedField mlp_;
  AnalyticScene shape_;
};

Outcome speedup() {
  AnalyticScene scene = make_analytic_scene("spec-sphere");
  scene.padded_components = 8;
  const Baked b = bake_scene(scene, 256, 64);
  const FactorizedField direct(std::make_shared<MaskedMlpSource>(make_mlp_field(random_weights(MlpShape{}, 7)),
                                                                  make_analytic_scene("spec-sphere")));
  BenchSetup setup;
  setup.camera = orbit_camera(256);
  setup.position = &b.caches.position;
  setup.direction = &b.caches.direction;
  setup.bvh = &b.bvh;
  setup.direct_field = &direct;
  setup.direct_aabb = kBox;
  setup.direct_step = b.caches.position.voxel_size();
  setup.direct_pixel_stride = 257;
  const std::vector<int> res{256};
  const BenchResult r = run_bench(setup, res, 3).results[0];
  return {r.speedup && *r.speedup >= 10.0,
          fmt("cached %.1f ms, direct %.0f ms (from %zu of %d pixels), speedup %.0fx", r.cached_median_ms,
              r.direct_median_ms.value_or(0.0), r.direct_pixels, 256 * 256, r.speedup.value_or(0.0))};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace fastfield

int main() {
  using namespace fastfield;
  const std::vector<Criterion> criteria{
      {"cache-size formulas", 0.001, cache_sizes},
      {"factorization optimality", 30, factorization_optimality},
      {"rank recovery", 10, rank_recovery},
      {"Beer-Lambert convergence", 5, beer_lambert},
      {"cache fidelity trend", 120, psnr_trend},
      {"oracle equivalence", 10, oracle_equivalence},
      {"marching cubes accuracy", 5, marching_cubes_accuracy},
      {"early-termination bound", 60, early_termination},
      {"determinism", 60, determinism},
      {"desk-scale speedup", 120, speedup},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s  %-26s %s; %.4g s (budget %g s%s)\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), s,
                c.budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
