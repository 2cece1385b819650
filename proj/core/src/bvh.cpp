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

#include "fastfield/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastfield/error.hpp"

namespace fastfield {
namespace {

bool better(const Hit& h, const std::optional<Hit>& best) {
  return !best || h.t < best->t || (h.t == best->t && h.triangle < best->triangle);
}

// Slab test that treats axis-parallel rays explicitly instead of relying on
// infinities, so rays lying in a box face still count as inside.
bool box_interval(const Aabb& box, const Vec3& o, const Vec3& inv, const bool* parallel,
                  double t0, double t1, double& entry) {
  for (int a = 0; a < 3; ++a) {
    if (parallel[a]) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return false;
      continue;
    }
    double n = (box.min[a] - o[a]) * inv[a];
    double f = (box.max[a] - o[a]) * inv[a];
    if (n > f) std::swap(n, f);
    // Pad by a few ulps so rounding never culls a hit on the box surface.
    f *= 1.0 + 4 * std::numeric_limits<double>::epsilon();
    t0 = std::max(t0, n);
    t1 = std::min(t1, f);
    if (t0 > t1) return false;
  }
  entry = t0;
  return true;
}

}  // namespace

std::optional<Hit> intersect_triangle(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                                      const Ray& ray, std::uint32_t id) {
  const Vec3& d = ray.dir;
  int kz = 0;
  if (std::abs(d.y) > std::abs(d[kz])) kz = 1;
  if (std::abs(d.z) > std::abs(d[kz])) kz = 2;
  int kx = (kz + 1) % 3;
  int ky = (kx + 1) % 3;
  if (d[kz] < 0.0) std::swap(kx, ky);
  const double sx = d[kx] / d[kz];
  const double sy = d[ky] / d[kz];
  const double sz = 1.0 / d[kz];

  const Vec3 a = v0 - ray.origin;
  const Vec3 b = v1 - ray.origin;
  const Vec3 c = v2 - ray.origin;
  const double ax = a[kx] - sx * a[kz], ay = a[ky] - sy * a[kz];
  const double bx = b[kx] - sx * b[kz], by = b[ky] - sy * b[kz];
  const double cx = c[kx] - sx * c[kz], cy = c[ky] - sy * c[kz];

  const double u = cx * by - cy * bx;
  const double v = ax * cy - ay * cx;
  const double w = bx * ay - by * ax;
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;
  const double det = u + v + w;
  if (det == 0.0) return std::nullopt;
  const double tz = u * (sz * a[kz]) + v * (sz * b[kz]) + w * (sz * c[kz]);
  const double t = tz / det;
  if (!(t >= ray.t_min && t <= ray.t_max)) return std::nullopt;
  const Vec3 n = cross(v1 - v0, v2 - v0);
  return Hit{t, id, dot(n, d) < 0.0};
}

Bvh::Bvh(const CollisionMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot build a BVH over zero triangles");
  const std::size_t n = mesh.triangles.size();
  if (n > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw Error(ErrorCode::kInvalidArgument, "mesh too large for 32-bit BVH indices");
  }
  tris_.reserve(n);
  std::vector<Vec3> centroids;
  centroids.reserve(n);
  for (const auto& t : mesh.triangles) {
    for (auto i : t) {
      if (i >= mesh.vertices.size()) throw Error(ErrorCode::kInvalidArgument, "triangle index out of range");
    }
    Tri tri{mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    centroids.push_back((tri.a + tri.b + tri.c) / 3.0);
    tris_.push_back(tri);
  }
  order_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) order_[i] = i;
  nodes_.reserve(2 * n / kMaxLeafSize + 1);
  build(0, static_cast<std::uint32_t>(n), centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box{{1e300, 1e300, 1e300}, {-1e300, -1e300, -1e300}};
  Aabb cbox = box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Tri& t = tris_[order_[i]];
    box.min = cwise_min(box.min, cwise_min(t.a, cwise_min(t.b, t.c)));
    box.max = cwise_max(box.max, cwise_max(t.a, cwise_max(t.b, t.c)));
    cbox.min = cwise_min(cbox.min, centroids[order_[i]]);
    cbox.max = cwise_max(cbox.max, centroids[order_[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= static_cast<std::uint32_t>(kMaxLeafSize)) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  const Vec3 e = cbox.max - cbox.min;
  const int axis = e.x >= e.y && e.x >= e.z ? 0 : (e.y >= e.z ? 1 : 2);
  const std::uint32_t mid = begin + (end - begin) / 2;
  // Ties broken by triangle id keep the build deterministic.
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     const double cl = centroids[l][axis], cr = centroids[r][axis];
                     return cl < cr || (cl == cr && l < r);
                   });
  build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = right;
  return index;
}

std::optional<Hit> Bvh::first_hit(const Ray& ray, HitStats* stats) const {
  if (nodes_.empty()) return std::nullopt;
  Vec3 inv;
  bool parallel[3];
  for (int a = 0; a < 3; ++a) {
    parallel[a] = ray.dir[a] == 0.0;
    inv[a] = parallel[a] ? 0.0 : 1.0 / ray.dir[a];
  }
  std::optional<Hit> best;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  double entry = 0.0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    const double limit = best ? best->t : ray.t_max;
    if (!box_interval(node.box, ray.origin, inv, parallel, ray.t_min, limit, entry)) continue;
    if (stats) ++stats->nodes_visited;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t id = order_[i];
        const Tri& t = tris_[id];
        if (stats) ++stats->triangles_tested;
        if (auto h = intersect_triangle(t.a, t.b, t.c, ray, id); h && better(*h, best)) best = h;
      }
      continue;
    }
    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.first;
    // Push the farther child first so the nearer one is visited next.
    double el = 0.0, er = 0.0;
    const bool hl = box_interval(nodes_[left].box, ray.origin, inv, parallel, ray.t_min, limit, el);
    const bool hr = box_interval(nodes_[right].box, ray.origin, inv, parallel, ray.t_min, limit, er);
    if (hl && hr) {
      if (el <= er) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hl) {
      stack[top++] = left;
    } else if (hr) {
      stack[top++] = right;
    }
  }
  return best;
}

Bvh build_bvh(const CollisionMesh& mesh) { return Bvh(mesh); }

}  // namespace fastfield
