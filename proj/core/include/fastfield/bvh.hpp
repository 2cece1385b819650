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

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fastfield/math.hpp"
#include "fastfield/mesher.hpp"

namespace fastfield {

struct Hit {
  double t = 0.0;
  std::uint32_t triangle = 0;
  /// True when the ray arrives from the triangle's outward side.
  bool front_face = false;
};

/// Watertight ray/triangle test: edges shared by two triangles are never
/// missed by both. Returns hits with t in [ray.t_min, ray.t_max].
std::optional<Hit> intersect_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Ray& ray,
                                      std::uint32_t id);

struct BvhNode {
  Aabb box;
  std::uint32_t first = 0;  // leaf: first slot in the triangle order; inner: right child index
  std::uint32_t count = 0;  // 0 for inner nodes, whose left child is the next node
  bool leaf() const { return count > 0; }
};

struct HitStats {
  std::size_t nodes_visited = 0;
  std::size_t triangles_tested = 0;
};

/// Binary BVH over a triangle mesh: median split on the longest axis of the
/// centroid bounds, at most kMaxLeafSize triangles per leaf.
class Bvh {
 public:
  static constexpr int kMaxLeafSize = 4;

  Bvh() = default;
  /// Throws EmptyMesh.
  explicit Bvh(const CollisionMesh& mesh);

  const std::vector<BvhNode>& nodes() const { return nodes_; }
  /// Triangle ids in leaf order; leaves reference contiguous ranges.
  const std::vector<std::uint32_t>& order() const { return order_; }
  std::size_t num_triangles() const { return tris_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Nearest hit with t >= ray.t_min; ties in t go to the lowest triangle id.
  std::optional<Hit> first_hit(const Ray& ray, HitStats* stats = nullptr) const;

 private:
  struct Tri {
    Vec3 a, b, c;
  };
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  std::vector<Tri> tris_;
  std::vector<BvhNode> nodes_;
  std::vector<std::uint32_t> order_;
};

Bvh build_bvh(const CollisionMesh& mesh);
inline std::optional<Hit> first_hit(const Bvh& bvh, const Ray& ray, HitStats* stats = nullptr) {
  return bvh.first_hit(ray, stats);
}

}  // namespace fastfield
