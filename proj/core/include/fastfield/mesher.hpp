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
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "fastfield/cache.hpp"
#include "fastfield/math.hpp"

namespace fastfield {

/// Dense scalar samples on a regular lattice, x fastest. Sample (i, j, k) sits
/// at origin + (i, j, k) * spacing. When `outside_value` is set, every sample
/// beyond the lattice reads as that value, which closes surfaces that touch the
/// boundary.
struct DensityVolume {
  std::array<int, 3> dims{0, 0, 0};
  Vec3 origin;
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<float> values;
  std::optional<float> outside_value;

  /// Samples f at the lattice points of `box`, both faces included, so
  /// spacing = extent / (dims - 1).
  static DensityVolume sample(const std::array<int, 3>& dims, const Aabb& box,
                              const std::function<double(const Position&)>& f);

  std::size_t size() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims[1] + y) * dims[0] + x;
  }
  float at(int x, int y, int z) const { return values[index(x, y, z)]; }
  Position position(int x, int y, int z) const {
    return {origin.x + x * spacing.x, origin.y + y * spacing.y, origin.z + z * spacing.z};
  }
  /// Box spanned by the sample points.
  Aabb bounds() const;
};

struct CollisionMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  double threshold = 0.0;

  bool empty() const { return triangles.empty(); }
  Vec3 normal(std::size_t triangle) const;  // unnormalized, outward
};

/// Smallest level used when meshing the sigma > 0 boundary.
inline constexpr double kMinIsoLevel = 1e-6;

/// Signed field f = sigma - max(threshold, kMinIsoLevel) at voxel centers,
/// positive inside, padded with one layer of empty voxels on every side. The
/// result reports the same value for all samples beyond the lattice.
DensityVolume to_occupancy(const PositionCache& cache, double threshold);

/// Halves the resolution; each output sample is the max of its 2^3 children
/// and sits at their centroid. Throws TooSmall unless every dim is >= 4.
DensityVolume downsample(const DensityVolume& volume);

/// Each sample becomes the max over itself and its 26 neighbors.
DensityVolume dilate(const DensityVolume& volume);

/// Isosurface at `iso` with vertices interpolated linearly along cell edges and
/// welded per lattice edge. Triangles wind counterclockwise seen from the
/// negative side (outward when positive is inside). Triangles with area below
/// 1e-12 are dropped.
CollisionMesh marching_cubes(const DensityVolume& volume, double iso = 0.0, int workers = 0);

struct CollisionMeshOptions {
  double threshold = 0.0;
  /// Volumes with a longest dim above this are downsampled (repeatedly) first.
  int downsample_above = 512;
  /// Grow the occupied set by one voxel so every occupied voxel cell lies
  /// strictly inside the mesh.
  bool dilate = true;
  int workers = 0;
};

/// Occupancy, optional downsampling and dilation, then marching cubes.
CollisionMesh build_collision_mesh(const PositionCache& cache, const CollisionMeshOptions& options);

void write_stl(const CollisionMesh& mesh, const std::filesystem::path& path);
void write_obj(const CollisionMesh& mesh, const std::filesystem::path& path);

}  // namespace fastfield
