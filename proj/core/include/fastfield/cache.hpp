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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fastfield/field.hpp"
#include "fastfield/math.hpp"

namespace fastfield {

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;
  bool operator==(const VoxelIndex&) const = default;
};

/// Sparse k^3 cache of position records {sigma, D x (u, v, w)}.
///
/// k divides the longest AABB side; the other axes get ceil(k * extent / longest)
/// voxels so voxels stay cubic. Occupancy is one bit per voxel, grouped into
/// 8^3 blocks of eight 64-bit words (word = local z, bit = 8 * local y + local x).
/// Payload records exist only for occupied voxels, stored block by block in
/// local bit order; `block_offsets[b]` is the record index of block b's first
/// occupied voxel.
class PositionCache {
 public:
  static constexpr int kBlockEdge = 8;
  static constexpr int kWordsPerBlock = 8;

  PositionCache() = default;
  /// Validates every structural invariant; throws ParseError on any mismatch.
  PositionCache(const Aabb& aabb, int resolution, int num_components,
                std::vector<std::uint64_t> occupancy, std::vector<std::uint64_t> block_offsets,
                std::vector<float> payload);

  static std::array<int, 3> grid_dims(const Aabb& aabb, int resolution);

  const Aabb& aabb() const { return aabb_; }
  int resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const std::array<int, 3>& block_dims() const { return block_dims_; }
  double voxel_size() const { return voxel_size_; }
  int num_components() const { return num_components_; }
  std::size_t record_size() const { return position_record_size(num_components_); }
  std::size_t num_blocks() const { return block_offsets_.size(); }
  std::size_t total_voxels() const;
  std::size_t occupied_voxels() const { return payload_.size() / record_size(); }
  /// alpha = occupied / total.
  double sparsity() const;

  Position voxel_center(const VoxelIndex& v) const;
  /// Nearest voxel for points inside the AABB, nothing outside.
  std::optional<VoxelIndex> voxel_at(const Position& p) const;
  bool occupied(const VoxelIndex& v) const;
  /// Flat record of an occupied voxel, nullptr when unoccupied.
  const float* record(const VoxelIndex& v) const;
  /// Nearest-neighbor lookup; nullptr for empty space or points outside the AABB.
  const float* lookup_record(const Position& p) const;

  std::span<const std::uint64_t> occupancy() const { return occupancy_; }
  std::span<const std::uint64_t> block_offsets() const { return block_offsets_; }
  std::span<const float> payload() const { return payload_; }

 private:
  Aabb aabb_{};
  int resolution_ = 0;
  int num_components_ = 0;
  double voxel_size_ = 0.0;
  std::array<int, 3> dims_{};
  std::array<int, 3> block_dims_{};
  std::vector<std::uint64_t> occupancy_;
  std::vector<std::uint64_t> block_offsets_;
  std::vector<float> payload_;
};

enum class DirectionMode {
  kEquirect,  // l x l bins over theta in [0, pi], phi in [0, 2pi); bilinear, phi wraps
  kCube,      // l^3 bins over unit-vector components in [-1, 1]^3; trilinear
};

std::string_view to_string(DirectionMode mode);
DirectionMode direction_mode_from_string(std::string_view s);

/// Dense table of D weights per direction bin. Interpolation is exact at bin
/// centers and extrapolates linearly past the outermost centers.
class DirectionCache {
 public:
  DirectionCache() = default;
  DirectionCache(DirectionMode mode, int resolution, int num_components, std::vector<float> payload);

  DirectionMode mode() const { return mode_; }
  int resolution() const { return resolution_; }
  int num_components() const { return num_components_; }
  std::size_t num_bins() const;
  std::span<const float> payload() const { return payload_; }
  std::span<const float> bin(std::size_t index) const;

  /// Direction at which a bin is baked. Cube bins use the normalized bin
  /// center (+z for the center bin of odd l).
  Direction bin_direction(std::size_t index) const;

  /// Interpolates at continuous lattice coordinates where bin centers sit at
  /// integers: (x, y, z) for cube mode, (theta, phi, unused) for equirect.
  void interpolate_at(const std::array<double, 3>& lattice_coord, std::span<float> beta) const;
  std::array<double, 3> lattice_coord(const Direction& d) const;

  void lookup_into(const Direction& d, std::span<float> beta) const;

 private:
  DirectionMode mode_ = DirectionMode::kCube;
  int resolution_ = 0;
  int num_components_ = 0;
  std::vector<float> payload_;
};

DeepRadianceMap lookup_pos(const PositionCache& cache, const Position& p);
/// Throws NonUnitDirection when |d| deviates from 1.
WeightVector lookup_dir(const DirectionCache& cache, const Vec3& d);
WeightVector lookup_dir(const DirectionCache& cache, const Direction& d);

struct BakeOptions {
  int resolution = 128;
  DirectionMode dir_mode = DirectionMode::kCube;
  int dir_resolution = 64;
  /// Voxels with sigma strictly greater than this are occupied.
  double density_threshold = 0.0;
  int workers = 0;
};

struct BakedCaches {
  PositionCache position;
  DirectionCache direction;
  double density_threshold = 0.0;
};

/// Tabulates F_pos at voxel centers and F_dir at bin centers. Throws
/// DegenerateAabb or InvalidArgument.
BakedCaches bake(const FactorizedField& field, const Aabb& aabb, const BakeOptions& options);

void save_cache(const BakedCaches& caches, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_cache(const BakedCaches& caches);
BakedCaches load_cache(const std::filesystem::path& path);

}  // namespace fastfield
