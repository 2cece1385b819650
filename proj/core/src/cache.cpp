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

#include "fastfield/cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fastfield/container.hpp"
#include "fastfield/error.hpp"
#include "parallel.hpp"

namespace fastfield {
namespace {

constexpr char kCacheMagic[] = "FFCA";
constexpr std::uint32_t kCacheVersion = 1;
constexpr int kB = PositionCache::kBlockEdge;

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParse, "cache: " + what);
}

std::size_t block_index(const std::array<int, 3>& bdims, int bx, int by, int bz) {
  return (static_cast<std::size_t>(bz) * bdims[1] + by) * bdims[0] + bx;
}

}  // namespace

std::array<int, 3> PositionCache::grid_dims(const Aabb& aabb, int resolution) {
  aabb.validate();
  if (resolution < 1) throw Error(ErrorCode::kInvalidArgument, "cache resolution must be >= 1");
  const Vec3 e = aabb.extent();
  const double longest = aabb.longest_extent();
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    // The small slack keeps exact ratios (0.5 * 64) from rounding up.
    const double n = std::ceil(resolution * (e[a] / longest) - 1e-9);
    dims[a] = std::max(1, static_cast<int>(n));
  }
  return dims;
}

PositionCache::PositionCache(const Aabb& aabb, int resolution, int num_components,
                             std::vector<std::uint64_t> occupancy,
                             std::vector<std::uint64_t> block_offsets, std::vector<float> payload)
    : aabb_(aabb),
      resolution_(resolution),
      num_components_(num_components),
      occupancy_(std::move(occupancy)),
      block_offsets_(std::move(block_offsets)),
      payload_(std::move(payload)) {
  try {
    dims_ = grid_dims(aabb_, resolution_);
  } catch (const Error& e) {
    parse_fail(e.what());
  }
  if (num_components_ < 1) parse_fail("num_components must be >= 1");
  voxel_size_ = aabb_.longest_extent() / resolution_;
  for (int a = 0; a < 3; ++a) block_dims_[a] = (dims_[a] + kB - 1) / kB;
  const std::size_t nblocks =
      static_cast<std::size_t>(block_dims_[0]) * block_dims_[1] * block_dims_[2];
  if (occupancy_.size() != nblocks * kWordsPerBlock) {
    parse_fail("occupancy has " + std::to_string(occupancy_.size()) + " words, expected " +
               std::to_string(nblocks * kWordsPerBlock));
  }
  if (block_offsets_.size() != nblocks) {
    parse_fail("block directory has " + std::to_string(block_offsets_.size()) +
               " entries, expected " + std::to_string(nblocks));
  }
  std::uint64_t running = 0;
  for (int bz = 0; bz < block_dims_[2]; ++bz) {
    for (int by = 0; by < block_dims_[1]; ++by) {
      for (int bx = 0; bx < block_dims_[0]; ++bx) {
        const std::size_t b = block_index(block_dims_, bx, by, bz);
        if (block_offsets_[b] != running) parse_fail("block directory is not a prefix sum");
        const int nx = std::min(kB, dims_[0] - bx * kB);
        const int ny = std::min(kB, dims_[1] - by * kB);
        const int nz = std::min(kB, dims_[2] - bz * kB);
        std::uint64_t row_mask = 0;
        for (int ly = 0; ly < ny; ++ly) row_mask |= ((std::uint64_t{1} << nx) - 1) << (ly * kB);
        for (int lz = 0; lz < kWordsPerBlock; ++lz) {
          const std::uint64_t w = occupancy_[b * kWordsPerBlock + lz];
          const std::uint64_t valid = lz < nz ? row_mask : 0;
          if (w & ~valid) parse_fail("occupancy bit set outside the grid");
          running += std::popcount(w);
        }
      }
    }
  }
  const std::size_t rs = record_size();
  if (payload_.size() != running * rs) {
    parse_fail("payload has " + std::to_string(payload_.size()) + " floats, expected " +
               std::to_string(running * rs));
  }
  for (std::size_t i = 0; i < payload_.size(); i += rs) {
    if (payload_[i] < 0.0f) parse_fail("negative density in payload");
  }
}

std::size_t PositionCache::total_voxels() const {
  return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
}

double PositionCache::sparsity() const {
  const std::size_t total = total_voxels();
  return total ? static_cast<double>(occupied_voxels()) / static_cast<double>(total) : 0.0;
}

Position PositionCache::voxel_center(const VoxelIndex& v) const {
  return {aabb_.min.x + (v.x + 0.5) * voxel_size_, aabb_.min.y + (v.y + 0.5) * voxel_size_,
          aabb_.min.z + (v.z + 0.5) * voxel_size_};
}

std::optional<VoxelIndex> PositionCache::voxel_at(const Position& p) const {
  if (resolution_ == 0 || !aabb_.contains(p)) return std::nullopt;
  int idx[3];
  for (int a = 0; a < 3; ++a) {
    const int i = static_cast<int>(std::floor((p[a] - aabb_.min[a]) / voxel_size_));
    idx[a] = std::clamp(i, 0, dims_[a] - 1);
  }
  return VoxelIndex{idx[0], idx[1], idx[2]};
}

bool PositionCache::occupied(const VoxelIndex& v) const {
  const std::size_t b = block_index(block_dims_, v.x / kB, v.y / kB, v.z / kB);
  const std::uint64_t w = occupancy_[b * kWordsPerBlock + v.z % kB];
  return (w >> ((v.y % kB) * kB + v.x % kB)) & 1u;
}

const float* PositionCache::record(const VoxelIndex& v) const {
  const std::size_t b = block_index(block_dims_, v.x / kB, v.y / kB, v.z / kB);
  const std::uint64_t* words = occupancy_.data() + b * kWordsPerBlock;
  const int lz = v.z % kB;
  const int bit = (v.y % kB) * kB + v.x % kB;
  if (!((words[lz] >> bit) & 1u)) return nullptr;
  std::uint64_t rank = block_offsets_[b];
  for (int z = 0; z < lz; ++z) rank += std::popcount(words[z]);
  rank += std::popcount(words[lz] & ((std::uint64_t{1} << bit) - 1));
  return payload_.data() + rank * record_size();
}

const float* PositionCache::lookup_record(const Position& p) const {
  const auto v = voxel_at(p);
  return v ? record(*v) : nullptr;
}

std::string_view to_string(DirectionMode mode) {
  return mode == DirectionMode::kCube ? "cube" : "equirect";
}

DirectionMode direction_mode_from_string(std::string_view s) {
  if (s == "cube") return DirectionMode::kCube;
  if (s == "equirect") return DirectionMode::kEquirect;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown direction mode '" + std::string(s) + "' (expected cube or equirect)");
}

DirectionCache::DirectionCache(DirectionMode mode, int resolution, int num_components,
                               std::vector<float> payload)
    : mode_(mode), resolution_(resolution), num_components_(num_components),
      payload_(std::move(payload)) {
  if (resolution_ < 1) throw Error(ErrorCode::kInvalidArgument, "direction resolution must be >= 1");
  if (num_components_ < 1) throw Error(ErrorCode::kInvalidArgument, "num_components must be >= 1");
  if (payload_.size() != num_bins() * num_components_) {
    throw Error(ErrorCode::kParse, "direction payload has " + std::to_string(payload_.size()) +
                                       " floats, expected " +
                                       std::to_string(num_bins() * num_components_));
  }
}

std::size_t DirectionCache::num_bins() const {
  const std::size_t l = resolution_;
  return mode_ == DirectionMode::kCube ? l * l * l : l * l;
}

std::span<const float> DirectionCache::bin(std::size_t index) const {
  return std::span<const float>(payload_).subspan(index * num_components_, num_components_);
}

Direction DirectionCache::bin_direction(std::size_t index) const {
  const int l = resolution_;
  if (mode_ == DirectionMode::kCube) {
    const int ix = static_cast<int>(index % l);
    const int iy = static_cast<int>((index / l) % l);
    const int iz = static_cast<int>(index / (static_cast<std::size_t>(l) * l));
    const Vec3 c{-1.0 + (2.0 * ix + 1.0) / l, -1.0 + (2.0 * iy + 1.0) / l,
                 -1.0 + (2.0 * iz + 1.0) / l};
    if (dot(c, c) == 0.0) return Direction{};
    return Direction::normalized(c);
  }
  const int it = static_cast<int>(index / l);
  const int ip = static_cast<int>(index % l);
  return Direction::from_spherical((it + 0.5) * M_PI / l, (ip + 0.5) * 2.0 * M_PI / l);
}

std::array<double, 3> DirectionCache::lattice_coord(const Direction& d) const {
  const double l = resolution_;
  if (mode_ == DirectionMode::kCube) {
    return {(d.x() + 1.0) * 0.5 * l - 0.5, (d.y() + 1.0) * 0.5 * l - 0.5,
            (d.z() + 1.0) * 0.5 * l - 0.5};
  }
  return {d.theta() * l / M_PI - 0.5, d.phi() * l / (2.0 * M_PI) - 0.5, 0.0};
}

void DirectionCache::interpolate_at(const std::array<double, 3>& coord,
                                    std::span<float> beta) const {
  const int l = resolution_;
  const int D = num_components_;
  if (static_cast<int>(beta.size()) != D) {
    throw Error(ErrorCode::kDimensionMismatch, "beta has " + std::to_string(beta.size()) +
                                                   " entries, cache has " + std::to_string(D));
  }
  if (l == 1) {
    std::copy_n(payload_.data(), D, beta.data());
    return;
  }
  // Clamped base cell with an unclamped fraction: linear extrapolation past
  // the outermost centers, exact at integer coordinates.
  // Coordinates within 1e-9 of a node snap to it so lookups at bin directions
  // are exact despite trigonometric round-off.
  auto snap = [](double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? r : x;
  };
  auto split = [l, &snap](double x, int& i0, double& t) {
    x = snap(x);
    i0 = std::clamp(static_cast<int>(std::floor(x)), 0, l - 2);
    t = x - i0;
  };
  double acc[64];
  std::vector<double> heap;
  double* a = acc;
  if (D > 64) {
    heap.assign(D, 0.0);
    a = heap.data();
  } else {
    std::fill_n(acc, D, 0.0);
  }
  auto add = [&](std::size_t bin, double w) {
    if (w == 0.0) return;
    const float* src = payload_.data() + bin * D;
    for (int i = 0; i < D; ++i) a[i] += w * src[i];
  };
  if (mode_ == DirectionMode::kCube) {
    int i0[3];
    double t[3];
    for (int k = 0; k < 3; ++k) split(coord[k], i0[k], t[k]);
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      const double w = (dx ? t[0] : 1.0 - t[0]) * (dy ? t[1] : 1.0 - t[1]) *
                       (dz ? t[2] : 1.0 - t[2]);
      const std::size_t bin =
          (static_cast<std::size_t>(i0[2] + dz) * l + (i0[1] + dy)) * l + (i0[0] + dx);
      add(bin, w);
    }
  } else {
    int it0;
    double tt;
    split(coord[0], it0, tt);
    const double y = snap(coord[1]);
    const double fy = std::floor(y);
    const double tp = y - fy;
    const int ip0 = ((static_cast<int>(fy) % l) + l) % l;
    const int ip1 = (ip0 + 1) % l;
    add(static_cast<std::size_t>(it0) * l + ip0, (1.0 - tt) * (1.0 - tp));
    add(static_cast<std::size_t>(it0) * l + ip1, (1.0 - tt) * tp);
    add(static_cast<std::size_t>(it0 + 1) * l + ip0, tt * (1.0 - tp));
    add(static_cast<std::size_t>(it0 + 1) * l + ip1, tt * tp);
  }
  for (int i = 0; i < D; ++i) beta[i] = static_cast<float>(a[i]);
}

void DirectionCache::lookup_into(const Direction& d, std::span<float> beta) const {
  interpolate_at(lattice_coord(d), beta);
}

DeepRadianceMap lookup_pos(const PositionCache& cache, const Position& p) {
  DeepRadianceMap out = DeepRadianceMap::empty(cache.num_components());
  if (const float* r = cache.lookup_record(p)) {
    out.sigma = r[0];
    std::copy_n(r + 1, out.components.size(), out.components.begin());
  }
  return out;
}

WeightVector lookup_dir(const DirectionCache& cache, const Vec3& d) {
  return lookup_dir(cache, Direction(d));
}

WeightVector lookup_dir(const DirectionCache& cache, const Direction& d) {
  WeightVector w;
  w.beta.resize(cache.num_components());
  cache.lookup_into(d, w.beta);
  return w;
}

BakedCaches bake(const FactorizedField& field, const Aabb& aabb, const BakeOptions& options) {
  aabb.validate();
  if (options.resolution < 1 || options.dir_resolution < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bake resolutions must be >= 1");
  }
  if (!(options.density_threshold >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "density threshold must be >= 0");
  }
  const int D = field.num_components();
  const std::size_t rs = position_record_size(D);
  const auto dims = PositionCache::grid_dims(aabb, options.resolution);
  const double h = aabb.longest_extent() / options.resolution;
  std::array<int, 3> bdims{};
  for (int a = 0; a < 3; ++a) bdims[a] = (dims[a] + kB - 1) / kB;
  const std::size_t nblocks = static_cast<std::size_t>(bdims[0]) * bdims[1] * bdims[2];

  std::vector<std::uint64_t> occupancy(nblocks * PositionCache::kWordsPerBlock, 0);
  std::vector<std::vector<float>> block_records(nblocks);
  const float threshold = static_cast<float>(options.density_threshold);

  detail::parallel_for(options.workers, nblocks, [&](std::size_t b) {
    const int bx = static_cast<int>(b % bdims[0]);
    const int by = static_cast<int>((b / bdims[0]) % bdims[1]);
    const int bz = static_cast<int>(b / (static_cast<std::size_t>(bdims[0]) * bdims[1]));
    std::vector<Position> points;
    std::vector<int> bits;
    points.reserve(kB * kB * kB);
    bits.reserve(kB * kB * kB);
    for (int lz = 0; lz < kB; ++lz) {
      const int z = bz * kB + lz;
      if (z >= dims[2]) break;
      for (int ly = 0; ly < kB; ++ly) {
        const int y = by * kB + ly;
        if (y >= dims[1]) break;
        for (int lx = 0; lx < kB; ++lx) {
          const int x = bx * kB + lx;
          if (x >= dims[0]) break;
          points.push_back({aabb.min.x + (x + 0.5) * h, aabb.min.y + (y + 0.5) * h,
                            aabb.min.z + (z + 0.5) * h});
          bits.push_back(lz * 64 + ly * kB + lx);
        }
      }
    }
    std::vector<float> records(points.size() * rs);
    field.eval_pos_batch(points, records);
    std::vector<float>& kept = block_records[b];
    std::uint64_t* words = occupancy.data() + b * PositionCache::kWordsPerBlock;
    // Points were generated in (lz, ly, lx) order, which is the rank order.
    for (std::size_t i = 0; i < points.size(); ++i) {
      const float* r = records.data() + i * rs;
      if (r[0] > threshold) {
        words[bits[i] / 64] |= std::uint64_t{1} << (bits[i] % 64);
        kept.insert(kept.end(), r, r + rs);
      }
    }
  });

  std::vector<std::uint64_t> offsets(nblocks);
  std::size_t total = 0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    offsets[b] = total / rs;
    total += block_records[b].size();
  }
  std::vector<float> payload;
  payload.reserve(total);
  for (auto& r : block_records) {
    payload.insert(payload.end(), r.begin(), r.end());
    std::vector<float>().swap(r);
  }

  BakedCaches out;
  out.density_threshold = options.density_threshold;
  out.position = PositionCache(aabb, options.resolution, D, std::move(occupancy),
                               std::move(offsets), std::move(payload));

  const std::size_t l = options.dir_resolution;
  const std::size_t nbins = options.dir_mode == DirectionMode::kCube ? l * l * l : l * l;
  // A throwaway cache gives access to the bin-center rule.
  const DirectionCache layout(options.dir_mode, options.dir_resolution, D,
                              std::vector<float>(nbins * D));
  std::vector<float> dir_payload(nbins * D);
  constexpr std::size_t kChunk = 1024;
  detail::parallel_for(options.workers, (nbins + kChunk - 1) / kChunk, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(nbins, begin + kChunk);
    std::vector<Direction> dirs;
    dirs.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) dirs.push_back(layout.bin_direction(i));
    field.eval_dir_batch(dirs, std::span<float>(dir_payload).subspan(begin * D, (end - begin) * D));
  });
  out.direction = DirectionCache(options.dir_mode, options.dir_resolution, D, std::move(dir_payload));
  return out;
}

namespace {

Container to_container(const BakedCaches& caches) {
  const PositionCache& p = caches.position;
  const DirectionCache& d = caches.direction;
  Container c;
  std::copy_n(kCacheMagic, 4, c.magic.begin());
  c.version = kCacheVersion;
  c.meta = {{"aabb_min", {p.aabb().min.x, p.aabb().min.y, p.aabb().min.z}},
            {"aabb_max", {p.aabb().max.x, p.aabb().max.y, p.aabb().max.z}},
            {"resolution", p.resolution()},
            {"dims", p.dims()},
            {"num_components", p.num_components()},
            {"density_threshold", caches.density_threshold},
            {"dir_mode", std::string(to_string(d.mode()))},
            {"dir_resolution", d.resolution()}};
  c.arrays.push_back(ContainerArray::of<std::uint64_t>("occupancy", p.occupancy()));
  c.arrays.push_back(ContainerArray::of<std::uint64_t>("block_offsets", p.block_offsets()));
  c.arrays.push_back(ContainerArray::of<float>("payload", p.payload()));
  c.arrays.push_back(ContainerArray::of<float>("dir_payload", d.payload()));
  return c;
}

}  // namespace

void save_cache(const BakedCaches& caches, const std::filesystem::path& path) {
  write_container(path, to_container(caches));
}

std::vector<std::uint8_t> serialize_cache(const BakedCaches& caches) {
  return serialize_container(to_container(caches));
}

BakedCaches load_cache(const std::filesystem::path& path) {
  const Container c = read_container(path, kCacheMagic, kCacheVersion);
  Aabb aabb;
  int k = 0, D = 0, l = 0;
  DirectionMode mode{};
  BakedCaches out;
  try {
    const auto lo = c.meta.at("aabb_min").get<std::array<double, 3>>();
    const auto hi = c.meta.at("aabb_max").get<std::array<double, 3>>();
    aabb = {{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
    k = c.meta.at("resolution").get<int>();
    D = c.meta.at("num_components").get<int>();
    l = c.meta.at("dir_resolution").get<int>();
    out.density_threshold = c.meta.at("density_threshold").get<double>();
    mode = direction_mode_from_string(c.meta.at("dir_mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    parse_fail(std::string("metadata: ") + e.what());
  } catch (const Error& e) {
    parse_fail(e.what());
  }
  out.position = PositionCache(aabb, k, D, c.array("occupancy").as<std::uint64_t>("u64"),
                               c.array("block_offsets").as<std::uint64_t>("u64"),
                               c.array("payload").as<float>("f32"));
  if (l < 1) parse_fail("dir_resolution must be >= 1");
  out.direction = DirectionCache(mode, l, D, c.array("dir_payload").as<float>("f32"));
  return out;
}

}  // namespace fastfield
