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

#include "fastfield/mesher.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "fastfield/error.hpp"
#include "marching_cubes_tables.hpp"
#include "parallel.hpp"

namespace fastfield {
namespace {

constexpr double kMinTriangleArea = 1e-12;

}  // namespace

DensityVolume DensityVolume::sample(const std::array<int, 3>& dims, const Aabb& box,
                                    const std::function<double(const Position&)>& f) {
  box.validate();
  for (int d : dims) {
    if (d < 2) throw Error(ErrorCode::kInvalidArgument, "volume dims must be >= 2");
  }
  DensityVolume v;
  v.dims = dims;
  v.origin = box.min;
  const Vec3 e = box.extent();
  v.spacing = {e.x / (dims[0] - 1), e.y / (dims[1] - 1), e.z / (dims[2] - 1)};
  v.values.resize(v.size());
  for (int z = 0; z < dims[2]; ++z) {
    for (int y = 0; y < dims[1]; ++y) {
      for (int x = 0; x < dims[0]; ++x) {
        v.values[v.index(x, y, z)] = static_cast<float>(f(v.position(x, y, z)));
      }
    }
  }
  return v;
}

Aabb DensityVolume::bounds() const {
  return {origin, position(dims[0] - 1, dims[1] - 1, dims[2] - 1)};
}

Vec3 CollisionMesh::normal(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec3& a = vertices[tri[0]];
  return cross(vertices[tri[1]] - a, vertices[tri[2]] - a);
}

DensityVolume to_occupancy(const PositionCache& cache, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "threshold must be >= 0");
  const float level = static_cast<float>(std::max(threshold, kMinIsoLevel));
  const auto& cd = cache.dims();
  DensityVolume v;
  v.dims = {cd[0] + 2, cd[1] + 2, cd[2] + 2};
  const double h = cache.voxel_size();
  v.spacing = {h, h, h};
  v.origin = cache.voxel_center({0, 0, 0}) - v.spacing;
  v.values.assign(v.size(), -level);
  v.outside_value = -level;
  for (int z = 0; z < cd[2]; ++z) {
    for (int y = 0; y < cd[1]; ++y) {
      for (int x = 0; x < cd[0]; ++x) {
        if (const float* r = cache.record({x, y, z})) {
          v.values[v.index(x + 1, y + 1, z + 1)] = r[0] - level;
        }
      }
    }
  }
  return v;
}

DensityVolume downsample(const DensityVolume& in) {
  for (int d : in.dims) {
    if (d < 4) throw Error(ErrorCode::kTooSmall, "downsampling needs dims >= 4, got " + std::to_string(d));
  }
  DensityVolume out;
  for (int a = 0; a < 3; ++a) out.dims[a] = (in.dims[a] + 1) / 2;
  out.spacing = in.spacing * 2.0;
  out.origin = in.origin + in.spacing * 0.5;
  out.outside_value = in.outside_value;
  out.values.resize(out.size());
  for (int z = 0; z < out.dims[2]; ++z) {
    for (int y = 0; y < out.dims[1]; ++y) {
      for (int x = 0; x < out.dims[0]; ++x) {
        float m = -std::numeric_limits<float>::infinity();
        for (int c = 0; c < 8; ++c) {
          const int cx = std::min(2 * x + (c & 1), in.dims[0] - 1);
          const int cy = std::min(2 * y + ((c >> 1) & 1), in.dims[1] - 1);
          const int cz = std::min(2 * z + ((c >> 2) & 1), in.dims[2] - 1);
          m = std::max(m, in.at(cx, cy, cz));
        }
        out.values[out.index(x, y, z)] = m;
      }
    }
  }
  return out;
}

DensityVolume dilate(const DensityVolume& in) {
  DensityVolume out = in;
  const auto& d = in.dims;
  // Separable: a 3x3x3 max is three 3-tap maxes.
  for (int axis = 0; axis < 3; ++axis) {
    const std::vector<float> src = out.values;
    for (int z = 0; z < d[2]; ++z) {
      for (int y = 0; y < d[1]; ++y) {
        for (int x = 0; x < d[0]; ++x) {
          int c[3] = {x, y, z};
          float m = src[in.index(x, y, z)];
          for (int s : {-1, 1}) {
            int n[3] = {c[0], c[1], c[2]};
            n[axis] += s;
            if (n[axis] < 0 || n[axis] >= d[axis]) continue;
            m = std::max(m, src[in.index(n[0], n[1], n[2])]);
          }
          out.values[in.index(x, y, z)] = m;
        }
      }
    }
  }
  return out;
}

CollisionMesh marching_cubes(const DensityVolume& vol, double iso, int workers) {
  for (int d : vol.dims) {
    if (d < 2) throw Error(ErrorCode::kInvalidArgument, "volume dims must be >= 2");
  }
  if (vol.values.size() != vol.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "volume value count does not match dims");
  }
  const int o = vol.outside_value ? 1 : 0;
  const float outside = vol.outside_value.value_or(0.0f);
  const std::array<int, 3> ext{vol.dims[0] + 2 * o, vol.dims[1] + 2 * o, vol.dims[2] + 2 * o};
  // Sample accessor over the extended lattice (coordinates shifted by o).
  auto value = [&](int x, int y, int z) -> double {
    x -= o;
    y -= o;
    z -= o;
    if (x < 0 || y < 0 || z < 0 || x >= vol.dims[0] || y >= vol.dims[1] || z >= vol.dims[2]) {
      return outside;
    }
    return vol.at(x, y, z);
  };
  auto key_of = [&](int x, int y, int z, int axis) -> std::uint64_t {
    return ((static_cast<std::uint64_t>(z) * ext[1] + y) * ext[0] + x) * 3 + axis;
  };

  const int cells_z = ext[2] - 1;
  std::vector<std::vector<std::array<std::uint64_t, 3>>> layers(cells_z);
  detail::parallel_for(workers, static_cast<std::size_t>(cells_z), [&](std::size_t cz) {
    const int z = static_cast<int>(cz);
    auto& tris = layers[cz];
    for (int y = 0; y + 1 < ext[1]; ++y) {
      for (int x = 0; x + 1 < ext[0]; ++x) {
        double f[8];
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          f[c] = value(x + detail::kCorner[c][0], y + detail::kCorner[c][1], z + detail::kCorner[c][2]);
          if (f[c] < iso) cube |= 1 << c;
        }
        if (cube == 0 || cube == 255) continue;
        const std::int8_t* row = detail::kTriTable[cube];
        for (int t = 0; row[t] >= 0; t += 3) {
          std::array<std::uint64_t, 3> tri{};
          for (int k = 0; k < 3; ++k) {
            const int* a = detail::kCorner[detail::kEdgeCorners[row[t + k]][0]];
            const int* b = detail::kCorner[detail::kEdgeCorners[row[t + k]][1]];
            const int axis = a[0] != b[0] ? 0 : (a[1] != b[1] ? 1 : 2);
            tri[k] = key_of(x + std::min(a[0], b[0]), y + std::min(a[1], b[1]),
                            z + std::min(a[2], b[2]), axis);
          }
          tris.push_back(tri);
        }
      }
    }
  });

  auto vertex_of = [&](std::uint64_t key) -> Vec3 {
    const int axis = static_cast<int>(key % 3);
    std::uint64_t lin = key / 3;
    int p[3];
    p[0] = static_cast<int>(lin % ext[0]);
    lin /= ext[0];
    p[1] = static_cast<int>(lin % ext[1]);
    p[2] = static_cast<int>(lin / ext[1]);
    int q[3] = {p[0], p[1], p[2]};
    ++q[axis];
    const double f0 = value(p[0], p[1], p[2]);
    const double f1 = value(q[0], q[1], q[2]);
    const double t = f1 != f0 ? (iso - f0) / (f1 - f0) : 0.5;
    const Vec3 a = vol.position(p[0] - o, p[1] - o, p[2] - o);
    const Vec3 b = vol.position(q[0] - o, q[1] - o, q[2] - o);
    return a + (b - a) * t;
  };

  CollisionMesh mesh;
  mesh.threshold = iso;
  std::unordered_map<std::uint64_t, std::uint32_t> welded;
  std::vector<Vec3> positions;
  std::unordered_map<std::uint64_t, Vec3> cache;
  // Layers are merged in z order and vertex ids follow first use, so the
  // output does not depend on how cells were scheduled.
  for (const auto& tris : layers) {
    for (const auto& keys : tris) {
      Vec3 p[3];
      for (int k = 0; k < 3; ++k) {
        auto it = cache.find(keys[k]);
        if (it == cache.end()) it = cache.emplace(keys[k], vertex_of(keys[k])).first;
        p[k] = it->second;
      }
      if (0.5 * length(cross(p[1] - p[0], p[2] - p[0])) < kMinTriangleArea) continue;
      std::array<std::uint32_t, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        auto [it, inserted] = welded.emplace(keys[k], static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(p[k]);
        tri[k] = it->second;
      }
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

CollisionMesh build_collision_mesh(const PositionCache& cache, const CollisionMeshOptions& options) {
  DensityVolume vol = to_occupancy(cache, options.threshold);
  while (options.downsample_above > 0 &&
         *std::max_element(vol.dims.begin(), vol.dims.end()) > options.downsample_above) {
    vol = downsample(vol);
  }
  if (options.dilate) vol = dilate(vol);
  CollisionMesh mesh = marching_cubes(vol, 0.0, options.workers);
  mesh.threshold = options.threshold;
  return mesh;
}

void write_stl(const CollisionMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  char header[80] = {};
  std::strncpy(header, "fastfield collision mesh", sizeof(header) - 1);
  out.write(header, sizeof(header));
  const std::uint32_t n = static_cast<std::uint32_t>(mesh.triangles.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    Vec3 nrm = mesh.normal(t);
    const double len = length(nrm);
    if (len > 0.0) nrm = nrm / len;
    float rec[12] = {static_cast<float>(nrm.x), static_cast<float>(nrm.y), static_cast<float>(nrm.z)};
    for (int k = 0; k < 3; ++k) {
      const Vec3& v = mesh.vertices[mesh.triangles[t][k]];
      rec[3 + 3 * k] = static_cast<float>(v.x);
      rec[4 + 3 * k] = static_cast<float>(v.y);
      rec[5 + 3 * k] = static_cast<float>(v.z);
    }
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void write_obj(const CollisionMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.precision(9);
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace fastfield
