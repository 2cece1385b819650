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
#include <cmath>
#include <optional>

namespace fastfield {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr Vec3 cwise_min(const Vec3& a, const Vec3& b) {
  return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}
constexpr Vec3 cwise_max(const Vec3& a, const Vec3& b) {
  return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v / length(v); }

/// World-space point in scene units.
using Position = Vec3;

/// Linear RGB radiance. Unclamped until written to an 8-bit framebuffer.
using Rgb = Vec3;

/// Unit-length view direction. Construction validates ‖d‖ = 1 within 1e-6.
class Direction {
 public:
  static constexpr double kUnitTolerance = 1e-6;

  Direction() = default;  // +z
  explicit Direction(const Vec3& v);  // throws NonUnitDirection

  static Direction normalized(const Vec3& v);
  /// theta in [0, pi] measured from +z, phi in [0, 2pi) measured from +x.
  static Direction from_spherical(double theta, double phi);

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  double theta() const;
  double phi() const;
  Direction operator-() const;

 private:
  Vec3 v_{0.0, 0.0, 1.0};
};

struct Aabb {
  Vec3 min;
  Vec3 max;

  /// Throws DegenerateAabb unless min < max on every axis.
  void validate() const;
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
  double longest_extent() const;
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  bool operator==(const Aabb&) const = default;
};

struct Ray {
  Vec3 origin;
  Vec3 dir{0.0, 0.0, 1.0};
  double t_min = 0.0;
  double t_max = 1e30;

  Vec3 at(double t) const { return origin + dir * t; }
};

/// Slab test. Returns the parametric interval of the ray inside the box,
/// clipped to [t_min, t_max], or nothing when they do not overlap.
std::optional<std::array<double, 2>> intersect(const Aabb& box, const Ray& ray);

}  // namespace fastfield
