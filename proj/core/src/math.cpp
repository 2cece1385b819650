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

#include "fastfield/math.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include "fastfield/error.hpp"

namespace fastfield {

Direction::Direction(const Vec3& v) : v_(v) {
  const double n = length(v);
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    std::ostringstream msg;
    msg << "direction norm " << n << " is not 1";
    throw Error(ErrorCode::kNonUnitDirection, msg.str());
  }
}

Direction Direction::normalized(const Vec3& v) {
  const double n = length(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kNonUnitDirection, "cannot normalize a zero or non-finite vector");
  }
  Direction d;
  d.v_ = v / n;
  return d;
}

Direction Direction::from_spherical(double theta, double phi) {
  const double s = std::sin(theta);
  Direction d;
  d.v_ = {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
  return d;
}

double Direction::theta() const { return std::acos(std::clamp(v_.z, -1.0, 1.0)); }

double Direction::phi() const {
  double p = std::atan2(v_.y, v_.x);
  if (p < 0.0) p += 2.0 * std::numbers::pi;
  if (p >= 2.0 * std::numbers::pi) p = 0.0;
  return p;
}

Direction Direction::operator-() const {
  Direction d;
  d.v_ = -v_;
  return d;
}

void Aabb::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(min[a] < max[a]) || !std::isfinite(min[a]) || !std::isfinite(max[a])) {
      std::ostringstream msg;
      msg << "axis " << a << " has min " << min[a] << " >= max " << max[a];
      throw Error(ErrorCode::kDegenerateAabb, msg.str());
    }
  }
}

double Aabb::longest_extent() const {
  const Vec3 e = extent();
  return std::max({e.x, e.y, e.z});
}

std::optional<std::array<double, 2>> intersect(const Aabb& box, const Ray& ray) {
  double t0 = ray.t_min;
  double t1 = ray.t_max;
  for (int a = 0; a < 3; ++a) {
    const double inv = 1.0 / ray.dir[a];
    double near = (box.min[a] - ray.origin[a]) * inv;
    double far = (box.max[a] - ray.origin[a]) * inv;
    if (std::isnan(near) || std::isnan(far)) {
      // Origin lies exactly on a slab plane of a parallel ray.
      if (ray.origin[a] < box.min[a] || ray.origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return std::nullopt;
  }
  return std::array<double, 2>{t0, t1};
}

}  // namespace fastfield
