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

#include "fastfield/camera.hpp"

#include <cmath>
#include <cstdio>

#include "fastfield/error.hpp"

namespace fastfield {

Mat4 identity_matrix() { return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}; }

void Camera::validate() const {
  for (double v : camera_to_world) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "camera matrix is not finite");
  }
  if (!(fov_x > 0.0 && fov_x < M_PI)) {
    throw Error(ErrorCode::kInvalidArgument, "fov must lie in (0, pi), got " + std::to_string(fov_x));
  }
  if (width < 1 || height < 1) throw Error(ErrorCode::kInvalidArgument, "image dims must be positive");
  if (!(near < far)) throw Error(ErrorCode::kInvalidArgument, "near must be less than far");
}

double Camera::focal() const { return 0.5 * width / std::tan(0.5 * fov_x); }

Vec3 Camera::position() const {
  return {camera_to_world[3], camera_to_world[7], camera_to_world[11]};
}

double Camera::orthonormality_error() const {
  const Mat4& m = camera_to_world;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[4 * k + i] * m[4 * k + j];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

Ray generate_ray(const Camera& cam, int px, int py, std::optional<PixelJitter> jitter) {
  if (px < 0 || py < 0 || px >= cam.width || py >= cam.height) {
    throw Error(ErrorCode::kOutOfImage, "pixel (" + std::to_string(px) + ", " + std::to_string(py) +
                                            ") outside " + std::to_string(cam.width) + "x" +
                                            std::to_string(cam.height));
  }
  const double f = cam.focal();
  const double jx = jitter ? jitter->dx : 0.0;
  const double jy = jitter ? jitter->dy : 0.0;
  const double x = (px + 0.5 + jx - 0.5 * cam.width) / f;
  const double y = -(py + 0.5 + jy - 0.5 * cam.height) / f;
  const Mat4& m = cam.camera_to_world;
  const Vec3 d{m[0] * x + m[1] * y - m[2], m[4] * x + m[5] * y - m[6], m[8] * x + m[9] * y - m[10]};
  Ray r;
  r.origin = cam.position();
  r.dir = normalize(d);
  r.t_min = cam.near;
  r.t_max = cam.far;
  return r;
}

Mat4 orbit_to_matrix(const OrbitState& s) {
  if (!(s.elevation > -M_PI / 2 && s.elevation < M_PI / 2)) {
    throw Error(ErrorCode::kInvalidArgument, "elevation must lie in (-pi/2, pi/2)");
  }
  if (!(s.distance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "orbit distance must be positive");
  const double ce = std::cos(s.elevation), se = std::sin(s.elevation);
  const double ca = std::cos(s.azimuth), sa = std::sin(s.azimuth);
  const Vec3 back{ce * sa, se, ce * ca};  // unit, from target toward the eye
  const Vec3 eye = s.target + back * s.distance;
  const Vec3 right = normalize(cross(Vec3{0.0, 1.0, 0.0}, back));
  const Vec3 up = cross(back, right);
  return {right.x, up.x, back.x, eye.x,  //
          right.y, up.y, back.y, eye.y,  //
          right.z, up.z, back.z, eye.z,  //
          0.0,     0.0,  0.0,    1.0};
}

std::string serialize_matrix(const Mat4& m) {
  std::string out = "[";
  char buf[32];
  for (int i = 0; i < 16; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", m[i]);
    if (i) out += ',';
    out += buf;
  }
  out += ']';
  return out;
}

}  // namespace fastfield
