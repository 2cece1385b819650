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
#include <optional>
#include <string>

#include "fastfield/math.hpp"

namespace fastfield {

/// Row-major 4x4 matrix.
using Mat4 = std::array<double, 16>;

Mat4 identity_matrix();

/// Pinhole camera in the OpenGL convention used by NeRF-synthetic datasets:
/// the camera looks down its local -z axis with +y up and +x right.
struct Camera {
  Mat4 camera_to_world = identity_matrix();
  double fov_x = 0.6911112070083618;  // radians, horizontal
  int width = 800;
  int height = 800;
  double near = 0.0;
  double far = 1e30;

  /// Throws InvalidArgument for non-finite matrices, fov outside (0, pi),
  /// non-positive dims, or near >= far.
  void validate() const;
  double focal() const;  // pixels
  Vec3 position() const;
  /// Max |R^T R - I| entry of the upper-left 3x3 block.
  double orthonormality_error() const;
};

struct PixelJitter {
  double dx = 0.0;  // offsets from the pixel center, in [-0.5, 0.5]
  double dy = 0.0;
};

/// Ray through the center of pixel (px, py), top-left origin, optionally
/// offset within the pixel. Throws OutOfImage.
Ray generate_ray(const Camera& camera, int px, int py, std::optional<PixelJitter> jitter = {});

struct OrbitState {
  Vec3 target;
  double azimuth = 0.0;    // radians, about +y, 0 looks down -z
  double elevation = 0.0;  // radians, in (-pi/2, pi/2)
  double distance = 2.0;
  double fov = 0.6911112070083618;
};

/// Right-handed look-at pose: eye = target + distance (cos e sin a, sin e,
/// cos e cos a), looking at the target with world +y as the up hint.
/// Throws InvalidArgument when elevation or distance is out of range.
Mat4 orbit_to_matrix(const OrbitState& state);

/// Canonical text form shared with the viewer: "[m00,m01,...,m33]" with each
/// entry printed with 17 significant digits.
std::string serialize_matrix(const Mat4& m);

}  // namespace fastfield
