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

#include <filesystem>
#include <string>
#include <vector>

#include "fastfield/camera.hpp"

namespace fastfield {

struct ManifestFrame {
  std::string file_path;
  Mat4 transform_matrix{};  // camera-to-world, row-major

  bool operator==(const ManifestFrame&) const = default;
};

/// A transforms.json camera set in the NeRF-synthetic layout.
struct DatasetManifest {
  double camera_angle_x = 0.0;
  std::vector<ManifestFrame> frames;
  int width = 800;
  int height = 800;
  /// Non-fatal findings, e.g. rotation blocks that are not orthonormal.
  std::vector<std::string> warnings;

  /// Camera for frame i using fov = camera_angle_x and the frame transform.
  Camera camera(std::size_t index, double near = 0.0, double far = 1e30) const;
  bool operator==(const DatasetManifest& o) const {
    return camera_angle_x == o.camera_angle_x && frames == o.frames && width == o.width &&
           height == o.height;
  }
};

/// Rotation blocks deviating from orthonormal by more than this produce a warning.
inline constexpr double kOrthonormalWarnTolerance = 1e-3;

/// Image dims come from optional "w"/"h" keys, else from the first frame's PNG
/// (relative to the manifest, ".png" appended when the path has no
/// extension), else 800x800. Throws IoError, ParseError (with line and column
/// for malformed JSON, or the offending field path), or MissingField.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string dump_manifest(const DatasetManifest& manifest);

}  // namespace fastfield
