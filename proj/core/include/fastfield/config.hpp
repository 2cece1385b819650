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
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fastfield/bvh.hpp"
#include "fastfield/cache.hpp"
#include "fastfield/renderer.hpp"

namespace fastfield {

inline constexpr int kConfigSchemaVersion = 1;

struct SceneSource {
  enum class Kind { kAnalytic, kWeights, kCache };
  Kind kind = Kind::kAnalytic;
  std::string analytic_id = "lambert-sphere";
  nlohmann::json analytic_params = nlohmann::json::object();
  std::filesystem::path path;  // weights or cache file
};

/// Engine configuration file (JSON):
///
///   {
///     "schema_version": 1,
///     "scene": {"analytic": {"id": "spec-sphere", "params": {}}}
///            | {"weights": "field.ffw"} | {"cache": "scene.ffc"},
///     "aabb": {"min": [-0.5, -0.5, -0.5], "max": [0.5, 0.5, 0.5]},
///     "cache": {"k": 128, "l": 64, "d": 0, "dir_mode": "cube", "density_threshold": 0.0},
///     "mesh": {"threshold": 0.0, "downsample_above": 512},
///     "render": {"step": 0.0, "termination": 0.001, "background": [1, 1, 1], "workers": 0},
///     "service": {"host": "127.0.0.1", "port": 8080, "static_root": "viewer"}
///   }
///
/// Only "schema_version" and "scene" are required; "scene" must name exactly
/// one source. "d" = 0 keeps an analytic scene's natural component count.
struct EngineConfig {
  SceneSource scene;
  Aabb aabb{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
  int k = 128;
  int l = 64;
  int d = 0;
  DirectionMode dir_mode = DirectionMode::kCube;
  double density_threshold = 0.0;
  double mesh_threshold = 0.0;
  int downsample_above = 512;
  RenderConfig render;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_root = "viewer";

  /// Throws InvalidArgument when a parameter is out of its documented range.
  void validate() const;
};

/// Throws ParseError (malformed JSON, wrong types, several scene sources),
/// MissingField, VersionMismatch, or InvalidArgument. Relative paths resolve
/// against `base_dir`.
EngineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
EngineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const EngineConfig& config);

/// A scene ready to render: field (absent when loaded from a cache file),
/// caches, collision mesh and BVH.
struct PreparedScene {
  std::optional<FactorizedField> field;
  BakedCaches caches;
  CollisionMesh mesh;
  Bvh bvh;
};

PreparedScene prepare_scene(const EngineConfig& config);
/// Builds the field named by an analytic or weights source. Throws
/// InvalidArgument for cache sources.
FactorizedField make_field(const EngineConfig& config);

}  // namespace fastfield
