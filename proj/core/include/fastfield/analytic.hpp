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

#include <span>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "fastfield/field.hpp"

namespace fastfield {

// Closed-form scenes used as ground truth. Every scene has a hard-edged
// density (membership tests are inclusive) and radiance that is exactly
// rank-D separable, so its factorized form is exact.

struct SolidSphere {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.35;
  double density = 25.0;

  bool contains(const Position& p) const;
};

/// Diffuse sphere, D = 1. c(p) = albedo * (0.7 + 0.3 (p - center).y / radius).
struct LambertSphere {
  SolidSphere shape;
  Rgb albedo{0.8, 0.5, 0.25};
};

/// Diffuse plus one specular lobe, D = 2.
///   c(p, d) = diffuse * (0.7 + 0.3 q.y / r) + specular * s ((1 + d . axis) / 2)^n
struct SpecSphere {
  SolidSphere shape;
  Rgb diffuse{0.5, 0.3, 0.15};
  Rgb specular{0.45, 0.45, 0.45};
  Vec3 lobe_axis{0.0, 0.0, -1.0};
  double lobe_exponent = 8.0;
  double lobe_strength = 1.0;
};

/// Two disjoint diffuse spheres, D = 1. Overlaps would mix colors by density.
struct TwoBlobs {
  SolidSphere a{{-0.18, 0.0, 0.12}, 0.2, 30.0};
  Rgb color_a{0.9, 0.2, 0.15};
  SolidSphere b{{0.18, 0.0, -0.12}, 0.2, 30.0};
  Rgb color_b{0.15, 0.3, 0.9};
};

/// Semi-transparent spherical shell inner_radius <= |p - center| <= outer_radius, D = 1.
struct HollowShell {
  Vec3 center{0.0, 0.0, 0.0};
  double inner_radius = 0.25;
  double outer_radius = 0.35;
  double density = 4.0;
  Rgb color{0.2, 0.7, 0.4};
};

/// Homogeneous slab |p[axis] - offset| <= half_thickness, unbounded laterally, D = 1.
struct Slab {
  int axis = 2;
  double offset = 0.0;
  double half_thickness = 0.25;
  double density = 2.0;
  Rgb color{0.6, 0.6, 0.6};
};

struct EmptyScene {};

using SceneShape = std::variant<EmptyScene, LambertSphere, SpecSphere, TwoBlobs, HollowShell, Slab>;

struct AnalyticScene {
  std::string id;
  SceneShape shape;
  /// Requested component count; 0 means the scene's natural D. Extra
  /// components beyond the natural D are zero.
  int padded_components = 0;

  int natural_components() const;
  int num_components() const;

  double sigma(const Position& p) const;
  /// Direct closed-form radiance, evaluated without the factorized path.
  Rgb radiance(const Position& p, const Direction& d) const;

  void deep_map_into(const Position& p, std::span<float> record) const;
  void weights_into(const Direction& d, std::span<float> beta) const;

  nlohmann::json params() const;
};

/// Builds a scene of the given catalog kind from JSON parameters; missing keys
/// take the defaults above. Throws InvalidArgument for unknown ids.
AnalyticScene make_analytic_scene(const std::string& id, const nlohmann::json& params = {});

FactorizedField make_analytic_field(AnalyticScene scene);

}  // namespace fastfield
