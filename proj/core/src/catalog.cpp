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

#include "fastfield/catalog.hpp"

namespace fastfield {

const std::vector<CatalogEntry>& analytic_catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"lambert-sphere", "diffuse sphere without view dependence",
       "25 inside |p - c| <= 0.35, else 0",
       "albedo * (0.7 + 0.3 (p - c).y / r), albedo (0.8, 0.5, 0.25)", 1, false},
      {"spec-sphere", "diffuse sphere with one specular lobe",
       "25 inside |p - c| <= 0.35, else 0",
       "diffuse * (0.7 + 0.3 (p - c).y / r) + 0.45 * ((1 + d . a) / 2)^8, a = (0, 0, -1)", 2, true},
      {"two-blobs", "two disjoint spheres, red in front of blue along -z",
       "30 inside either sphere of radius 0.2 at (-0.18, 0, 0.12) and (0.18, 0, -0.12)",
       "density-weighted mix of (0.9, 0.2, 0.15) and (0.15, 0.3, 0.9)", 1, false},
      {"hollow-shell", "semi-transparent shell with an empty core",
       "4 for 0.25 <= |p - c| <= 0.35, else 0", "(0.2, 0.7, 0.4)", 1, false},
      {"slab", "homogeneous slab across the scene", "2 for |p.z| <= 0.25, else 0",
       "(0.6, 0.6, 0.6)", 1, false},
      {"empty", "no density anywhere", "0", "0", 1, false},
  };
  return entries;
}

std::vector<AnalyticScene> catalog_scenes() {
  std::vector<AnalyticScene> out;
  for (const auto& e : analytic_catalog()) {
    if (e.id != "empty") out.push_back(make_analytic_scene(e.id));
  }
  return out;
}

}  // namespace fastfield
