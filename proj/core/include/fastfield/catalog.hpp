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

#include <string>
#include <vector>

#include "fastfield/analytic.hpp"

namespace fastfield {

struct CatalogEntry {
  std::string id;  // stable; accepted by make_analytic_scene and the CLI
  std::string summary;
  std::string sigma;     // closed form of sigma(p)
  std::string radiance;  // closed form of c(p, d)
  int components = 1;    // natural D
  bool view_dependent = false;
};

/// Every built-in analytic scene, in a fixed order.
const std::vector<CatalogEntry>& analytic_catalog();

/// Scenes with nonzero density, i.e. every catalog entry except "empty".
std::vector<AnalyticScene> catalog_scenes();

}  // namespace fastfield
