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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "fastfield/math.hpp"

namespace fastfield::testing {

/// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 point_in(const Aabb& box) {
    return {uniform(box.min.x, box.max.x), uniform(box.min.y, box.max.y), uniform(box.min.z, box.max.z)};
  }
  /// Uniform on the sphere via normalized Gaussians.
  Direction direction() {
    for (;;) {
      const Vec3 v{normal(), normal(), normal()};
      if (dot(v, v) > 1e-12) return Direction::normalized(v);
    }
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Runs `body(gen)` for `cases` independent cases, each with its own seed so a
/// failure names the case that reproduces it.
template <typename Body>
void for_all(int cases, std::uint64_t seed, Body&& body) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = seed * 1000003ull + static_cast<std::uint64_t>(i);
    SCOPED_TRACE("property case " + std::to_string(i) + " seed " + std::to_string(case_seed));
    Gen gen(case_seed);
    body(gen);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

inline const Aabb kUnitBox{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};

}  // namespace fastfield::testing
