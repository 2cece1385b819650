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

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace fastfield::detail {

/// Runs body(i) for i in [0, n) on `workers` threads (0 = all available).
/// Each index is processed exactly once, so outputs written per index are
/// independent of the worker count.
template <typename Body>
void parallel_for(int workers, std::size_t n, Body&& body) {
  if (n == 0) return;
  auto run = [&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const auto& r) {
      for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
    });
  };
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else if (workers > 1) {
    // An explicit request may exceed the core count; TBB would otherwise cap
    // the arena at the hardware concurrency.
    const tbb::global_control limit(tbb::global_control::max_allowed_parallelism,
                                    static_cast<std::size_t>(workers));
    tbb::task_arena arena(workers);
    arena.execute(run);
  } else {
    run();
  }
}

}  // namespace fastfield::detail
