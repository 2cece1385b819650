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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fastfield/math.hpp"

namespace fastfield {

/// Rendered image. `linear` holds unclamped float RGBA per pixel; `rgba8`
/// holds the clamped 8-bit copy with an opaque alpha byte, since pixels are
/// already composited over the background. Rows run top to bottom.
struct FrameBuffer {
  int width = 0;
  int height = 0;
  std::vector<float> linear;
  std::vector<std::uint8_t> rgba8;

  FrameBuffer() = default;
  FrameBuffer(int width, int height);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  void set(int x, int y, const Rgb& color, double alpha);
  Rgb color(int x, int y) const;
  float alpha(int x, int y) const;
};

std::uint8_t to_byte(double v);

/// 10 log10(1 / MSE) over the linear RGB channels with peak 1. Identical
/// images give +infinity. Throws DimensionMismatch.
double psnr(const FrameBuffer& a, const FrameBuffer& b);

/// Max absolute per-channel difference of the linear RGB channels.
double max_abs_difference(const FrameBuffer& a, const FrameBuffer& b);

/// 8-bit RGBA PNG.
void write_png(const FrameBuffer& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const FrameBuffer& image);
/// Decodes any 8-bit PNG into RGBA; the linear buffer is filled from the bytes / 255.
FrameBuffer read_png(const std::filesystem::path& path);

/// Little-endian color PFM ("PF") of the linear RGB channels, bottom row first
/// as the format requires.
void write_pfm(const FrameBuffer& image, const std::filesystem::path& path);
FrameBuffer read_pfm(const std::filesystem::path& path);

}  // namespace fastfield
