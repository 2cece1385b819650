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

#include "fastfield/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "fastfield/error.hpp"

namespace fastfield {

FrameBuffer::FrameBuffer(int w, int h) : width(w), height(h) {
  if (w < 0 || h < 0) throw Error(ErrorCode::kInvalidArgument, "negative image dims");
  linear.assign(pixel_count() * 4, 0.0f);
  rgba8.assign(pixel_count() * 4, 0);
}

std::uint8_t to_byte(double v) {
  const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void FrameBuffer::set(int x, int y, const Rgb& c, double a) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 4;
  linear[i] = static_cast<float>(c.x);
  linear[i + 1] = static_cast<float>(c.y);
  linear[i + 2] = static_cast<float>(c.z);
  linear[i + 3] = static_cast<float>(a);
  rgba8[i] = to_byte(c.x);
  rgba8[i + 1] = to_byte(c.y);
  rgba8[i + 2] = to_byte(c.z);
  rgba8[i + 3] = 255;
}

Rgb FrameBuffer::color(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 4;
  return {linear[i], linear[i + 1], linear[i + 2]};
}

float FrameBuffer::alpha(int x, int y) const {
  return linear[(static_cast<std::size_t>(y) * width + x) * 4 + 3];
}

namespace {

void check_same_dims(const FrameBuffer& a, const FrameBuffer& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image dims differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                    " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

}  // namespace

double psnr(const FrameBuffer& a, const FrameBuffer& b) {
  check_same_dims(a, b);
  double sum = 0.0;
  const std::size_t n = a.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      const double d = static_cast<double>(a.linear[4 * p + c]) - b.linear[4 * p + c];
      sum += d * d;
    }
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sum / (3.0 * static_cast<double>(n));
  return 10.0 * std::log10(1.0 / mse);
}

double max_abs_difference(const FrameBuffer& a, const FrameBuffer& b) {
  check_same_dims(a, b);
  double worst = 0.0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      worst = std::max(worst, std::abs(static_cast<double>(a.linear[4 * p + c]) - b.linear[4 * p + c]));
    }
  }
  return worst;
}

std::vector<std::uint8_t> encode_png(const FrameBuffer& image) {
  if (image.width < 1 || image.height < 1) throw Error(ErrorCode::kInvalidArgument, "empty image");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.rgba8.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.rgba8.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_png(const FrameBuffer& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FrameBuffer read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGBA;
  FrameBuffer fb(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, fb.rgba8.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kParse, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  for (std::size_t i = 0; i < fb.rgba8.size(); ++i) fb.linear[i] = fb.rgba8[i] / 255.0f;
  return fb;
}

void write_pfm(const FrameBuffer& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f << "PF\n" << image.width << ' ' << image.height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width) * 3);
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        row[3 * x + c] = image.linear[(static_cast<std::size_t>(y) * image.width + x) * 4 + c];
      }
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FrameBuffer read_pfm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  f >> magic >> w >> h >> scale;
  f.get();
  if (!f || magic != "PF" || w < 1 || h < 1) throw Error(ErrorCode::kParse, "bad PFM header in " + path.string());
  if (scale > 0.0) throw Error(ErrorCode::kParse, "big-endian PFM is not supported");
  FrameBuffer fb(w, h);
  std::vector<float> row(static_cast<std::size_t>(w) * 3);
  for (int y = h - 1; y >= 0; --y) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!f) throw Error(ErrorCode::kParse, "truncated PFM " + path.string());
    for (int x = 0; x < w; ++x) fb.set(x, y, {row[3 * x], row[3 * x + 1], row[3 * x + 2]}, 1.0);
  }
  return fb;
}

}  // namespace fastfield
