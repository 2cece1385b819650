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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastfield/camera.hpp"
#include "fastfield/image.hpp"

namespace fastfield::service {

// Control messages are JSON text frames; rendered images are binary frames.
//
// client -> server
//   {"type": "render", "id": 7, "pose": [16 numbers, row-major camera-to-world],
//    "fov": 0.69, "width": 256, "height": 256, "quality": "full" | "preview"}
//
// server -> client
//   binary: 24-byte header + width * height * 4 bytes of RGBA8, row-major, top row first
//   {"type": "dropped", "id": 3, "superseded_by": 4}
//   {"type": "error", "id": 3, "reason": "..."}   (id is null when unknown)

enum class Quality { kFull, kPreview };

inline constexpr int kMinImageDim = 16;
inline constexpr int kMaxImageDim = 2048;

struct RenderRequest {
  std::uint32_t id = 0;
  Mat4 pose = identity_matrix();
  double fov = 0.6911112070083618;
  int width = 256;
  int height = 256;
  Quality quality = Quality::kFull;

  /// Dims actually rendered: preview halves each side (rounded up).
  int render_width() const { return quality == Quality::kPreview ? (width + 1) / 2 : width; }
  int render_height() const { return quality == Quality::kPreview ? (height + 1) / 2 : height; }
  Camera camera() const;
};

/// Parse failure; `id` is set when the message carried a readable id.
struct ProtocolError {
  std::optional<std::uint32_t> id;
  std::string reason;
};

/// Returns the request or the reason it was rejected (malformed JSON, wrong
/// type, dims outside [16, 2048], non-finite pose, fov outside (0, pi)).
struct ParsedRequest {
  std::optional<RenderRequest> request;
  ProtocolError error;
};
ParsedRequest parse_request(std::string_view text);
std::string encode_request(const RenderRequest& request);

inline constexpr std::uint32_t kFrameMagic = 0x4d524646;  // "FFRM" read as little-endian u32
inline constexpr std::size_t kFrameHeaderSize = 24;
inline constexpr std::uint8_t kFlagPreview = 0x01;

/// Little-endian binary frame header:
///   0  u32 magic "FFRM"
///   4  u32 request id
///   8  u16 width
///   10 u16 height
///   12 u8  flags (bit 0: preview tier)
///   13 u8[3] reserved, zero
///   16 u64 render time in microseconds
struct FrameHeader {
  std::uint32_t id = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t flags = 0;
  std::uint64_t micros = 0;

  double millis() const { return static_cast<double>(micros) / 1000.0; }
  bool operator==(const FrameHeader&) const = default;
};

std::vector<std::uint8_t> encode_frame(const FrameHeader& header, std::span<const std::uint8_t> rgba);
/// Throws ParseError for short buffers, a bad magic, or a payload length
/// different from 4 * width * height.
FrameHeader decode_frame(std::span<const std::uint8_t> bytes, std::span<const std::uint8_t>* payload = nullptr);

std::string dropped_notice(std::uint32_t id, std::uint32_t superseded_by);
std::string error_notice(std::optional<std::uint32_t> id, const std::string& reason);

}  // namespace fastfield::service
