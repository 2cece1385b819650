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

#include "fastfield/service/protocol.hpp"

#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "fastfield/error.hpp"

namespace fastfield::service {
namespace {

using nlohmann::json;

template <typename T>
void put(std::vector<std::uint8_t>& out, std::size_t at, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

Camera RenderRequest::camera() const {
  Camera c;
  c.camera_to_world = pose;
  c.fov_x = fov;
  c.width = render_width();
  c.height = render_height();
  return c;
}

ParsedRequest parse_request(std::string_view text) {
  ParsedRequest out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    out.error.reason = std::string("malformed JSON: ") + e.what();
    return out;
  }
  if (!j.is_object()) {
    out.error.reason = "message must be a JSON object";
    return out;
  }
  if (j.contains("id") && j["id"].is_number_unsigned() && j["id"].get<std::uint64_t>() <= UINT32_MAX) {
    out.error.id = j["id"].get<std::uint32_t>();
  }
  auto fail = [&](std::string reason) {
    out.error.reason = std::move(reason);
    return out;
  };
  if (!j.contains("type") || j["type"] != "render") return fail("unsupported message type");
  if (!out.error.id) return fail("id must be an unsigned 32-bit integer");
  RenderRequest r;
  r.id = *out.error.id;
  const json& pose = j.contains("pose") ? j["pose"] : json();
  if (!pose.is_array() || pose.size() != 16) return fail("pose must be 16 numbers");
  for (int i = 0; i < 16; ++i) {
    if (!pose[i].is_number()) return fail("pose must be 16 numbers");
    r.pose[i] = pose[i].get<double>();
    if (!std::isfinite(r.pose[i])) return fail("pose must be finite");
  }
  if (!j.contains("fov") || !j["fov"].is_number()) return fail("fov must be a number");
  r.fov = j["fov"].get<double>();
  if (!(r.fov > 0.0 && r.fov < M_PI)) return fail("fov must lie in (0, pi)");
  for (const char* key : {"width", "height"}) {
    if (!j.contains(key) || !j[key].is_number_integer()) return fail(std::string(key) + " must be an integer");
    const long v = j[key].get<long>();
    if (v < kMinImageDim || v > kMaxImageDim) {
      return fail(std::string(key) + " must lie in [16, 2048], got " + std::to_string(v));
    }
    (key[0] == 'w' ? r.width : r.height) = static_cast<int>(v);
  }
  if (j.contains("quality")) {
    if (j["quality"] == "full") {
      r.quality = Quality::kFull;
    } else if (j["quality"] == "preview") {
      r.quality = Quality::kPreview;
    } else {
      return fail("quality must be \"full\" or \"preview\"");
    }
  }
  out.request = r;
  return out;
}

std::string encode_request(const RenderRequest& r) {
  json pose = json::array();
  for (double v : r.pose) pose.push_back(v);
  return json{{"type", "render"},
              {"id", r.id},
              {"pose", pose},
              {"fov", r.fov},
              {"width", r.width},
              {"height", r.height},
              {"quality", r.quality == Quality::kPreview ? "preview" : "full"}}
      .dump();
}

std::vector<std::uint8_t> encode_frame(const FrameHeader& h, std::span<const std::uint8_t> rgba) {
  if (rgba.size() != 4ull * h.width * h.height) {
    throw Error(ErrorCode::kDimensionMismatch, "frame payload does not match header dims");
  }
  std::vector<std::uint8_t> out(kFrameHeaderSize + rgba.size(), 0);
  put<std::uint32_t>(out, 0, kFrameMagic);
  put<std::uint32_t>(out, 4, h.id);
  put<std::uint16_t>(out, 8, h.width);
  put<std::uint16_t>(out, 10, h.height);
  out[12] = h.flags;
  put<std::uint64_t>(out, 16, h.micros);
  if (!rgba.empty()) std::memcpy(out.data() + kFrameHeaderSize, rgba.data(), rgba.size());
  return out;
}

FrameHeader decode_frame(std::span<const std::uint8_t> bytes, std::span<const std::uint8_t>* payload) {
  if (bytes.size() < kFrameHeaderSize) throw Error(ErrorCode::kParse, "frame shorter than its header");
  if (get<std::uint32_t>(bytes, 0) != kFrameMagic) throw Error(ErrorCode::kParse, "bad frame magic");
  FrameHeader h;
  h.id = get<std::uint32_t>(bytes, 4);
  h.width = get<std::uint16_t>(bytes, 8);
  h.height = get<std::uint16_t>(bytes, 10);
  h.flags = bytes[12];
  h.micros = get<std::uint64_t>(bytes, 16);
  if (bytes.size() - kFrameHeaderSize != 4ull * h.width * h.height) {
    throw Error(ErrorCode::kParse, "frame payload length does not match its dims");
  }
  if (payload) *payload = bytes.subspan(kFrameHeaderSize);
  return h;
}

std::string dropped_notice(std::uint32_t id, std::uint32_t superseded_by) {
  return json{{"type", "dropped"}, {"id", id}, {"superseded_by", superseded_by}}.dump();
}

std::string error_notice(std::optional<std::uint32_t> id, const std::string& reason) {
  json j = {{"type", "error"}, {"reason", reason}};
  j["id"] = id ? json(*id) : json(nullptr);
  return j.dump();
}

}  // namespace fastfield::service
