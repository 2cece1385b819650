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

#include "fastfield/container.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace fastfield {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace {

constexpr std::size_t kPreamble = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t dtype_size(std::string_view dtype) {
  if (dtype == "f32" || dtype == "u32") return 4;
  if (dtype == "u64" || dtype == "f64") return 8;
  if (dtype == "u8") return 1;
  throw Error(ErrorCode::kParse, "unknown dtype '" + std::string(dtype) + "'");
}

const ContainerArray& Container::array(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::kParse, "container has no array named '" + std::string(name) + "'");
}

std::vector<std::uint8_t> serialize_container(const Container& c) {
  nlohmann::json header;
  header["meta"] = c.meta;
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : c.arrays) {
    if (a.bytes.size() != a.count * dtype_size(a.dtype)) {
      throw Error(ErrorCode::kInvalidArgument, "array '" + a.name + "' byte size mismatch");
    }
    header["arrays"].push_back({{"name", a.name}, {"dtype", a.dtype}, {"count", a.count}});
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), c.magic.begin(), c.magic.end());
  put_u32(out, c.version);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& a : c.arrays) out.insert(out.end(), a.bytes.begin(), a.bytes.end());
  return out;
}

void write_container(const std::filesystem::path& path, const Container& container) {
  const auto bytes = serialize_container(container);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Container parse_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                          std::uint32_t version) {
  if (bytes.size() < kPreamble) throw Error(ErrorCode::kParse, "file shorter than preamble");
  Container c;
  std::memcpy(c.magic.data(), bytes.data(), 4);
  if (std::string_view(c.magic.data(), 4) != magic) {
    throw Error(ErrorCode::kParse, "bad magic, expected " + std::string(magic));
  }
  c.version = get_u32(bytes.data() + 4);
  if (c.version != version) {
    throw Error(ErrorCode::kVersionMismatch, "file version " + std::to_string(c.version) +
                                                 ", supported " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 8);
  if (bytes.size() < kPreamble + header_len) {
    throw Error(ErrorCode::kParse, "header truncated");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPreamble,
                                   bytes.begin() + kPreamble + header_len);
    c.meta = header.at("meta");
    std::size_t offset = kPreamble + header_len;
    for (const auto& entry : header.at("arrays")) {
      ContainerArray a;
      a.name = entry.at("name").get<std::string>();
      a.dtype = entry.at("dtype").get<std::string>();
      a.count = entry.at("count").get<std::uint64_t>();
      const std::size_t n = a.count * dtype_size(a.dtype);
      if (n / dtype_size(a.dtype) != a.count || offset + n > bytes.size() || offset + n < offset) {
        throw Error(ErrorCode::kParse, "array '" + a.name + "' runs past end of file");
      }
      a.bytes.assign(bytes.begin() + offset, bytes.begin() + offset + n);
      offset += n;
      c.arrays.push_back(std::move(a));
    }
    if (offset != bytes.size()) {
      throw Error(ErrorCode::kParse, std::to_string(bytes.size() - offset) + " trailing bytes");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed header: ") + e.what());
  }
  return c;
}

Container read_container(const std::filesystem::path& path, std::string_view magic,
                         std::uint32_t version) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return parse_container(bytes, magic, version);
}

}  // namespace fastfield
