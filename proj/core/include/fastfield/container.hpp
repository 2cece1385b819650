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
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fastfield/error.hpp"

namespace fastfield {

/// Self-describing little-endian binary container shared by weight files,
/// factor tables and caches.
///
///   offset 0   magic, 4 ASCII bytes ("FFWT", "FFTB", "FFCA")
///   offset 4   u32 format version
///   offset 8   u32 header length N
///   offset 12  N bytes of UTF-8 JSON: {"meta": {...}, "arrays": [{"name", "dtype", "count"}]}
///   12 + N     array payloads, back to back, in header order
///
/// dtype is one of "f32", "f64", "u32", "u64", "u8". The file length must match the
/// header exactly; anything else is a ParseError.
struct ContainerArray {
  std::string name;
  std::string dtype;
  std::uint64_t count = 0;
  std::vector<std::uint8_t> bytes;

  template <typename T>
  static ContainerArray of(std::string name, std::span<const T> values);

  template <typename T>
  std::vector<T> as(std::string_view expected_dtype) const;
};

struct Container {
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  nlohmann::json meta;
  std::vector<ContainerArray> arrays;

  const ContainerArray& array(std::string_view name) const;
};

std::size_t dtype_size(std::string_view dtype);

void write_container(const std::filesystem::path& path, const Container& container);
std::vector<std::uint8_t> serialize_container(const Container& container);

/// Reads and validates framing. Throws IoError, ParseError, or VersionMismatch
/// when the magic matches but the version is not `version`.
Container read_container(const std::filesystem::path& path, std::string_view magic,
                         std::uint32_t version);
Container parse_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                          std::uint32_t version);

template <typename T>
constexpr std::string_view dtype_name() {
  if constexpr (std::is_same_v<T, float>) return "f32";
  if constexpr (std::is_same_v<T, double>) return "f64";
  if constexpr (std::is_same_v<T, std::uint32_t>) return "u32";
  if constexpr (std::is_same_v<T, std::uint64_t>) return "u64";
  if constexpr (std::is_same_v<T, std::uint8_t>) return "u8";
}

template <typename T>
ContainerArray ContainerArray::of(std::string name, std::span<const T> values) {
  ContainerArray a;
  a.name = std::move(name);
  a.dtype = std::string(dtype_name<T>());
  a.count = values.size();
  a.bytes.resize(values.size_bytes());
  if (!values.empty()) std::memcpy(a.bytes.data(), values.data(), values.size_bytes());
  return a;
}

template <typename T>
std::vector<T> ContainerArray::as(std::string_view expected_dtype) const {
  if (dtype != expected_dtype || dtype != dtype_name<T>()) {
    throw Error(ErrorCode::kParse, "array '" + name + "' has dtype " + dtype + ", expected " +
                                       std::string(expected_dtype));
  }
  std::vector<T> out(count);
  if (count) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace fastfield
