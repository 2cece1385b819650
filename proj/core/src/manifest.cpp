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

#include "fastfield/manifest.hpp"

#include <png.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fastfield/error.hpp"

namespace fastfield {
namespace {

using nlohmann::json;

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kMissingField, where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

Mat4 read_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::kParse, where + ": expected 4 rows");
  Mat4 m{};
  for (int r = 0; r < 4; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != 4) {
      throw Error(ErrorCode::kParse, where + "[" + std::to_string(r) + "]: expected 4 numbers");
    }
    for (int c = 0; c < 4; ++c) {
      if (!row[c].is_number()) {
        throw Error(ErrorCode::kParse,
                    where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]: not a number");
      }
      m[4 * r + c] = row[c].get<double>();
    }
  }
  return m;
}

double det3(const Mat4& m) {
  return m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8]) +
         m[2] * (m[4] * m[9] - m[5] * m[8]);
}

bool png_dims(const std::filesystem::path& p, int& w, int& h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, p.string().c_str())) return false;
  w = static_cast<int>(img.width);
  h = static_cast<int>(img.height);
  png_image_free(&img);
  return true;
}

std::filesystem::path image_path(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p = base / file;
  if (!p.has_extension()) p += ".png";
  return p;
}

}  // namespace

Camera DatasetManifest::camera(std::size_t index, double near, double far) const {
  if (index >= frames.size()) {
    throw Error(ErrorCode::kInvalidArgument, "frame index " + std::to_string(index) + " out of range");
  }
  Camera c;
  c.camera_to_world = frames[index].transform_matrix;
  c.fov_x = camera_angle_x;
  c.width = width;
  c.height = height;
  c.near = near;
  c.far = far;
  return c;
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "transforms: " + line_context(text, e.byte) + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transforms: ") + e.what());
  }
  DatasetManifest m;
  const json& angle = require(j, "camera_angle_x", "transforms");
  if (!angle.is_number()) throw Error(ErrorCode::kParse, "transforms.camera_angle_x: not a number");
  m.camera_angle_x = angle.get<double>();
  if (!(m.camera_angle_x > 0.0 && m.camera_angle_x < M_PI)) {
    throw Error(ErrorCode::kParse, "transforms.camera_angle_x: must lie in (0, pi)");
  }
  const json& frames = require(j, "frames", "transforms");
  if (!frames.is_array() || frames.empty()) {
    throw Error(ErrorCode::kParse, "transforms.frames: expected a non-empty array");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "transforms.frames[" + std::to_string(i) + "]";
    ManifestFrame f;
    const json& fp = require(frames[i], "file_path", where);
    if (!fp.is_string()) throw Error(ErrorCode::kParse, where + ".file_path: not a string");
    f.file_path = fp.get<std::string>();
    f.transform_matrix = read_matrix(require(frames[i], "transform_matrix", where), where + ".transform_matrix");
    const Mat4& t = f.transform_matrix;
    if (std::abs(det3(t)) < 1e-12 || t[12] != 0.0 || t[13] != 0.0 || t[14] != 0.0 || t[15] == 0.0) {
      throw Error(ErrorCode::kParse, where + ".transform_matrix: not invertible");
    }
    Camera probe;
    probe.camera_to_world = t;
    const double dev = probe.orthonormality_error();
    if (dev > kOrthonormalWarnTolerance) {
      m.warnings.push_back(where + ": rotation deviates from orthonormal by " + std::to_string(dev));
    }
    m.frames.push_back(std::move(f));
  }

  const bool has_w = j.contains("w"), has_h = j.contains("h");
  if (has_w != has_h) throw Error(ErrorCode::kMissingField, "transforms: \"w\" and \"h\" must appear together");
  if (has_w) {
    if (!j["w"].is_number_integer() || !j["h"].is_number_integer()) {
      throw Error(ErrorCode::kParse, "transforms.w/h: expected integers");
    }
    m.width = j["w"].get<int>();
    m.height = j["h"].get<int>();
    if (m.width < 1 || m.height < 1) throw Error(ErrorCode::kParse, "transforms.w/h: must be positive");
  } else if (!base_dir.empty()) {
    int w0 = 0, h0 = 0;
    bool first = true;
    for (const auto& f : m.frames) {
      int w = 0, h = 0;
      if (!png_dims(image_path(base_dir, f.file_path), w, h)) continue;
      if (first) {
        w0 = w;
        h0 = h;
        first = false;
      } else if (w != w0 || h != h0) {
        throw Error(ErrorCode::kParse, "transforms: frame " + f.file_path + " is " + std::to_string(w) +
                                           "x" + std::to_string(h) + ", expected " +
                                           std::to_string(w0) + "x" + std::to_string(h0));
      }
    }
    if (!first) {
      m.width = w0;
      m.height = h0;
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string dump_manifest(const DatasetManifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
      rows.push_back({f.transform_matrix[4 * r], f.transform_matrix[4 * r + 1],
                      f.transform_matrix[4 * r + 2], f.transform_matrix[4 * r + 3]});
    }
    frames.push_back({{"file_path", f.file_path}, {"transform_matrix", rows}});
  }
  const json j = {{"camera_angle_x", m.camera_angle_x}, {"w", m.width}, {"h", m.height}, {"frames", frames}};
  return j.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << dump_manifest(m);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace fastfield
