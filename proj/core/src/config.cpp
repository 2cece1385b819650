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

#include "fastfield/config.hpp"

#include <fstream>
#include <sstream>

#include "fastfield/analytic.hpp"
#include "fastfield/error.hpp"
#include "fastfield/mlp.hpp"

namespace fastfield {
namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParse, where + "." + key + ": wrong type");
  }
}

Vec3 get_vec(const json& obj, const char* key, const std::string& where, Vec3 fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
    throw Error(ErrorCode::kParse, where + "." + key + ": expected 3 numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

const json& section(const json& j, const char* key) {
  static const json kEmpty = json::object();
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_object()) throw Error(ErrorCode::kParse, std::string("config.") + key + ": expected an object");
  return j.at(key);
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "config: " + msg);
}

}  // namespace

void EngineConfig::validate() const {
  aabb.validate();
  check(k >= 1 && k <= 2048, "cache.k must lie in [1, 2048]");
  check(l >= 1 && l <= 1024, "cache.l must lie in [1, 1024]");
  check(d >= 0 && d <= 64, "cache.d must lie in [0, 64]");
  check(density_threshold >= 0.0, "cache.density_threshold must be >= 0");
  check(mesh_threshold >= 0.0, "mesh.threshold must be >= 0");
  check(downsample_above >= 0, "mesh.downsample_above must be >= 0");
  check(port >= 0 && port <= 65535, "service.port must lie in [0, 65535]");
  render.validate();
}

EngineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config: expected an object");
  if (!j.contains("schema_version")) throw Error(ErrorCode::kMissingField, "config: missing \"schema_version\"");
  const int version = get_or<int>(j, "schema_version", "config", 0);
  if (version != kConfigSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch, "config: schema_version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kConfigSchemaVersion));
  }
  if (!j.contains("scene")) throw Error(ErrorCode::kMissingField, "config: missing \"scene\"");
  const json& scene = section(j, "scene");
  const int sources = static_cast<int>(scene.contains("analytic")) + static_cast<int>(scene.contains("weights")) +
                      static_cast<int>(scene.contains("cache"));
  if (sources != 1) {
    throw Error(ErrorCode::kParse, "config.scene: expected exactly one of analytic, weights, cache; found " +
                                       std::to_string(sources));
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  EngineConfig c;
  if (scene.contains("analytic")) {
    const json& a = scene.at("analytic");
    if (!a.is_object()) throw Error(ErrorCode::kParse, "config.scene.analytic: expected an object");
    if (!a.contains("id")) throw Error(ErrorCode::kMissingField, "config.scene.analytic: missing \"id\"");
    c.scene.kind = SceneSource::Kind::kAnalytic;
    c.scene.analytic_id = get_or<std::string>(a, "id", "config.scene.analytic", "");
    c.scene.analytic_params = a.contains("params") ? a.at("params") : json::object();
  } else if (scene.contains("weights")) {
    c.scene.kind = SceneSource::Kind::kWeights;
    c.scene.path = resolve(get_or<std::string>(scene, "weights", "config.scene", ""));
  } else {
    c.scene.kind = SceneSource::Kind::kCache;
    c.scene.path = resolve(get_or<std::string>(scene, "cache", "config.scene", ""));
  }

  const json& box = section(j, "aabb");
  c.aabb.min = get_vec(box, "min", "config.aabb", c.aabb.min);
  c.aabb.max = get_vec(box, "max", "config.aabb", c.aabb.max);

  const json& cache = section(j, "cache");
  c.k = get_or<int>(cache, "k", "config.cache", c.k);
  c.l = get_or<int>(cache, "l", "config.cache", c.l);
  c.d = get_or<int>(cache, "d", "config.cache", c.d);
  c.density_threshold = get_or<double>(cache, "density_threshold", "config.cache", c.density_threshold);
  if (cache.contains("dir_mode")) {
    try {
      c.dir_mode = direction_mode_from_string(get_or<std::string>(cache, "dir_mode", "config.cache", ""));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, std::string("config.cache.dir_mode: ") + e.what());
    }
  }

  const json& mesh = section(j, "mesh");
  c.mesh_threshold = get_or<double>(mesh, "threshold", "config.mesh", c.mesh_threshold);
  c.downsample_above = get_or<int>(mesh, "downsample_above", "config.mesh", c.downsample_above);

  const json& render = section(j, "render");
  c.render.step = get_or<double>(render, "step", "config.render", c.render.step);
  c.render.termination = get_or<double>(render, "termination", "config.render", c.render.termination);
  c.render.background = get_vec(render, "background", "config.render", c.render.background);
  c.render.workers = get_or<int>(render, "workers", "config.render", c.render.workers);
  c.render.max_samples = get_or<int>(render, "max_samples", "config.render", c.render.max_samples);

  const json& service = section(j, "service");
  c.host = get_or<std::string>(service, "host", "config.service", c.host);
  c.port = get_or<int>(service, "port", "config.service", c.port);
  if (service.contains("static_root")) {
    c.static_root = resolve(get_or<std::string>(service, "static_root", "config.service", ""));
  }
  c.validate();
  return c;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

json to_json(const EngineConfig& c) {
  json scene;
  switch (c.scene.kind) {
    case SceneSource::Kind::kAnalytic:
      scene = {{"analytic", {{"id", c.scene.analytic_id}, {"params", c.scene.analytic_params}}}};
      break;
    case SceneSource::Kind::kWeights:
      scene = {{"weights", c.scene.path.string()}};
      break;
    case SceneSource::Kind::kCache:
      scene = {{"cache", c.scene.path.string()}};
      break;
  }
  auto vec = [](const Vec3& v) { return json::array({v.x, v.y, v.z}); };
  return {{"schema_version", kConfigSchemaVersion},
          {"scene", scene},
          {"aabb", {{"min", vec(c.aabb.min)}, {"max", vec(c.aabb.max)}}},
          {"cache",
           {{"k", c.k},
            {"l", c.l},
            {"d", c.d},
            {"dir_mode", std::string(to_string(c.dir_mode))},
            {"density_threshold", c.density_threshold}}},
          {"mesh", {{"threshold", c.mesh_threshold}, {"downsample_above", c.downsample_above}}},
          {"render",
           {{"step", c.render.step},
            {"termination", c.render.termination},
            {"background", vec(c.render.background)},
            {"workers", c.render.workers},
            {"max_samples", c.render.max_samples}}},
          {"service", {{"host", c.host}, {"port", c.port}, {"static_root", c.static_root.string()}}}};
}

FactorizedField make_field(const EngineConfig& c) {
  switch (c.scene.kind) {
    case SceneSource::Kind::kAnalytic: {
      AnalyticScene s = make_analytic_scene(c.scene.analytic_id, c.scene.analytic_params);
      s.padded_components = c.d;
      return make_analytic_field(std::move(s));
    }
    case SceneSource::Kind::kWeights:
      return make_mlp_field(load_weights(c.scene.path));
    case SceneSource::Kind::kCache:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument, "a cache source has no field to evaluate");
}

PreparedScene prepare_scene(const EngineConfig& c) {
  PreparedScene s;
  if (c.scene.kind == SceneSource::Kind::kCache) {
    s.caches = load_cache(c.scene.path);
  } else {
    s.field = make_field(c);
    BakeOptions opt;
    opt.resolution = c.k;
    opt.dir_mode = c.dir_mode;
    opt.dir_resolution = c.l;
    opt.density_threshold = c.density_threshold;
    opt.workers = c.render.workers;
    s.caches = bake(*s.field, c.aabb, opt);
  }
  CollisionMeshOptions mo;
  mo.threshold = c.mesh_threshold;
  mo.downsample_above = c.downsample_above;
  mo.workers = c.render.workers;
  s.mesh = build_collision_mesh(s.caches.position, mo);
  if (!s.mesh.empty()) s.bvh = Bvh(s.mesh);
  return s;
}

}  // namespace fastfield
