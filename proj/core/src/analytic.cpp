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

#include "fastfield/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "fastfield/error.hpp"

namespace fastfield {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

Vec3 read_vec(const nlohmann::json& j, const char* key, const Vec3& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, std::string("parameter '") + key + "' must be a 3-array");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

double read_num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

void set_rgb(std::span<float> out, int component, const Rgb& c) {
  const std::size_t k = 3 * static_cast<std::size_t>(component);
  out[k] = static_cast<float>(c.x);
  out[k + 1] = static_cast<float>(c.y);
  out[k + 2] = static_cast<float>(c.z);
}

double sphere_shading(const SolidSphere& s, const Position& p) {
  return 0.7 + 0.3 * (p.y - s.center.y) / s.radius;
}

double lobe(const SpecSphere& s, const Direction& d) {
  const double c = 0.5 * (1.0 + dot(d.vec(), s.lobe_axis));
  return s.lobe_strength * std::pow(std::max(c, 0.0), s.lobe_exponent);
}

bool in_shell(const HollowShell& s, const Position& p) {
  const double r = length(p - s.center);
  return r >= s.inner_radius && r <= s.outer_radius;
}

bool in_slab(const Slab& s, const Position& p) {
  return std::abs(p[s.axis] - s.offset) <= s.half_thickness;
}

class AnalyticSource final : public FieldSource {
 public:
  explicit AnalyticSource(AnalyticScene scene) : scene_(std::move(scene)) {}

  int num_components() const override { return scene_.num_components(); }
  void eval_pos_into(const Position& p, std::span<float> record) const override {
    scene_.deep_map_into(p, record);
  }
  void eval_dir_into(const Direction& d, std::span<float> beta) const override {
    scene_.weights_into(d, beta);
  }
  std::string describe() const override { return "analytic:" + scene_.id; }

 private:
  AnalyticScene scene_;
};

}  // namespace

bool SolidSphere::contains(const Position& p) const {
  const Vec3 q = p - center;
  return dot(q, q) <= radius * radius;
}

int AnalyticScene::natural_components() const {
  return std::holds_alternative<SpecSphere>(shape) ? 2 : 1;
}

int AnalyticScene::num_components() const {
  return std::max(natural_components(), padded_components);
}

double AnalyticScene::sigma(const Position& p) const {
  return std::visit(
      Overloaded{
          [](const EmptyScene&) { return 0.0; },
          [&](const LambertSphere& s) { return s.shape.contains(p) ? s.shape.density : 0.0; },
          [&](const SpecSphere& s) { return s.shape.contains(p) ? s.shape.density : 0.0; },
          [&](const TwoBlobs& s) {
            return (s.a.contains(p) ? s.a.density : 0.0) + (s.b.contains(p) ? s.b.density : 0.0);
          },
          [&](const HollowShell& s) { return in_shell(s, p) ? s.density : 0.0; },
          [&](const Slab& s) { return in_slab(s, p) ? s.density : 0.0; },
      },
      shape);
}

Rgb AnalyticScene::radiance(const Position& p, const Direction& d) const {
  return std::visit(
      Overloaded{
          [](const EmptyScene&) { return Rgb{}; },
          [&](const LambertSphere& s) {
            return s.shape.contains(p) ? s.albedo * sphere_shading(s.shape, p) : Rgb{};
          },
          [&](const SpecSphere& s) {
            if (!s.shape.contains(p)) return Rgb{};
            return s.diffuse * sphere_shading(s.shape, p) + s.specular * lobe(s, d);
          },
          [&](const TwoBlobs& s) {
            const double sa = s.a.contains(p) ? s.a.density : 0.0;
            const double sb = s.b.contains(p) ? s.b.density : 0.0;
            if (sa + sb <= 0.0) return Rgb{};
            return (s.color_a * sa + s.color_b * sb) / (sa + sb);
          },
          [&](const HollowShell& s) { return in_shell(s, p) ? s.color : Rgb{}; },
          [&](const Slab& s) { return in_slab(s, p) ? s.color : Rgb{}; },
      },
      shape);
}

void AnalyticScene::deep_map_into(const Position& p, std::span<float> record) const {
  std::fill(record.begin(), record.end(), 0.0f);
  record[0] = static_cast<float>(sigma(p));
  if (record[0] <= 0.0f) return;
  const auto comps = record.subspan(1);
  std::visit(Overloaded{
                 [](const EmptyScene&) {},
                 [&](const LambertSphere& s) {
                   set_rgb(comps, 0, s.albedo * sphere_shading(s.shape, p));
                 },
                 [&](const SpecSphere& s) {
                   set_rgb(comps, 0, s.diffuse * sphere_shading(s.shape, p));
                   set_rgb(comps, 1, s.specular);
                 },
                 [&](const TwoBlobs& s) {
                   const double sa = s.a.contains(p) ? s.a.density : 0.0;
                   const double sb = s.b.contains(p) ? s.b.density : 0.0;
                   set_rgb(comps, 0, (s.color_a * sa + s.color_b * sb) / (sa + sb));
                 },
                 [&](const HollowShell& s) { set_rgb(comps, 0, s.color); },
                 [&](const Slab& s) { set_rgb(comps, 0, s.color); },
             },
             shape);
}

void AnalyticScene::weights_into(const Direction& d, std::span<float> beta) const {
  std::fill(beta.begin(), beta.end(), 0.0f);
  beta[0] = 1.0f;
  if (const auto* s = std::get_if<SpecSphere>(&shape)) {
    beta[1] = static_cast<float>(lobe(*s, d));
  }
}

nlohmann::json AnalyticScene::params() const {
  auto sphere = [](const SolidSphere& s) {
    return nlohmann::json{{"center", vec_json(s.center)}, {"radius", s.radius}, {"density", s.density}};
  };
  nlohmann::json j = std::visit(
      Overloaded{
          [](const EmptyScene&) { return nlohmann::json::object(); },
          [&](const LambertSphere& s) {
            auto o = sphere(s.shape);
            o["albedo"] = vec_json(s.albedo);
            return o;
          },
          [&](const SpecSphere& s) {
            auto o = sphere(s.shape);
            o["diffuse"] = vec_json(s.diffuse);
            o["specular"] = vec_json(s.specular);
            o["lobe_axis"] = vec_json(s.lobe_axis);
            o["lobe_exponent"] = s.lobe_exponent;
            o["lobe_strength"] = s.lobe_strength;
            return o;
          },
          [&](const TwoBlobs& s) {
            return nlohmann::json{{"a", sphere(s.a)}, {"color_a", vec_json(s.color_a)},
                                  {"b", sphere(s.b)}, {"color_b", vec_json(s.color_b)}};
          },
          [&](const HollowShell& s) {
            return nlohmann::json{{"center", vec_json(s.center)}, {"inner_radius", s.inner_radius},
                                  {"outer_radius", s.outer_radius}, {"density", s.density},
                                  {"color", vec_json(s.color)}};
          },
          [&](const Slab& s) {
            return nlohmann::json{{"axis", s.axis}, {"offset", s.offset},
                                  {"half_thickness", s.half_thickness}, {"density", s.density},
                                  {"color", vec_json(s.color)}};
          },
      },
      shape);
  if (padded_components > 0) j["components"] = padded_components;
  return j;
}

AnalyticScene make_analytic_scene(const std::string& id, const nlohmann::json& params) {
  auto read_sphere = [](const nlohmann::json& j, SolidSphere s) {
    s.center = read_vec(j, "center", s.center);
    s.radius = read_num(j, "radius", s.radius);
    s.density = read_num(j, "density", s.density);
    if (!(s.radius > 0.0) || s.density < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "sphere needs radius > 0 and density >= 0");
    }
    return s;
  };
  AnalyticScene scene;
  scene.id = id;
  try {
    if (id == "empty") {
      scene.shape = EmptyScene{};
    } else if (id == "lambert-sphere") {
      LambertSphere s;
      s.shape = read_sphere(params, s.shape);
      s.albedo = read_vec(params, "albedo", s.albedo);
      scene.shape = s;
    } else if (id == "spec-sphere") {
      SpecSphere s;
      s.shape = read_sphere(params, s.shape);
      s.diffuse = read_vec(params, "diffuse", s.diffuse);
      s.specular = read_vec(params, "specular", s.specular);
      s.lobe_axis = normalize(read_vec(params, "lobe_axis", s.lobe_axis));
      s.lobe_exponent = read_num(params, "lobe_exponent", s.lobe_exponent);
      s.lobe_strength = read_num(params, "lobe_strength", s.lobe_strength);
      scene.shape = s;
    } else if (id == "two-blobs") {
      TwoBlobs s;
      if (params.is_object() && params.contains("a")) s.a = read_sphere(params.at("a"), s.a);
      if (params.is_object() && params.contains("b")) s.b = read_sphere(params.at("b"), s.b);
      s.color_a = read_vec(params, "color_a", s.color_a);
      s.color_b = read_vec(params, "color_b", s.color_b);
      scene.shape = s;
    } else if (id == "hollow-shell") {
      HollowShell s;
      s.center = read_vec(params, "center", s.center);
      s.inner_radius = read_num(params, "inner_radius", s.inner_radius);
      s.outer_radius = read_num(params, "outer_radius", s.outer_radius);
      s.density = read_num(params, "density", s.density);
      s.color = read_vec(params, "color", s.color);
      if (!(s.inner_radius >= 0.0 && s.outer_radius > s.inner_radius) || s.density < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "hollow-shell radii or density out of range");
      }
      scene.shape = s;
    } else if (id == "slab") {
      Slab s;
      s.axis = static_cast<int>(read_num(params, "axis", s.axis));
      s.offset = read_num(params, "offset", s.offset);
      s.half_thickness = read_num(params, "half_thickness", s.half_thickness);
      s.density = read_num(params, "density", s.density);
      s.color = read_vec(params, "color", s.color);
      if (s.axis < 0 || s.axis > 2 || s.half_thickness < 0.0 || s.density < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "slab parameters out of range");
      }
      scene.shape = s;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown analytic scene '" + id + "'");
    }
    scene.padded_components = static_cast<int>(read_num(params, "components", 0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "scene '" + id + "' parameters: " + e.what());
  }
  if (scene.padded_components < 0) {
    throw Error(ErrorCode::kInvalidArgument, "component count must be non-negative");
  }
  return scene;
}

FactorizedField make_analytic_field(AnalyticScene scene) {
  return FactorizedField(std::make_shared<const AnalyticSource>(std::move(scene)));
}

}  // namespace fastfield
