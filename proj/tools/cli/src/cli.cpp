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

#include "fastfield/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fastfield/analytic.hpp"
#include "fastfield/bench.hpp"
#include "fastfield/catalog.hpp"
#include "fastfield/config.hpp"
#include "fastfield/error.hpp"
#include "fastfield/factorizer.hpp"
#include "fastfield/manifest.hpp"
#include "fastfield/mesher.hpp"
#include "fastfield/service/server.hpp"
#include "fastfield/size_estimate.hpp"

namespace fastfield {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SourceOptions {
  std::string config;
  std::string scene;
  std::string params;
  std::string weights;
  std::string cache;
  std::optional<int> k, l, d, workers;
  std::optional<std::string> dir_mode;
  std::optional<double> threshold;
};

void add_source(CLI::App* app, SourceOptions& s, bool allow_cache) {
  app->add_option("--config", s.config, "Engine config file (JSON)");
  std::string ids;
  for (const auto& e : analytic_catalog()) ids += (ids.empty() ? "" : ", ") + e.id;
  app->add_option("--scene", s.scene, "Analytic scene id: " + ids);
  app->add_option("--params", s.params, "Analytic scene parameters as a JSON object");
  app->add_option("--weights", s.weights, "MLP weights file");
  if (allow_cache) app->add_option("--cache", s.cache, "Baked cache file");
  app->add_option("--k", s.k, "Position cache resolution along the longest side");
  app->add_option("--l", s.l, "Direction cache resolution");
  app->add_option("--d", s.d, "Component count (0 keeps an analytic scene's own)");
  app->add_option("--dir-mode", s.dir_mode, "Direction cache layout: cube or equirect");
  app->add_option("--threshold", s.threshold, "Density above which a voxel is occupied");
  app->add_option("--workers", s.workers, "Worker threads (0 = all cores)");
}

EngineConfig resolve_config(const SourceOptions& s) {
  const int n = !s.config.empty() + !s.scene.empty() + !s.weights.empty() + !s.cache.empty();
  if (n != 1) throw UsageError("exactly one scene source is required (--config, --scene, --weights or --cache)");
  if (!s.params.empty() && s.scene.empty()) throw UsageError("--params only applies to --scene");
  EngineConfig c;
  if (!s.config.empty()) {
    c = load_config(s.config);
  } else if (!s.scene.empty()) {
    c.scene.kind = SceneSource::Kind::kAnalytic;
    c.scene.analytic_id = s.scene;
    if (!s.params.empty()) {
      try {
        c.scene.analytic_params = json::parse(s.params);
      } catch (const json::exception& e) {
        throw UsageError(std::string("--params is not valid JSON: ") + e.what());
      }
    }
  } else if (!s.weights.empty()) {
    c.scene.kind = SceneSource::Kind::kWeights;
    c.scene.path = s.weights;
  } else {
    c.scene.kind = SceneSource::Kind::kCache;
    c.scene.path = s.cache;
  }
  if (s.k) c.k = *s.k;
  if (s.l) c.l = *s.l;
  if (s.d) c.d = *s.d;
  if (s.dir_mode) c.dir_mode = direction_mode_from_string(*s.dir_mode);
  if (s.threshold) c.density_threshold = *s.threshold;
  if (s.workers) c.render.workers = *s.workers;
  c.validate();
  return c;
}

struct CameraOptions {
  std::string manifest;
  int frame = 0;
  double azimuth = 0.6;
  double elevation = 0.35;
  double distance = 2.2;
  double fov = 0.6911112070083618;
  std::optional<int> width, height;
};

void add_camera(CLI::App* app, CameraOptions& c) {
  app->add_option("--manifest", c.manifest, "transforms.json to take the camera from");
  app->add_option("--frame", c.frame, "Frame index within the manifest");
  app->add_option("--azimuth", c.azimuth, "Orbit azimuth in radians");
  app->add_option("--elevation", c.elevation, "Orbit elevation in radians");
  app->add_option("--distance", c.distance, "Orbit distance from the origin");
  app->add_option("--fov", c.fov, "Horizontal field of view in radians");
  app->add_option("--width", c.width, "Image width");
  app->add_option("--height", c.height, "Image height");
}

Camera make_camera(const CameraOptions& o) {
  Camera cam;
  if (!o.manifest.empty()) {
    const DatasetManifest m = load_manifest(o.manifest);
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
    if (o.frame < 0) throw UsageError("--frame must be >= 0");
    cam = m.camera(static_cast<std::size_t>(o.frame));
  } else {
    OrbitState s;
    s.azimuth = o.azimuth;
    s.elevation = o.elevation;
    s.distance = o.distance;
    s.fov = o.fov;
    cam.camera_to_world = orbit_to_matrix(s);
    cam.fov_x = o.fov;
    cam.width = cam.height = 256;
  }
  if (o.width) cam.width = *o.width;
  if (o.height) cam.height = *o.height;
  cam.validate();
  return cam;
}

Rgb parse_background(const std::string& s) {
  if (s == "white") return {1.0, 1.0, 1.0};
  if (s == "black") return {0.0, 0.0, 0.0};
  Rgb c;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(s);
  if (in >> c.x >> sep1 >> c.y >> sep2 >> c.z && sep1 == ',' && sep2 == ',' && in.eof()) return c;
  throw UsageError("--background must be white, black or r,g,b");
}

BakedCaches bake_from(const EngineConfig& c, const FactorizedField& field) {
  BakeOptions opt;
  opt.resolution = c.k;
  opt.dir_mode = c.dir_mode;
  opt.dir_resolution = c.l;
  opt.density_threshold = c.density_threshold;
  opt.workers = c.render.workers;
  return bake(field, c.aabb, opt);
}

BakedCaches caches_for(const EngineConfig& c) {
  if (c.scene.kind == SceneSource::Kind::kCache) return load_cache(c.scene.path);
  return bake_from(c, make_field(c));
}

void print(std::ostream& out, const json& j, bool as_json) {
  if (as_json) {
    out << j.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : j.items()) out << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

// ---- fit ----
struct FitOptions {
  std::string scene = "spec-sphere";
  std::string params;
  int lattice = 8;
  int directions = 64;
  int d = 2;
  int iters = 50;
  std::uint64_t seed = 1;
  bool oracle = false;
  std::string out_path;
  bool json = false;
};

int run_fit(const FitOptions& o, std::ostream& out) {
  AnalyticScene scene = make_analytic_scene(o.scene, o.params.empty() ? json::object() : json::parse(o.params));
  const Aabb box{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
  const SampleGrid grid = sample_reference(scene, box, {o.lattice, o.lattice, o.lattice}, o.directions);
  const FactorTables t = fit_als(grid, o.d, o.iters, o.seed);
  json j = {{"scene", o.scene},
            {"positions", t.num_positions},
            {"directions", t.num_directions},
            {"d", t.num_components},
            {"iterations", o.iters},
            {"residual", t.residual},
            {"rank_deficient_solves", t.rank_deficient_solves}};
  if (o.oracle) j["oracle_residual"] = fit_svd_oracle(grid, o.d).residual;
  if (!o.out_path.empty()) {
    save_tables(t, grid, o.out_path);
    j["output"] = o.out_path;
  }
  print(out, j, o.json);
  return kExitOk;
}

// ---- bake ----
int run_bake(const SourceOptions& s, const std::string& out_path, bool as_json, std::ostream& out) {
  const EngineConfig c = resolve_config(s);
  if (c.scene.kind == SceneSource::Kind::kCache) throw UsageError("bake needs a field source, not --cache");
  const BakedCaches caches = bake_from(c, make_field(c));
  save_cache(caches, out_path);
  const PositionCache& p = caches.position;
  CacheSizeInputs in;
  in.k = c.k;
  in.l = c.l;
  in.num_components = p.num_components();
  in.alpha = p.sparsity();
  in.s_sigma = 32;
  in.s_uvw = 96;
  in.s_beta = 32;
  const json j = {{"output", out_path},
                  {"k", p.resolution()},
                  {"dims", p.dims()},
                  {"d", p.num_components()},
                  {"occupied_voxels", p.occupied_voxels()},
                  {"alpha", p.sparsity()},
                  {"dir_mode", std::string(to_string(caches.direction.mode()))},
                  {"l", caches.direction.resolution()},
                  {"file_bytes", std::filesystem::file_size(out_path)},
                  {"estimate_fp32_bytes", estimate_sizes(in).m_fastnerf_bytes}};
  print(out, j, as_json);
  return kExitOk;
}

// ---- mesh ----
struct MeshOptions {
  double threshold = 0.0;
  int downsample_above = 512;
  bool no_dilate = false;
  std::string out_path;
  bool json = false;
};

int run_mesh(const SourceOptions& s, const MeshOptions& o, std::ostream& out) {
  const EngineConfig c = resolve_config(s);
  const BakedCaches caches = caches_for(c);
  CollisionMeshOptions mo;
  mo.threshold = o.threshold;
  mo.downsample_above = o.downsample_above;
  mo.dilate = !o.no_dilate;
  mo.workers = c.render.workers;
  const CollisionMesh mesh = build_collision_mesh(caches.position, mo);
  const std::string ext = std::filesystem::path(o.out_path).extension().string();
  if (ext == ".obj") {
    write_obj(mesh, o.out_path);
  } else {
    write_stl(mesh, o.out_path);
  }
  print(out,
        {{"output", o.out_path},
         {"vertices", mesh.vertices.size()},
         {"triangles", mesh.triangles.size()},
         {"threshold", o.threshold}},
        o.json);
  return kExitOk;
}

// ---- render ----
struct RenderOptions {
  std::string out_path;
  std::string pfm_path;
  bool direct = false;
  std::optional<double> step;
  double termination = 1e-3;
  std::string background = "white";
  bool no_bvh = false;
  bool json = false;
};

int run_render(const SourceOptions& s, const CameraOptions& co, const RenderOptions& o, std::ostream& out) {
  const EngineConfig c = resolve_config(s);
  const Camera cam = make_camera(co);
  RenderConfig rc = c.render;
  rc.termination = o.termination;
  rc.background = parse_background(o.background);
  if (o.step) rc.step = *o.step;
  FrameBuffer fb;
  const auto t0 = std::chrono::steady_clock::now();
  if (o.direct) {
    if (c.scene.kind == SceneSource::Kind::kCache) throw UsageError("--direct needs a field source, not --cache");
    if (!(rc.step > 0.0)) rc.step = c.aabb.longest_extent() / c.k;
    fb = render_direct(cam, make_field(c), c.aabb, rc);
  } else {
    const BakedCaches caches = caches_for(c);
    std::optional<Bvh> bvh;
    if (!o.no_bvh) {
      CollisionMeshOptions mo;
      mo.workers = rc.workers;
      const CollisionMesh mesh = build_collision_mesh(caches.position, mo);
      bvh = mesh.empty() ? Bvh() : Bvh(mesh);
    }
    fb = render(cam, caches.position, caches.direction, bvh ? &*bvh : nullptr, rc);
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_png(fb, o.out_path);
  json j = {{"output", o.out_path}, {"width", fb.width}, {"height", fb.height}, {"direct", o.direct}, {"ms", ms}};
  if (!o.pfm_path.empty()) {
    write_pfm(fb, o.pfm_path);
    j["pfm"] = o.pfm_path;
  }
  print(out, j, o.json);
  return kExitOk;
}

// ---- bench ----
struct BenchOptions {
  std::vector<int> resolutions{64, 128};
  int reps = 3;
  bool direct = false;
  int direct_stride = 1;
  bool json = false;
};

int run_bench_cmd(const SourceOptions& s, const CameraOptions& co, const BenchOptions& o, std::ostream& out) {
  const EngineConfig c = resolve_config(s);
  if (o.direct && c.scene.kind == SceneSource::Kind::kCache) {
    throw UsageError("--direct needs a field source, not --cache");
  }
  std::optional<FactorizedField> field;
  if (c.scene.kind != SceneSource::Kind::kCache) field = make_field(c);
  const BakedCaches caches = field ? bake_from(c, *field) : load_cache(c.scene.path);
  CollisionMeshOptions mo;
  mo.workers = c.render.workers;
  const CollisionMesh mesh = build_collision_mesh(caches.position, mo);
  const Bvh bvh = mesh.empty() ? Bvh() : Bvh(mesh);
  BenchSetup setup;
  setup.camera = make_camera(co);
  setup.position = &caches.position;
  setup.direction = &caches.direction;
  setup.bvh = &bvh;
  setup.config = c.render;
  if (o.direct) {
    setup.direct_field = &*field;
    setup.direct_aabb = c.aabb;
    setup.direct_step = caches.position.voxel_size();
    setup.direct_pixel_stride = o.direct_stride;
  }
  const BenchReport report = run_bench(setup, o.resolutions, o.reps);
  if (o.json) {
    out << to_json(report).dump(2) << '\n';
    return kExitOk;
  }
  for (const auto& r : report.results) {
    out << r.width << "x" << r.height << ": cached " << r.cached_median_ms << " ms";
    if (r.direct_median_ms) out << ", direct " << *r.direct_median_ms << " ms, speedup " << *r.speedup << "x";
    out << '\n';
  }
  return kExitOk;
}

// ---- estimate ----
int run_estimate(const CacheSizeInputs& in, bool as_json, std::ostream& out) {
  const CacheSizeReport r = estimate_sizes(in);
  print(out, to_json(r), as_json);
  return kExitOk;
}

// ---- serve ----
int run_serve(const SourceOptions& s, std::optional<std::string> host, std::optional<int> port,
              std::optional<std::string> static_root, std::ostream& out) {
  EngineConfig c = resolve_config(s);
  if (host) c.host = *host;
  if (port) c.port = *port;
  if (static_root) c.static_root = *static_root;
  c.validate();
  auto scene = std::make_shared<const PreparedScene>(prepare_scene(c));
  auto backend = std::make_shared<service::CacheBackend>(scene, c.render);
  service::ServiceOptions so;
  so.host = c.host;
  so.port = static_cast<unsigned short>(c.port);
  so.static_root = c.static_root;
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  service::Server server(backend, so);
  const unsigned short bound = server.start();
  out << "listening on http://" << c.host << ":" << bound << "/" << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"fastfield"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factorized radiance field engine: fit, bake, mesh, render, benchmark and serve."};
  app.name("fastfield");
  app.require_subcommand(1);

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit rank-D factors to an analytic scene by alternating least squares");
  fit_cmd->add_option("--scene", fit.scene, "Analytic scene id");
  fit_cmd->add_option("--params", fit.params, "Scene parameters as a JSON object");
  fit_cmd->add_option("--lattice", fit.lattice, "Positions per axis")->check(CLI::Range(1, 64));
  fit_cmd->add_option("--directions", fit.directions, "Sampled directions")->check(CLI::Range(1, 4096));
  fit_cmd->add_option("--d", fit.d, "Components")->check(CLI::Range(1, 64));
  fit_cmd->add_option("--iters", fit.iters, "ALS iterations")->check(CLI::Range(1, 100000));
  fit_cmd->add_option("--seed", fit.seed, "Initialization seed");
  fit_cmd->add_flag("--oracle", fit.oracle, "Also report the optimal rank-D residual");
  fit_cmd->add_option("--out", fit.out_path, "Write factor tables to this file");
  fit_cmd->add_flag("--json", fit.json, "Machine-readable output");

  SourceOptions bake_src;
  std::string bake_out;
  bool bake_json = false;
  CLI::App* bake_cmd = app.add_subcommand("bake", "Bake position and direction caches");
  add_source(bake_cmd, bake_src, false);
  bake_cmd->add_option("--out", bake_out, "Cache file to write")->required();
  bake_cmd->add_flag("--json", bake_json, "Machine-readable output");

  SourceOptions mesh_src;
  MeshOptions mesh;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Extract the collision mesh (STL, or OBJ by extension)");
  add_source(mesh_cmd, mesh_src, true);
  mesh_cmd->add_option("--mesh-threshold", mesh.threshold, "Density level of the surface");
  mesh_cmd->add_option("--downsample-above", mesh.downsample_above, "Halve volumes larger than this");
  mesh_cmd->add_flag("--no-dilate", mesh.no_dilate, "Mesh the occupied set without growing it");
  mesh_cmd->add_option("--out", mesh.out_path, "Mesh file to write")->required();
  mesh_cmd->add_flag("--json", mesh.json, "Machine-readable output");

  SourceOptions render_src;
  CameraOptions render_cam;
  RenderOptions render_opt;
  CLI::App* render_cmd = app.add_subcommand("render", "Render one image to PNG");
  add_source(render_cmd, render_src, true);
  add_camera(render_cmd, render_cam);
  render_cmd->add_option("--out", render_opt.out_path, "PNG to write")->required();
  render_cmd->add_option("--pfm", render_opt.pfm_path, "Also write linear colors as PFM");
  render_cmd->add_flag("--direct", render_opt.direct, "Evaluate the field at every sample instead of the caches");
  render_cmd->add_option("--step", render_opt.step, "Sample spacing (default: one voxel edge)");
  render_cmd->add_option("--termination", render_opt.termination, "Transmittance at which rays stop");
  render_cmd->add_option("--background", render_opt.background, "white, black or r,g,b");
  render_cmd->add_flag("--no-bvh", render_opt.no_bvh, "March every ray from the box entry");
  render_cmd->add_flag("--json", render_opt.json, "Machine-readable output");

  SourceOptions bench_src;
  CameraOptions bench_cam;
  BenchOptions bench_opt;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time cached (and optionally direct) rendering");
  add_source(bench_cmd, bench_src, true);
  add_camera(bench_cmd, bench_cam);
  bench_cmd->add_option("--resolutions", bench_opt.resolutions, "Square image sizes")->delimiter(',');
  bench_cmd->add_option("--reps", bench_opt.reps, "Repetitions per resolution")->check(CLI::Range(1, 1000));
  bench_cmd->add_flag("--direct", bench_opt.direct, "Also time direct field evaluation");
  bench_cmd->add_option("--direct-stride", bench_opt.direct_stride, "Time every n-th pixel of direct frames")
      ->check(CLI::Range(1, 1 << 20));
  bench_cmd->add_flag("--json", bench_opt.json, "Machine-readable output");

  CacheSizeInputs est;
  bool est_json = false;
  CLI::App* est_cmd = app.add_subcommand("estimate", "Cache memory for dense and factorized layouts");
  est_cmd->add_option("--k", est.k, "Position resolution");
  est_cmd->add_option("--l", est.l, "Direction resolution");
  est_cmd->add_option("--d", est.num_components, "Components");
  est_cmd->add_option("--alpha", est.alpha, "Occupied fraction in [0, 1]");
  est_cmd->add_option("--s-sigma", est.s_sigma, "Bits per density");
  est_cmd->add_option("--s-rgb", est.s_rgb, "Bits per RGB color");
  est_cmd->add_option("--s-uvw", est.s_uvw, "Bits per component triple");
  est_cmd->add_option("--s-beta", est.s_beta, "Bits per weight");
  est_cmd->add_flag("--json", est_json, "Machine-readable output");

  SourceOptions serve_src;
  std::optional<std::string> serve_host, serve_root;
  std::optional<int> serve_port;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the frame-streaming render service");
  add_source(serve_cmd, serve_src, true);
  serve_cmd->add_option("--host", serve_host, "Listen address");
  serve_cmd->add_option("--port", serve_port, "Listen port (0 picks one)");
  serve_cmd->add_option("--static-root", serve_root, "Directory served over HTTP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == fit_cmd) return run_fit(fit, out);
    if (active == bake_cmd) return run_bake(bake_src, bake_out, bake_json, out);
    if (active == mesh_cmd) return run_mesh(mesh_src, mesh, out);
    if (active == render_cmd) return run_render(render_src, render_cam, render_opt, out);
    if (active == bench_cmd) return run_bench_cmd(bench_src, bench_cam, bench_opt, out);
    if (active == est_cmd) return run_estimate(est, est_json, out);
    if (active == serve_cmd) return run_serve(serve_src, serve_host, serve_port, serve_root, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fastfield
