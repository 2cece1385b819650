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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fastfield/cache.hpp"
#include "fastfield/cli.hpp"
#include "fastfield/factorizer.hpp"
#include "fastfield/image.hpp"
#include "support/baselines.hpp"

namespace fastfield {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli_dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fastfield_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Cli, EstimateReproducesCacheSizes) {
  const CliRun r = cli({"estimate", "--k", "1024", "--l", "1024", "--d", "8", "--alpha", "1", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("53703868416"), std::string::npos);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("m_fastnerf_bytes").get<std::uint64_t>(), 53703868416ull);
  EXPECT_EQ(j.at("m_nerf_bytes").get<std::uint64_t>(), 5629499534213120ull);
}

TEST(Cli, UsageErrorsExitOne) {
  CliRun r = cli({"render", "--out", "x.png"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("scene source"), std::string::npos);
  EXPECT_NE(r.err.find("--scene"), std::string::npos);
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"render", "--scene", "slab"}).code, kExitUsage);
  EXPECT_EQ(cli({"render", "--scene", "slab", "--weights", "w.ffw", "--out", "x.png"}).code, kExitUsage);
  EXPECT_EQ(cli({"render", "--scene", "slab", "--out", "x.png", "--background", "mauve"}).code, kExitUsage);
  EXPECT_EQ(cli({"bench", "--scene", "slab", "--reps", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"bake", "--cache", "a.ffc", "--out", "b.ffc"}).code, kExitUsage);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  const CliRun r = cli({"render", "--cache", "/nonexistent/scene.ffc", "--out", "/tmp/x.png"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(cli({"render", "--scene", "teapot", "--out", "/tmp/x.png"}).code, kExitRuntime);
  EXPECT_EQ(cli({"render", "--scene", "slab", "--k", "0", "--out", "/tmp/x.png"}).code, kExitRuntime);
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* sub : {"fit", "bake", "mesh", "render", "bench", "estimate", "serve"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    EXPECT_EQ(cli({sub, "--help"}).code, kExitOk) << sub;
  }
}

// The CLI pipeline must not lose fidelity against the acceptance suite's k=64
// measurement of the same scene taken on 8-bit output.
TEST(Cli, BakedRenderMeetsAcceptanceBaseline) {
  const fs::path dir = temp_dir("bake");
  const std::string cache = (dir / "lambert.ffc").string();
  CliRun r = cli({"bake", "--k", "64", "--scene", "lambert-sphere", "--out", cache, "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json baked = json::parse(r.out);
  EXPECT_EQ(baked.at("k").get<int>(), 64);
  EXPECT_EQ(baked.at("file_bytes").get<std::uintmax_t>(), fs::file_size(cache));

  const std::string size = std::to_string(baseline::kPsnrImageSize);
  r = cli({"render", "--cache", cache, "--width", size, "--height", size, "--out", (dir / "cached.png").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = cli({"render", "--scene", "lambert-sphere", "--k", "64", "--direct", "--width", size, "--height", size,
           "--out", (dir / "direct.png").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;

  const double got = psnr(read_png(dir / "cached.png"), read_png(dir / "direct.png"));
  const double baseline = baseline::cached_vs_direct_psnr("lambert-sphere", 64, true);
  EXPECT_GE(got, baseline);
  EXPECT_GT(got, 30.0);
  fs::remove_all(dir);
}

TEST(Cli, RenderWritesPfmAndJson) {
  const fs::path dir = temp_dir("render");
  const CliRun r = cli({"render", "--scene", "two-blobs", "--k", "32", "--l", "8", "--width", "24", "--height", "16",
                     "--out", (dir / "a.png").string(), "--pfm", (dir / "a.pfm").string(), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("width").get<int>(), 24);
  EXPECT_EQ(j.at("height").get<int>(), 16);
  const FrameBuffer png = read_png(dir / "a.png");
  const FrameBuffer pfm = read_pfm(dir / "a.pfm");
  EXPECT_EQ(png.width, 24);
  EXPECT_EQ(pfm.height, 16);
  EXPECT_LE(max_abs_difference(png, pfm), 0.5 / 255 + 1e-6);
  fs::remove_all(dir);
}

TEST(Cli, RenderFromManifestFrame) {
  const fs::path dir = temp_dir("manifest");
  const CliRun r = cli({"render", "--scene", "lambert-sphere", "--k", "16", "--l", "4", "--manifest",
                     (fs::path(FASTFIELD_FIXTURE_DIR) / "transforms_one_frame.json").string(), "--width", "20",
                     "--height", "20", "--out", (dir / "f.png").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_png(dir / "f.png").width, 20);
  fs::remove_all(dir);
}

TEST(Cli, FitReportsOracle) {
  const fs::path dir = temp_dir("fit");
  const CliRun r = cli({"fit", "--scene", "spec-sphere", "--lattice", "6", "--directions", "32", "--d", "2", "--oracle",
                     "--out", (dir / "t.fft").string(), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LT(j.at("residual").get<double>(), 1e-6);
  EXPECT_LE(j.at("residual").get<double>(), j.at("oracle_residual").get<double>() + 1e-4);
  EXPECT_TRUE(fs::exists(dir / "t.fft"));
  fs::remove_all(dir);
}

TEST(Cli, MeshAndBench) {
  const fs::path dir = temp_dir("mesh");
  CliRun r = cli({"mesh", "--scene", "lambert-sphere", "--k", "24", "--l", "4", "--out", (dir / "m.obj").string(),
               "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(json::parse(r.out).at("triangles").get<int>(), 0);
  EXPECT_TRUE(fs::exists(dir / "m.obj"));

  r = cli({"bench", "--scene", "lambert-sphere", "--k", "24", "--l", "4", "--resolutions", "16,24", "--reps", "1",
           "--direct", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json b = json::parse(r.out);
  ASSERT_EQ(b.at("results").size(), 2u);
  EXPECT_EQ(b.at("results")[1].at("width").get<int>(), 24);
  fs::remove_all(dir);
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = FASTFIELD_CLI_BINARY;
  EXPECT_EQ(shell(bin + " estimate --k 8 --l 8 --json > /dev/null"), 0);
  EXPECT_EQ(shell(bin + " render --out /tmp/fastfield_none.png 2> /dev/null"), 1);
  EXPECT_EQ(shell(bin + " render --cache /nonexistent.ffc --out /tmp/fastfield_none.png 2> /dev/null"), 2);
}

}  // namespace
}  // namespace fastfield
