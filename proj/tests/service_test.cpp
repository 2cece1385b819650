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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fastfield/analytic.hpp"
#include "fastfield/config.hpp"
#include "fastfield/error.hpp"
#include "fastfield/renderer.hpp"
#include "fastfield/service/protocol.hpp"
#include "fastfield/service/server.hpp"
#include "support/property.hpp"

namespace fastfield::service {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = net::ip::tcp;
using nlohmann::json;
using testing::Gen;

// ---- protocol ----

TEST(Protocol, RequestRoundTrip) {
  testing::for_all(30, 80, [](Gen& g) {
    RenderRequest r;
    r.id = static_cast<std::uint32_t>(g.integer(0, 1 << 30));
    for (double& v : r.pose) v = g.uniform(-10, 10);
    r.fov = g.uniform(0.1, 3.0);
    r.width = g.integer(kMinImageDim, kMaxImageDim);
    r.height = g.integer(kMinImageDim, kMaxImageDim);
    r.quality = g.uniform() < 0.5 ? Quality::kFull : Quality::kPreview;
    const ParsedRequest p = parse_request(encode_request(r));
    ASSERT_TRUE(p.request.has_value()) << p.error.reason;
    EXPECT_EQ(p.request->id, r.id);
    EXPECT_EQ(p.request->pose, r.pose);
    EXPECT_EQ(p.request->fov, r.fov);
    EXPECT_EQ(p.request->width, r.width);
    EXPECT_EQ(p.request->height, r.height);
    EXPECT_EQ(p.request->quality, r.quality);
  });
}

TEST(Protocol, PreviewHalvesDimensionsRoundingUp) {
  RenderRequest r;
  r.width = 33;
  r.height = 16;
  r.quality = Quality::kPreview;
  EXPECT_EQ(r.camera().width, 17);
  EXPECT_EQ(r.camera().height, 8);
  r.quality = Quality::kFull;
  EXPECT_EQ(r.camera().width, 33);
}

TEST(Protocol, RejectsBadRequests) {
  RenderRequest base;
  base.id = 5;
  const json good = json::parse(encode_request(base));
  auto reason_with = [&](const std::function<void(json&)>& edit) {
    json j = good;
    edit(j);
    const ParsedRequest p = parse_request(j.dump());
    EXPECT_FALSE(p.request.has_value());
    return p.error;
  };
  EXPECT_EQ(reason_with([](json& j) { j["width"] = 15; }).id, 5u);
  EXPECT_NE(reason_with([](json& j) { j["height"] = 2049; }).reason.find("2048"), std::string::npos);
  reason_with([](json& j) { j["pose"][3] = "x"; });
  reason_with([](json& j) { j["pose"].erase(0); });
  reason_with([](json& j) { j["fov"] = 3.2; });
  reason_with([](json& j) { j["quality"] = "ultra"; });
  reason_with([](json& j) { j["type"] = "ping"; });
  EXPECT_FALSE(reason_with([](json& j) { j["id"] = -1; }).id.has_value());
  const ParsedRequest bad = parse_request("{not json");
  EXPECT_FALSE(bad.request.has_value());
  EXPECT_FALSE(bad.error.id.has_value());
  EXPECT_FALSE(parse_request(R"({"type": "render", "id": 1, "pose": [1e400, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
      "fov": 0.7, "width": 16, "height": 16})")
                   .request.has_value());
}

TEST(Protocol, FrameHeaderLayout) {
  FrameHeader h{0x01020304, 16, 17, kFlagPreview, 123456789};
  const std::vector<std::uint8_t> rgba(4 * 16 * 17, 9);
  const auto bytes = encode_frame(h, rgba);
  ASSERT_EQ(bytes.size(), kFrameHeaderSize + rgba.size());
  const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 24);
  const std::vector<std::uint8_t> expected{'F', 'F', 'R', 'M', 4, 3, 2, 1, 16, 0, 17, 0, 1, 0, 0, 0,
                                           0x15, 0xcd, 0x5b, 0x07, 0, 0, 0, 0};
  EXPECT_EQ(head, expected);
  std::span<const std::uint8_t> payload;
  EXPECT_EQ(decode_frame(bytes, &payload), h);
  EXPECT_EQ(payload.size(), rgba.size());
  EXPECT_DOUBLE_EQ(h.millis(), 123456.789);
}

TEST(Protocol, DecodeRejectsMalformedFrames) {
  auto bytes = encode_frame({1, 16, 16, 0, 0}, std::vector<std::uint8_t>(1024));
  EXPECT_THROW(decode_frame(std::span(bytes).first(10)), Error);
  EXPECT_THROW(decode_frame(std::span(bytes).first(bytes.size() - 1)), Error);
  bytes[0] = 'X';
  EXPECT_THROW(decode_frame(bytes), Error);
  EXPECT_THROW(encode_frame({1, 16, 16, 0, 0}, std::vector<std::uint8_t>(10)), Error);
}

TEST(Protocol, Notices) {
  const json d = json::parse(dropped_notice(3, 4));
  EXPECT_EQ(d["type"], "dropped");
  EXPECT_EQ(d["id"], 3);
  EXPECT_EQ(d["superseded_by"], 4);
  const json e = json::parse(error_notice(std::nullopt, "bad"));
  EXPECT_EQ(e["type"], "error");
  EXPECT_TRUE(e["id"].is_null());
  EXPECT_EQ(e["reason"], "bad");
}

// ---- server ----

std::shared_ptr<const PreparedScene> small_scene() {
  static const auto scene = [] {
    EngineConfig c;
    c.scene.analytic_id = "spec-sphere";
    c.k = 32;
    c.l = 8;
    return std::make_shared<const PreparedScene>(prepare_scene(c));
  }();
  return scene;
}

class SlowBackend : public RenderBackend {
 public:
  explicit SlowBackend(std::shared_ptr<const RenderBackend> inner) : inner_(std::move(inner)) {}
  FrameBuffer render(const RenderRequest& r) const override {
    std::this_thread::sleep_for(std::chrono::milliseconds(40));
    return inner_->render(r);
  }

 private:
  std::shared_ptr<const RenderBackend> inner_;
};

struct Message {
  bool binary = false;
  std::vector<std::uint8_t> bytes;
  std::string text() const { return {bytes.begin(), bytes.end()}; }
};

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }
  ~Client() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

  void send(const std::string& text) {
    ws_.text(true);
    ws_.write(net::buffer(text));
  }
  void send_binary(const std::vector<std::uint8_t>& bytes) {
    ws_.binary(true);
    ws_.write(net::buffer(bytes));
  }
  Message read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    Message m;
    m.binary = ws_.got_binary();
    const auto data = buf.data();
    m.bytes.assign(static_cast<const std::uint8_t*>(data.data()),
                   static_cast<const std::uint8_t*>(data.data()) + data.size());
    return m;
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

RenderRequest request(std::uint32_t id, int size = 32) {
  RenderRequest r;
  r.id = id;
  r.pose = orbit_to_matrix({{0, 0, 0}, 0.4, 0.3, 2.2});
  r.width = r.height = size;
  return r;
}

class ServerTest : public ::testing::Test {
 protected:
  void start(std::shared_ptr<const RenderBackend> backend, fs::path root = {}) {
    ServiceOptions o;
    o.port = 0;
    o.static_root = std::move(root);
    server_ = std::make_unique<Server>(std::move(backend), o);
    port_ = server_->start();
  }
  void TearDown() override {
    if (server_) server_->stop();
  }
  std::shared_ptr<const RenderBackend> cache_backend() const {
    return std::make_shared<CacheBackend>(small_scene(), RenderConfig{});
  }

  std::unique_ptr<Server> server_;
  unsigned short port_ = 0;
};

TEST_F(ServerTest, IdentityPoseRequestGetsFrame) {
  start(cache_backend());
  Client c(port_);
  RenderRequest r;
  r.id = 7;
  r.width = 48;
  r.height = 20;
  c.send(encode_request(r));
  const Message m = c.read();
  ASSERT_TRUE(m.binary) << m.text();
  std::span<const std::uint8_t> payload;
  const FrameHeader h = decode_frame(m.bytes, &payload);
  EXPECT_EQ(h.id, 7u);
  EXPECT_EQ(h.width, 48);
  EXPECT_EQ(h.height, 20);
  EXPECT_EQ(h.flags, 0);
  EXPECT_EQ(payload.size(), 4u * 48 * 20);
}

TEST_F(ServerTest, PayloadMatchesOfflineRenderAndRepeats) {
  start(cache_backend());
  Client c(port_);
  const RenderRequest r = request(11, 40);
  std::vector<std::vector<std::uint8_t>> payloads;
  for (int i = 0; i < 2; ++i) {
    c.send(encode_request(r));
    const Message m = c.read();
    ASSERT_TRUE(m.binary) << m.text();
    std::span<const std::uint8_t> p;
    decode_frame(m.bytes, &p);
    payloads.emplace_back(p.begin(), p.end());
  }
  EXPECT_EQ(payloads[0], payloads[1]);
  const auto scene = small_scene();
  const FrameBuffer offline = render(r.camera(), scene->caches.position, scene->caches.direction, &scene->bvh, {});
  EXPECT_EQ(payloads[0], offline.rgba8);
}

TEST_F(ServerTest, PreviewTierIsFlagged) {
  start(cache_backend());
  Client c(port_);
  RenderRequest r = request(2, 64);
  r.quality = Quality::kPreview;
  c.send(encode_request(r));
  const Message m = c.read();
  const FrameHeader h = decode_frame(m.bytes);
  EXPECT_EQ(h.flags, kFlagPreview);
  EXPECT_EQ(h.width, 32);
}

TEST_F(ServerTest, BurstAnswersLastAndReportsDropped) {
  start(std::make_shared<SlowBackend>(cache_backend()));
  Client c(port_);
  for (std::uint32_t id = 1; id <= 10; ++id) c.send(encode_request(request(id)));
  std::set<std::uint32_t> framed, dropped;
  while (!framed.count(10)) {
    const Message m = c.read();
    if (m.binary) {
      const FrameHeader h = decode_frame(m.bytes);
      EXPECT_FALSE(framed.count(h.id) || dropped.count(h.id));
      framed.insert(h.id);
    } else {
      const json j = json::parse(m.text());
      ASSERT_EQ(j["type"], "dropped") << m.text();
      EXPECT_GT(j["superseded_by"].get<std::uint32_t>(), j["id"].get<std::uint32_t>());
      dropped.insert(j["id"].get<std::uint32_t>());
    }
  }
  // Every request is answered exactly once, by a frame or a dropped notice.
  EXPECT_EQ(framed.size() + dropped.size(), 10u);
  EXPECT_FALSE(dropped.empty());
  EXPECT_LE(framed.size(), 3u);
}

TEST_F(ServerTest, FramesNeverInterleaveAcrossConnections) {
  start(cache_backend());
  std::vector<std::thread> threads;
  std::atomic<int> frames{0};
  for (int t = 0; t < 3; ++t) {
    threads.emplace_back([&, t] {
      Client c(port_);
      for (int i = 0; i < 4; ++i) {
        const std::uint32_t id = static_cast<std::uint32_t>(100 * t + i);
        c.send(encode_request(request(id, 16 + 8 * t)));
        const Message m = c.read();
        const FrameHeader h = decode_frame(m.bytes);
        EXPECT_EQ(h.id, id);
        EXPECT_EQ(h.width, 16 + 8 * t);
        ++frames;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(frames.load(), 12);
}

TEST_F(ServerTest, MalformedMessagesKeepConnectionOpen) {
  start(cache_backend());
  Client c(port_);
  c.send("{oops");
  json j = json::parse(c.read().text());
  EXPECT_EQ(j["type"], "error");
  EXPECT_TRUE(j["id"].is_null());

  json big = json::parse(encode_request(request(4)));
  big["width"] = 4096;
  c.send(big.dump());
  j = json::parse(c.read().text());
  EXPECT_EQ(j["type"], "error");
  EXPECT_EQ(j["id"], 4);

  c.send_binary({1, 2, 3});
  EXPECT_EQ(json::parse(c.read().text())["type"], "error");

  c.send(encode_request(request(5)));
  const Message m = c.read();
  ASSERT_TRUE(m.binary);
  EXPECT_EQ(decode_frame(m.bytes).id, 5u);
}

http::response<http::string_body> http_get(unsigned short port, const std::string& target,
                                           http::verb verb = http::verb::get) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  tcp::resolver resolver(ioc);
  net::connect(socket, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.keep_alive(false);
  http::write(socket, req);
  beast::flat_buffer buf;
  http::response_parser<http::string_body> parser;
  parser.skip(verb == http::verb::head);
  http::read(socket, buf, parser);
  return parser.release();
}

TEST_F(ServerTest, ServesStaticFiles) {
  const fs::path root = fs::temp_directory_path() / "fastfield_static";
  fs::remove_all(root);
  fs::create_directories(root / "js");
  std::ofstream(root / "index.html") << "<html>viewer</html>";
  std::ofstream(root / "js" / "app.js") << "console.log(1);";
  std::ofstream(fs::temp_directory_path() / "fastfield_secret.txt") << "secret";
  start(cache_backend(), root);

  auto res = http_get(port_, "/");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res.body(), "<html>viewer</html>");
  EXPECT_EQ(res[http::field::content_type], "text/html");

  res = http_get(port_, "/js/app.js?v=2");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res[http::field::content_type], "application/javascript");
  EXPECT_EQ(res.body(), "console.log(1);");

  res = http_get(port_, "/js/app.js", http::verb::head);
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res[http::field::content_length], "15");

  EXPECT_EQ(http_get(port_, "/missing.css").result(), http::status::not_found);
  EXPECT_EQ(http_get(port_, "/../fastfield_secret.txt").result(), http::status::not_found);
  EXPECT_EQ(http_get(port_, "/", http::verb::post).result(), http::status::method_not_allowed);
  fs::remove_all(root);
  fs::remove(fs::temp_directory_path() / "fastfield_secret.txt");
}

TEST_F(ServerTest, NoStaticRootMeansNotFound) {
  start(cache_backend());
  EXPECT_EQ(http_get(port_, "/index.html").result(), http::status::not_found);
}

TEST(Server, BadAddressThrows) {
  ServiceOptions o;
  o.host = "not-an-address";
  Server s(std::make_shared<CacheBackend>(small_scene(), RenderConfig{}), o);
  EXPECT_THROW(s.start(), Error);
}

}  // namespace
}  // namespace fastfield::service
