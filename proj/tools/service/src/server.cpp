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

#include "fastfield/service/server.hpp"

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>
#include <condition_variable>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "fastfield/error.hpp"
#include "fastfield/renderer.hpp"

namespace fastfield::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

CacheBackend::CacheBackend(std::shared_ptr<const PreparedScene> scene, RenderConfig config)
    : scene_(std::move(scene)), config_(config) {}

FrameBuffer CacheBackend::render(const RenderRequest& request) const {
  return fastfield::render(request.camera(), scene_->caches.position, scene_->caches.direction,
                           &scene_->bvh, config_);
}

namespace {

const char* mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<const RenderBackend> backend, net::thread_pool& pool)
      : ws_(std::move(socket)), backend_(std::move(backend)), pool_(pool) {}

  void accept(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  struct Outgoing {
    bool binary = false;
    std::shared_ptr<const std::vector<std::uint8_t>> bytes;
  };

  void on_accept(beast::error_code ec) {
    if (ec) return;
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      return;
    }
    if (!ws_.got_text()) {
      send_text(error_notice(std::nullopt, "binary messages are not accepted"));
    } else {
      const std::string text = beast::buffers_to_string(buffer_.data());
      ParsedRequest parsed = parse_request(text);
      if (parsed.request) {
        submit(*parsed.request);
      } else {
        send_text(error_notice(parsed.error.id, parsed.error.reason));
      }
    }
    buffer_.consume(buffer_.size());
    read();
  }

  // Latest wins: at most one request rendering and one waiting.
  void submit(const RenderRequest& req) {
    if (!rendering_) {
      start_render(req);
      return;
    }
    if (pending_) send_text(dropped_notice(pending_->id, req.id));
    pending_ = req;
  }

  void start_render(const RenderRequest& req) {
    rendering_ = true;
    auto self = shared_from_this();
    net::post(pool_, [self, req] {
      std::shared_ptr<std::vector<std::uint8_t>> frame;
      std::string failure;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const FrameBuffer fb = self->backend_->render(req);
        const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        FrameHeader h;
        h.id = req.id;
        h.width = static_cast<std::uint16_t>(fb.width);
        h.height = static_cast<std::uint16_t>(fb.height);
        h.flags = req.quality == Quality::kPreview ? kFlagPreview : 0;
        h.micros = static_cast<std::uint64_t>(us);
        frame = std::make_shared<std::vector<std::uint8_t>>(encode_frame(h, fb.rgba8));
      } catch (const std::exception& e) {
        failure = e.what();
      }
      net::post(self->ws_.get_executor(), [self, id = req.id, frame, failure] {
        if (frame) {
          self->enqueue({true, frame});
        } else {
          self->send_text(error_notice(id, "render failed: " + failure));
        }
        self->rendering_ = false;
        if (self->pending_) {
          const RenderRequest next = *self->pending_;
          self->pending_.reset();
          self->start_render(next);
        }
      });
    });
  }

  void send_text(const std::string& s) {
    enqueue({false, std::make_shared<std::vector<std::uint8_t>>(s.begin(), s.end())});
  }

  // Messages go out one at a time in queue order, so frames never interleave.
  void enqueue(Outgoing msg) {
    if (closed_) return;
    outq_.push_back(std::move(msg));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outq_.empty() || closed_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    const Outgoing& msg = outq_.front();
    ws_.binary(msg.binary);
    ws_.async_write(net::buffer(*msg.bytes),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    outq_.pop_front();
    if (ec) {
      closed_ = true;
      outq_.clear();
      writing_ = false;
      return;
    }
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<const RenderBackend> backend_;
  net::thread_pool& pool_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> outq_;
  bool writing_ = false;
  bool closed_ = false;
  bool rendering_ = false;
  std::optional<RenderRequest> pending_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<const RenderBackend> backend,
              net::thread_pool& pool, std::filesystem::path root)
      : stream_(std::move(socket)), backend_(std::move(backend)), pool_(pool), root_(std::move(root)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), backend_, pool_)->accept(std::move(req_));
      return;
    }
    respond();
  }

  template <typename Body>
  void send(http::response<Body>&& res) {
    auto sp = std::make_shared<http::response<Body>>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec || sp->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  void respond_text(http::status status, const std::string& body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, "text/plain");
    res.keep_alive(req_.keep_alive());
    res.body() = body;
    res.prepare_payload();
    send(std::move(res));
  }

  void respond() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      respond_text(http::status::method_not_allowed, "method not allowed\n");
      return;
    }
    std::string target(req_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (root_.empty() || target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
      respond_text(http::status::not_found, "not found\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = root_ / target.substr(1);
    beast::error_code ec;
    http::file_body::value_type body;
    if (std::filesystem::is_regular_file(path)) body.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (!std::filesystem::is_regular_file(path) || ec) {
      respond_text(http::status::not_found, "not found\n");
      return;
    }
    const auto size = body.size();
    if (req_.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, req_.version()};
      res.set(http::field::content_type, mime_type(path));
      res.content_length(size);
      res.keep_alive(req_.keep_alive());
      send(std::move(res));
      return;
    }
    http::response<http::file_body> res{std::piecewise_construct, std::make_tuple(std::move(body)),
                                        std::make_tuple(http::status::ok, req_.version())};
    res.set(http::field::content_type, mime_type(path));
    res.content_length(size);
    res.keep_alive(req_.keep_alive());
    send(std::move(res));
  }

  beast::tcp_stream stream_;
  std::shared_ptr<const RenderBackend> backend_;
  net::thread_pool& pool_;
  std::filesystem::path root_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<const RenderBackend> backend;
  ServiceOptions options;
  net::io_context ioc;
  net::thread_pool render_pool{1};
  std::optional<tcp::acceptor> acceptor;
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;

  void accept() {
    acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), backend, render_pool, options.static_root)->run();
      accept();
    });
  }
};

Server::Server(std::shared_ptr<const RenderBackend> backend, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->backend = std::move(backend);
  impl_->options = std::move(options);
}

Server::~Server() { stop(); }

unsigned short Server::start() {
  Impl& s = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(s.options.host, ec);
  if (ec) throw Error(ErrorCode::kInvalidArgument, "bad listen address '" + s.options.host + "'");
  s.acceptor.emplace(s.ioc);
  const tcp::endpoint endpoint{address, s.options.port};
  s.acceptor->open(endpoint.protocol(), ec);
  if (!ec) s.acceptor->set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor->bind(endpoint, ec);
  if (!ec) s.acceptor->listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot listen on " + s.options.host + ":" +
                                          std::to_string(s.options.port) + ": " + ec.message());
  const unsigned short port = s.acceptor->local_endpoint().port();
  s.accept();
  {
    std::lock_guard lock(s.mu);
    s.running = true;
  }
  for (int i = 0; i < std::max(1, s.options.io_threads); ++i) {
    s.threads.emplace_back([&s] { s.ioc.run(); });
  }
  return port;
}

void Server::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.mu);
    if (!s.running) return;
    s.running = false;
  }
  net::post(s.ioc, [&s] {
    beast::error_code ec;
    s.acceptor->close(ec);
  });
  s.ioc.stop();
  for (auto& t : s.threads) t.join();
  s.threads.clear();
  s.render_pool.join();
  s.cv.notify_all();
}

void Server::wait() {
  Impl& s = *impl_;
  std::unique_lock lock(s.mu);
  s.cv.wait(lock, [&s] { return !s.running; });
}

}  // namespace fastfield::service
