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

#include <filesystem>
#include <memory>
#include <string>

#include "fastfield/config.hpp"
#include "fastfield/service/protocol.hpp"

namespace fastfield::service {

/// Produces the image for one request. Called from the single render thread.
class RenderBackend {
 public:
  virtual ~RenderBackend() = default;
  virtual FrameBuffer render(const RenderRequest& request) const = 0;
};

/// Renders from baked caches with the same path as the offline `render`.
class CacheBackend : public RenderBackend {
 public:
  CacheBackend(std::shared_ptr<const PreparedScene> scene, RenderConfig config);
  FrameBuffer render(const RenderRequest& request) const override;

 private:
  std::shared_ptr<const PreparedScene> scene_;
  RenderConfig config_;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path static_root;  // empty disables static serving
  int io_threads = 1;
};

/// WebSocket render service plus static file server on one port. Each
/// connection holds at most one request in flight and one pending; a newer
/// request replaces the pending one, which is answered with a dropped notice.
class Server {
 public:
  Server(std::shared_ptr<const RenderBackend> backend, ServiceOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving in background threads; returns the bound port.
  unsigned short start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fastfield::service
