// Copyright 2026 The NRTW Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// HTTP transport for Service. Routes, all under /api/v1:
//
//   GET    /checkpoints
//   POST   /checkpoints[?id=NAME]               body: NRTW-CKPT bytes
//   POST   /sessions                            body: JSON (see Service)
//   GET    /sessions/{id}
//   POST   /sessions/{id}/sweeps                body: {"direction", "config"?}
//   DELETE /sessions/{id}/sweeps/{direction}
//   GET    /sessions/{id}/curve
//   GET    /sessions/{id}/candidates/{j}[?format=raw|gray8|png&window=LOW,HIGH]
//   POST   /sessions/{id}/candidates/{j}/metrics body: JSON
//
// Errors are JSON {"error": {"code", "message"}} with a status derived from
// the error code.

#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "nrtw/core/error.hpp"
#include "nrtw/service/service.hpp"

namespace nrtw::service {

inline constexpr const char* kImageContentType = "application/x-nrtw-img";
inline constexpr const char* kCheckpointContentType = "application/x-nrtw-ckpt";
inline constexpr const char* kGray8ContentType = "application/x-gray8";

int http_status(ErrorCode code) noexcept;

/// "host:port"; throws kInvalidArgument.
std::pair<std::string, int> parse_address(std::string_view address);

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Port 0 picks a free port; returns the bound port. Throws kIo when the
  /// address cannot be bound.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nrtw::service
