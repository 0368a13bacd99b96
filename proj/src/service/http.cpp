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
#include "nrtw/service/http.hpp"

#include <charconv>
#include <cmath>

#include "httplib.h"
#include "json.hpp"

namespace nrtw::service {
namespace {

constexpr std::size_t kMaxPayload = std::size_t{256} << 20;

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::int64_t parse_index(const std::string& text) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && ptr == last && first != last, ErrorCode::kInvalidArgument,
          "candidate index must be an integer, got '" + text + "'");
  return v;
}

double parse_number(const std::string& text, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(v),
          ErrorCode::kInvalidArgument, std::string(what) + " must be a finite number");
  return v;
}

std::pair<double, double> parse_window(const httplib::Request& req) {
  double low = -160.0, high = 240.0;
  if (req.has_param("window")) {
    const std::string w = req.get_param_value("window");
    const auto comma = w.find(',');
    require(comma != std::string::npos, ErrorCode::kInvalidArgument,
            "window must be LOW,HIGH");
    low = parse_number(w.substr(0, comma), "window low");
    high = parse_number(w.substr(comma + 1), "window high");
  }
  if (req.has_param("window_low")) low = parse_number(req.get_param_value("window_low"), "window_low");
  if (req.has_param("window_high")) {
    high = parse_number(req.get_param_value("window_high"), "window_high");
  }
  require(low < high, ErrorCode::kInvalidArgument, "window low must be below window high");
  return {low, high};
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kFormat:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kDegenerate:
    case ErrorCode::kNonFinite:
      return 422;
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

std::pair<std::string, int> parse_address(std::string_view address) {
  const auto colon = address.rfind(':');
  require(colon != std::string_view::npos && colon > 0, ErrorCode::kInvalidArgument,
          "address must be HOST:PORT, got '" + std::string(address) + "'");
  const std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  require(ec == std::errc() && ptr == port_text.data() + port_text.size() && port >= 0 &&
              port <= 65535,
          ErrorCode::kInvalidArgument, "invalid port in '" + std::string(address) + "'");
  return {std::string(address.substr(0, colon)), port};
}

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}

  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  Service& s = service;
  svr.set_payload_max_length(kMaxPayload);

  svr.Get("/api/v1/checkpoints", guarded([&s](const auto&, auto& res) {
            send_json(res, 200, {{"checkpoints", s.checkpoints().list()}});
          }));
  svr.Post("/api/v1/checkpoints", guarded([&s](const auto& req, auto& res) {
             std::optional<std::string> id;
             if (req.has_param("id")) id = req.get_param_value("id");
             auto [entry, created] = s.checkpoints().add(req.body, id);
             send_json(res, created ? 201 : 200, entry);
           }));

  svr.Post("/api/v1/sessions", guarded([&s](const auto& req, auto& res) {
             nlohmann::json out;
             if (req.get_header_value("Content-Type") == kImageContentType) {
               require(req.has_param("checkpoint_id"), ErrorCode::kInvalidArgument,
                       "image uploads need a checkpoint_id query parameter");
               out = s.create_session(req.get_param_value("checkpoint_id"),
                                      decode_image(req.body).image, std::nullopt);
             } else {
               out = s.create_session(parse_body(req));
             }
             res.set_header("Location", "/api/v1/sessions/" + out.at("id").template get<std::string>());
             send_json(res, 201, out);
           }));
  svr.Get(R"(/api/v1/sessions/([^/]+))", guarded([&s](const auto& req, auto& res) {
            send_json(res, 200, s.session(req.matches[1]));
          }));
  svr.Post(R"(/api/v1/sessions/([^/]+)/sweeps)", guarded([&s](const auto& req, auto& res) {
             const auto out = s.start_sweep(req.matches[1], parse_body(req));
             res.set_header("Location", out.at("location").template get<std::string>());
             send_json(res, 202, out);
           }));
  svr.Delete(R"(/api/v1/sessions/([^/]+)/sweeps/([^/]+))",
             guarded([&s](const auto& req, auto& res) {
               send_json(res, 202, s.cancel_sweep(req.matches[1], req.matches[2]));
             }));
  svr.Get(R"(/api/v1/sessions/([^/]+)/curve)", guarded([&s](const auto& req, auto& res) {
            send_json(res, 200, s.curve(req.matches[1]));
          }));
  svr.Get(R"(/api/v1/sessions/([^/]+)/candidates/([^/]+))",
          guarded([&s](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const std::int64_t j = parse_index(req.matches[2]);
            const std::string format =
                req.has_param("format") ? req.get_param_value("format") : "raw";
            if (format == "raw") {
              res.set_content(s.candidate_bytes(id, j), kImageContentType);
              return;
            }
            require(format == "gray8" || format == "png", ErrorCode::kInvalidArgument,
                    "format must be raw, gray8 or png");
            const auto [low, high] = parse_window(req);
            const WindowedImage w = s.candidate_windowed(id, j, low, high);
            res.set_header("X-Image-Height", std::to_string(w.height));
            res.set_header("X-Image-Width", std::to_string(w.width));
            if (format == "png") {
              res.set_content(encode_png_gray8(w.pixels, w.height, w.width), "image/png");
            } else {
              res.set_content(std::string(w.pixels.begin(), w.pixels.end()), kGray8ContentType);
            }
          }));
  svr.Post(R"(/api/v1/sessions/([^/]+)/candidates/([^/]+)/metrics)",
           guarded([&s](const auto& req, auto& res) {
             send_json(res, 200,
                       s.roi_metrics(req.matches[1], parse_index(req.matches[2]), parse_body(req)));
           }));

  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int bound = svr.bind_to_any_port(host);
    require(bound > 0, ErrorCode::kIo, "cannot bind " + host + ":0");
    return bound;
  }
  require(svr.bind_to_port(host, port), ErrorCode::kIo,
          "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace nrtw::service
