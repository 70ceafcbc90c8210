// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "httplib.h"

namespace ragkit::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // starts with '/', includes any query string

  std::string origin() const;
  std::string str() const { return origin() + path; }
};

std::optional<Url> parse_url(std::string_view text);

// Resolves a Location header value against the URL that produced it.
std::string resolve_location(const Url& base, std::string_view location);

std::string url_encode(std::string_view s);

// Joins a base URL and a path without doubling the slash.
std::string join(std::string_view base, std::string_view path);

enum class Transport { Ok, Unreachable, Timeout, Canceled, Failed };

struct Response {
  Transport transport = Transport::Ok;
  std::string transport_message;
  int status = 0;
  std::string body;
  httplib::Headers headers;

  std::string header(const std::string& name) const;
  bool ok() const { return transport == Transport::Ok; }
};

struct Request {
  std::string method = "GET";
  std::string url;
  std::string body;
  std::string content_type;
  httplib::Headers headers;
  int timeout_ms = 30000;
  // Called once the status line and headers arrive; return false to abort.
  std::function<bool(const Response&)> on_headers;
  // Streams the body instead of buffering it; return false to abort.
  std::function<bool(std::string_view)> on_body;
};

// One request, no redirect following. Never throws for network failures;
// they surface through Response::transport.
Response send(const Request& request);

// Adds `Authorization: Bearer <value>` when the named env var is set.
void add_bearer_from_env(httplib::Headers& headers, const std::string& env_name);

/// Makes `server` bind exclusively: SO_REUSEADDR only, never SO_REUSEPORT,
/// so a second listener on a taken port fails instead of sharing it.
void exclusive_bind(httplib::Server& server);

}  // namespace ragkit::http
