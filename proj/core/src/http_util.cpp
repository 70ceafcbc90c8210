// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "http_util.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>

#include "ragkit/text.hpp"

namespace ragkit::http {

std::string Url::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

std::optional<Url> parse_url(std::string_view text) {
  Url url;
  const auto scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  url.scheme = to_lower_ascii(text.substr(0, scheme_end));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  auto rest = text.substr(scheme_end + 3);
  const auto path_start = rest.find_first_of("/?#");
  auto authority = rest.substr(0, path_start);
  url.path = path_start == std::string_view::npos
                 ? "/"
                 : std::string(rest.substr(path_start));
  if (!url.path.empty() && url.path.front() != '/') url.path.insert(0, "/");
  if (const auto hash = url.path.find('#'); hash != std::string::npos) {
    url.path.resize(hash);
  }
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  if (authority.empty()) return std::nullopt;
  url.port = url.scheme == "https" ? 443 : 80;
  if (authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    url.host = std::string(authority.substr(1, close - 1));
    authority = authority.substr(close + 1);
    if (!authority.empty() && authority.front() != ':') return std::nullopt;
  } else {
    const auto colon = authority.find(':');
    url.host = std::string(authority.substr(0, colon));
    authority = colon == std::string_view::npos ? std::string_view{}
                                                : authority.substr(colon);
  }
  if (!authority.empty()) {
    const auto port_text = authority.substr(1);
    if (port_text.empty() || port_text.size() > 5) return std::nullopt;
    int port = 0;
    for (char c : port_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      port = port * 10 + (c - '0');
    }
    if (port == 0 || port > 65535) return std::nullopt;
    url.port = port;
  }
  if (url.host.empty()) return std::nullopt;
  return url;
}

std::string resolve_location(const Url& base, std::string_view location) {
  if (location.find("://") != std::string_view::npos) {
    return std::string(location);
  }
  if (location.starts_with("//")) {
    return base.scheme + ":" + std::string(location);
  }
  if (location.starts_with("/")) return base.origin() + std::string(location);
  auto dir = base.path.substr(0, base.path.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return base.origin() + dir + std::string(location);
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0F]);
    }
  }
  return out;
}

std::string join(std::string_view base, std::string_view path) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (!path.starts_with("/")) out.push_back('/');
  out.append(path);
  return out;
}

std::string Response::header(const std::string& name) const {
  for (const auto& [key, value] : headers) {
    if (to_lower_ascii(key) == to_lower_ascii(name)) return value;
  }
  return {};
}

void exclusive_bind(httplib::Server& server) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
}

void add_bearer_from_env(httplib::Headers& headers, const std::string& env_name) {
  if (env_name.empty()) return;
  if (const char* value = std::getenv(env_name.c_str()); value && *value) {
    headers.emplace("Authorization", std::string("Bearer ") + value);
  }
}

Response send(const Request& request) {
  Response response;
  const auto url = parse_url(request.url);
  if (!url) {
    response.transport = Transport::Failed;
    response.transport_message = "invalid URL: " + request.url;
    return response;
  }

  httplib::Client client(url->origin());
  const auto sec = request.timeout_ms / 1000;
  const auto usec = (request.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  client.set_follow_location(false);

  httplib::Request req;
  req.method = request.method;
  req.path = url->path;
  req.headers = request.headers;
  if (!request.body.empty() || request.method == "POST") {
    req.body = request.body;
    if (!request.content_type.empty()) {
      req.set_header("Content-Type", request.content_type);
    }
  }
  bool aborted_by_caller = false;
  req.response_handler = [&](const httplib::Response& res) {
    response.status = res.status;
    response.headers = res.headers;
    if (request.on_headers && !request.on_headers(response)) {
      aborted_by_caller = true;
      return false;
    }
    return true;
  };
  req.content_receiver = [&](const char* data, std::size_t n, std::uint64_t,
                             std::uint64_t) {
    if (request.on_body) {
      if (!request.on_body(std::string_view(data, n))) {
        aborted_by_caller = true;
        return false;
      }
      return true;
    }
    response.body.append(data, n);
    return true;
  };

  const auto started = std::chrono::steady_clock::now();
  auto result = client.send(req);
  if (!result) {
    const auto err = result.error();
    response.transport_message = httplib::to_string(err);
    if (aborted_by_caller || err == httplib::Error::Canceled) {
      response.transport = Transport::Canceled;
    } else if (err == httplib::Error::Connection) {
      response.transport = Transport::Unreachable;
    } else if (err == httplib::Error::ConnectionTimeout) {
      response.transport = Transport::Timeout;
    } else if (err == httplib::Error::Read &&
               std::chrono::steady_clock::now() - started >=
                   std::chrono::milliseconds(request.timeout_ms * 9 / 10)) {
      // httplib reports an expired read timeout as a plain read failure.
      response.transport = Transport::Timeout;
    } else {
      response.transport = Transport::Failed;
    }
    return response;
  }
  response.status = result->status;
  response.headers = result->headers;
  return response;
}

}  // namespace ragkit::http
