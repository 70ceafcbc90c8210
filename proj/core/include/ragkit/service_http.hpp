// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ragkit/service.hpp"

namespace ragkit {

/// REST front end for a Service. Routes live under /api; an optional
/// static directory is mounted at /.
class HttpService {
 public:
  explicit HttpService(Service& service, std::filesystem::path static_dir = {});
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds; port 0 picks a free one. Throws PortInUse.
  int bind(const std::string& host, int port);
  /// Serves on a background thread (binds first if needed).
  void start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks until stop().
  void listen();
  void stop();

  int port() const noexcept;
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string message_reply_to_json(const MessageReply& reply);
MessageRequest message_request_from_json(std::string_view body);

}  // namespace ragkit
