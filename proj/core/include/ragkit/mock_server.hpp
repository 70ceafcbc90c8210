// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ragkit/web_tools.hpp"

namespace ragkit {

enum class LlmMockMode {
  Echo,        // reply = last user message content
  Script,      // queued replies in order, HTTP 409 once exhausted
  ConcatMark,  // reply = S(<first 8 hex of FNV-1a 64 of last user content>)
};

std::optional<LlmMockMode> parse_llm_mock_mode(std::string_view text) noexcept;

/// The reply ConcatMark mode gives for `content`.
std::string concat_mark(std::string_view content);

struct MockPage {
  int status = 200;
  std::string content_type = "text/html; charset=utf-8";
  std::string body;
  std::string location;  // sent as Location when non-empty
};

struct MockServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  LlmMockMode llm_mode = LlmMockMode::Echo;
  std::vector<std::string> llm_script;
  std::size_t embed_dim = 64;

  // Route prefixes. The flat defaults put every mock at the server root;
  // bundled() moves each one under /mock/<name>.
  std::string llm_prefix;
  std::string embed_prefix;
  std::string search_prefix;
  std::string media_prefix;
  std::string pages_prefix = "/pages";

  static MockServerOptions bundled(int port);
};

struct LoggedRequest {
  std::string path;
  std::string body;
};

/// Deterministic stand-ins for every model server the service talks to:
/// chat completions, embeddings (hash_embed over HTTP), search, media
/// (image generation/understanding, ASR) and static web pages. Every
/// request is logged for inspection. Runs on its own thread until
/// destroyed.
class MockServer {
 public:
  /// Throws PortInUse.
  static std::unique_ptr<MockServer> start(MockServerOptions options = {});
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  void stop();

  int port() const noexcept;
  std::string base_url() const;
  std::string llm_url() const;     // base for {url}/v1/chat/completions
  std::string embed_url() const;   // full embeddings endpoint
  std::string search_url() const;  // base for {url}/search
  std::string image_generate_url() const;
  std::string image_understand_url() const;
  std::string asr_url() const;
  std::string page_url(const std::string& path) const;

  // Chat completions.
  void set_llm_mode(LlmMockMode mode);
  void push_llm_script(const std::vector<std::string>& replies);
  void fail_llm_next(std::size_t count, int status = 500);
  void set_llm_delay_ms(int ms);
  std::vector<std::string> llm_requests() const;
  std::size_t llm_request_count() const;

  // Embeddings. A nonzero status makes every request fail with it.
  void fail_embed(int status);
  std::vector<std::string> embed_requests() const;

  // Search.
  void set_search_results(std::vector<SearchResult> results,
                          std::optional<std::string> instant_answer = std::nullopt);
  void fail_search(int status);
  std::vector<std::string> search_requests() const;  // request targets, query included

  // Media.
  void fail_media(int status);
  void set_media_delay_ms(int ms);
  std::vector<LoggedRequest> media_requests() const;

  // Static pages, served at page_url(path).
  void set_page(const std::string& path, MockPage page);

  void clear_logs();

  /// Bytes of the fixed 1x1 PNG returned by the image generator.
  static const std::string& fixed_png();

 private:
  struct Impl;
  explicit MockServer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<MockServer> serve_mock_llm(int port, LlmMockMode mode,
                                           std::vector<std::string> script = {});
std::unique_ptr<MockServer> serve_mock_media(int port);

}  // namespace ragkit
