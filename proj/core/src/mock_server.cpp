// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/mock_server.hpp"

#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"
#include "ragkit/embedding.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

using nlohmann::json;

std::optional<LlmMockMode> parse_llm_mock_mode(std::string_view text) noexcept {
  if (text == "echo") return LlmMockMode::Echo;
  if (text == "script") return LlmMockMode::Script;
  if (text == "concat_mark") return LlmMockMode::ConcatMark;
  return std::nullopt;
}

std::string concat_mark(std::string_view content) {
  return "S(" + fnv_hex8(content) + ")";
}

MockServerOptions MockServerOptions::bundled(int port) {
  MockServerOptions o;
  o.port = port;
  o.llm_prefix = "/mock/llm";
  o.embed_prefix = "/mock/embed";
  o.search_prefix = "/mock/search";
  o.media_prefix = "/mock/media";
  o.pages_prefix = "/mock/pages";
  return o;
}

const std::string& MockServer::fixed_png() {
  static const std::string png = [] {
    static constexpr unsigned char kBytes[] = {
        0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48,
        0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00,
        0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00, 0x0A, 0x49, 0x44, 0x41, 0x54, 0x78,
        0x9C, 0x63, 0x00, 0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00,
        0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};
    return std::string(reinterpret_cast<const char*>(kBytes), sizeof kBytes);
  }();
  return png;
}

struct MockServer::Impl {
  MockServerOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  mutable std::mutex mu;
  LlmMockMode llm_mode = LlmMockMode::Echo;
  std::deque<std::string> script;
  std::size_t llm_failures = 0;
  int llm_failure_status = 500;
  int llm_delay_ms = 0;
  std::vector<std::string> llm_log;
  std::vector<std::string> embed_log;
  int embed_failure = 0;
  std::vector<SearchResult> search_results;
  std::optional<std::string> instant_answer;
  int search_failure = 0;
  std::vector<std::string> search_log;
  int media_failure = 0;
  int media_delay_ms = 0;
  std::vector<LoggedRequest> media_log;
  std::map<std::string, MockPage> pages;

  void install_routes();
  void handle_chat(const httplib::Request& req, httplib::Response& res);
  void handle_embeddings(const httplib::Request& req, httplib::Response& res);
  void handle_search(const httplib::Request& req, httplib::Response& res);
  void handle_media(const std::string& kind, const httplib::Request& req,
                    httplib::Response& res);
};

namespace {

void json_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"message", message}}}}.dump(), "application/json");
}

// Splits a reply into word-sized deltas that concatenate back to it.
std::vector<std::string> deltas_of(const std::string& text) {
  std::vector<std::string> out;
  std::string piece;
  for (char c : text) {
    piece.push_back(c);
    if (c == ' ') {
      out.push_back(std::move(piece));
      piece.clear();
    }
  }
  if (!piece.empty()) out.push_back(std::move(piece));
  return out;
}

}  // namespace

void MockServer::Impl::handle_chat(const httplib::Request& req, httplib::Response& res) {
  std::string reply;
  bool stream = false;
  int delay = 0;
  {
    std::lock_guard lock(mu);
    llm_log.push_back(req.body);
    delay = llm_delay_ms;
    if (llm_failures > 0) {
      --llm_failures;
      json_error(res, llm_failure_status, "injected failure");
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      json_error(res, 400, "body is not JSON");
      return;
    }
    stream = body.value("stream", false);
    std::string last_user;
    if (body.contains("messages") && body["messages"].is_array()) {
      for (const auto& m : body["messages"]) {
        if (m.value("role", "") == "user") last_user = m.value("content", "");
      }
    }
    switch (llm_mode) {
      case LlmMockMode::Echo:
        reply = last_user;
        break;
      case LlmMockMode::ConcatMark:
        reply = concat_mark(last_user);
        break;
      case LlmMockMode::Script:
        if (script.empty()) {
          json_error(res, 409, "script exhausted");
          return;
        }
        reply = script.front();
        script.pop_front();
        break;
    }
  }
  if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));

  if (!stream) {
    res.set_content(
        json{{"id", "mock-1"},
             {"object", "chat.completion"},
             {"choices", {{{"index", 0},
                           {"message", {{"role", "assistant"}, {"content", reply}}},
                           {"finish_reason", "stop"}}}}}
            .dump(),
        "application/json");
    return;
  }
  std::string sse;
  for (const auto& piece : deltas_of(reply)) {
    sse += "data: " +
           json{{"choices", {{{"index", 0}, {"delta", {{"content", piece}}}}}}}.dump() +
           "\n\n";
  }
  sse += "data: [DONE]\n\n";
  res.set_content(sse, "text/event-stream");
}

void MockServer::Impl::handle_embeddings(const httplib::Request& req, httplib::Response& res) {
  {
    std::lock_guard lock(mu);
    embed_log.push_back(req.body);
    if (embed_failure != 0) {
      json_error(res, embed_failure, "injected failure");
      return;
    }
  }
  std::vector<std::string> inputs;
  try {
    const auto body = json::parse(req.body);
    const auto& input = body.at("input");
    if (input.is_string()) {
      inputs.push_back(input.get<std::string>());
    } else {
      inputs = input.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    json_error(res, 400, e.what());
    return;
  }
  json data = json::array();
  try {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto v = hash_embed(inputs[i], options.embed_dim);
      data.push_back({{"object", "embedding"}, {"index", i}, {"embedding", v.values}});
    }
  } catch (const Error& e) {
    json_error(res, 400, e.what());
    return;
  }
  res.set_content(json{{"object", "list"}, {"data", std::move(data)}, {"model", "mock-hash"}}
                      .dump(),
                  "application/json");
}

void MockServer::Impl::handle_search(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard lock(mu);
  search_log.push_back(req.target);
  if (search_failure != 0) {
    json_error(res, search_failure, "injected failure");
    return;
  }
  json results = json::array();
  for (const auto& r : search_results) {
    results.push_back({{"title", r.title}, {"url", r.url}, {"snippet", r.snippet}});
  }
  json body = {{"results", std::move(results)}, {"instant_answer", nullptr}};
  if (instant_answer) body["instant_answer"] = *instant_answer;
  res.set_content(body.dump(), "application/json");
}

void MockServer::Impl::handle_media(const std::string& kind, const httplib::Request& req,
                                    httplib::Response& res) {
  int delay = 0;
  {
    std::lock_guard lock(mu);
    media_log.push_back({req.path, req.body});
    delay = media_delay_ms;
    if (media_failure != 0) {
      json_error(res, media_failure, "injected failure");
      return;
    }
  }
  if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    json_error(res, 400, "body is not JSON");
    return;
  }
  if (kind == "generate") {
    if (!body.contains("prompt")) {
      json_error(res, 400, "missing prompt");
      return;
    }
    res.set_header("X-Params", body.dump());
    res.set_content(fixed_png(), "image/png");
  } else if (kind == "understand") {
    if (!body.contains("prompt") || !body.contains("image_url")) {
      json_error(res, 400, "missing prompt or image_url");
      return;
    }
    const auto text = "MOCK-VISION:" + body["prompt"].get<std::string>() + "|" +
                      body["image_url"].get<std::string>();
    res.set_content(json{{"text", text}}.dump(), "application/json");
  } else {
    if (!body.contains("raw") || !body["raw"].is_array() || !body.contains("sampling_rate")) {
      json_error(res, 400, "missing sampling_rate or raw");
      return;
    }
    const auto text = "MOCK-ASR:" + std::to_string(body["raw"].size());
    res.set_content(json{{"text", text}}.dump(), "application/json");
  }
}

void MockServer::Impl::install_routes() {
  server.Post(options.llm_prefix + "/v1/chat/completions",
              [this](const httplib::Request& req, httplib::Response& res) { handle_chat(req, res); });
  server.Post(options.embed_prefix + "/v1/embeddings",
              [this](const httplib::Request& req, httplib::Response& res) {
                handle_embeddings(req, res);
              });
  server.Get(options.search_prefix + "/search",
             [this](const httplib::Request& req, httplib::Response& res) { handle_search(req, res); });
  for (const auto* kind : {"generate", "understand"}) {
    server.Post(options.media_prefix + "/image/" + kind,
                [this, kind = std::string(kind)](const httplib::Request& req, httplib::Response& res) {
                  handle_media(kind, req, res);
                });
  }
  server.Post(options.media_prefix + "/asr",
              [this](const httplib::Request& req, httplib::Response& res) {
                handle_media("asr", req, res);
              });
  server.Get(options.pages_prefix + "(/.*)",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::lock_guard lock(mu);
               const auto it = pages.find(req.matches[1].str());
               if (it == pages.end()) {
                 res.status = 404;
                 res.set_content("not found", "text/plain");
                 return;
               }
               const auto& page = it->second;
               res.status = page.status;
               if (!page.location.empty()) res.set_header("Location", page.location);
               res.set_content(page.body, page.content_type);
             });
}

MockServer::MockServer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

std::unique_ptr<MockServer> MockServer::start(MockServerOptions options) {
  auto impl = std::make_unique<Impl>();
  impl->options = std::move(options);
  impl->llm_mode = impl->options.llm_mode;
  impl->script.assign(impl->options.llm_script.begin(), impl->options.llm_script.end());
  impl->install_routes();
  http::exclusive_bind(impl->server);

  const auto& host = impl->options.host;
  if (impl->options.port == 0) {
    impl->port = impl->server.bind_to_any_port(host);
    if (impl->port <= 0) fail(ErrorCode::PortInUse, "cannot bind any port on " + host);
  } else {
    if (!impl->server.bind_to_port(host, impl->options.port)) {
      fail(ErrorCode::PortInUse, "port " + std::to_string(impl->options.port) + " is in use");
    }
    impl->port = impl->options.port;
  }
  impl->thread = std::thread([server = &impl->server] { server->listen_after_bind(); });
  impl->server.wait_until_ready();
  return std::unique_ptr<MockServer>(new MockServer(std::move(impl)));
}

MockServer::~MockServer() { stop(); }

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int MockServer::port() const noexcept { return impl_->port; }

std::string MockServer::base_url() const {
  return "http://" + impl_->options.host + ":" + std::to_string(impl_->port);
}
std::string MockServer::llm_url() const { return base_url() + impl_->options.llm_prefix; }
std::string MockServer::embed_url() const {
  return base_url() + impl_->options.embed_prefix + "/v1/embeddings";
}
std::string MockServer::search_url() const { return base_url() + impl_->options.search_prefix; }
std::string MockServer::image_generate_url() const {
  return base_url() + impl_->options.media_prefix + "/image/generate";
}
std::string MockServer::image_understand_url() const {
  return base_url() + impl_->options.media_prefix + "/image/understand";
}
std::string MockServer::asr_url() const { return base_url() + impl_->options.media_prefix + "/asr"; }
std::string MockServer::page_url(const std::string& path) const {
  return base_url() + impl_->options.pages_prefix + path;
}

void MockServer::set_llm_mode(LlmMockMode mode) {
  std::lock_guard lock(impl_->mu);
  impl_->llm_mode = mode;
}

void MockServer::push_llm_script(const std::vector<std::string>& replies) {
  std::lock_guard lock(impl_->mu);
  impl_->script.insert(impl_->script.end(), replies.begin(), replies.end());
}

void MockServer::fail_llm_next(std::size_t count, int status) {
  std::lock_guard lock(impl_->mu);
  impl_->llm_failures = count;
  impl_->llm_failure_status = status;
}

void MockServer::set_llm_delay_ms(int ms) {
  std::lock_guard lock(impl_->mu);
  impl_->llm_delay_ms = ms;
}

std::vector<std::string> MockServer::llm_requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->llm_log;
}

std::size_t MockServer::llm_request_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->llm_log.size();
}

std::vector<std::string> MockServer::embed_requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->embed_log;
}

void MockServer::set_search_results(std::vector<SearchResult> results,
                                    std::optional<std::string> instant_answer) {
  std::lock_guard lock(impl_->mu);
  impl_->search_results = std::move(results);
  impl_->instant_answer = std::move(instant_answer);
}

void MockServer::fail_embed(int status) {
  std::lock_guard lock(impl_->mu);
  impl_->embed_failure = status;
}

void MockServer::fail_search(int status) {
  std::lock_guard lock(impl_->mu);
  impl_->search_failure = status;
}

std::vector<std::string> MockServer::search_requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->search_log;
}

void MockServer::fail_media(int status) {
  std::lock_guard lock(impl_->mu);
  impl_->media_failure = status;
}

void MockServer::set_media_delay_ms(int ms) {
  std::lock_guard lock(impl_->mu);
  impl_->media_delay_ms = ms;
}

std::vector<LoggedRequest> MockServer::media_requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->media_log;
}

void MockServer::set_page(const std::string& path, MockPage page) {
  std::lock_guard lock(impl_->mu);
  impl_->pages[path] = std::move(page);
}

void MockServer::clear_logs() {
  std::lock_guard lock(impl_->mu);
  impl_->llm_log.clear();
  impl_->embed_log.clear();
  impl_->search_log.clear();
  impl_->media_log.clear();
}

std::unique_ptr<MockServer> serve_mock_llm(int port, LlmMockMode mode,
                                           std::vector<std::string> script) {
  MockServerOptions options;
  options.port = port;
  options.llm_mode = mode;
  options.llm_script = std::move(script);
  return MockServer::start(std::move(options));
}

std::unique_ptr<MockServer> serve_mock_media(int port) {
  MockServerOptions options;
  options.port = port;
  return MockServer::start(std::move(options));
}

}  // namespace ragkit
