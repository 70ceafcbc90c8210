// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/llm_gateway.hpp"

#include <chrono>
#include <thread>

#include "http_util.hpp"
#include "json.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

using nlohmann::json;

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  return std::nullopt;
}

void GenParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    fail(ErrorCode::InvalidArgument, "temperature must lie in [0, 2]");
  }
  if (max_tokens < 1) fail(ErrorCode::InvalidArgument, "max_tokens must be positive");
}

void LlmEndpointConfig::validate() const {
  if (url.empty()) fail(ErrorCode::InvalidArgument, "LLM endpoint is not configured");
  if (!http::parse_url(url)) fail(ErrorCode::InvalidArgument, "LLM endpoint is not an absolute URL");
  if (retries < 0 || retries > 5) fail(ErrorCode::InvalidArgument, "retries must lie in [0, 5]");
}

std::size_t estimate_tokens(std::string_view text) noexcept {
  return (codepoint_count(text) + 3) / 4;
}

std::string render_context(std::span<const ContextSnippet> snippets) {
  std::string out(kContextHeader);
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    out += "\n[" + std::to_string(i + 1) + "] (" + snippets[i].source_uri + ") " +
           snippets[i].text;
  }
  return out;
}

PromptBundle assemble_prompt(std::string_view system, std::span<const ContextSnippet> snippets,
                             std::span<const ChatMessage> history, std::string_view user,
                             std::size_t budget_tokens) {
  if (user.empty()) fail(ErrorCode::EmptyInput, "user message is empty");
  const auto fixed = estimate_tokens(system) + estimate_tokens(user);
  if (budget_tokens < fixed) {
    fail(ErrorCode::BudgetTooSmall, "budget " + std::to_string(budget_tokens) +
                                        " < system+user " + std::to_string(fixed));
  }

  // Units of history that are dropped together: a user message with the
  // assistant reply that follows it, or a lone message.
  std::vector<std::size_t> unit_starts;
  for (std::size_t i = 0; i < history.size();) {
    unit_starts.push_back(i);
    const bool pair = history[i].role == Role::User && i + 1 < history.size() &&
                      history[i + 1].role == Role::Assistant;
    i += pair ? 2 : 1;
  }

  std::size_t first_unit = 0;
  std::size_t snippet_count = snippets.size();
  const auto history_from = [&](std::size_t unit) {
    return unit < unit_starts.size() ? unit_starts[unit] : history.size();
  };
  std::vector<std::size_t> history_cost(history.size() + 1, 0);  // suffix sums
  for (std::size_t i = history.size(); i-- > 0;) {
    history_cost[i] = history_cost[i + 1] + estimate_tokens(history[i].content);
  }
  const auto context_cost = [&](std::size_t n) -> std::size_t {
    return n == 0 ? 0 : estimate_tokens(render_context(snippets.first(n)));
  };

  auto total = fixed + history_cost[history_from(first_unit)] + context_cost(snippet_count);
  while (total > budget_tokens && first_unit < unit_starts.size()) {
    ++first_unit;
    total = fixed + history_cost[history_from(first_unit)] + context_cost(snippet_count);
  }
  while (total > budget_tokens && snippet_count > 0) {
    --snippet_count;
    total = fixed + context_cost(snippet_count);
  }

  PromptBundle bundle;
  if (!system.empty()) bundle.messages.push_back({Role::System, std::string(system)});
  if (snippet_count > 0) {
    bundle.messages.push_back({Role::System, render_context(snippets.first(snippet_count))});
  }
  const auto start = history_from(first_unit);
  for (std::size_t i = start; i < history.size(); ++i) bundle.messages.push_back(history[i]);
  bundle.messages.push_back({Role::User, std::string(user)});

  for (const auto& m : bundle.messages) bundle.estimated_tokens += estimate_tokens(m.content);
  bundle.included_snippets = snippet_count;
  bundle.included_history_turns = history.size() - start;
  return bundle;
}

std::string chat_request_body(const LlmEndpointConfig& config,
                              const std::vector<ChatMessage>& messages, const GenParams& params) {
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return json{{"model", config.model},
              {"messages", std::move(msgs)},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens},
              {"stream", params.stream}}
      .dump();
}

namespace {

std::string parse_completion(const std::string& body) {
  try {
    const auto doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("malformed completion: ") + e.what());
  }
}

// Incremental server-sent-events decoder for chat-completion streams.
class SseDecoder {
 public:
  explicit SseDecoder(const DeltaCallback& on_delta) : on_delta_(on_delta) {}

  void feed(std::string_view data) {
    buffer_.append(data);
    std::size_t nl;
    while ((nl = buffer_.find('\n')) != std::string::npos) {
      auto line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      handle_line(line);
    }
  }

  void finish() {
    if (!buffer_.empty()) {
      handle_line(buffer_);
      buffer_.clear();
    }
  }

  bool done() const noexcept { return done_; }
  bool saw_events() const noexcept { return saw_events_; }
  const std::string& text() const noexcept { return text_; }
  std::string& raw() noexcept { return raw_; }

 private:
  void handle_line(const std::string& line) {
    raw_ += line;
    raw_ += '\n';
    if (!line.starts_with("data:")) return;
    saw_events_ = true;
    const auto payload = trim(std::string_view(line).substr(5));
    if (payload == "[DONE]") {
      done_ = true;
      return;
    }
    if (done_) return;
    try {
      const auto doc = json::parse(payload);
      const auto& delta = doc.at("choices").at(0).at("delta");
      if (delta.contains("content") && delta["content"].is_string()) {
        const auto piece = delta["content"].get<std::string>();
        if (!piece.empty()) {
          text_ += piece;
          if (on_delta_) on_delta_(piece);
        }
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::ProtocolError, std::string("malformed stream event: ") + e.what());
    }
  }

  const DeltaCallback& on_delta_;
  std::string buffer_;
  std::string text_;
  std::string raw_;
  bool done_ = false;
  bool saw_events_ = false;
};

}  // namespace

std::string chat_complete(const LlmEndpointConfig& config, const PromptBundle& bundle,
                          const GenParams& params, const DeltaCallback& on_delta) {
  config.validate();
  params.validate();

  http::Request req;
  req.method = "POST";
  req.url = http::join(config.url, "/v1/chat/completions");
  req.body = chat_request_body(config, bundle.messages, params);
  req.content_type = "application/json";
  req.timeout_ms = config.timeout_ms;
  http::add_bearer_from_env(req.headers, config.api_key_env);
  if (params.stream) req.headers.emplace("Accept", "text/event-stream");

  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long long>(config.backoff_base_ms) << (attempt - 1)));
    }
    SseDecoder decoder(on_delta);
    std::string error_body;
    int status = 0;
    auto attempt_req = req;
    attempt_req.on_headers = [&](const http::Response& r) {
      status = r.status;
      return true;
    };
    attempt_req.on_body = [&](std::string_view chunk) {
      if (status < 200 || status >= 300 || !params.stream) {
        error_body.append(chunk);
      } else {
        decoder.feed(chunk);
      }
      return true;
    };
    const auto res = http::send(attempt_req);
    if (!res.ok()) {
      if (res.transport == http::Transport::Timeout) {
        fail(ErrorCode::Timeout, req.url + ": " + res.transport_message);
      }
      fail(ErrorCode::ProviderUnreachable, req.url + ": " + res.transport_message);
    }
    if (res.status >= 500) {
      last_status = res.status;
      last_body = error_body;
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      fail(ErrorCode::ProviderError,
           "chat endpoint returned " + std::to_string(res.status) + ": " + error_body, res.status);
    }
    if (!params.stream) return parse_completion(error_body);

    decoder.finish();
    if (!decoder.saw_events()) {
      // Some servers ignore stream=true and answer with a plain completion.
      auto text = parse_completion(decoder.raw());
      if (on_delta && !text.empty()) on_delta(text);
      return text;
    }
    if (!decoder.done()) fail(ErrorCode::ProtocolError, "stream ended without [DONE]");
    return decoder.text();
  }
  fail(ErrorCode::ProviderError,
       "chat endpoint returned " + std::to_string(last_status) + " after " +
           std::to_string(config.retries + 1) + " attempts: " + last_body,
       last_status);
}

LlmClient::LlmClient(LlmEndpointConfig config) : config_(std::move(config)) {}

std::string LlmClient::complete(const std::vector<ChatMessage>& messages, const GenParams& params,
                                const DeltaCallback& on_delta) {
  PromptBundle bundle;
  bundle.messages = messages;
  return chat_complete(config_, bundle, params, on_delta);
}

}  // namespace ragkit
