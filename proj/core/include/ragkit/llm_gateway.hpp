// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragkit/retrieval.hpp"

namespace ragkit {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct GenParams {
  double temperature = 0.7;
  int max_tokens = 1024;
  bool stream = false;

  void validate() const;
};

struct PromptBundle {
  std::vector<ChatMessage> messages;
  std::size_t estimated_tokens = 0;
  std::size_t included_snippets = 0;
  std::size_t included_history_turns = 0;
};

struct LlmEndpointConfig {
  std::string url;  // base URL; requests go to {url}/v1/chat/completions
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "LLM_API_KEY";
  int timeout_ms = 60000;
  int retries = 2;
  int backoff_base_ms = 250;

  void validate() const;
};

inline constexpr std::string_view kContextHeader =
    "Use the following context to answer. Cite sources as [n].";

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text) noexcept;

/// Header line followed by one `[n] (<source_uri>) <text>` block per
/// snippet, numbered from 1 in the given order.
std::string render_context(std::span<const ContextSnippet> snippets);

/// Builds [system] [context] history... user. When the estimate exceeds
/// `budget_tokens`, whole user/assistant pairs are dropped oldest first,
/// then snippets lowest-ranked first. Throws BudgetTooSmall when system
/// plus user alone do not fit, EmptyInput for an empty user message.
PromptBundle assemble_prompt(std::string_view system, std::span<const ContextSnippet> snippets,
                             std::span<const ChatMessage> history, std::string_view user,
                             std::size_t budget_tokens);

using DeltaCallback = std::function<void(std::string_view)>;

/// Anything that turns a message list into a completion.
class ChatModel {
 public:
  virtual ~ChatModel() = default;
  /// With params.stream, `on_delta` receives each content delta in order;
  /// the return value is always the full text.
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const GenParams& params, const DeltaCallback& on_delta = {}) = 0;
};

/// Chat-completions request body as sent on the wire.
std::string chat_request_body(const LlmEndpointConfig& config,
                              const std::vector<ChatMessage>& messages, const GenParams& params);

/// One chat completion with retry on 5xx (exponential backoff from
/// backoff_base_ms, factor 2). Throws Timeout, ProviderUnreachable,
/// ProtocolError, or ProviderError carrying the last HTTP status.
std::string chat_complete(const LlmEndpointConfig& config, const PromptBundle& bundle,
                          const GenParams& params, const DeltaCallback& on_delta = {});

class LlmClient final : public ChatModel {
 public:
  explicit LlmClient(LlmEndpointConfig config);

  std::string complete(const std::vector<ChatMessage>& messages, const GenParams& params,
                       const DeltaCallback& on_delta = {}) override;

  const LlmEndpointConfig& config() const noexcept { return config_; }

 private:
  LlmEndpointConfig config_;
};

}  // namespace ragkit
