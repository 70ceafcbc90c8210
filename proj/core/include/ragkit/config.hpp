// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ragkit/corpus_ingest.hpp"
#include "ragkit/embedding.hpp"
#include "ragkit/llm_gateway.hpp"
#include "ragkit/media_clients.hpp"
#include "ragkit/retrieval.hpp"
#include "ragkit/web_tools.hpp"

namespace ragkit {

struct ServiceConfig {
  // Downstream endpoints. Empty means "not configured"; an empty embedding
  // endpoint selects the local hash embedder and an empty search endpoint
  // the DuckDuckGo adapter.
  std::string llm_endpoint;
  std::string llm_model = "gpt-4o-mini";
  std::string embed_endpoint;
  std::string embed_model = "text-embedding-3-small";
  std::string search_endpoint;
  std::string image_gen_endpoint;
  std::string image_understand_endpoint;
  std::string asr_endpoint;

  RetrievalParams retrieval;
  ChunkingParams chunking;
  GenParams gen{0.7, 1024, true};
  SummarizeParams summarize;
  std::size_t max_pages = 3;
  int llm_retries = 2;
  int llm_timeout_ms = 60000;

  std::string system_prompt =
      "You are a helpful teaching assistant for engineering students. Answer accurately, "
      "ground your answers in the provided context when there is any, and say so when you "
      "do not know.";
  std::size_t context_budget_tokens = 3000;
  std::size_t upload_limit_bytes = 20u << 20;

  std::filesystem::path preindexed_dir = "preindexed";
  std::string preindexed_collection = "default";
  std::filesystem::path data_dir;  // empty: histories stay in memory only
  std::string public_base_url;     // resolves "/api/images/..." refs for vision calls
  std::filesystem::path webui_dir; // static files served at / when set

  /// Throws InvalidArgument for relative URLs, a zero budget, or invalid
  /// retrieval/chunking parameters.
  void validate() const;

  /// Sets one setting by its environment-variable name. Returns false for
  /// unknown keys; throws InvalidArgument for unparsable values.
  bool apply(const std::string& key, const std::string& value);

  LlmEndpointConfig llm_config() const;
  EmbeddingProviderConfig embedding_config() const;
  MediaEndpointConfig media_config(const std::string& url) const;

  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  /// Defaults, then the JSON config file (if any), then the environment.
  static ServiceConfig load(const std::optional<std::filesystem::path>& file,
                            const EnvLookup& env);
  static ServiceConfig load(const std::optional<std::filesystem::path>& file = std::nullopt);

  static const std::vector<std::string>& keys();
};

std::optional<std::string> process_env(const std::string& name);

}  // namespace ragkit
