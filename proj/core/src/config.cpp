// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "http_util.hpp"
#include "json.hpp"
#include "ragkit/error.hpp"

namespace ragkit {

using nlohmann::json;

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::InvalidArgument, key + ": cannot parse '" + value + "'");
  }
  return out;
}

void check_url(const std::string& key, const std::string& value) {
  if (!value.empty() && !http::parse_url(value)) {
    fail(ErrorCode::InvalidArgument, key + " must be an absolute http(s) URL");
  }
}

}  // namespace

const std::vector<std::string>& ServiceConfig::keys() {
  static const std::vector<std::string> k = {
      "LLM_ENDPOINT",       "LLM_MODEL",          "EMBED_ENDPOINT",
      "EMBED_MODEL",        "SEARCH_ENDPOINT",    "IMAGE_GEN_ENDPOINT",
      "IMAGE_UNDERSTAND_ENDPOINT", "ASR_ENDPOINT", "PREINDEXED_DIR",
      "PREINDEXED_COLLECTION", "DATA_DIR",        "PUBLIC_BASE_URL",
      "WEBUI_DIR",          "RAG_MODE",           "RAG_K",
      "RAG_FETCH_K",        "RAG_LAMBDA",         "RAG_MIN_SCORE",
      "CONTEXT_BUDGET_TOKENS", "UPLOAD_LIMIT_BYTES", "CHUNK_SIZE",
      "CHUNK_OVERLAP",      "MAX_PAGES",          "SYSTEM_PROMPT",
      "LLM_TEMPERATURE",    "LLM_MAX_TOKENS",     "LLM_STREAM",
      "LLM_RETRIES",        "LLM_TIMEOUT_MS",     "SECTION_SIZE_CHARS",
      "MAX_SECTIONS"};
  return k;
}

bool ServiceConfig::apply(const std::string& key, const std::string& value) {
  if (key == "LLM_ENDPOINT") {
    llm_endpoint = value;
  } else if (key == "LLM_MODEL") {
    llm_model = value;
  } else if (key == "EMBED_ENDPOINT") {
    embed_endpoint = value;
  } else if (key == "EMBED_MODEL") {
    embed_model = value;
  } else if (key == "SEARCH_ENDPOINT") {
    search_endpoint = value;
  } else if (key == "IMAGE_GEN_ENDPOINT") {
    image_gen_endpoint = value;
  } else if (key == "IMAGE_UNDERSTAND_ENDPOINT") {
    image_understand_endpoint = value;
  } else if (key == "ASR_ENDPOINT") {
    asr_endpoint = value;
  } else if (key == "PREINDEXED_DIR") {
    preindexed_dir = value;
  } else if (key == "PREINDEXED_COLLECTION") {
    preindexed_collection = value;
  } else if (key == "DATA_DIR") {
    data_dir = value;
  } else if (key == "PUBLIC_BASE_URL") {
    public_base_url = value;
  } else if (key == "WEBUI_DIR") {
    webui_dir = value;
  } else if (key == "RAG_MODE") {
    if (value == "topk") {
      retrieval.mode = RetrievalMode::TopK;
    } else if (value == "mmr") {
      retrieval.mode = RetrievalMode::Mmr;
    } else {
      fail(ErrorCode::InvalidArgument, "RAG_MODE must be topk or mmr");
    }
  } else if (key == "RAG_K") {
    retrieval.k = parse_number<std::size_t>(key, value);
  } else if (key == "RAG_FETCH_K") {
    retrieval.fetch_k = parse_number<std::size_t>(key, value);
  } else if (key == "RAG_LAMBDA") {
    retrieval.lambda = parse_number<double>(key, value);
  } else if (key == "RAG_MIN_SCORE") {
    retrieval.min_score = parse_number<double>(key, value);
  } else if (key == "CONTEXT_BUDGET_TOKENS") {
    context_budget_tokens = parse_number<std::size_t>(key, value);
  } else if (key == "UPLOAD_LIMIT_BYTES") {
    upload_limit_bytes = parse_number<std::size_t>(key, value);
  } else if (key == "CHUNK_SIZE") {
    chunking.chunk_size = parse_number<std::size_t>(key, value);
  } else if (key == "CHUNK_OVERLAP") {
    chunking.overlap = parse_number<std::size_t>(key, value);
  } else if (key == "MAX_PAGES") {
    max_pages = parse_number<std::size_t>(key, value);
  } else if (key == "SYSTEM_PROMPT") {
    system_prompt = value;
  } else if (key == "LLM_TEMPERATURE") {
    gen.temperature = parse_number<double>(key, value);
  } else if (key == "LLM_MAX_TOKENS") {
    gen.max_tokens = parse_number<int>(key, value);
  } else if (key == "LLM_STREAM") {
    gen.stream = value == "1" || value == "true" || value == "on";
  } else if (key == "LLM_RETRIES") {
    llm_retries = parse_number<int>(key, value);
  } else if (key == "LLM_TIMEOUT_MS") {
    llm_timeout_ms = parse_number<int>(key, value);
  } else if (key == "SECTION_SIZE_CHARS") {
    summarize.section_size_chars = parse_number<std::size_t>(key, value);
  } else if (key == "MAX_SECTIONS") {
    summarize.max_sections = parse_number<std::size_t>(key, value);
  } else {
    return false;
  }
  return true;
}

void ServiceConfig::validate() const {
  check_url("LLM_ENDPOINT", llm_endpoint);
  check_url("EMBED_ENDPOINT", embed_endpoint);
  if (search_endpoint != "duckduckgo") check_url("SEARCH_ENDPOINT", search_endpoint);
  check_url("IMAGE_GEN_ENDPOINT", image_gen_endpoint);
  check_url("IMAGE_UNDERSTAND_ENDPOINT", image_understand_endpoint);
  check_url("ASR_ENDPOINT", asr_endpoint);
  check_url("PUBLIC_BASE_URL", public_base_url);
  if (context_budget_tokens == 0) {
    fail(ErrorCode::InvalidArgument, "CONTEXT_BUDGET_TOKENS must be positive");
  }
  if (llm_retries < 0 || llm_retries > 5) {
    fail(ErrorCode::InvalidArgument, "LLM_RETRIES must lie in [0, 5]");
  }
  retrieval.validate();
  chunking.validate();
  gen.validate();
  summarize.validate();
}

LlmEndpointConfig ServiceConfig::llm_config() const {
  LlmEndpointConfig c;
  c.url = llm_endpoint;
  c.model = llm_model;
  c.retries = llm_retries;
  c.timeout_ms = llm_timeout_ms;
  return c;
}

EmbeddingProviderConfig ServiceConfig::embedding_config() const {
  EmbeddingProviderConfig c;
  c.endpoint_url = embed_endpoint;
  c.model_name = embed_model;
  return c;
}

MediaEndpointConfig ServiceConfig::media_config(const std::string& url) const {
  return MediaEndpointConfig{url};
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str()); v != nullptr) return std::string(v);
  return std::nullopt;
}

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env) {
  ServiceConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) fail(ErrorCode::Io, "cannot open config file " + file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      fail(ErrorCode::InvalidArgument, "config file: " + std::string(e.what()));
    }
    if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "config file must hold an object");
    for (const auto& [key, value] : doc.items()) {
      const auto text = value.is_string() ? value.get<std::string>() : value.dump();
      if (!config.apply(key, text)) {
        fail(ErrorCode::InvalidArgument, "config file: unknown key " + key);
      }
    }
  }
  for (const auto& key : keys()) {
    if (auto value = env(key)) config.apply(key, *value);
  }
  config.validate();
  return config;
}

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file) {
  return load(file, process_env);
}

}  // namespace ragkit
