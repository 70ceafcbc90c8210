// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragkit/llm_gateway.hpp"

namespace ragkit {

enum class SearchCategory { Text, News, Images, Videos, Maps, Instant };

std::string_view to_string(SearchCategory category) noexcept;
std::optional<SearchCategory> parse_search_category(std::string_view text) noexcept;

struct SearchResult {
  std::string title;
  std::string url;
  std::string snippet;
  SearchCategory category = SearchCategory::Text;
};

struct SearchResponse {
  std::vector<SearchResult> results;
  std::optional<std::string> instant_answer;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// Raw provider answer; web_search applies truncation and the instant
  /// answer rule on top.
  virtual SearchResponse search(const std::string& query, SearchCategory category,
                                std::size_t max_results) = 0;
};

/// Speaks `GET {endpoint}/search?q=&category=&max=` ->
/// `{"results":[{"title","url","snippet"}],"instant_answer":str|null}`.
class HttpSearchProvider final : public SearchProvider {
 public:
  explicit HttpSearchProvider(std::string endpoint, int timeout_ms = 10000);
  SearchResponse search(const std::string& query, SearchCategory category,
                        std::size_t max_results) override;

 private:
  std::string endpoint_;
  int timeout_ms_;
};

/// Adapter for the DuckDuckGo instant-answer API
/// (`GET https://api.duckduckgo.com/?q=..&format=json`).
class DuckDuckGoProvider final : public SearchProvider {
 public:
  explicit DuckDuckGoProvider(std::string endpoint = "https://api.duckduckgo.com",
                              int timeout_ms = 10000);
  SearchResponse search(const std::string& query, SearchCategory category,
                        std::size_t max_results) override;

 private:
  std::string endpoint_;
  int timeout_ms_;
};

/// Maps a DuckDuckGo instant-answer document onto SearchResponse: related
/// topics (flattened) become results, Answer or AbstractText the instant
/// answer.
SearchResponse parse_duckduckgo(std::string_view body, SearchCategory category);

/// In-process scripted provider for tests.
class ScriptedSearchProvider final : public SearchProvider {
 public:
  explicit ScriptedSearchProvider(SearchResponse scripted = {});
  SearchResponse search(const std::string& query, SearchCategory category,
                        std::size_t max_results) override;

  void fail_with(int status) { fail_status_ = status; }
  std::size_t calls() const noexcept { return calls_; }

 private:
  SearchResponse scripted_;
  std::optional<int> fail_status_;
  std::size_t calls_ = 0;
};

/// At most max_results results in provider order. For Instant the result
/// list is the instant answer alone (or empty). Results without an
/// absolute http(s) URL are dropped.
std::vector<SearchResult> web_search(SearchProvider& provider, const std::string& query,
                                     SearchCategory category, std::size_t max_results);

struct PageContent {
  std::string url;
  std::string title;
  std::string text;
  std::string content_type;
  std::chrono::system_clock::time_point fetched_at;
};

struct FetchOptions {
  int timeout_ms = 10000;
  int max_redirects = 5;
  std::size_t max_bytes = 2u << 20;
};

/// GET with manual redirect following. Throws FetchError (status, timeout
/// or too_many_redirects), BodyTooLarge, NotHtmlText.
PageContent fetch_page(const std::string& url, const FetchOptions& options = {});

struct SummarizeParams {
  std::size_t section_size_chars = 6000;
  std::size_t max_sections = 20;
  std::string per_section_prompt =
      "Summarize the following section of a longer document. Keep key facts, names and "
      "numbers.\n\n{text}";
  std::string final_prompt =
      "The following are summaries of consecutive sections of one document. Combine them "
      "into a single coherent summary.\n\n{summaries}";

  /// Slots must appear exactly once. Throws InvalidArgument.
  void validate() const;
};

struct Summary {
  std::string text;
  std::size_t n_sections = 0;
  std::size_t n_llm_calls = 0;
};

/// Map step input: split_text with overlap 0 and default separators, the
/// tail beyond max_sections folded into the last section.
std::vector<std::string> summary_sections(std::string_view text, const SummarizeParams& params);

/// Replaces the single `{slot}` in `tmpl`.
std::string fill_template(std::string_view tmpl, std::string_view slot, std::string_view value);

/// Sequential map-reduce: one call per section, then one call over the
/// newline-joined section summaries (skipped for a single section).
Summary summarize_long_text(std::string_view text, const SummarizeParams& params,
                            ChatModel& llm, const GenParams& gen);

Summary summarize_url(const std::string& url, const SummarizeParams& params, ChatModel& llm,
                      const GenParams& gen, const FetchOptions& fetch = {});

}  // namespace ragkit
