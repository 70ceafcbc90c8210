// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/web_tools.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "http_util.hpp"
#include "json.hpp"
#include "ragkit/corpus_ingest.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

using nlohmann::json;

std::string_view to_string(SearchCategory category) noexcept {
  switch (category) {
    case SearchCategory::Text: return "text";
    case SearchCategory::News: return "news";
    case SearchCategory::Images: return "images";
    case SearchCategory::Videos: return "videos";
    case SearchCategory::Maps: return "maps";
    case SearchCategory::Instant: return "instant";
  }
  return "text";
}

std::optional<SearchCategory> parse_search_category(std::string_view text) noexcept {
  for (auto c : {SearchCategory::Text, SearchCategory::News, SearchCategory::Images,
                 SearchCategory::Videos, SearchCategory::Maps, SearchCategory::Instant}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

namespace {

http::Response get_or_throw(const std::string& url, int timeout_ms) {
  http::Request req;
  req.url = url;
  req.timeout_ms = timeout_ms;
  auto res = http::send(req);
  if (!res.ok()) fail(ErrorCode::ProviderUnreachable, url + ": " + res.transport_message);
  if (res.status < 200 || res.status >= 300) {
    fail(ErrorCode::ProviderError, "search provider returned " + std::to_string(res.status),
         res.status);
  }
  return res;
}

}  // namespace

HttpSearchProvider::HttpSearchProvider(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

SearchResponse HttpSearchProvider::search(const std::string& query, SearchCategory category,
                                          std::size_t max_results) {
  const auto url = http::join(endpoint_, "/search") + "?q=" + http::url_encode(query) +
                   "&category=" + std::string(to_string(category)) +
                   "&max=" + std::to_string(max_results);
  const auto res = get_or_throw(url, timeout_ms_);
  SearchResponse out;
  try {
    const auto doc = json::parse(res.body);
    for (const auto& item : doc.at("results")) {
      out.results.push_back({item.value("title", ""), item.value("url", ""),
                             item.value("snippet", ""), category});
    }
    if (doc.contains("instant_answer") && doc["instant_answer"].is_string()) {
      out.instant_answer = doc["instant_answer"].get<std::string>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("malformed search response: ") + e.what());
  }
  return out;
}

DuckDuckGoProvider::DuckDuckGoProvider(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

SearchResponse DuckDuckGoProvider::search(const std::string& query, SearchCategory category,
                                          std::size_t) {
  const auto url = http::join(endpoint_, "/") + "?q=" + http::url_encode(query) +
                   "&format=json&no_html=1&skip_disambig=1";
  return parse_duckduckgo(get_or_throw(url, timeout_ms_).body, category);
}

SearchResponse parse_duckduckgo(std::string_view body, SearchCategory category) {
  SearchResponse out;
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("malformed DuckDuckGo response: ") + e.what());
  }
  const auto str = [](const json& j, const char* key) {
    return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string();
  };
  const auto heading = str(doc, "Heading");
  const auto abstract_text = str(doc, "AbstractText");
  const auto abstract_url = str(doc, "AbstractURL");
  if (auto answer = str(doc, "Answer"); !answer.empty()) {
    out.instant_answer = std::move(answer);
  } else if (!abstract_text.empty()) {
    out.instant_answer = abstract_text;
  }
  if (!abstract_url.empty()) {
    out.results.push_back({heading, abstract_url, abstract_text, category});
  }
  const std::function<void(const json&)> walk = [&](const json& topics) {
    if (!topics.is_array()) return;
    for (const auto& t : topics) {
      if (t.contains("Topics")) {
        walk(t["Topics"]);
        continue;
      }
      const auto text = str(t, "Text");
      const auto url = str(t, "FirstURL");
      if (url.empty()) continue;
      const auto dash = text.find(" - ");
      out.results.push_back(
          {dash == std::string::npos ? text : text.substr(0, dash), url, text, category});
    }
  };
  if (doc.contains("Results")) walk(doc["Results"]);
  if (doc.contains("RelatedTopics")) walk(doc["RelatedTopics"]);
  return out;
}

ScriptedSearchProvider::ScriptedSearchProvider(SearchResponse scripted)
    : scripted_(std::move(scripted)) {}

SearchResponse ScriptedSearchProvider::search(const std::string&, SearchCategory category,
                                              std::size_t) {
  ++calls_;
  if (fail_status_) {
    fail(ErrorCode::ProviderError,
         "search provider returned " + std::to_string(*fail_status_), *fail_status_);
  }
  auto out = scripted_;
  for (auto& r : out.results) r.category = category;
  return out;
}

std::vector<SearchResult> web_search(SearchProvider& provider, const std::string& query,
                                     SearchCategory category, std::size_t max_results) {
  if (max_results == 0) return {};
  auto response = provider.search(query, category, max_results);
  std::vector<SearchResult> out;
  if (category == SearchCategory::Instant) {
    if (response.instant_answer && !response.instant_answer->empty()) {
      std::string url = "https://duckduckgo.com/?q=" + http::url_encode(query);
      std::string title = query;
      if (!response.results.empty() && http::parse_url(response.results.front().url)) {
        url = response.results.front().url;
        title = response.results.front().title;
      }
      out.push_back({title, url, *response.instant_answer, SearchCategory::Instant});
    }
    return out;
  }
  for (auto& r : response.results) {
    if (out.size() == max_results) break;
    if (!http::parse_url(r.url)) continue;
    r.category = category;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fetch
// ---------------------------------------------------------------------------

namespace {

std::string extract_pdf(const std::string& body) {
  static std::atomic<unsigned> counter{0};
  const auto path = std::filesystem::temp_directory_path() /
                    ("ragkit-fetch-" + std::to_string(::getpid()) + "-" +
                     std::to_string(counter++) + ".pdf");
  {
    std::ofstream out(path, std::ios::binary);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  try {
    auto doc = load_file(path);
    std::filesystem::remove(path);
    return doc.text;
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw;
  }
}

}  // namespace

PageContent fetch_page(const std::string& url, const FetchOptions& options) {
  std::string current = url;
  for (int hop = 0;; ++hop) {
    const auto parsed = http::parse_url(current);
    if (!parsed) fail(ErrorCode::FetchError, "not an http(s) URL: " + current);

    bool too_large = false;
    std::string body;
    http::Request req;
    req.url = current;
    req.timeout_ms = options.timeout_ms;
    req.headers.emplace("Accept", "text/html,text/plain;q=0.9,*/*;q=0.5");
    req.on_headers = [&](const http::Response& r) {
      const auto length = r.header("Content-Length");
      if (r.status >= 200 && r.status < 300 && !length.empty() &&
          std::strtoull(length.c_str(), nullptr, 10) > options.max_bytes) {
        too_large = true;
        return false;
      }
      return true;
    };
    req.on_body = [&](std::string_view chunk) {
      if (body.size() + chunk.size() > options.max_bytes) {
        too_large = true;
        return false;
      }
      body.append(chunk);
      return true;
    };
    const auto res = http::send(req);
    if (too_large) {
      fail(ErrorCode::BodyTooLarge,
           current + " exceeds " + std::to_string(options.max_bytes) + " bytes");
    }
    if (!res.ok()) {
      if (res.transport == http::Transport::Timeout) {
        fail(ErrorCode::FetchError, current + ": timeout");
      }
      fail(ErrorCode::FetchError, current + ": " + res.transport_message);
    }
    if (res.status >= 300 && res.status < 400) {
      const auto location = res.header("Location");
      if (location.empty()) {
        fail(ErrorCode::FetchError, current + ": redirect without Location", res.status);
      }
      if (hop >= options.max_redirects) {
        fail(ErrorCode::FetchError, current + ": too_many_redirects", res.status);
      }
      current = http::resolve_location(*parsed, location);
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      fail(ErrorCode::FetchError, current + ": HTTP " + std::to_string(res.status), res.status);
    }

    PageContent page;
    page.url = current;
    page.fetched_at = std::chrono::system_clock::now();
    page.content_type = to_lower_ascii(res.header("Content-Type"));
    const auto& type = page.content_type;
    if (type.empty() || type.starts_with("text/") || type.find("html") != std::string::npos ||
        type.find("xml") != std::string::npos) {
      page.title = extract_title(body);
      page.text = strip_html(body);
    } else if (type.starts_with("application/pdf")) {
      const char* command = std::getenv("EXTRACT_CMD");
      if (!command || !*command) {
        fail(ErrorCode::NotHtmlText, current + ": PDF requires EXTRACT_CMD");
      }
      page.text = strip_html(extract_pdf(body));
    } else {
      fail(ErrorCode::NotHtmlText, current + ": content type " + type);
    }
    return page;
  }
}

// ---------------------------------------------------------------------------
// Summarize
// ---------------------------------------------------------------------------

namespace {

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

void SummarizeParams::validate() const {
  if (section_size_chars < 1) fail(ErrorCode::InvalidArgument, "section_size_chars must be >= 1");
  if (max_sections < 1) fail(ErrorCode::InvalidArgument, "max_sections must be >= 1");
  if (count_occurrences(per_section_prompt, "{text}") != 1) {
    fail(ErrorCode::InvalidArgument, "per_section_prompt needs exactly one {text}");
  }
  if (count_occurrences(final_prompt, "{summaries}") != 1) {
    fail(ErrorCode::InvalidArgument, "final_prompt needs exactly one {summaries}");
  }
}

std::string fill_template(std::string_view tmpl, std::string_view slot, std::string_view value) {
  const auto marker = "{" + std::string(slot) + "}";
  const auto pos = tmpl.find(marker);
  if (pos == std::string_view::npos) return std::string(tmpl);
  std::string out;
  out.reserve(tmpl.size() + value.size());
  out.append(tmpl.substr(0, pos));
  out.append(value);
  out.append(tmpl.substr(pos + marker.size()));
  return out;
}

std::vector<std::string> summary_sections(std::string_view text, const SummarizeParams& params) {
  ChunkingParams chunking;
  chunking.chunk_size = params.section_size_chars;
  chunking.overlap = 0;
  const auto chunks = split_text(text, chunking);
  std::vector<std::string> sections;
  if (chunks.empty()) return sections;
  const auto keep = std::min(chunks.size(), params.max_sections);
  for (std::size_t i = 0; i + 1 < keep; ++i) sections.push_back(chunks[i].text);
  // Everything from the last kept section onward, so nothing is lost.
  const auto offsets = codepoint_offsets(text);
  const auto tail_start = offsets[chunks[keep - 1].span.start];
  sections.emplace_back(text.substr(tail_start));
  return sections;
}

Summary summarize_long_text(std::string_view text, const SummarizeParams& params,
                            ChatModel& llm, const GenParams& gen) {
  params.validate();
  if (trim(text).empty()) fail(ErrorCode::EmptyText, "nothing to summarize");

  const auto sections = summary_sections(text, params);
  Summary summary;
  summary.n_sections = sections.size();

  const auto call = [&](const std::string& prompt, const std::string& where) {
    ++summary.n_llm_calls;
    try {
      return llm.complete({{Role::User, prompt}}, gen);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what(), e.status());
    }
  };

  if (sections.size() == 1) {
    summary.text = call(fill_template(params.per_section_prompt, "text", sections[0]),
                        "section 0");
    return summary;
  }
  std::string joined;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto partial = call(fill_template(params.per_section_prompt, "text", sections[i]),
                              "section " + std::to_string(i));
    if (i > 0) joined.push_back('\n');
    joined += partial;
  }
  summary.text = call(fill_template(params.final_prompt, "summaries", joined), "final pass");
  return summary;
}

Summary summarize_url(const std::string& url, const SummarizeParams& params, ChatModel& llm,
                      const GenParams& gen, const FetchOptions& fetch) {
  const auto page = fetch_page(url, fetch);
  return summarize_long_text(page.text, params, llm, gen);
}

}  // namespace ragkit
