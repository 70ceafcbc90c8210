// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include <gtest/gtest.h>

#include <array>
#include <cstdlib>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ragkit/corpus_ingest.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace {

using namespace ragkit;

std::vector<std::string> texts(const std::vector<Chunk>& chunks) {
  std::vector<std::string> out;
  for (const auto& c : chunks) out.push_back(c.text);
  return out;
}

// Code point substring.
std::string cp_substr(const std::string& s, std::size_t start, std::size_t end) {
  const auto off = codepoint_offsets(s);
  return s.substr(off[start], off[end] - off[start]);
}

TEST(LoadDocument, Examples) {
  EXPECT_EQ(load_document("hello", DocumentFormat::Plain, "a.txt").text, "hello");
  const auto html = load_document("<p>Hi</p>", DocumentFormat::Html, "x.html");
  EXPECT_EQ(html.text, oracle::strip_html("<p>Hi</p>"));
  EXPECT_EQ(html.text, "Hi");
  EXPECT_EQ(html.format, DocumentFormat::Html);
  try {
    load_document(std::string("\x89PNG\r\n\x1a\n\0\0", 10), DocumentFormat::Plain, "img.png");
    FAIL() << "expected InvalidEncoding";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidEncoding);
  }
}

TEST(LoadDocument, HtmlTitleBecomesMetadata) {
  const auto doc =
      load_document("<html><title>T</title><p>Body</p></html>", DocumentFormat::Html, "p.html");
  EXPECT_EQ(doc.metadata.at("title"), "T");
  EXPECT_EQ(doc.text, "Body");
  EXPECT_EQ(doc.source_uri, "p.html");
}

TEST(StripHtml, Examples) {
  EXPECT_EQ(strip_html("<p>Hi</p>"), "Hi");
  const std::string scripted = "<script>var x=1;</script>Hello <b>world</b>";
  EXPECT_EQ(oracle::strip_html(scripted), "Hello world");
  EXPECT_EQ(strip_html(scripted), "Hello world");
  EXPECT_EQ(strip_html("a &amp; b"), "a & b");
}

TEST(StripHtml, EntityTable) {
  EXPECT_EQ(strip_html("&lt;x&gt; &quot;q&quot; &#39;s&#39; a&nbsp;b"), "<x> \"q\" 's' a b");
  EXPECT_EQ(strip_html("&#233;&#x20AC;"), "\xc3\xa9\xe2\x82\xac");
  EXPECT_EQ(strip_html("&amp;lt;"), "&lt;");  // decoded once
  EXPECT_EQ(strip_html("&bogus; &"), "&bogus; &");
}

TEST(StripHtml, MalformedMarkupIsBestEffort) {
  EXPECT_EQ(strip_html("a < b and c > d"), "a < b and c > d");
  EXPECT_EQ(strip_html("<p>open <div>never closed"), "open never closed");
  EXPECT_EQ(strip_html("x <!-- hidden --> y"), "x y");
  EXPECT_EQ(strip_html("<style>p{}</style><STYLE>q{}</STYLE>z"), "z");
  EXPECT_EQ(strip_html("tail <"), "tail <");
  EXPECT_EQ(strip_html(""), "");
}

TEST(StripHtml, BlockTagsSeparateWords) {
  EXPECT_EQ(strip_html("<li>one</li><li>two</li>"), "one two");
  EXPECT_EQ(strip_html("in<span>line</span>"), "inline");
  EXPECT_EQ(strip_html("a<br>b"), "a b");
}

// Well-formed documents built from a small grammar.
std::string random_html(std::mt19937& rng) {
  static const std::vector<std::string> words = {
      "alpha", "beta", "Gamma", "d&amp;e", "x&lt;y", "caf\xc3\xa9", "&quot;q&quot;",
      "it&#39;s", "&#x41;", "n&nbsp;b", "42", "tab\tbed", "new\nline"};
  static const std::vector<std::string> blocks = {"p", "div", "h1", "li", "td", "section"};
  static const std::vector<std::string> inlines = {"b", "i", "span", "a", "em", "code"};
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 14)(rng);
  for (int i = 0; i < n; ++i) {
    switch (std::uniform_int_distribution<int>(0, 6)(rng)) {
      case 0:
      case 1:
        out += words[rng() % words.size()];
        out += (rng() % 2) ? " " : "";
        break;
      case 2: {
        const auto& t = blocks[rng() % blocks.size()];
        out += "<" + t + " class=\"c" + std::to_string(rng() % 9) + "\">" +
               words[rng() % words.size()] + "</" + t + ">";
        break;
      }
      case 3: {
        const auto& t = inlines[rng() % inlines.size()];
        out += "<" + t + ">" + words[rng() % words.size()] + "</" + t + ">";
        break;
      }
      case 4:
        out += std::array<const char*, 3>{"<script>if (a < b) { x = '&amp;'; }</script>",
                                          "<style>p > b { color: red }</style>",
                                          "<title>Page &amp; more</title>"}[rng() % 3];
        break;
      case 5:
        out += "<!-- note " + words[rng() % words.size()] + " -->";
        break;
      default:
        out += (rng() % 2) ? "<br>" : "<hr/>";
    }
  }
  return out;
}

TEST(StripHtml, MatchesRegexOracleOnWellFormedInput) {
  std::mt19937 rng(7);
  for (int i = 0; i < 400; ++i) {
    const auto html = random_html(rng);
    ASSERT_EQ(strip_html(html), oracle::strip_html(html)) << html;
  }
}

TEST(StripHtml, IdempotentOnPlainTokenOutput) {
  // Idempotence is asserted on outputs that contain no markup or entity
  // syntax; "&amp;lt;" shows it cannot hold for arbitrary input.
  std::mt19937 rng(11);
  for (int i = 0; i < 400; ++i) {
    const auto once = strip_html(random_html(rng));
    if (once.find_first_of("<&") != std::string::npos) continue;
    ASSERT_EQ(strip_html(once), once);
  }
}

TEST(SplitText, SlidingWindowExample) {
  ChunkingParams p{5, 2, {}};
  const auto chunks = split_text("abcdefghijk", p);
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"abcde", "defgh", "ghijk"}));
  const auto expected = oracle::window_spans(11, 5, 2);
  ASSERT_EQ(expected.size(), 3u);
  EXPECT_EQ(expected[0], (std::pair<std::size_t, std::size_t>{0, 5}));
  EXPECT_EQ(expected[1], (std::pair<std::size_t, std::size_t>{3, 8}));
  EXPECT_EQ(expected[2], (std::pair<std::size_t, std::size_t>{6, 11}));
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].span.start, expected[i].first);
    EXPECT_EQ(chunks[i].span.end, expected[i].second);
  }
}

TEST(SplitText, TrivialCases) {
  ChunkingParams p{100, 10};
  EXPECT_EQ(texts(split_text("short", p)), (std::vector<std::string>{"short"}));
  EXPECT_TRUE(split_text("", p).empty());
  EXPECT_TRUE(split_text("", ChunkingParams{5, 2, {}}).empty());
}

TEST(SplitText, PrefersCoarsestSeparator) {
  ChunkingParams p{12, 0};
  const auto chunks = split_text("para one\n\npara two", p);
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"para one\n\n", "para two"}));
}

TEST(SplitText, OverlapCarriesWholeUnits) {
  ChunkingParams p{11, 4, {" "}};
  const auto chunks = split_text("aa bb cc dd ee", p);
  // Units: "aa ","bb ","cc ","dd ","ee". Carry-over keeps "cc " (3 <= 4).
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"aa bb cc ", "cc dd ee"}));
}

TEST(SplitText, OversizedUnitFallsBackToWindows) {
  ChunkingParams p{4, 1, {" "}};
  const auto chunks = split_text("abcdefghij", p);
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"abcd", "defg", "ghij"}));
}

TEST(SplitText, CountsCodePointsNotBytes) {
  ChunkingParams p{3, 0, {}};
  const auto chunks = split_text("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9", p);  // four e-acute
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].text, "\xc3\xa9\xc3\xa9\xc3\xa9");
  EXPECT_EQ(chunks[1].span, (Span{3, 4}));
}

TEST(SplitText, RejectsInvalidParams) {
  EXPECT_THROW(split_text("x", ChunkingParams{0, 0}), Error);
  EXPECT_THROW(split_text("x", ChunkingParams{5, 5}), Error);
}

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "a", "bc", "def", "ghij", "klmnopqrstuv", "\xc3\xa9t\xc3\xa9", "\xe2\x82\xac", "x1",
      " ", " ", "\n", "\n\n", "  "};
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 60)(rng);
  for (int i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
  if (rng() % 5 == 0) out += std::string(std::uniform_int_distribution<int>(1, 90)(rng), 'z');
  return out;
}

ChunkingParams random_params(std::mt19937& rng, bool windows) {
  ChunkingParams p;
  p.chunk_size = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
  p.overlap = std::uniform_int_distribution<std::size_t>(0, p.chunk_size - 1)(rng);
  if (windows) p.separators.clear();
  return p;
}

void check_laws(const std::string& text, const ChunkingParams& p) {
  const auto chunks = split_text(text, p);
  const std::size_t n = codepoint_count(text);
  if (n == 0) {
    ASSERT_TRUE(chunks.empty());
    return;
  }
  ASSERT_FALSE(chunks.empty());
  std::size_t covered = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    ASSERT_EQ(c.index, i);
    ASSERT_LT(c.span.start, c.span.end);
    ASSERT_LE(c.span.end, n);
    ASSERT_LE(c.span.size(), p.chunk_size);
    ASSERT_EQ(c.text, cp_substr(text, c.span.start, c.span.end));
    ASSERT_LE(c.span.start, covered) << "gap before chunk " << i;
    if (i > 0) {
      ASSERT_GT(c.span.start, chunks[i - 1].span.start);
      ASSERT_GT(c.span.end, chunks[i - 1].span.end);
    }
    covered = std::max(covered, c.span.end);
  }
  ASSERT_EQ(chunks.front().span.start, 0u);
  ASSERT_EQ(covered, n);
}

TEST(SplitTextProperty, RecursiveModeLaws) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 600; ++i) {
    const auto text = random_text(rng);
    const auto p = random_params(rng, false);
    SCOPED_TRACE("case " + std::to_string(i));
    check_laws(text, p);
  }
}

TEST(SplitTextProperty, WindowModeMatchesOracle) {
  std::mt19937 rng(99);
  for (int i = 0; i < 600; ++i) {
    const auto text = random_text(rng);
    const auto p = random_params(rng, true);
    check_laws(text, p);
    const auto chunks = split_text(text, p);
    const auto expected = oracle::window_spans(oracle::codepoints(text), p.chunk_size, p.overlap);
    ASSERT_EQ(chunks.size(), expected.size());
    for (std::size_t j = 0; j < chunks.size(); ++j) {
      ASSERT_EQ(chunks[j].span.start, expected[j].first);
      ASSERT_EQ(chunks[j].span.end, expected[j].second);
      if (j + 1 < chunks.size()) {
        // Every boundary except possibly the last one overlaps exactly.
        const auto shared = chunks[j].span.end - chunks[j + 1].span.start;
        if (j + 2 < chunks.size()) {
          ASSERT_EQ(shared, p.overlap);
        }
        ASSERT_GE(shared, p.overlap);
      }
    }
  }
}

TEST(ChunkDocument, InheritsMetadata) {
  Document doc;
  doc.id = "doc-7";
  doc.source_uri = "notes.md";
  doc.text = "one two three four five";
  doc.metadata["title"] = "Notes";
  const auto chunks = chunk_document(doc, ChunkingParams{10, 0});
  ASSERT_GE(chunks.size(), 2u);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].doc_id, "doc-7");
    EXPECT_EQ(chunks[i].metadata.at("title"), "Notes");
    EXPECT_EQ(chunks[i].metadata.at("source_uri"), "notes.md");
    EXPECT_EQ(chunks[i].metadata.at("chunk_index"), std::to_string(i));
  }
}

TEST(Ingest, FormatDetection) {
  EXPECT_EQ(format_for_path("a.TXT"), DocumentFormat::Plain);
  EXPECT_EQ(format_for_path("a.md"), DocumentFormat::Markdown);
  EXPECT_EQ(format_for_path("a.htm"), DocumentFormat::Html);
  EXPECT_FALSE(format_for_path("a.png").has_value());
}

TEST(Ingest, DirectoryExamples) {
  fixture::TempDir dir;
  ChunkingParams p{100, 10};
  const std::vector<std::filesystem::path> paths{dir.path()};
  EXPECT_TRUE(ingest_paths(paths, p).chunks.empty());

  fixture::write_file(dir / "a.txt", "hello");
  fixture::write_file(dir / "b.png", "\x89PNG\r\n\x1a\n");
  const auto result = ingest_paths(paths, p);
  ASSERT_EQ(result.chunks.size(), 1u);
  EXPECT_EQ(result.chunks[0].text, "hello");
  EXPECT_EQ(result.skipped.size(), 1u);
  EXPECT_TRUE(result.errors.empty());
  EXPECT_EQ(result.documents, 1u);
}

TEST(Ingest, ErrorsAreCollected) {
  fixture::TempDir dir;
  fixture::write_file(dir / "bad.txt", "\xff\xfe");
  fixture::write_file(dir / "sub" / "ok.md", "# ok");
  const std::vector<std::filesystem::path> paths{dir.path(), dir / "missing.txt"};
  const auto result = ingest_paths(paths, ChunkingParams{});
  EXPECT_EQ(result.chunks.size(), 1u);
  EXPECT_EQ(result.errors.size(), 2u);
}

TEST(Ingest, PdfNeedsExtractor) {
  fixture::TempDir dir;
  fixture::write_file(dir / "doc.pdf", "extracted words");
  ::unsetenv("EXTRACT_CMD");
  try {
    load_file(dir / "doc.pdf");
    FAIL() << "expected UnsupportedFormat";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
  }
  ::setenv("EXTRACT_CMD", "cat", 1);
  EXPECT_EQ(load_file(dir / "doc.pdf").text, "extracted words");
  ::unsetenv("EXTRACT_CMD");
}

}  // namespace
