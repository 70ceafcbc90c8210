// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

using Metadata = std::map<std::string, std::string>;

enum class DocumentFormat { Plain, Markdown, Html };

std::string_view to_string(DocumentFormat format) noexcept;

struct Document {
  std::string id;
  std::string source_uri;
  DocumentFormat format = DocumentFormat::Plain;
  std::string text;
  Metadata metadata;
};

/// Chunk sizes are counted in Unicode code points.
struct ChunkingParams {
  std::size_t chunk_size = 1000;
  std::size_t overlap = 150;
  std::vector<std::string> separators = {"\n\n", "\n", " ", ""};

  /// Throws InvalidArgument unless chunk_size >= 1 and overlap < chunk_size.
  void validate() const;
};

/// Half-open code point interval into the source text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Chunk {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  Span span;
  Metadata metadata;
};

/// Decodes raw bytes according to `format_hint`. HTML is run through
/// strip_html; plain and markdown must be valid UTF-8.
Document load_document(std::string_view bytes, DocumentFormat format_hint,
                       std::string source_uri);

/// Markup to text in a single linear pass. Drops tags, comments and the
/// bodies of script, style and title elements, decodes the common named entities and
/// numeric references, and collapses whitespace.
std::string strip_html(std::string_view html);

/// Contents of the first <title> element, stripped; empty if absent.
std::string extract_title(std::string_view html);

/// Recursive separator split with greedy packing and overlap carry-over.
/// An empty separator list (or a unit that no separator can break) falls
/// back to a sliding window of width chunk_size, stride chunk_size - overlap.
std::vector<Chunk> split_text(std::string_view text, const ChunkingParams& params);

/// split_text plus doc_id, source metadata and chunk_index on every chunk.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params);

/// Extension-based format detection: .txt/.text, .md/.markdown, .html/.htm.
std::optional<DocumentFormat> format_for_path(const std::filesystem::path& path);

/// Reads and loads one file. PDFs go through the command named by the
/// EXTRACT_CMD environment variable (file bytes on stdin, UTF-8 text on
/// stdout). Throws UnsupportedFormat, InvalidEncoding or Io.
Document load_file(const std::filesystem::path& path);

struct IngestIssue {
  std::string path;
  std::string message;
};

struct IngestResult {
  std::vector<Chunk> chunks;
  std::vector<IngestIssue> skipped;  // unsupported extensions
  std::vector<IngestIssue> errors;   // unreadable or undecodable paths
  std::size_t documents = 0;
};

/// Loads and chunks every file under `paths`; directories are walked
/// recursively in lexicographic order. Per-path failures are collected.
IngestResult ingest_paths(std::span<const std::filesystem::path> paths,
                          const ChunkingParams& params);

}  // namespace ragkit
