// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/corpus_ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

std::string_view to_string(DocumentFormat format) noexcept {
  switch (format) {
    case DocumentFormat::Plain: return "plain";
    case DocumentFormat::Markdown: return "markdown";
    case DocumentFormat::Html: return "html";
  }
  return "plain";
}

void ChunkingParams::validate() const {
  if (chunk_size < 1) fail(ErrorCode::InvalidArgument, "chunk_size must be >= 1");
  if (overlap >= chunk_size) {
    fail(ErrorCode::InvalidArgument, "overlap must be smaller than chunk_size");
  }
}

Document load_document(std::string_view bytes, DocumentFormat format_hint,
                       std::string source_uri) {
  Document doc;
  doc.id = source_uri;
  doc.format = format_hint;
  if (format_hint == DocumentFormat::Html) {
    doc.text = strip_html(bytes);
    if (!is_valid_utf8(doc.text)) {
      fail(ErrorCode::InvalidEncoding, source_uri + " is not valid UTF-8");
    }
    if (auto title = extract_title(bytes); !title.empty()) {
      doc.metadata["title"] = std::move(title);
    }
  } else {
    if (!is_valid_utf8(bytes)) {
      fail(ErrorCode::InvalidEncoding, source_uri + " is not valid UTF-8");
    }
    doc.text = std::string(bytes);
  }
  doc.metadata["source_uri"] = source_uri;
  doc.metadata["format"] = std::string(to_string(format_hint));
  doc.source_uri = std::move(source_uri);
  return doc;
}

// ---------------------------------------------------------------------------
// HTML
// ---------------------------------------------------------------------------

namespace {

bool is_inline_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 24> kInline = {
      "a",    "abbr", "b",    "bdi",  "bdo", "cite",   "code",  "data",
      "dfn",  "em",   "font", "i",    "kbd", "mark",   "q",     "s",
      "samp", "small", "span", "strong", "sub", "sup", "u", "var"};
  return std::find(kInline.begin(), kInline.end(), name) != kInline.end();
}

std::size_t find_icase(std::string_view hay, std::string_view needle,
                       std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(hay[i + k])) !=
          std::tolower(static_cast<unsigned char>(needle[k]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Position of the '>' closing a tag that opens at `lt`, honoring quoted
// attribute values. Falls back to the first '>' when quotes never balance.
std::size_t find_tag_end(std::string_view html, std::size_t lt) {
  char quote = 0;
  for (std::size_t i = lt + 1; i < html.size(); ++i) {
    const char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i;
    }
  }
  return html.find('>', lt + 1);
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at html[amp] == '&'. Returns the number of
// bytes consumed, 0 if this is not a recognized entity.
std::size_t decode_entity(std::string_view html, std::size_t amp, std::string& out) {
  const auto semi = html.find(';', amp + 1);
  if (semi == std::string_view::npos || semi - amp > 10) return 0;
  const auto name = html.substr(amp + 1, semi - amp - 1);
  const auto consumed = semi - amp + 1;
  if (name == "amp") {
    out.push_back('&');
  } else if (name == "lt") {
    out.push_back('<');
  } else if (name == "gt") {
    out.push_back('>');
  } else if (name == "quot") {
    out.push_back('"');
  } else if (name == "apos" || name == "#39") {
    out.push_back('\'');
  } else if (name == "nbsp") {
    out.push_back(' ');
  } else if (name.size() >= 2 && name[0] == '#') {
    std::uint32_t cp = 0;
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const auto digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      const auto u = static_cast<unsigned char>(c);
      int v;
      if (std::isdigit(u)) {
        v = c - '0';
      } else if (hex && std::isxdigit(u)) {
        v = std::tolower(u) - 'a' + 10;
      } else {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      if (cp > 0x10FFFF) return 0;
    }
    if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    if (cp == 0xA0) cp = ' ';
    append_utf8(out, cp);
  } else {
    return 0;
  }
  return consumed;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string strip_html(std::string_view html) {
  std::string raw;
  raw.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '<') {
      if (html.substr(i).starts_with("<!--")) {
        const auto close = html.find("-->", i + 4);
        i = close == std::string_view::npos ? html.size() : close + 3;
        raw.push_back(' ');
        continue;
      }
      const char next = i + 1 < html.size() ? html[i + 1] : '\0';
      const bool tag_start = std::isalpha(static_cast<unsigned char>(next)) ||
                             next == '/' || next == '!' || next == '?';
      const auto gt = tag_start ? find_tag_end(html, i) : std::string_view::npos;
      if (gt == std::string_view::npos) {
        raw.push_back(c);
        ++i;
        continue;
      }
      const bool closing = next == '/';
      std::size_t name_begin = i + (closing ? 2 : 1);
      std::size_t name_end = name_begin;
      while (name_end < gt &&
             std::isalnum(static_cast<unsigned char>(html[name_end]))) {
        ++name_end;
      }
      const auto name = to_lower_ascii(html.substr(name_begin, name_end - name_begin));
      i = gt + 1;
      if (!closing && (name == "script" || name == "style" || name == "title")) {
        const auto end_tag = find_icase(html, "</" + name, i);
        if (end_tag == std::string_view::npos) {
          i = html.size();
        } else {
          const auto end_gt = html.find('>', end_tag);
          i = end_gt == std::string_view::npos ? html.size() : end_gt + 1;
        }
      }
      if (!is_inline_tag(name)) raw.push_back(' ');
      continue;
    }
    if (c == '&') {
      if (const auto used = decode_entity(html, i, raw); used > 0) {
        i += used;
        continue;
      }
    }
    raw.push_back(c);
    ++i;
  }
  return collapse_whitespace(raw);
}

std::string extract_title(std::string_view html) {
  const auto open = find_icase(html, "<title", 0);
  if (open == std::string_view::npos) return {};
  const auto gt = html.find('>', open);
  if (gt == std::string_view::npos) return {};
  const auto close = find_icase(html, "</title", gt + 1);
  const auto body = html.substr(
      gt + 1, close == std::string_view::npos ? std::string_view::npos
                                              : close - gt - 1);
  return strip_html(body);
}

// ---------------------------------------------------------------------------
// Chunking
// ---------------------------------------------------------------------------

namespace {

struct Unit {
  std::size_t start;
  std::size_t end;
  bool window;  // oversized and unbreakable: emitted as sliding windows
};

class Splitter {
 public:
  Splitter(std::string_view text, const ChunkingParams& params)
      : text_(text), params_(params), offsets_(codepoint_offsets(text)) {}

  std::vector<Span> run() {
    const std::size_t n = offsets_.size() - 1;
    std::vector<Span> spans;
    if (n == 0) return spans;
    if (params_.separators.empty()) {
      emit_windows(0, n, spans);
      return spans;
    }
    std::vector<Unit> units;
    collect(0, n, 0, units);
    pack(units, spans);
    return spans;
  }

  std::string_view slice(const Span& span) const {
    return text_.substr(offsets_[span.start],
                        offsets_[span.end] - offsets_[span.start]);
  }

 private:
  std::size_t to_cp(std::size_t byte) const {
    return static_cast<std::size_t>(
        std::lower_bound(offsets_.begin(), offsets_.end(), byte) - offsets_.begin());
  }

  void collect(std::size_t a, std::size_t b, std::size_t sep_index,
               std::vector<Unit>& out) const {
    if (b - a <= params_.chunk_size) {
      out.push_back({a, b, false});
      return;
    }
    for (std::size_t s = sep_index; s < params_.separators.size(); ++s) {
      const auto& sep = params_.separators[s];
      if (sep.empty()) {
        for (std::size_t k = a; k < b; ++k) out.push_back({k, k + 1, false});
        return;
      }
      // Pieces end right after each separator occurrence.
      std::vector<std::size_t> cuts;
      const auto scope = text_.substr(0, offsets_[b]);
      auto pos = scope.find(sep, offsets_[a]);
      while (pos != std::string_view::npos) {
        const auto cut = to_cp(pos + sep.size());
        if (cut < b) cuts.push_back(cut);
        pos = scope.find(sep, pos + sep.size());
      }
      if (cuts.empty()) continue;
      std::size_t begin = a;
      for (auto cut : cuts) {
        collect(begin, cut, s + 1, out);
        begin = cut;
      }
      collect(begin, b, s + 1, out);
      return;
    }
    out.push_back({a, b, true});
  }

  void emit_windows(std::size_t a, std::size_t b, std::vector<Span>& out) const {
    const auto stride = params_.chunk_size - params_.overlap;
    for (std::size_t pos = a;; pos += stride) {
      const auto end = std::min(pos + params_.chunk_size, b);
      out.push_back({pos, end});
      if (end == b) break;
    }
  }

  void pack(const std::vector<Unit>& units, std::vector<Span>& out) const {
    // The current chunk is always the contiguous run units[lo, hi).
    std::size_t lo = 0;
    std::size_t len = 0;
    const auto flush = [&](std::size_t hi) {
      if (hi > lo) out.push_back({units[lo].start, units[hi - 1].end});
    };
    for (std::size_t hi = 0; hi < units.size(); ++hi) {
      const auto& u = units[hi];
      if (u.window) {
        flush(hi);
        emit_windows(u.start, u.end, out);
        lo = hi + 1;
        len = 0;
        continue;
      }
      const auto unit_len = u.end - u.start;
      if (hi > lo && len + unit_len > params_.chunk_size) {
        flush(hi);
        while (hi > lo && (len > params_.overlap || len + unit_len > params_.chunk_size)) {
          len -= units[lo].end - units[lo].start;
          ++lo;
        }
      }
      len += unit_len;
    }
    flush(units.size());
  }

  std::string_view text_;
  const ChunkingParams& params_;
  std::vector<std::size_t> offsets_;
};

}  // namespace

std::vector<Chunk> split_text(std::string_view text, const ChunkingParams& params) {
  params.validate();
  Splitter splitter(text, params);
  const auto spans = splitter.run();
  std::vector<Chunk> chunks;
  chunks.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Chunk chunk;
    chunk.index = i;
    chunk.span = spans[i];
    chunk.text = std::string(splitter.slice(spans[i]));
    chunk.metadata["chunk_index"] = std::to_string(i);
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params) {
  auto chunks = split_text(doc.text, params);
  for (auto& chunk : chunks) {
    chunk.doc_id = doc.id;
    for (const auto& [key, value] : doc.metadata) chunk.metadata.emplace(key, value);
    chunk.metadata["source_uri"] = doc.source_uri;
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::optional<DocumentFormat> format_for_path(const std::filesystem::path& path) {
  const auto ext = to_lower_ascii(path.extension().string());
  if (ext == ".txt" || ext == ".text") return DocumentFormat::Plain;
  if (ext == ".md" || ext == ".markdown") return DocumentFormat::Markdown;
  if (ext == ".html" || ext == ".htm") return DocumentFormat::Html;
  return std::nullopt;
}

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    fail(ErrorCode::Io, path.string() + " is a directory");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::Io, "read failed for " + path.string());
  return bytes;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string run_extractor(const std::string& command, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "cannot open " + path.string());
  const auto full = command + " < " + shell_quote(path.string());
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) fail(ErrorCode::Io, "cannot start EXTRACT_CMD");
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  if (status != 0) {
    fail(ErrorCode::Io, "EXTRACT_CMD failed for " + path.string());
  }
  return out;
}

}  // namespace

Document load_file(const std::filesystem::path& path) {
  const auto uri = path.string();
  if (ends_with_icase(uri, ".pdf")) {
    const char* command = std::getenv("EXTRACT_CMD");
    if (!command || !*command) {
      fail(ErrorCode::UnsupportedFormat, uri + ": PDF requires EXTRACT_CMD");
    }
    auto doc = load_document(run_extractor(command, path), DocumentFormat::Plain, uri);
    doc.metadata["extracted_from"] = "pdf";
    return doc;
  }
  const auto format = format_for_path(path);
  if (!format) fail(ErrorCode::UnsupportedFormat, uri + ": unsupported extension");
  auto doc = load_document(read_bytes(path), *format, uri);
  doc.metadata.emplace("title", path.filename().string());
  return doc;
}

IngestResult ingest_paths(std::span<const std::filesystem::path> paths,
                          const ChunkingParams& params) {
  params.validate();
  IngestResult result;
  std::vector<std::filesystem::path> files;
  for (const auto& root : paths) {
    std::error_code ec;
    if (std::filesystem::is_directory(root, ec)) {
      std::vector<std::filesystem::path> found;
      std::filesystem::recursive_directory_iterator it(root, ec);
      if (ec) {
        result.errors.push_back({root.string(), ec.message()});
        continue;
      }
      for (; it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        if (it->is_regular_file(ec)) found.push_back(it->path());
      }
      if (ec) result.errors.push_back({root.string(), ec.message()});
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(root, ec)) {
      files.push_back(root);
    } else {
      result.errors.push_back({root.string(), "no such file or directory"});
    }
  }

  for (const auto& file : files) {
    try {
      const auto doc = load_file(file);
      auto chunks = chunk_document(doc, params);
      ++result.documents;
      std::move(chunks.begin(), chunks.end(), std::back_inserter(result.chunks));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnsupportedFormat) {
        result.skipped.push_back({file.string(), e.what()});
      } else {
        result.errors.push_back({file.string(), e.what()});
      }
    }
  }
  return result;
}

}  // namespace ragkit
