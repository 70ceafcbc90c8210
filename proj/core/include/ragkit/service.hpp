// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ragkit/config.hpp"

namespace ragkit {

enum class Mode {
  Assistant,
  RagPreindexed,
  RagUpload,
  RagWeb,
  SummarizeUrl,
  ImageGenerate,
  ImageUnderstand,
};

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;
const std::vector<Mode>& all_modes();

enum class AttachmentKind { Image, Audio, File };

std::string_view to_string(AttachmentKind kind) noexcept;
std::optional<AttachmentKind> parse_attachment_kind(std::string_view text) noexcept;

struct Attachment {
  AttachmentKind kind = AttachmentKind::File;
  std::string ref;

  friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct TurnRecord {
  Role role = Role::User;
  Mode mode = Mode::Assistant;
  std::string content;
  std::vector<Attachment> attachments;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

std::string turn_to_json(const TurnRecord& turn);
TurnRecord turn_from_json(std::string_view text);

struct MessageRequest {
  Mode mode = Mode::Assistant;
  std::string content;
  std::vector<Attachment> attachments;
  std::map<std::string, std::string> params;  // per-request overrides
};

struct MessageReply {
  std::string reply;
  Mode mode = Mode::Assistant;
  std::vector<Attachment> attachments;
  std::vector<ContextSnippet> snippets;
  std::optional<Summary> summary;
  std::size_t history_length = 0;
};

struct UploadResult {
  std::string upload_id;
  std::size_t chunks_indexed = 0;
};

/// A failure with its REST status. `endpoint` names the downstream
/// dependency for 502s.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string message, std::string endpoint = {});
  int status() const noexcept { return status_; }
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  int status_;
  std::string endpoint_;
};

std::string version_string();

/// Transport-independent core of the REST service. Thread-safe; messages
/// to one session are processed one at a time in arrival order.
class Service {
 public:
  explicit Service(ServiceConfig config, std::unique_ptr<Embedder> embedder = nullptr,
                   std::unique_ptr<SearchProvider> search = nullptr);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::string create_session();
  void delete_session(const std::string& session_id);
  bool has_session(const std::string& session_id) const;

  UploadResult upload_file(const std::string& session_id, const std::string& filename,
                           std::string_view bytes);

  /// `on_delta` receives streamed reply text as it is produced.
  MessageReply post_message(const std::string& session_id, const MessageRequest& request,
                            const DeltaCallback& on_delta = {});

  Transcript asr(const AudioPayload& payload);

  std::vector<TurnRecord> get_history(const std::string& session_id) const;

  std::optional<std::string> image(const std::string& image_id) const;

  const ServiceConfig& config() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// UUID version 4 in canonical 8-4-4-4-12 form.
std::string make_uuid_v4();

}  // namespace ragkit
