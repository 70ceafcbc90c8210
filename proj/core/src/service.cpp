// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <unordered_map>
#include <unistd.h>

#include "json.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

using nlohmann::json;

#ifndef RAGKIT_VERSION_STRING
#define RAGKIT_VERSION_STRING "0.0.0"
#endif

std::string version_string() { return RAGKIT_VERSION_STRING; }

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Assistant: return "assistant";
    case Mode::RagPreindexed: return "rag_preindexed";
    case Mode::RagUpload: return "rag_upload";
    case Mode::RagWeb: return "rag_web";
    case Mode::SummarizeUrl: return "summarize_url";
    case Mode::ImageGenerate: return "image_generate";
    case Mode::ImageUnderstand: return "image_understand";
  }
  return "assistant";
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes = {Mode::Assistant,     Mode::RagPreindexed,
                                          Mode::RagUpload,     Mode::RagWeb,
                                          Mode::SummarizeUrl,  Mode::ImageGenerate,
                                          Mode::ImageUnderstand};
  return modes;
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  for (auto m : all_modes()) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(AttachmentKind kind) noexcept {
  switch (kind) {
    case AttachmentKind::Image: return "image";
    case AttachmentKind::Audio: return "audio";
    case AttachmentKind::File: return "file";
  }
  return "file";
}

std::optional<AttachmentKind> parse_attachment_kind(std::string_view text) noexcept {
  if (text == "image") return AttachmentKind::Image;
  if (text == "audio") return AttachmentKind::Audio;
  if (text == "file") return AttachmentKind::File;
  return std::nullopt;
}

std::string turn_to_json(const TurnRecord& turn) {
  json attachments = json::array();
  for (const auto& a : turn.attachments) {
    attachments.push_back({{"kind", std::string(to_string(a.kind))}, {"ref", a.ref}});
  }
  return json{{"role", std::string(to_string(turn.role))},
              {"mode", std::string(to_string(turn.mode))},
              {"content", turn.content},
              {"attachments", std::move(attachments)},
              {"timestamp", turn.timestamp_ms}}
      .dump();
}

TurnRecord turn_from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    TurnRecord turn;
    const auto role = parse_role(doc.at("role").get<std::string>());
    const auto mode = parse_mode(doc.at("mode").get<std::string>());
    if (!role || !mode) fail(ErrorCode::ProtocolError, "bad role or mode in turn record");
    turn.role = *role;
    turn.mode = *mode;
    turn.content = doc.at("content").get<std::string>();
    turn.timestamp_ms = doc.at("timestamp").get<std::int64_t>();
    for (const auto& a : doc.at("attachments")) {
      const auto kind = parse_attachment_kind(a.at("kind").get<std::string>());
      if (!kind) fail(ErrorCode::ProtocolError, "bad attachment kind");
      turn.attachments.push_back({*kind, a.at("ref").get<std::string>()});
    }
    return turn;
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("bad turn record: ") + e.what());
  }
}

ApiError::ApiError(int status, std::string message, std::string endpoint)
    : std::runtime_error(std::move(message)), status_(status), endpoint_(std::move(endpoint)) {}

std::string make_uuid_v4() {
  thread_local std::mt19937_64 rng{[] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }()};
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;  // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(hi >> 32),
                static_cast<unsigned long long>((hi >> 16) & 0xFFFF),
                static_cast<unsigned long long>(hi & 0xFFFF),
                static_cast<unsigned long long>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Grants the lock in the order acquire() was called.
class FifoLock {
 public:
  void lock() {
    std::unique_lock guard(mu_);
    const auto ticket = next_ticket_++;
    cv_.wait(guard, [&] { return serving_ == ticket; });
  }
  void unlock() {
    {
      std::lock_guard guard(mu_);
      ++serving_;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

struct Session {
  std::string id;
  std::int64_t created_at = 0;

  FifoLock turn_order;

  mutable std::mutex history_mu;
  std::vector<TurnRecord> history;

  // Copy-on-write: readers take the pointer, uploads publish a new one.
  mutable std::mutex uploads_mu;
  std::shared_ptr<const Collection> uploads;
  std::mutex upload_writer;
  std::size_t upload_count = 0;
};

// Maps core failures onto REST statuses for one downstream stage.
[[noreturn]] void rethrow_as_api(const Error& e, const std::string& endpoint) {
  switch (e.code()) {
    case ErrorCode::ProviderError:
    case ErrorCode::ProviderUnreachable:
    case ErrorCode::Timeout:
    case ErrorCode::ProtocolError:
    case ErrorCode::EndpointError:
    case ErrorCode::NotPng:
    case ErrorCode::FetchError:
    case ErrorCode::BodyTooLarge:
    case ErrorCode::NotHtmlText:
      throw ApiError(502, e.what(), endpoint);
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidLambda:
    case ErrorCode::BudgetTooSmall:
    case ErrorCode::EmptyInput:
    case ErrorCode::EmptyText:
    case ErrorCode::EmptyPrompt:
    case ErrorCode::MissingImageRef:
    case ErrorCode::SilentAudio:
    case ErrorCode::EmptyAudio:
    case ErrorCode::NoTokens:
      throw ApiError(400, e.what());
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::InvalidEncoding:
      throw ApiError(415, e.what());
    case ErrorCode::SourceUnavailable:
      if (endpoint == "search") throw ApiError(502, e.what(), endpoint);
      throw ApiError(404, e.what());
    default:
      throw ApiError(500, e.what(), endpoint);
  }
}

template <typename F>
auto stage(const std::string& endpoint, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_as_api(e, endpoint);
  }
}

template <typename T>
T param_number(const std::map<std::string, std::string>& params, const std::string& key,
               T fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  T out{};
  const auto& v = it->second;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ApiError(400, "params." + key + ": cannot parse '" + v + "'");
  }
  return out;
}

const std::vector<std::string>& known_params() {
  static const std::vector<std::string> keys = {
      "k",           "fetch_k",     "lambda",     "min_score",          "retrieval_mode",
      "collection",  "max_pages",   "temperature", "max_tokens",        "budget_tokens",
      "num_inference_steps", "guidance_scale", "width", "height", "seed", "category"};
  return keys;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<SearchProvider> search;

  mutable std::shared_mutex sessions_mu;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions;

  mutable std::mutex images_mu;
  std::unordered_map<std::string, std::string> images;

  struct CachedCollection {
    std::filesystem::file_time_type stamp;
    std::shared_ptr<const Collection> collection;
  };
  std::mutex preindexed_mu;
  std::unordered_map<std::string, CachedCollection> preindexed;

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw ApiError(404, "unknown session " + id);
    return it->second;
  }

  std::shared_ptr<const Collection> load_preindexed(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos || name == "..") {
      fail(ErrorCode::SourceUnavailable, "invalid collection name");
    }
    const auto dir = config.preindexed_dir / name;
    std::error_code ec;
    const auto stamp = std::filesystem::last_write_time(dir / "manifest.json", ec);
    if (ec) fail(ErrorCode::SourceUnavailable, "no preindexed collection '" + name + "'");
    std::lock_guard lock(preindexed_mu);
    if (auto it = preindexed.find(name); it != preindexed.end() && it->second.stamp == stamp) {
      return it->second.collection;
    }
    std::shared_ptr<const Collection> loaded;
    try {
      loaded = std::make_shared<const Collection>(load_collection(dir));
    } catch (const Error& e) {
      fail(ErrorCode::SourceUnavailable, e.what());
    }
    preindexed[name] = {stamp, loaded};
    return loaded;
  }

  void persist_turns(const Session& session, const TurnRecord& a, const TurnRecord& b) const {
    if (config.data_dir.empty()) return;
    const auto dir = config.data_dir / "sessions";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / (session.id + ".jsonl"), std::ios::app);
    out << turn_to_json(a) << '\n' << turn_to_json(b) << '\n';
  }

  struct Resolver;

  std::string resolve_image_ref(const std::string& ref) const {
    if (ref.starts_with("/") && !config.public_base_url.empty()) {
      auto base = config.public_base_url;
      while (!base.empty() && base.back() == '/') base.pop_back();
      return base + ref;
    }
    return ref;
  }
};

struct Service::Impl::Resolver final : SourceResolver {
  Resolver(Service::Impl& impl, const std::map<std::string, std::string>& params)
      : impl_(impl), params_(params) {}

  std::shared_ptr<const Collection> resolve(const KnowledgeSource& source,
                                            Embedder& embedder) override {
    return std::visit(
        [&](const auto& s) -> std::shared_ptr<const Collection> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, source::Preindexed>) {
            return impl_.load_preindexed(s.collection);
          } else if constexpr (std::is_same_v<T, source::SessionUploads>) {
            const auto session = impl_.find(s.session_id);
            std::lock_guard lock(session->uploads_mu);
            if (!session->uploads) {
              fail(ErrorCode::SourceUnavailable, "session has no uploaded documents");
            }
            return session->uploads;
          } else {
            WebCorpusOptions options;
            options.max_pages = param_number<std::size_t>(params_, "max_pages", impl_.config.max_pages);
            options.chunking = impl_.config.chunking;
            return build_web_corpus(s.query, *impl_.search, options, embedder);
          }
        },
        source);
  }

  Service::Impl& impl_;
  const std::map<std::string, std::string>& params_;
};

Service::Service(ServiceConfig config, std::unique_ptr<Embedder> embedder,
                 std::unique_ptr<SearchProvider> search)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = std::move(config);
  impl_->embedder = embedder ? std::move(embedder) : make_embedder(impl_->config.embedding_config());
  if (search) {
    impl_->search = std::move(search);
  } else if (impl_->config.search_endpoint.empty() ||
             impl_->config.search_endpoint == "duckduckgo") {
    impl_->search = std::make_unique<DuckDuckGoProvider>();
  } else {
    impl_->search = std::make_unique<HttpSearchProvider>(impl_->config.search_endpoint);
  }
}

Service::~Service() = default;

const ServiceConfig& Service::config() const noexcept { return impl_->config; }

std::string Service::create_session() {
  auto session = std::make_shared<Session>();
  session->created_at = now_ms();
  std::unique_lock lock(impl_->sessions_mu);
  do {
    session->id = make_uuid_v4();
  } while (impl_->sessions.contains(session->id));
  impl_->sessions.emplace(session->id, session);
  return session->id;
}

void Service::delete_session(const std::string& session_id) {
  std::unique_lock lock(impl_->sessions_mu);
  if (impl_->sessions.erase(session_id) == 0) {
    throw ApiError(404, "unknown session " + session_id);
  }
}

bool Service::has_session(const std::string& session_id) const {
  std::shared_lock lock(impl_->sessions_mu);
  return impl_->sessions.contains(session_id);
}

UploadResult Service::upload_file(const std::string& session_id, const std::string& filename,
                                  std::string_view bytes) {
  const auto session = impl_->find(session_id);
  if (bytes.size() > impl_->config.upload_limit_bytes) {
    throw ApiError(413, "upload exceeds " + std::to_string(impl_->config.upload_limit_bytes) +
                            " bytes");
  }
  const auto name = std::filesystem::path(filename).filename().string();
  Document doc;
  if (ends_with_icase(name, ".pdf")) {
    // load_file owns the EXTRACT_CMD contract; hand it a temporary copy.
    static std::atomic<unsigned> counter{0};
    const auto tmp = std::filesystem::temp_directory_path() /
                     ("ragkit-upload-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter++) + ".pdf");
    {
      std::ofstream out(tmp, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    try {
      doc = stage("", [&] { return load_file(tmp); });
    } catch (...) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    doc.id = doc.source_uri = name;
  } else {
    const auto format = format_for_path(name);
    if (!format) throw ApiError(415, "unsupported upload format: " + name);
    doc = stage("", [&] { return load_document(bytes, *format, name); });
  }

  std::lock_guard writer(session->upload_writer);
  const auto upload_id = "upload-" + std::to_string(++session->upload_count);
  doc.metadata["upload_id"] = upload_id;
  doc.metadata["source_uri"] = name;
  const auto chunks = chunk_document(doc, impl_->config.chunking);
  std::shared_ptr<const Collection> current;
  {
    std::lock_guard lock(session->uploads_mu);
    current = session->uploads;
  }
  auto next = current ? std::make_unique<Collection>(*current) : nullptr;
  std::size_t added = 0;
  stage("embeddings", [&] {
    if (next) {
      added = index_chunks(*next, chunks, *impl_->embedder);
    } else {
      next = build_collection("uploads:" + session_id, chunks, *impl_->embedder);
      added = next ? next->size() : 0;
    }
    return 0;
  });
  if (next) {
    std::lock_guard lock(session->uploads_mu);
    session->uploads = std::move(next);
  }
  return {upload_id, added};
}

MessageReply Service::post_message(const std::string& session_id, const MessageRequest& request,
                                   const DeltaCallback& on_delta) {
  const auto session = impl_->find(session_id);
  const auto& cfg = impl_->config;
  const auto& params = request.params;
  for (const auto& [key, value] : params) {
    if (std::find(known_params().begin(), known_params().end(), key) == known_params().end()) {
      throw ApiError(400, "unknown param '" + key + "'");
    }
  }

  const Attachment* image_ref = nullptr;
  for (const auto& a : request.attachments) {
    if (a.kind == AttachmentKind::Image && !a.ref.empty()) {
      image_ref = &a;
      break;
    }
  }
  if (request.mode == Mode::ImageUnderstand) {
    if (!image_ref) throw ApiError(400, "image_understand requires an image attachment");
  } else if (trim(request.content).empty()) {
    throw ApiError(400, "content is empty");
  }

  GenParams gen = cfg.gen;
  gen.temperature = param_number<double>(params, "temperature", gen.temperature);
  gen.max_tokens = param_number<int>(params, "max_tokens", gen.max_tokens);
  const auto budget = param_number<std::size_t>(params, "budget_tokens", cfg.context_budget_tokens);
  stage("", [&] {
    gen.validate();
    return 0;
  });

  std::lock_guard order(session->turn_order);

  std::vector<ChatMessage> history;
  {
    std::lock_guard lock(session->history_mu);
    for (const auto& t : session->history) history.push_back({t.role, t.content});
  }

  MessageReply reply;
  reply.mode = request.mode;
  LlmClient llm(cfg.llm_config());
  const auto require = [](const std::string& url, const std::string& name) {
    if (url.empty()) throw ApiError(502, name + " endpoint is not configured", name);
  };

  const auto converse = [&](const std::vector<ContextSnippet>& snippets) {
    require(cfg.llm_endpoint, "llm");
    const auto bundle = stage("", [&] {
      return assemble_prompt(cfg.system_prompt, snippets, history, request.content, budget);
    });
    reply.snippets.assign(snippets.begin(), snippets.begin() +
                                                static_cast<std::ptrdiff_t>(bundle.included_snippets));
    return stage("llm", [&] { return chat_complete(llm.config(), bundle, gen, on_delta); });
  };

  switch (request.mode) {
    case Mode::Assistant:
      reply.reply = converse({});
      break;
    case Mode::RagPreindexed:
    case Mode::RagUpload:
    case Mode::RagWeb: {
      RetrievalParams rp = cfg.retrieval;
      rp.k = param_number<std::size_t>(params, "k", rp.k);
      rp.fetch_k = param_number<std::size_t>(params, "fetch_k", rp.fetch_k);
      rp.lambda = param_number<double>(params, "lambda", rp.lambda);
      rp.min_score = param_number<double>(params, "min_score", rp.min_score);
      if (auto it = params.find("retrieval_mode"); it != params.end()) {
        if (it->second == "topk") {
          rp.mode = RetrievalMode::TopK;
        } else if (it->second == "mmr") {
          rp.mode = RetrievalMode::Mmr;
        } else {
          throw ApiError(400, "retrieval_mode must be topk or mmr");
        }
      }
      KnowledgeSource source;
      std::string endpoint = "embeddings";
      if (request.mode == Mode::RagPreindexed) {
        const auto it = params.find("collection");
        source = source::Preindexed{it == params.end() ? cfg.preindexed_collection : it->second};
      } else if (request.mode == Mode::RagUpload) {
        source = source::SessionUploads{session_id};
      } else {
        source = source::WebEphemeral{request.content};
        endpoint = "search";
      }
      Impl::Resolver resolver(*impl_, params);
      const auto snippets = stage(endpoint, [&] {
        return retrieve(request.content, source, rp, *impl_->embedder, resolver);
      });
      reply.reply = converse(snippets);
      break;
    }
    case Mode::SummarizeUrl: {
      require(cfg.llm_endpoint, "llm");
      const auto url = trim(request.content);
      GenParams summary_gen = gen;
      summary_gen.stream = false;
      FetchOptions fetch;
      const auto page = stage("web", [&] { return fetch_page(url, fetch); });
      auto summary = stage("llm", [&] {
        return summarize_long_text(page.text, cfg.summarize, llm, summary_gen);
      });
      reply.reply = summary.text;
      reply.summary = std::move(summary);
      if (on_delta) on_delta(reply.reply);
      break;
    }
    case Mode::ImageGenerate: {
      require(cfg.image_gen_endpoint, "image_generate");
      ImageGenParams ip;
      ip.num_inference_steps = param_number<int>(params, "num_inference_steps", ip.num_inference_steps);
      ip.guidance_scale = param_number<double>(params, "guidance_scale", ip.guidance_scale);
      ip.width = param_number<int>(params, "width", ip.width);
      ip.height = param_number<int>(params, "height", ip.height);
      if (params.contains("seed")) ip.seed = param_number<std::int64_t>(params, "seed", 0);
      auto image = stage("image_generate", [&] {
        return generate_image(cfg.media_config(cfg.image_gen_endpoint), request.content, ip);
      });
      const auto image_id = make_uuid_v4();
      {
        std::lock_guard lock(impl_->images_mu);
        impl_->images.emplace(image_id, std::move(image.bytes));
      }
      reply.attachments.push_back({AttachmentKind::Image, "/api/images/" + image_id});
      reply.reply = "Generated image for: " + request.content;
      if (on_delta) on_delta(reply.reply);
      break;
    }
    case Mode::ImageUnderstand: {
      require(cfg.image_understand_endpoint, "image_understand");
      ImageUnderstandRequest req;
      req.prompt = trim(request.content).empty() ? "Describe this image." : request.content;
      req.image_url = impl_->resolve_image_ref(image_ref->ref);
      reply.reply = stage("image_understand", [&] {
        return understand_image(cfg.media_config(cfg.image_understand_endpoint), req);
      });
      if (on_delta) on_delta(reply.reply);
      break;
    }
  }

  TurnRecord user_turn{Role::User, request.mode, request.content, request.attachments, now_ms()};
  TurnRecord assistant_turn{Role::Assistant, request.mode, reply.reply, reply.attachments,
                            now_ms()};
  {
    std::lock_guard lock(session->history_mu);
    if (!session->history.empty()) {
      user_turn.timestamp_ms = std::max(user_turn.timestamp_ms, session->history.back().timestamp_ms);
    }
    assistant_turn.timestamp_ms = std::max(assistant_turn.timestamp_ms, user_turn.timestamp_ms);
    session->history.push_back(user_turn);
    session->history.push_back(assistant_turn);
    reply.history_length = session->history.size();
  }
  impl_->persist_turns(*session, user_turn, assistant_turn);
  return reply;
}

Transcript Service::asr(const AudioPayload& payload) {
  const auto normalized = stage("", [&] { return normalize_audio(payload); });
  if (impl_->config.asr_endpoint.empty()) {
    throw ApiError(502, "asr endpoint is not configured", "asr");
  }
  return stage("asr", [&] {
    return transcribe(impl_->config.media_config(impl_->config.asr_endpoint), normalized);
  });
}

std::vector<TurnRecord> Service::get_history(const std::string& session_id) const {
  const auto session = impl_->find(session_id);
  std::lock_guard lock(session->history_mu);
  return session->history;
}

std::optional<std::string> Service::image(const std::string& image_id) const {
  std::lock_guard lock(impl_->images_mu);
  const auto it = impl_->images.find(image_id);
  if (it == impl_->images.end()) return std::nullopt;
  return it->second;
}

}  // namespace ragkit
