// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "ragkit/config.hpp"
#include "ragkit/error.hpp"
#include "ragkit/mock_server.hpp"
#include "ragkit/service_http.hpp"
#include "ragkit/text.hpp"

namespace ragkit::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string preview(std::string_view text, std::size_t max_codepoints) {
  std::string flat(text);
  for (auto& c : flat) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  const auto offsets = codepoint_offsets(flat);
  if (offsets.size() - 1 <= max_codepoints) return flat;
  return flat.substr(0, offsets[max_codepoints]);
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", score);
  return buf;
}

void wait_for_stop(const Io& io) {
  while (!io.stop || !io.stop->load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

// Small client for the REST service used by chat and asr.
class ServiceClient {
 public:
  explicit ServiceClient(const std::string& base) : client_(base) {
    client_.set_read_timeout(std::chrono::minutes(5));
  }

  json post(const std::string& path, const json& body) {
    return check(client_.Post(path, body.dump(), "application/json"), path);
  }

 private:
  json check(const httplib::Result& res, const std::string& path) {
    if (!res) {
      fail(ErrorCode::ProviderUnreachable,
           "service unreachable at " + path + ": " + httplib::to_string(res.error()));
    }
    const auto doc = json::parse(res->body, nullptr, false);
    if (res->status < 200 || res->status >= 300) {
      std::string message = std::to_string(res->status);
      if (doc.is_object() && doc.contains("error")) {
        message += " " + doc["error"].get<std::string>();
      }
      if (doc.is_object() && doc.contains("endpoint")) {
        message += " (endpoint " + doc["endpoint"].get<std::string>() + ")";
      }
      fail(ErrorCode::ProviderError, message, res->status);
    }
    if (doc.is_discarded()) fail(ErrorCode::ProtocolError, "non-JSON reply from " + path);
    return doc;
  }

  httplib::Client client_;
};

struct Options {
  std::optional<std::string> config_file;

  std::string index_dir;
  std::string collection = "default";
  std::optional<std::size_t> chunk_size;
  std::optional<std::size_t> overlap;

  std::string query_collection;
  std::string question;
  std::size_t k = 4;
  std::string retrieval_mode = "mmr";
  double lambda = 0.5;
  std::size_t fetch_k = 0;
  double min_score = 0.0;
  bool json_output = false;

  std::string service_url = "http://127.0.0.1:8080";
  std::string chat_mode = "assistant";
  std::string session_file;

  std::string summarize_target;
  std::optional<std::size_t> section_size;
  std::optional<std::size_t> max_sections;

  std::string wav_file;

  std::string host = "127.0.0.1";
  int port = 8080;
  int mock_port = 8089;
  std::string llm_mode = "echo";
  std::vector<std::string> llm_script;
};

ServiceConfig load_config(const Options& o) {
  std::optional<std::filesystem::path> file;
  if (o.config_file) file = *o.config_file;
  return ServiceConfig::load(file);
}

int cmd_index(const Options& o, Io& io) {
  auto cfg = load_config(o);
  ChunkingParams params = cfg.chunking;
  if (o.chunk_size) params.chunk_size = *o.chunk_size;
  if (o.overlap) params.overlap = *o.overlap;
  try {
    params.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const std::filesystem::path root = o.index_dir;
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    fail(ErrorCode::Io, "not a readable directory: " + root.string());
  }
  const std::vector<std::filesystem::path> paths{root};
  const auto result = ingest_paths(paths, params);
  for (const auto& issue : result.skipped) {
    io.err << "skipped " << issue.path << ": " << issue.message << '\n';
  }
  if (!result.errors.empty()) {
    for (const auto& issue : result.errors) {
      io.err << "error " << issue.path << ": " << issue.message << '\n';
    }
    fail(ErrorCode::Io, std::to_string(result.errors.size()) + " file(s) failed to load");
  }

  auto embedder = make_embedder(cfg.embedding_config());
  auto collection = build_collection(o.collection, result.chunks, *embedder);
  if (!collection) {
    // Nothing indexable; persist an empty collection of the embedder's width.
    const auto probe = embedder->embed_one("dimension probe");
    collection = std::make_unique<Collection>(o.collection, probe.dim());
  }
  persist(*collection, cfg.preindexed_dir / o.collection);
  io.out << "indexed " << collection->size() << " chunks\n";
  return kExitOk;
}

int cmd_query(const Options& o, Io& io) {
  auto cfg = load_config(o);
  RetrievalParams params;
  params.mode = o.retrieval_mode == "topk" ? RetrievalMode::TopK : RetrievalMode::Mmr;
  params.k = o.k;
  params.fetch_k = o.fetch_k;
  params.lambda = o.lambda;
  params.min_score = o.min_score;
  try {
    params.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const auto dir = cfg.preindexed_dir / o.query_collection;
  if (!std::filesystem::exists(dir / "manifest.json")) {
    fail(ErrorCode::SourceUnavailable, "unknown collection '" + o.query_collection + "' in " +
                                           cfg.preindexed_dir.string());
  }
  const auto collection = load_collection(dir);
  auto embedder = make_embedder(cfg.embedding_config());
  const auto snippets = retrieve_from(o.question, collection, params, *embedder);
  for (const auto& s : snippets) {
    if (o.json_output) {
      io.out << json{{"rank", s.rank},
                     {"score", s.score},
                     {"source_uri", s.source_uri},
                     {"text", s.text}}
                    .dump()
             << '\n';
    } else {
      io.out << s.rank << '\t' << format_score(s.score) << '\t' << s.source_uri << '\t'
             << preview(s.text, 120) << '\n';
    }
  }
  return kExitOk;
}

int cmd_chat(const Options& o, Io& io) {
  if (!parse_mode(o.chat_mode)) throw UsageError("unknown mode '" + o.chat_mode + "'");
  ServiceClient client(o.service_url);

  std::string session_id;
  if (!o.session_file.empty()) {
    std::ifstream in(o.session_file);
    std::getline(in, session_id);
    session_id = trim(session_id);
  }
  if (session_id.empty()) {
    session_id = client.post("/api/sessions", json::object()).at("session_id").get<std::string>();
    if (!o.session_file.empty()) std::ofstream(o.session_file) << session_id << '\n';
  }

  std::string line;
  while (true) {
    io.out << "> " << std::flush;
    if (!std::getline(io.in, line)) break;
    if (trim(line).empty()) continue;
    if (trim(line) == "/quit") break;
    try {
      const auto reply = client.post("/api/sessions/" + session_id + "/messages",
                                     {{"mode", o.chat_mode}, {"content", line}});
      io.out << reply.value("reply", std::string()) << '\n';
      for (const auto& a : reply.value("attachments", json::array())) {
        io.out << "[" << a.value("kind", std::string()) << "] " << o.service_url
               << a.value("ref", std::string()) << '\n';
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ProviderUnreachable) throw;
      io.err << "error: " << e.what() << '\n';
    }
  }
  io.out << '\n';
  return kExitOk;
}

int cmd_summarize(const Options& o, Io& io) {
  auto cfg = load_config(o);
  if (o.section_size) cfg.summarize.section_size_chars = *o.section_size;
  if (o.max_sections) cfg.summarize.max_sections = *o.max_sections;
  try {
    cfg.summarize.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (cfg.llm_endpoint.empty()) fail(ErrorCode::InvalidArgument, "LLM_ENDPOINT is not set");

  LlmClient llm(cfg.llm_config());
  GenParams gen = cfg.gen;
  gen.stream = false;
  Summary summary;
  std::error_code ec;
  if (std::filesystem::is_regular_file(o.summarize_target, ec)) {
    const auto doc = load_file(o.summarize_target);
    summary = summarize_long_text(doc.text, cfg.summarize, llm, gen);
  } else {
    summary = summarize_url(o.summarize_target, cfg.summarize, llm, gen);
  }
  io.out << summary.text << '\n';
  io.out << "n_sections=" << summary.n_sections << " n_llm_calls=" << summary.n_llm_calls
         << '\n';
  return kExitOk;
}

int cmd_asr(const Options& o, Io& io) {
  const auto payload = read_wav_pcm16(o.wav_file);
  // Fail fast on silence before touching the network.
  normalize_audio(payload);
  ServiceClient client(o.service_url);
  const auto reply = client.post(
      "/api/asr", json::parse(asr_request_body(payload)));
  io.out << reply.value("text", std::string()) << '\n';
  return kExitOk;
}

int cmd_serve(const Options& o, Io& io) {
  auto cfg = load_config(o);
  Service service(cfg);
  HttpService http(service, cfg.webui_dir);
  http.start(o.host, o.port);
  io.out << "listening on http://" << o.host << ":" << http.port() << std::endl;
  if (io.on_listening) io.on_listening(http.port());
  wait_for_stop(io);
  http.stop();
  return kExitOk;
}

int cmd_mock_serve(const Options& o, Io& io) {
  auto options = MockServerOptions::bundled(o.mock_port);
  options.host = o.host;
  const auto mode = parse_llm_mock_mode(o.llm_mode);
  if (!mode) throw UsageError("unknown llm mode '" + o.llm_mode + "'");
  options.llm_mode = *mode;
  options.llm_script = o.llm_script;
  auto server = MockServer::start(options);
  io.out << "LLM_ENDPOINT=" << server->llm_url() << '\n'
         << "EMBED_ENDPOINT=" << server->embed_url() << '\n'
         << "SEARCH_ENDPOINT=" << server->search_url() << '\n'
         << "IMAGE_GEN_ENDPOINT=" << server->image_generate_url() << '\n'
         << "IMAGE_UNDERSTAND_ENDPOINT=" << server->image_understand_url() << '\n'
         << "ASR_ENDPOINT=" << server->asr_url() << std::endl;
  if (io.on_listening) io.on_listening(server->port());
  wait_for_stop(io);
  server->stop();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, Io io) {
  Options o;
  CLI::App app{"ragkit: retrieval-augmented assistant toolkit", "ragkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  app.add_option("--config", o.config_file, "JSON config file (env vars take precedence)");

  auto* index = app.add_subcommand("index", "Build a preindexed collection from a directory");
  index->add_option("dir", o.index_dir, "Directory of documents")->required();
  index->add_option("--collection", o.collection, "Collection name")->capture_default_str();
  index->add_option("--chunk-size", o.chunk_size, "Chunk size in characters")
      ->check(CLI::PositiveNumber);
  index->add_option("--overlap", o.overlap, "Chunk overlap in characters");

  auto* query = app.add_subcommand("query", "Query a preindexed collection");
  query->add_option("collection", o.query_collection)->required();
  query->add_option("question", o.question)->required();
  query->add_option("--k", o.k, "Number of hits")->check(CLI::PositiveNumber)->capture_default_str();
  query->add_option("--mode", o.retrieval_mode, "topk or mmr")
      ->check(CLI::IsMember({"topk", "mmr"}))
      ->capture_default_str();
  query->add_option("--lambda", o.lambda, "MMR relevance weight in [0,1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  query->add_option("--fetch-k", o.fetch_k, "MMR candidate pool (0 = max(4k, 20))");
  query->add_option("--min-score", o.min_score, "Drop hits below this cosine score");
  query->add_flag("--json", o.json_output, "One JSON object per hit");

  auto* chat = app.add_subcommand("chat", "Interactive chat against a running service");
  chat->add_option("--url", o.service_url, "Service base URL")->capture_default_str();
  chat->add_option("--mode", o.chat_mode, "Message mode")->capture_default_str();
  chat->add_option("--session-file", o.session_file, "Reuse or store the session id here");

  auto* summarize = app.add_subcommand("summarize", "Summarize a URL or local file");
  summarize->add_option("target", o.summarize_target, "URL or file path")->required();
  summarize->add_option("--section-size", o.section_size)->check(CLI::PositiveNumber);
  summarize->add_option("--max-sections", o.max_sections)->check(CLI::PositiveNumber);

  auto* asr = app.add_subcommand("asr", "Transcribe a mono 16-bit PCM WAV file");
  asr->add_option("wav", o.wav_file)->required()->check(CLI::ExistingFile);
  asr->add_option("--url", o.service_url, "Service base URL")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the REST service");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535))->capture_default_str();

  auto* mock = app.add_subcommand("mock-serve", "Run every mock model server on one port");
  mock->add_option("--host", o.host)->capture_default_str();
  mock->add_option("--port", o.mock_port)->check(CLI::Range(0, 65535))->capture_default_str();
  mock->add_option("--llm-mode", o.llm_mode, "echo, script or concat_mark")->capture_default_str();
  mock->add_option("--script", o.llm_script, "Scripted replies, in order");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    io.out << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "usage error: " << e.what() << '\n' << "run 'ragkit --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (index->parsed()) return cmd_index(o, io);
    if (query->parsed()) return cmd_query(o, io);
    if (chat->parsed()) return cmd_chat(o, io);
    if (summarize->parsed()) return cmd_summarize(o, io);
    if (asr->parsed()) return cmd_asr(o, io);
    if (serve->parsed()) return cmd_serve(o, io);
    if (mock->parsed()) return cmd_mock_serve(o, io);
  } catch (const UsageError& e) {
    io.err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ragkit::cli
