// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/service_http.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"
#include "ragkit/error.hpp"

namespace ragkit {

using nlohmann::json;

namespace {

json turn_json(const TurnRecord& turn) { return json::parse(turn_to_json(turn)); }

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& endpoint = {}) {
  json body{{"error", message}, {"status", status}};
  if (!endpoint.empty()) body["endpoint"] = endpoint;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ApiError& e) {
    send_error(res, e.status(), e.what(), e.endpoint());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const Error& e) {
    send_error(res, e.status() > 0 ? e.status() : 500, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

// Bridges the service's delta callback to httplib's chunked provider.
struct SseChannel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> events;
  bool done = false;

  void push(std::string event) {
    {
      std::lock_guard lock(mu);
      events.push_back(std::move(event));
    }
    cv.notify_one();
  }
  void finish() {
    {
      std::lock_guard lock(mu);
      done = true;
    }
    cv.notify_one();
  }
};

std::string sse(const json& payload) { return "data: " + payload.dump() + "\n\n"; }

}  // namespace

std::string message_reply_to_json(const MessageReply& reply) {
  json attachments = json::array();
  for (const auto& a : reply.attachments) {
    attachments.push_back({{"kind", std::string(to_string(a.kind))}, {"ref", a.ref}});
  }
  json snippets = json::array();
  for (const auto& s : reply.snippets) {
    snippets.push_back(
        {{"text", s.text}, {"source_uri", s.source_uri}, {"score", s.score}, {"rank", s.rank}});
  }
  json out{{"reply", reply.reply},
           {"mode", std::string(to_string(reply.mode))},
           {"attachments", std::move(attachments)},
           {"snippets", std::move(snippets)},
           {"history_length", reply.history_length}};
  if (reply.summary) {
    out["summary"] = {{"n_sections", reply.summary->n_sections},
                      {"n_llm_calls", reply.summary->n_llm_calls}};
  }
  return out.dump();
}

MessageRequest message_request_from_json(std::string_view body) {
  const auto doc = json::parse(body);
  if (!doc.is_object()) throw ApiError(400, "request body must be a JSON object");
  MessageRequest req;
  const auto mode_text = doc.value("mode", std::string("assistant"));
  const auto mode = parse_mode(mode_text);
  if (!mode) throw ApiError(400, "unknown mode '" + mode_text + "'");
  req.mode = *mode;
  req.content = doc.value("content", std::string());
  if (auto it = doc.find("attachments"); it != doc.end() && !it->is_null()) {
    for (const auto& a : *it) {
      const auto kind_text = a.value("kind", std::string());
      const auto kind = parse_attachment_kind(kind_text);
      if (!kind) throw ApiError(400, "unknown attachment kind '" + kind_text + "'");
      req.attachments.push_back({*kind, a.value("ref", std::string())});
    }
  }
  if (auto it = doc.find("params"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ApiError(400, "params must be an object");
    for (const auto& [key, value] : it->items()) {
      req.params[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  return req;
}

struct HttpService::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  explicit Impl(Service& s) : service(s) {}

  void routes(const std::filesystem::path& static_dir) {
    server.set_payload_max_length(service.config().upload_limit_bytes + (1u << 20));

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"status", "ok"}, {"version", version_string()}}.dump(),
                      "application/json");
    });

    server.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 201;
        res.set_content(json{{"session_id", service.create_session()}}.dump(),
                        "application/json");
      });
    });

    server.Delete(R"(/api/sessions/([^/]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] {
                      service.delete_session(req.matches[1]);
                      res.status = 204;
                    });
                  });

    server.Get(R"(/api/sessions/([^/]+)/messages)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   json out = json::array();
                   for (const auto& t : service.get_history(req.matches[1])) {
                     out.push_back(turn_json(t));
                   }
                   res.set_content(out.dump(), "application/json");
                 });
               });

    server.Post(R"(/api/sessions/([^/]+)/messages)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] { post_message(req, res); });
                });

    server.Post(R"(/api/sessions/([^/]+)/uploads)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    if (!service.has_session(id)) throw ApiError(404, "unknown session " + id);
                    if (!req.has_file("file")) {
                      throw ApiError(400, "multipart field 'file' is required");
                    }
                    const auto file = req.get_file_value("file");
                    const auto result = service.upload_file(id, file.filename, file.content);
                    res.set_content(json{{"upload_id", result.upload_id},
                                         {"chunks_indexed", result.chunks_indexed}}
                                        .dump(),
                                    "application/json");
                  });
                });

    server.Post("/api/asr", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto doc = json::parse(req.body);
        AudioPayload payload;
        payload.sampling_rate = doc.at("sampling_rate").get<int>();
        payload.raw = doc.at("raw").get<std::vector<double>>();
        const auto transcript = service.asr(payload);
        res.set_content(json{{"text", transcript.text}}.dump(), "application/json");
      });
    });

    server.Get(R"(/api/images/([0-9a-f-]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto bytes = service.image(req.matches[1]);
                 if (!bytes) return send_error(res, 404, "unknown image");
                 res.set_content(*bytes, "image/png");
               });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, httplib::status_message(res.status));
    });

    if (!static_dir.empty()) server.set_mount_point("/", static_dir.string());
  }

  void post_message(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto request = message_request_from_json(req.body);
    const bool stream = json::parse(req.body).value("stream", false);
    if (!service.has_session(id)) throw ApiError(404, "unknown session " + id);
    if (!stream) {
      res.set_content(message_reply_to_json(service.post_message(id, request)),
                      "application/json");
      return;
    }

    // Run the turn on a worker; the provider drains events as they arrive.
    auto channel = std::make_shared<SseChannel>();
    auto worker = std::make_shared<std::thread>([this, channel, id, request] {
      try {
        const auto reply = service.post_message(id, request, [&](std::string_view delta) {
          channel->push(sse(json{{"delta", std::string(delta)}}));
        });
        channel->push("data: {\"reply\":" + message_reply_to_json(reply) + "}\n\n");
      } catch (const ApiError& e) {
        json err{{"error", e.what()}, {"status", e.status()}};
        if (!e.endpoint().empty()) err["endpoint"] = e.endpoint();
        channel->push(sse(err));
      } catch (const std::exception& e) {
        channel->push(sse(json{{"error", e.what()}, {"status", 500}}));
      }
      channel->push("data: [DONE]\n\n");
      channel->finish();
    });
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [channel](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(channel->mu);
          channel->cv.wait(lock, [&] { return !channel->events.empty() || channel->done; });
          while (!channel->events.empty()) {
            auto event = std::move(channel->events.front());
            channel->events.pop_front();
            lock.unlock();
            if (!sink.write(event.data(), event.size())) return false;
            lock.lock();
          }
          if (channel->done) sink.done();
          return true;
        },
        [worker](bool) {
          if (worker->joinable()) worker->join();
        });
  }
};

HttpService::HttpService(Service& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->routes(static_dir);
  http::exclusive_bind(impl_->server);
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port < 0) {
    fail(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
  }
  return impl_->port;
}

void HttpService::start(const std::string& host, int port) {
  if (impl_->port < 0) bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpService::port() const noexcept { return impl_->port; }

std::string HttpService::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace ragkit
