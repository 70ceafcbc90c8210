// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/media_clients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "http_util.hpp"
#include "json.hpp"
#include "ragkit/error.hpp"

namespace ragkit {

using nlohmann::json;

void ImageGenParams::validate() const {
  if (num_inference_steps < 1) fail(ErrorCode::InvalidArgument, "num_inference_steps must be >= 1");
  if (!(guidance_scale >= 0.0)) fail(ErrorCode::InvalidArgument, "guidance_scale must be >= 0");
  if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "width and height must be >= 1");
}

std::string image_gen_request_body(std::string_view prompt, const ImageGenParams& params) {
  json body = {{"prompt", prompt},
               {"num_inference_steps", params.num_inference_steps},
               {"guidance_scale", params.guidance_scale},
               {"width", params.width},
               {"height", params.height}};
  if (params.seed) body["seed"] = *params.seed;
  return body.dump();
}

std::string image_understand_request_body(const ImageUnderstandRequest& req) {
  return json{{"prompt", req.prompt}, {"image_url", req.image_url}}.dump();
}

std::string asr_request_body(const AudioPayload& payload) {
  return json{{"sampling_rate", payload.sampling_rate}, {"raw", payload.raw}}.dump();
}

namespace {

http::Response post_media(const MediaEndpointConfig& endpoint, std::string body) {
  http::Request req;
  req.method = "POST";
  req.url = endpoint.url;
  req.body = std::move(body);
  req.content_type = "application/json";
  req.timeout_ms = endpoint.timeout_ms;
  auto res = http::send(req);
  if (!res.ok()) {
    const auto what = res.transport == http::Transport::Timeout ? std::string("timeout")
                                                                 : res.transport_message;
    fail(ErrorCode::EndpointError, endpoint.url + ": " + what);
  }
  if (res.status < 200 || res.status >= 300) {
    fail(ErrorCode::EndpointError, endpoint.url + ": HTTP " + std::to_string(res.status),
         res.status);
  }
  return res;
}

std::string text_field(const std::string& body, const std::string& url) {
  try {
    return json::parse(body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::EndpointError, url + ": malformed response: " + e.what());
  }
}

}  // namespace

GeneratedImage generate_image(const MediaEndpointConfig& endpoint, std::string_view prompt,
                              const ImageGenParams& params) {
  if (prompt.empty()) fail(ErrorCode::EmptyPrompt, "image prompt is empty");
  params.validate();
  auto res = post_media(endpoint, image_gen_request_body(prompt, params));
  if (!res.body.starts_with(kPngSignature)) {
    fail(ErrorCode::NotPng, endpoint.url + " did not return a PNG");
  }
  GeneratedImage image;
  image.bytes = std::move(res.body);
  image.metadata["content_type"] = "image/png";
  for (const auto& [key, value] : res.headers) {
    if (key.size() > 2 && (key[0] == 'X' || key[0] == 'x') && key[1] == '-') {
      image.metadata[key] = value;
    }
  }
  return image;
}

std::string understand_image(const MediaEndpointConfig& endpoint,
                             const ImageUnderstandRequest& req) {
  if (req.image_url.empty()) fail(ErrorCode::MissingImageRef, "no image reference");
  const auto res = post_media(endpoint, image_understand_request_body(req));
  return text_field(res.body, endpoint.url);
}

AudioPayload normalize_audio(const AudioPayload& payload) {
  if (payload.raw.empty()) fail(ErrorCode::EmptyAudio, "no samples");
  double peak = 0.0;
  for (double s : payload.raw) {
    if (!std::isfinite(s)) fail(ErrorCode::InvalidArgument, "non-finite sample");
    peak = std::max(peak, std::abs(s));
  }
  if (peak == 0.0) fail(ErrorCode::SilentAudio, "all samples are zero");
  AudioPayload out;
  out.sampling_rate = payload.sampling_rate;
  out.raw.reserve(payload.raw.size());
  // Division (not multiplication by 1/peak) makes the peak sample exactly 1.
  for (double s : payload.raw) out.raw.push_back(s / peak);
  return out;
}

Transcript transcribe(const MediaEndpointConfig& endpoint, const AudioPayload& payload) {
  if (payload.sampling_rate <= 0) fail(ErrorCode::InvalidArgument, "sampling_rate must be positive");
  const auto res = post_media(endpoint, asr_request_body(payload));
  return {text_field(res.body, endpoint.url)};
}

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

namespace {

std::uint32_t le32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

void put_le(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

AudioPayload parse_wav_pcm16(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    fail(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");
  }
  AudioPayload out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const auto size = le32(b, pos + 4);
    const auto body = pos + 8;
    if (size > b.size() - body) fail(ErrorCode::UnsupportedFormat, "truncated WAV chunk");
    if (id == "fmt ") {
      if (size < 16) fail(ErrorCode::UnsupportedFormat, "short fmt chunk");
      const auto format = le16(b, body);
      const auto channels = le16(b, body + 2);
      const auto bits = le16(b, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        fail(ErrorCode::UnsupportedFormat, "only mono 16-bit PCM WAV is supported");
      }
      out.sampling_rate = static_cast<int>(le32(b, body + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) fail(ErrorCode::UnsupportedFormat, "data chunk before fmt chunk");
      out.raw.reserve(size / 2);
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        const auto sample = static_cast<std::int16_t>(le16(b, body + i));
        out.raw.push_back(static_cast<double>(sample) / 32768.0);
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  fail(ErrorCode::UnsupportedFormat, "WAV file has no data chunk");
}

AudioPayload read_wav_pcm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav_pcm16(bytes);
}

std::string encode_wav_pcm16(const AudioPayload& payload) {
  const auto data_bytes = static_cast<std::uint32_t>(payload.raw.size() * 2);
  std::string out = "RIFF";
  put_le(out, 36 + data_bytes, 4);
  out += "WAVEfmt ";
  put_le(out, 16, 4);
  put_le(out, 1, 2);  // PCM
  put_le(out, 1, 2);  // mono
  put_le(out, static_cast<std::uint32_t>(payload.sampling_rate), 4);
  put_le(out, static_cast<std::uint32_t>(payload.sampling_rate) * 2, 4);
  put_le(out, 2, 2);
  put_le(out, 16, 2);
  out += "data";
  put_le(out, data_bytes, 4);
  for (double s : payload.raw) {
    const auto clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32768.0));
    put_le(out, static_cast<std::uint16_t>(v), 2);
  }
  return out;
}

}  // namespace ragkit
