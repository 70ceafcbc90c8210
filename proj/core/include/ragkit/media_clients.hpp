// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

/// Sampling parameters forwarded to the diffusion server. The defaults are
/// the distilled 4-step, guidance-free configuration.
struct ImageGenParams {
  int num_inference_steps = 4;
  double guidance_scale = 0.0;
  int width = 1024;
  int height = 1024;
  std::optional<std::int64_t> seed;

  void validate() const;
};

struct GeneratedImage {
  std::string bytes;  // PNG
  std::map<std::string, std::string> metadata;
};

struct ImageUnderstandRequest {
  std::string prompt;
  std::string image_url;
};

struct AudioPayload {
  int sampling_rate = 16000;
  std::vector<double> raw;
};

struct Transcript {
  std::string text;
};

struct MediaEndpointConfig {
  std::string url;
  int timeout_ms = 120000;
};

inline constexpr std::string_view kPngSignature = "\x89PNG\r\n\x1a\n";

/// Exact request bodies; stable key order so they can be byte-compared.
std::string image_gen_request_body(std::string_view prompt, const ImageGenParams& params);
std::string image_understand_request_body(const ImageUnderstandRequest& req);
std::string asr_request_body(const AudioPayload& payload);

/// Throws EmptyPrompt, EndpointError, NotPng.
GeneratedImage generate_image(const MediaEndpointConfig& endpoint, std::string_view prompt,
                              const ImageGenParams& params = {});

/// Throws MissingImageRef, EndpointError.
std::string understand_image(const MediaEndpointConfig& endpoint,
                             const ImageUnderstandRequest& req);

/// Scales samples so the peak magnitude is exactly 1.0. Throws EmptyAudio
/// or SilentAudio.
AudioPayload normalize_audio(const AudioPayload& payload);

/// Throws EndpointError (status or "timeout").
Transcript transcribe(const MediaEndpointConfig& endpoint, const AudioPayload& payload);

/// Mono 16-bit PCM WAV to samples in [-1, 1]. Throws UnsupportedFormat or Io.
AudioPayload read_wav_pcm16(const std::filesystem::path& path);
AudioPayload parse_wav_pcm16(std::string_view bytes);

/// Inverse of parse_wav_pcm16, used for fixtures.
std::string encode_wav_pcm16(const AudioPayload& payload);

}  // namespace ragkit
