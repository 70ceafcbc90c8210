// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragkit {

enum class ErrorCode {
  InvalidArgument,
  Io,
  UnsupportedFormat,
  InvalidEncoding,
  EmptyInput,
  NoTokens,
  ZeroVector,
  DimMismatch,
  InvalidLambda,
  CorruptStore,
  SourceUnavailable,
  BudgetTooSmall,
  ProviderUnreachable,
  ProviderError,
  Timeout,
  ProtocolError,
  PortInUse,
  FetchError,
  BodyTooLarge,
  NotHtmlText,
  EmptyText,
  EmptyPrompt,
  EndpointError,
  NotPng,
  MissingImageRef,
  SilentAudio,
  EmptyAudio,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `status()` carries the HTTP status of
/// a failed downstream call when there was one, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, int status = 0);

  ErrorCode code() const noexcept { return code_; }
  int status() const noexcept { return status_; }

 private:
  ErrorCode code_;
  int status_;
};

[[noreturn]] void fail(ErrorCode code, std::string message, int status = 0);

}  // namespace ragkit
