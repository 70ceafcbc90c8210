// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/error.hpp"

namespace ragkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::EmptyInput: return "EmptyInputText";
    case ErrorCode::NoTokens: return "NoTokens";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::SourceUnavailable: return "SourceUnavailable";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::ProviderUnreachable: return "ProviderUnreachable";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::FetchError: return "FetchError";
    case ErrorCode::BodyTooLarge: return "BodyTooLarge";
    case ErrorCode::NotHtmlText: return "NotHtmlText";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::EmptyPrompt: return "EmptyPrompt";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::NotPng: return "NotPng";
    case ErrorCode::MissingImageRef: return "MissingImageRef";
    case ErrorCode::SilentAudio: return "SilentAudio";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, int status)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      status_(status) {}

void fail(ErrorCode code, std::string message, int status) {
  throw Error(code, std::move(message), status);
}

}  // namespace ragkit
