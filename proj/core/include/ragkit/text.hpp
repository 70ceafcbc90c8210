// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

bool is_valid_utf8(std::string_view bytes) noexcept;

// Byte offset of every code point, plus a trailing entry equal to
// bytes.size(). Invalid sequences count one code point per byte.
std::vector<std::size_t> codepoint_offsets(std::string_view bytes);

std::size_t codepoint_count(std::string_view bytes) noexcept;

std::string to_lower_ascii(std::string_view s);

std::string trim(std::string_view s);

bool ends_with_icase(std::string_view s, std::string_view suffix) noexcept;

// Lowercase hex of the top 32 bits of fnv1a64: the first 8 hex digits.
std::string fnv_hex8(std::string_view bytes);

}  // namespace ragkit
