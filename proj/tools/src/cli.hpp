// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ragkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct Io {
  std::ostream& out;
  std::ostream& err;
  std::istream& in;
  // Long-running commands return once this becomes true.
  const std::atomic<bool>* stop = nullptr;
  // Called with the bound port by serve and mock-serve.
  std::function<void(int)> on_listening;
};

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, Io io);

}  // namespace ragkit::cli
